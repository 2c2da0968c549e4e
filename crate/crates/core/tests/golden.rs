// SPDX-License-Identifier: MIT
//! Published values for the shipped example graphs.

use std::path::PathBuf;

use confsel::adjustment::{enumerate_minimal_sufficient, is_adjustment_set, is_sufficient};
use confsel::expansion::{find_primary, PrimaryOptions};
use confsel::{
    confounder_select, confounder_select_recursive, vset, Admg, ExpansionConfig, GraphOracle,
    MinCut, Strategy, VertexSet, VertexSetFamily,
};

fn graph(name: &str) -> Admg {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../graphs")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Admg::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn family(sets: &[&[&str]]) -> VertexSetFamily {
    VertexSetFamily::from_sets(sets.iter().map(|s| vset(s.iter().copied())))
}

fn expand(g: &Admg, config: &ExpansionConfig) -> confsel::ExpansionResult {
    confounder_select(&mut GraphOracle::new(g), "X", "Y", config).expect("expansion runs")
}

const SHRIER_MINIMAL: &[&[&str]] = &[
    &["E", "F"],
    &["T", "F"],
    &["O", "G"],
    &["O", "F"],
    &["D", "N"],
    &["N", "W"],
    &["G", "T"],
];

#[test]
fn butterfly_has_two_minimal_sets() {
    let g = graph("butterfly.g");
    let expected = family(&[&["B", "C"], &["B", "D"]]);
    let result = expand(&g, &ExpansionConfig::default());
    assert_eq!(result.minimal_sets(), expected);
    assert!(result.exhausted);
    assert_eq!(
        enumerate_minimal_sufficient(&g, "X", "Y", true).unwrap(),
        expected
    );
}

#[test]
fn butterfly_first_primary_set_is_the_collider() {
    let g = graph("butterfly.g");
    let found = find_primary(
        &mut GraphOracle::new(&g).with_endpoints("X", "Y"),
        "X",
        "Y",
        &VertexSet::new(),
        PrimaryOptions {
            minimal_only: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(found.family(), family(&[&["B"]]));
}

#[test]
fn shrier_enumeration_gives_seven_minimal_sets() {
    let g = graph("shrier.g");
    assert_eq!(
        enumerate_minimal_sufficient(&g, "X", "Y", true).unwrap(),
        family(SHRIER_MINIMAL)
    );
}

#[test]
fn shrier_expansion_gives_seven_minimal_sets_in_published_order() {
    let g = graph("shrier.g");
    let result = expand(&g, &ExpansionConfig::default());
    assert_eq!(result.minimal_sets(), family(SHRIER_MINIMAL));
    assert_eq!(result.discovered[0], vset(["E", "F"]));
    assert_eq!(result.discovered[1], vset(["F", "T"]));
}

#[test]
fn shrier_primary_sets_for_treatment_and_outcome() {
    let g = graph("shrier.g");
    let found = find_primary(
        &mut GraphOracle::new(&g).with_endpoints("X", "Y"),
        "X",
        "Y",
        &VertexSet::new(),
        PrimaryOptions {
            minimal_only: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(
        found.family(),
        family(&[
            &["F"],
            &["T", "G"],
            &["N", "G"],
            &["O", "G"],
            &["N", "D"],
            &["N", "W"],
            &["N", "E"]
        ])
    );
}

#[test]
fn shrier_primary_set_for_second_step() {
    let g = graph("shrier.g");
    let found = find_primary(
        &mut GraphOracle::new(&g).with_endpoints("X", "Y"),
        "F",
        "Y",
        &vset(["X"]),
        PrimaryOptions {
            minimal_only: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(found.family().contains(&vset(["E"])), "{}", found.family());
}

#[test]
fn worked_trace_sets_and_mincut_sequence() {
    let g = graph("worked_trace.g");
    let result = expand(&g, &ExpansionConfig::default());
    assert_eq!(
        result.sufficient_sets,
        family(&[&["B", "C", "D"], &["B", "D"]])
    );
    assert_eq!(result.minimal_sets(), family(&[&["B", "D"]]));
    let expected: Vec<MinCut> = [1, 2, 2, 2, 1, 0, 2, 2, 2, 1, 0, 3, 2, 1, 0]
        .into_iter()
        .map(MinCut::Finite)
        .chain([MinCut::Infinite, MinCut::Infinite])
        .collect();
    assert_eq!(result.mincut_sequence(), expected);
}

#[test]
fn worked_trace_single_vertex_is_not_sufficient() {
    let g = graph("worked_trace.g");
    let b = vset(["B"]);
    assert!(is_adjustment_set(&g, "X", "Y", &b).unwrap());
    assert!(!is_sufficient(&g, "X", "Y", &b).unwrap());
    assert!(is_sufficient(&g, "X", "Y", &vset(["B", "D"])).unwrap());
}

#[test]
fn queue_and_recursive_variants_agree_on_golden_graphs() {
    // Resolving the first uncertain pair on the injury graph needs about 30k states, so
    // that combination is left to the release-mode benchmark.
    let cases = [
        ("butterfly.g", Strategy::MinCutClosestToY),
        ("butterfly.g", Strategy::FirstUncertain),
        ("shrier.g", Strategy::MinCutClosestToY),
        ("worked_trace.g", Strategy::MinCutClosestToY),
        ("worked_trace.g", Strategy::FirstUncertain),
    ];
    for (name, strategy) in cases {
        let g = graph(name);
        let config = ExpansionConfig {
            strategy,
            ..Default::default()
        };
        let queue = expand(&g, &config);
        let rec =
            confounder_select_recursive(&mut GraphOracle::new(&g), "X", "Y", &config).unwrap();
        assert!(queue.exhausted && rec.exhausted, "{name} {strategy:?}");
        assert_eq!(
            queue.sufficient_sets, rec.sufficient_sets,
            "{name} {strategy:?}"
        );
    }
}

#[test]
fn projection_chains_match_published_graphs() {
    let g = graph("latent_projection_g.g");
    let g1 = graph("latent_projection_g1.g");
    let g2 = graph("latent_projection_g2.g");
    let without_e: VertexSet = vset(["A", "B", "C", "D", "F"]);
    let without_ef: VertexSet = vset(["A", "B", "C", "D"]);
    assert_eq!(g.marginalize(&without_e).unwrap().to_text(), g1.to_text());
    assert_eq!(g.marginalize(&without_ef).unwrap().to_text(), g2.to_text());
    assert_eq!(g1.marginalize(&without_ef).unwrap().to_text(), g2.to_text());

    let f = graph("latent_projection_f.g");
    let f1 = graph("latent_projection_f1.g");
    assert_eq!(
        f.marginalize(&vset(["A", "B", "C", "D"]))
            .unwrap()
            .to_text(),
        f1.to_text()
    );
}
