// SPDX-License-Identifier: MIT
//! Seeded random mixed graphs for property tests, acceptance runs and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Admg;

/// Shape of generated graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomAdmgConfig {
    pub min_vertices: usize,
    pub max_vertices: usize,
    /// Probability of `a -> b` for each pair in a hidden topological order.
    pub directed_p: f64,
    /// Probability of `a <-> b` for each unordered pair.
    pub bidirected_p: f64,
    /// Upper bound on the number of latent vertices.
    pub max_latents: usize,
}

impl Default for RandomAdmgConfig {
    fn default() -> Self {
        RandomAdmgConfig {
            min_vertices: 3,
            max_vertices: 7,
            directed_p: 0.35,
            bidirected_p: 0.15,
            max_latents: 0,
        }
    }
}

/// Draws one graph. Vertices are named `A`, `B`, ... in a random topological order;
/// latent vertices are chosen uniformly among them.
pub fn random_admg<R: Rng + ?Sized>(rng: &mut R, config: &RandomAdmgConfig) -> Admg {
    assert!(
        (1..=26).contains(&config.max_vertices) && config.min_vertices <= config.max_vertices,
        "vertex bounds must lie within 1..=26"
    );
    let n = rng.gen_range(config.min_vertices.max(1)..=config.max_vertices);
    let mut names: Vec<String> = (0..n)
        .map(|i| ((b'A' + i as u8) as char).to_string())
        .collect();
    let latents = rng.gen_range(0..=config.max_latents.min(n.saturating_sub(2)));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let latent: Vec<bool> = (0..n).map(|i| order[..latents].contains(&i)).collect();

    let mut g = Admg::new();
    for (i, name) in names.iter().enumerate() {
        g.add_vertex(name, !latent[i])
            .expect("fresh single-letter names");
    }
    names.shuffle(rng);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(config.directed_p) {
                g.add_directed(&names[i], &names[j])
                    .expect("edges follow the topological order");
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(config.bidirected_p) {
                g.add_bidirected(&names[i], &names[j])
                    .expect("each pair is visited once");
            }
        }
    }
    g
}

/// `count` graphs from a fixed seed.
pub fn corpus(seed: u64, count: usize, config: &RandomAdmgConfig) -> Vec<Admg> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_admg(&mut rng, config)).collect()
}
