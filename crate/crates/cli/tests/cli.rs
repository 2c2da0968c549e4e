// SPDX-License-Identifier: MIT
//! The `confsel` binary, run as a subprocess.

mod common;

use std::io::Write;
use std::process::{Command, Output, Stdio};

use common::graph_path;
use confsel::session::EventPayload;
use confsel::{Answer, Transcript};

fn confsel(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_confsel"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn path(name: &str) -> String {
    graph_path(name).display().to_string()
}

#[test]
fn enumerate_and_expand_agree_on_butterfly() {
    let g = path("butterfly.g");
    let listed = confsel(&["enumerate", &g, "--x", "X", "--y", "Y"], "");
    assert_eq!(listed.status.code(), Some(0));
    assert_eq!(text(&listed.stdout), "{B,C}\n{B,D}\n");
    let expanded = confsel(
        &["expand", &g, "--x", "X", "--y", "Y", "--minimal-only"],
        "",
    );
    assert_eq!(expanded.status.code(), Some(0));
    assert_eq!(text(&expanded.stdout), "{B,C}\n{B,D}\n");
    assert!(text(&expanded.stderr).starts_with("discovered "));
}

#[test]
fn check_reports_verdict_through_exit_code() {
    let g = path("butterfly.g");
    let good = confsel(
        &["check", &g, "--x", "X", "--y", "Y", "--adjust", "B,C"],
        "",
    );
    assert_eq!(good.status.code(), Some(0));
    assert!(text(&good.stdout).contains("sufficient: yes"));
    let bad = confsel(&["check", &g, "--x", "X", "--y", "Y", "--adjust", "B"], "");
    assert_eq!(bad.status.code(), Some(3));
    assert!(text(&bad.stdout).contains("{B} is not sufficient"));
    let empty = confsel(&["check", &g, "--x", "X", "--y", "Y", "--adjust", ""], "");
    assert_eq!(empty.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_with_two() {
    let g = path("butterfly.g");
    for args in [
        vec!["check", &g, "--x", "X", "--y", "Y", "--adjust", "Q"],
        vec!["check", &g, "--x", "X", "--y", "Y", "--adjust", "X"],
        vec!["enumerate", &g, "--x", "X", "--y", "Nope"],
        vec!["enumerate", &g, "--x", "X", "--y", "X"],
        vec!["expand", &g, "--x", "X", "--y", "Y", "--strategy", "random"],
        vec!["frobnicate"],
    ] {
        let out = confsel(&args, "");
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            text(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
    let help = confsel(&["--help"], "");
    assert_eq!(help.status.code(), Some(0));
    assert!(text(&help.stdout).contains("enumerate"));
}

#[test]
fn graph_errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.g");
    std::fs::write(&bad, "vertex X\nvertex Y\nX -> Z\n").unwrap();
    let out = confsel(
        &["enumerate", bad.to_str().unwrap(), "--x", "X", "--y", "Y"],
        "",
    );
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("bad.g:3:"), "{err}");

    let missing = confsel(
        &["enumerate", "/nonexistent/graph.g", "--x", "X", "--y", "Y"],
        "",
    );
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn traced_expansion_replays_and_mutation_diverges() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("shrier.ndjson");
    let trace_arg = trace.to_str().unwrap();
    let out = confsel(
        &[
            "expand",
            &path("shrier.g"),
            "--x",
            "X",
            "--y",
            "Y",
            "--trace",
            trace_arg,
        ],
        "",
    );
    assert_eq!(out.status.code(), Some(0));

    let replayed = confsel(&["replay", trace_arg], "");
    assert_eq!(
        replayed.status.code(),
        Some(0),
        "{}",
        text(&replayed.stderr)
    );
    assert!(text(&replayed.stdout).starts_with("fixpoint:"));

    // Flip the first observedness answer: the replay asks different questions.
    let mut transcript = Transcript::decode(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    let flipped = transcript
        .events
        .iter_mut()
        .find_map(|e| match &mut e.payload {
            EventPayload::AnswerReceived {
                answer: Answer::IsObserved { observed },
                ..
            } => {
                *observed = !*observed;
                Some(())
            }
            _ => None,
        })
        .is_some();
    assert!(flipped);
    let mutated = dir.path().join("mutated.ndjson");
    std::fs::write(&mutated, transcript.encode()).unwrap();
    let diverged = confsel(&["replay", mutated.to_str().unwrap()], "");
    assert_eq!(
        diverged.status.code(),
        Some(4),
        "{}",
        text(&diverged.stderr)
    );
    assert!(text(&diverged.stderr).contains("diverged"));

    std::fs::write(&mutated, "{\"schema_version\":1}\n").unwrap();
    let broken = confsel(&["replay", mutated.to_str().unwrap()], "");
    assert_eq!(broken.status.code(), Some(1));
}

#[test]
fn terminal_session_finds_butterfly_sets_and_saves_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("session.ndjson");
    // Name B, then C, as observed confounders and deny everything else.
    let script = "B\nyes\nnone\nC\nyes\nnone\nnone\nnone\nnone\nnone\nnone\nnone\nnone\nnone\nnone\nnone\nnone\n";
    let out = confsel(
        &[
            "session",
            "--x",
            "X",
            "--y",
            "Y",
            "--transcript",
            saved.to_str().unwrap(),
        ],
        script,
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(
        stdout.contains("Is there a common cause C of X and Y"),
        "{stdout}"
    );
    assert!(
        stdout.ends_with("Minimal sufficient adjustment sets:\n{B,C}\n"),
        "{stdout}"
    );
    let transcript = Transcript::decode(&std::fs::read_to_string(&saved).unwrap()).unwrap();
    assert_eq!(
        transcript.finish_status(),
        Some(confsel::FinishStatus::Completed)
    );
    let replayed = confsel(&["replay", saved.to_str().unwrap()], "");
    assert_eq!(
        replayed.status.code(),
        Some(0),
        "{}",
        text(&replayed.stderr)
    );
}

#[test]
fn terminal_session_closed_early_saves_aborted_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("session.ndjson");
    let out = confsel(
        &[
            "session",
            "--x",
            "X",
            "--y",
            "Y",
            "--transcript",
            saved.to_str().unwrap(),
        ],
        "B\n",
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("aborted"));
    let transcript = Transcript::decode(&std::fs::read_to_string(&saved).unwrap()).unwrap();
    assert_eq!(
        transcript.finish_status(),
        Some(confsel::FinishStatus::Aborted)
    );
}

#[test]
fn in_process_runner_matches_binary() {
    let g = path("butterfly.g");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = confsel_cli::run(
        ["confsel", "enumerate", g.as_str(), "--x", "X", "--y", "Y"],
        &mut std::io::empty(),
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    assert_eq!(text(&out), "{B,C}\n{B,D}\n");
}
