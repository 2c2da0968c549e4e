// SPDX-License-Identifier: MIT
//! Argument parsing and the subcommands.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use confsel::adjustment::{
    enumerate_all_sufficient, enumerate_minimal_sufficient, is_adjustment_set, is_sufficient,
    pearl_backdoor,
};
use confsel::expansion::confounder_select_observed;
use confsel::graph::is_identifier;
use confsel::session::{
    replay, EventPayload, FinishStatus, SessionEvent, SessionManager, TranscriptHeader,
};
use confsel::{
    confounder_select, format_set, Admg, ExpansionConfig, ExpansionError, GraphOracle, OracleError,
    PromptOracle, Strategy, Transcript, VertexSet, VertexSetFamily,
};

use crate::error::CliError;
use crate::exit;
use crate::server;

#[derive(Debug, Parser)]
#[command(
    name = "confsel",
    version,
    about = "Interactive confounder selection over mixed graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether a set is a valid and sufficient adjustment set.
    Check {
        graph: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        /// Comma-separated adjustment set; may be empty.
        #[arg(long, value_name = "A,B,...", allow_hyphen_values = false)]
        adjust: String,
    },
    /// List minimal sufficient adjustment sets over observed vertices.
    Enumerate {
        graph: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        /// List every sufficient set, not just the minimal ones.
        #[arg(long)]
        all: bool,
    },
    /// Run the expansion with answers taken from a known graph.
    Expand {
        graph: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        engine: EngineArgs,
        /// Write the run's transcript to this path.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Answer the expansion's questions yourself, in the terminal or over HTTP.
    Session {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        engine: EngineArgs,
        /// Serve the session API on this address instead of prompting.
        #[arg(long, value_name = "ADDR")]
        serve: Option<String>,
        /// Save the session transcript to this path.
        #[arg(long, value_name = "PATH")]
        transcript: Option<PathBuf>,
    },
    /// Re-run a transcript against its own answers and check it reproduces itself.
    Replay { transcript: PathBuf },
}

#[derive(Debug, Args)]
struct PairArgs {
    /// Treatment vertex.
    #[arg(long, value_name = "V")]
    x: String,
    /// Outcome vertex.
    #[arg(long, value_name = "V")]
    y: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    /// An edge on a minimum cut, closest to the outcome.
    MinCut,
    /// The first undecided pair.
    First,
}

#[derive(Debug, Args)]
struct EngineArgs {
    /// Trim each primary set found to a minimal one.
    #[arg(long)]
    minimal_only: bool,
    #[arg(long, value_enum, default_value = "min-cut")]
    strategy: StrategyArg,
    /// Stop after popping this many working states.
    #[arg(long, value_name = "N", default_value_t = ExpansionConfig::default().max_states)]
    max_states: usize,
}

impl EngineArgs {
    fn config(&self) -> Result<ExpansionConfig, CliError> {
        if self.max_states == 0 {
            return Err(CliError::Usage("--max-states must be positive".into()));
        }
        Ok(ExpansionConfig {
            minimal_only: self.minimal_only,
            strategy: match self.strategy {
                StrategyArg::MinCut => Strategy::MinCutClosestToY,
                StrategyArg::First => Strategy::FirstUncertain,
            },
            max_states: self.max_states,
            ..ExpansionConfig::default()
        })
    }
}

/// Parses `args` (including the program name), runs the subcommand and returns the exit
/// code. Diagnostics go to `stderr`.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::SUCCESS
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "confsel: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(
    command: Command,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    match command {
        Command::Check {
            graph,
            pair,
            adjust,
        } => check(&graph, &pair, &adjust, stdout),
        Command::Enumerate { graph, pair, all } => enumerate(&graph, &pair, all, stdout),
        Command::Expand {
            graph,
            pair,
            engine,
            trace,
        } => expand(&graph, &pair, &engine, trace.as_deref(), stdout, stderr),
        Command::Session {
            pair,
            engine,
            serve,
            transcript,
        } => match serve {
            Some(addr) => serve_session(&pair, &engine, &addr, transcript, stdout),
            None => prompt_session(&pair, &engine, transcript.as_deref(), stdin, stdout),
        },
        Command::Replay { transcript } => replay_transcript(&transcript, stdout, stderr),
    }
}

fn load_graph(path: &Path) -> Result<Admg, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Admg::parse(&text).map_err(|source| CliError::Graph {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Checks `--x`/`--y` against the identifier rules and, when a graph is given, its
/// declared vertices.
fn check_pair(pair: &PairArgs, graph: Option<&Admg>) -> Result<(), CliError> {
    for (flag, v) in [("--x", &pair.x), ("--y", &pair.y)] {
        if !is_identifier(v) {
            return Err(CliError::Usage(format!(
                "{flag}: `{v}` is not a valid name (letters, digits and `_`, not starting with a digit)"
            )));
        }
        if let Some(g) = graph {
            if !g.contains(v) {
                return Err(CliError::Usage(format!(
                    "{flag}: vertex `{v}` is not declared in the graph"
                )));
            }
        }
    }
    if pair.x == pair.y {
        return Err(CliError::Usage(
            "--x and --y must name different vertices".into(),
        ));
    }
    Ok(())
}

fn parse_set(list: &str, g: &Admg, pair: &PairArgs) -> Result<VertexSet, CliError> {
    let mut out = VertexSet::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if !g.contains(item) {
            return Err(CliError::Usage(format!(
                "--adjust: vertex `{item}` is not declared in the graph"
            )));
        }
        if item == pair.x || item == pair.y {
            return Err(CliError::Usage(format!(
                "--adjust: `{item}` is the treatment or the outcome"
            )));
        }
        out.insert(item.to_string());
    }
    Ok(out)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn check(path: &Path, pair: &PairArgs, adjust: &str, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = load_graph(path)?;
    check_pair(pair, Some(&g))?;
    let s = parse_set(adjust, &g, pair)?;
    let (x, y) = (pair.x.as_str(), pair.y.as_str());
    let adjustment = is_adjustment_set(&g, x, y, &s)?;
    let sufficient = is_sufficient(&g, x, y, &s)?;
    let backdoor = pearl_backdoor(&g, x, y, &s)?;
    writeln!(out, "adjustment set: {}", yes_no(adjustment))?;
    writeln!(out, "sufficient: {}", yes_no(sufficient))?;
    writeln!(out, "back-door: {}", yes_no(backdoor))?;
    let set = format_set(&s);
    if sufficient {
        writeln!(out, "{set} is sufficient")?;
        Ok(exit::SUCCESS)
    } else {
        writeln!(out, "{set} is not sufficient")?;
        Ok(exit::NOT_SUFFICIENT)
    }
}

fn print_family(family: &VertexSetFamily, out: &mut dyn Write) -> Result<(), CliError> {
    for s in family.iter() {
        writeln!(out, "{}", format_set(s))?;
    }
    Ok(())
}

fn enumerate(
    path: &Path,
    pair: &PairArgs,
    all: bool,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_graph(path)?;
    check_pair(pair, Some(&g))?;
    let family = if all {
        enumerate_all_sufficient(&g, &pair.x, &pair.y, true)?
    } else {
        enumerate_minimal_sufficient(&g, &pair.x, &pair.y, true)?
    };
    print_family(&family, out)?;
    Ok(exit::SUCCESS)
}

fn expand(
    path: &Path,
    pair: &PairArgs,
    engine: &EngineArgs,
    trace: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_graph(path)?;
    check_pair(pair, Some(&g))?;
    let config = engine.config()?;
    let result = confounder_select(&mut GraphOracle::new(&g), &pair.x, &pair.y, &config)?;
    print_family(&result.minimal_sets(), out)?;
    let discovered: Vec<String> = result.discovered.iter().map(format_set).collect();
    writeln!(
        err,
        "discovered {} set(s) in {} state(s): {}",
        discovered.len(),
        result.pops,
        discovered.join(" ")
    )?;
    if !result.exhausted {
        writeln!(
            err,
            "warning: state cap reached; the list may be incomplete"
        )?;
    }
    if let Some(trace) = trace {
        let transcript = Transcript::new(
            TranscriptHeader::new(&pair.x, &pair.y, &config),
            result.trace,
        );
        write_file(trace, &transcript.encode())?;
    }
    Ok(exit::SUCCESS)
}

fn prompt_session(
    pair: &PairArgs,
    engine: &EngineArgs,
    transcript: Option<&Path>,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    check_pair(pair, None)?;
    let config = engine.config()?;
    writeln!(
        out,
        "Selecting confounders for the effect of {} on {}. Answer `none` when nothing applies.",
        pair.x, pair.y
    )?;
    let mut events: Vec<SessionEvent> = Vec::new();
    let outcome = {
        let mut oracle = PromptOracle::new(&mut *input, &mut *out);
        let mut collect = |e: &SessionEvent| events.push(e.clone());
        confounder_select_observed(&mut oracle, &pair.x, &pair.y, &config, Some(&mut collect))
    };
    let aborted = match outcome {
        Ok(_) => false,
        Err(ExpansionError::Oracle(OracleError::Aborted)) => {
            events.push(SessionEvent {
                seq: events.len() as u64 + 1,
                payload: EventPayload::Finished {
                    status: FinishStatus::Aborted,
                },
            });
            true
        }
        Err(e) => return Err(e.into()),
    };
    let transcript_doc = Transcript::new(TranscriptHeader::new(&pair.x, &pair.y, &config), events);
    if let Some(path) = transcript {
        write_file(path, &transcript_doc.encode())?;
    }
    if aborted {
        return Err(CliError::Aborted);
    }
    let found = VertexSetFamily::from_sets(transcript_doc.discovered());
    writeln!(out)?;
    if found.is_empty() {
        writeln!(out, "No sufficient adjustment set was found.")?;
    } else {
        writeln!(out, "Minimal sufficient adjustment sets:")?;
        print_family(&found.minimal_members(), out)?;
    }
    Ok(exit::SUCCESS)
}

fn serve_session(
    pair: &PairArgs,
    engine: &EngineArgs,
    addr: &str,
    transcript: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    check_pair(pair, None)?;
    let config = engine.config()?;
    let manager = SessionManager::new();
    let first = manager
        .create(&confsel::session::CreateSession {
            x: pair.x.clone(),
            y: pair.y.clone(),
            config,
        })
        .map_err(|e| CliError::Server(e.to_string()))?;
    let state = server::AppState::new(manager).with_autosave(first.id, transcript);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Server(format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr()?;
        writeln!(
            out,
            "serving sessions on http://{local}/sessions (session {} started)",
            first.id
        )?;
        out.flush()?;
        server::serve(listener, state).await
    })?;
    Ok(exit::SUCCESS)
}

fn replay_transcript(
    path: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let transcript = Transcript::decode(&text).map_err(|source| CliError::Transcript {
        path: path.to_path_buf(),
        source,
    })?;
    let report = match replay(&transcript) {
        Ok(report) => report,
        // A recorded answer the engine rejects is a divergence from a valid run.
        Err(ExpansionError::Oracle(e)) => {
            writeln!(err, "diverged: recorded answer rejected: {e}")?;
            return Ok(exit::DIVERGED);
        }
        Err(e) => return Err(e.into()),
    };
    if report.unused_answers > 0 {
        writeln!(
            err,
            "warning: {} recorded answer(s) were not used",
            report.unused_answers
        )?;
    }
    match report.first_difference {
        None => {
            let sets: Vec<String> = transcript.discovered().iter().map(format_set).collect();
            writeln!(
                out,
                "fixpoint: {} event(s) reproduced; discovered {}",
                report.events.len(),
                if sets.is_empty() {
                    "nothing".to_string()
                } else {
                    sets.join(" ")
                }
            )?;
            Ok(exit::SUCCESS)
        }
        Some(i) => {
            let describe = |e: Option<&SessionEvent>| {
                e.map(|e| serde_json::to_string(e).expect("event serialises"))
                    .unwrap_or_else(|| "end of run".to_string())
            };
            writeln!(err, "diverged at event {i}")?;
            writeln!(err, "  recorded: {}", describe(transcript.events.get(i)))?;
            writeln!(err, "  replayed: {}", describe(report.events.get(i)))?;
            if let Some(q) = &report.diverged_query {
                writeln!(err, "  no recorded answer for: {}", q.prompt())?;
            }
            Ok(exit::DIVERGED)
        }
    }
}
