// SPDX-License-Identifier: MIT
//! Interactive confounder selection over acyclic directed mixed graphs.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: the mixed-graph type, its text format and latent projection;
//! - [`separation`]: the four path-connection relations and their alternative forms;
//! - [`adjustment`]: adjustment, sufficiency and primary-set predicates with brute-force
//!   enumerators used as ground truth;
//! - [`oracle`]: the three elicitation questions and their answer sources;
//! - [`expansion`]: the working-state search that discovers sufficient adjustment sets by
//!   asking those questions;
//! - [`session`]: events, transcripts, replay and live sessions;
//! - `random` (default feature): seeded random graphs for tests and benchmarks.

pub mod adjustment;
pub mod expansion;
pub mod graph;
pub mod oracle;
#[cfg(feature = "random")]
pub mod random;
pub mod separation;
pub mod session;

pub use adjustment::{AdjustmentError, VertexSetFamily};
pub use expansion::{
    confounder_select, confounder_select_observed, confounder_select_recursive, find_primary,
    min_cut_index, pair, select_edge, CauseBranching, ExpansionConfig, ExpansionError,
    ExpansionResult, MinCut, Pair, PrimaryOptions, PrimarySets, Strategy, WorkingState,
};
pub use graph::{format_set, vset, Admg, GraphError, ParseError, VertexSet};
pub use oracle::{Answer, GraphOracle, Oracle, OracleError, PromptOracle, Query, ReplayOracle};
pub use separation::{connected, ConnectionKind, GraphPath, SeparationError};
pub use session::{
    record, replay, EventPayload, FinishStatus, ReplayReport, SessionEvent, SessionManager,
    Transcript, TranscriptError, TranscriptHeader,
};
