// SPDX-License-Identifier: MIT
//! Session events, line-delimited JSON transcripts, replay checking and live sessions
//! whose oracle answers arrive one at a time from outside.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adjustment::VertexSetFamily;
use crate::expansion::{
    confounder_select_observed, ExpansionConfig, ExpansionError, ExpansionResult, MinCut, Pair,
    WorkingState,
};
use crate::graph::{is_identifier, VertexSet};
use crate::oracle::{
    validate_answer, Answer, Oracle, OracleError, Query, ReplayOracle, DEFAULT_VERTEX_BUDGET,
};

/// Version of the transcript line format.
pub const SCHEMA_VERSION: u32 = 1;

/// Name and version written into transcript headers.
pub const ENGINE: &str = concat!("confsel ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishStatus {
    Completed,
    /// A state or vertex cap stopped the search before the queue emptied.
    Capped,
    Aborted,
}

/// What happened at one step of an expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "payload",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum EventPayload {
    StatePopped { state: WorkingState, mincut: MinCut },
    EdgeSelected { pair: Pair },
    QueryIssued { id: u64, query: Query },
    AnswerReceived { id: u64, answer: Answer },
    StatePushed { state: WorkingState, mincut: MinCut },
    SetEmitted { set: VertexSet },
    Finished { status: FinishStatus },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::StatePopped { .. } => "state_popped",
            EventPayload::EdgeSelected { .. } => "edge_selected",
            EventPayload::QueryIssued { .. } => "query_issued",
            EventPayload::AnswerReceived { .. } => "answer_received",
            EventPayload::StatePushed { .. } => "state_pushed",
            EventPayload::SetEmitted { .. } => "set_emitted",
            EventPayload::Finished { .. } => "finished",
        }
    }
}

/// One numbered event; on the wire `{"seq": n, "kind": ..., "payload": {...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    #[serde(flatten)]
    pub payload: EventPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptHeader {
    pub schema_version: u32,
    pub engine: String,
    pub x: String,
    pub y: String,
    pub config: ExpansionConfig,
}

impl TranscriptHeader {
    pub fn new(x: &str, y: &str, config: &ExpansionConfig) -> Self {
        TranscriptHeader {
            schema_version: SCHEMA_VERSION,
            engine: ENGINE.to_string(),
            x: x.to_string(),
            y: y.to_string(),
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("transcript is empty: the first line must be a header")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line} (event {index}): {message}")]
    Event {
        line: usize,
        index: usize,
        message: String,
    },
    #[error("line 1: unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
}

impl TranscriptError {
    /// One-based line of the offending input, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            TranscriptError::Syntax { line, .. } | TranscriptError::Event { line, .. } => {
                Some(*line)
            }
            TranscriptError::SchemaVersion { .. } => Some(1),
            TranscriptError::MissingHeader => None,
        }
    }
}

/// A header followed by the ordered events of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub header: TranscriptHeader,
    pub events: Vec<SessionEvent>,
}

impl Transcript {
    pub fn new(header: TranscriptHeader, events: Vec<SessionEvent>) -> Self {
        Transcript { header, events }
    }

    /// One JSON document per line, header first, with a trailing newline.
    pub fn encode(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serialises");
        out.push('\n');
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serialises"));
            out.push('\n');
        }
        out
    }

    /// Parses and checks a transcript: unknown fields are rejected, sequence numbers must
    /// strictly increase and nothing may follow a `finished` event. Blank lines are skipped.
    pub fn decode(text: &str) -> Result<Self, TranscriptError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, htext) = lines.next().ok_or(TranscriptError::MissingHeader)?;
        let header: TranscriptHeader =
            serde_json::from_str(htext).map_err(|e| TranscriptError::Syntax {
                line: hline + 1,
                message: e.to_string(),
            })?;
        if header.schema_version != SCHEMA_VERSION {
            return Err(TranscriptError::SchemaVersion {
                found: header.schema_version,
            });
        }
        let mut events: Vec<SessionEvent> = Vec::new();
        for (index, (n, l)) in lines.enumerate() {
            let fail = |message: String| TranscriptError::Event {
                line: n + 1,
                index,
                message,
            };
            let event = decode_event(l).map_err(fail)?;
            if let Some(prev) = events.last() {
                if event.seq <= prev.seq {
                    return Err(fail(format!(
                        "sequence number {} does not follow {}",
                        event.seq, prev.seq
                    )));
                }
                if matches!(prev.payload, EventPayload::Finished { .. }) {
                    return Err(fail("event after `finished`".to_string()));
                }
            }
            events.push(event);
        }
        Ok(Transcript { header, events })
    }

    /// Recorded `(query, answer)` pairs, matched by query id, in answer order.
    pub fn answered_queries(&self) -> Vec<(Query, Answer)> {
        let mut open: HashMap<u64, &Query> = HashMap::new();
        let mut out = Vec::new();
        for e in &self.events {
            match &e.payload {
                EventPayload::QueryIssued { id, query } => {
                    open.insert(*id, query);
                }
                EventPayload::AnswerReceived { id, answer } => {
                    if let Some(q) = open.remove(id) {
                        out.push((q.clone(), answer.clone()));
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Sets emitted during the run, in order, without repeats.
    pub fn discovered(&self) -> Vec<VertexSet> {
        let mut out: Vec<VertexSet> = Vec::new();
        for e in &self.events {
            if let EventPayload::SetEmitted { set } = &e.payload {
                if !out.contains(set) {
                    out.push(set.clone());
                }
            }
        }
        out
    }

    pub fn finish_status(&self) -> Option<FinishStatus> {
        match self.events.last().map(|e| &e.payload) {
            Some(EventPayload::Finished { status }) => Some(*status),
            _ => None,
        }
    }
}

/// The wire shape of an event, used so unknown top-level keys are rejected even though
/// the payload is flattened.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    seq: u64,
    kind: String,
    payload: serde_json::Value,
}

fn decode_event(line: &str) -> Result<SessionEvent, String> {
    let raw: RawEvent = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let payload: EventPayload = serde_json::from_value(serde_json::json!({
        "kind": raw.kind,
        "payload": raw.payload,
    }))
    .map_err(|e| e.to_string())?;
    Ok(SessionEvent {
        seq: raw.seq,
        payload,
    })
}

/// Runs an expansion and records it.
pub fn record(
    oracle: &mut dyn Oracle,
    x: &str,
    y: &str,
    config: &ExpansionConfig,
) -> Result<(ExpansionResult, Transcript), ExpansionError> {
    let result = crate::expansion::confounder_select(oracle, x, y, config)?;
    let transcript = Transcript::new(TranscriptHeader::new(x, y, config), result.trace.clone());
    Ok((result, transcript))
}

/// The outcome of re-running a transcript against its own recorded answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    /// Events produced by the re-run.
    pub events: Vec<SessionEvent>,
    /// Index of the first event that differs from the recording, if any.
    pub first_difference: Option<usize>,
    /// Recorded answers the re-run never asked for.
    pub unused_answers: usize,
    /// The re-run needed an answer the transcript does not contain.
    pub diverged_query: Option<Query>,
}

impl ReplayReport {
    /// The re-run reproduced the recording event for event.
    pub fn is_fixpoint(&self) -> bool {
        self.first_difference.is_none()
    }
}

/// Re-runs the expansion described by a transcript header, answering from its recorded
/// answers, and compares the resulting events with the recorded ones.
///
/// A query with no recorded answer ends the re-run with a `finished: aborted` event, which
/// matches a recording of a session that was abandoned at that query.
pub fn replay(transcript: &Transcript) -> Result<ReplayReport, ExpansionError> {
    let h = &transcript.header;
    let mut oracle = ReplayOracle::new(transcript.answered_queries());
    let mut events: Vec<SessionEvent> = Vec::new();
    let mut collect = |e: &SessionEvent| events.push(e.clone());
    let outcome =
        confounder_select_observed(&mut oracle, &h.x, &h.y, &h.config, Some(&mut collect));
    let diverged_query = match outcome {
        Ok(_) => None,
        Err(ExpansionError::Oracle(OracleError::Divergence(q))) => Some(*q),
        Err(e) => return Err(e),
    };
    if diverged_query.is_some() {
        events.push(SessionEvent {
            seq: events.len() as u64 + 1,
            payload: EventPayload::Finished {
                status: FinishStatus::Aborted,
            },
        });
    }
    let first_difference = (0..events.len().max(transcript.events.len()))
        .find(|&i| events.get(i) != transcript.events.get(i));
    Ok(ReplayReport {
        events,
        first_difference,
        unused_answers: oracle.unused(),
        diverged_query,
    })
}

// ---------------------------------------------------------------------------
// Live sessions
// ---------------------------------------------------------------------------

/// How long a request waits for the engine to reach its next query.
const ENGINE_STEP_TIMEOUT: Duration = Duration::from_secs(60);

pub type SessionId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("no session with id {0}")]
    NotFound(SessionId),
    #[error("{0}")]
    Conflict(String),
    #[error(transparent)]
    Validation(#[from] OracleError),
    #[error("engine did not reach its next query in time")]
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Running,
    AwaitingAnswer,
    Completed,
    Capped,
    Aborted,
    Failed,
}

impl SessionStatus {
    pub fn is_terminal(self) -> bool {
        !matches!(self, SessionStatus::Running | SessionStatus::AwaitingAnswer)
    }
}

/// Request body for starting a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub x: String,
    pub y: String,
    #[serde(default)]
    pub config: ExpansionConfig,
}

/// Request body for answering the pending query: either a structured `answer` or a
/// free-text `reply` in the same form the terminal prompt accepts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub query_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingQuery {
    pub id: u64,
    pub query: Query,
    pub prompt: String,
}

/// The working state the engine is currently resolving.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateView {
    pub state: WorkingState,
    pub mincut: MinCut,
    pub uncertain: Vec<Pair>,
    pub selected: Option<Pair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueSummary {
    pub pushed: usize,
    pub popped: usize,
    pub waiting: usize,
}

/// Everything a client needs to render a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: SessionId,
    pub x: String,
    pub y: String,
    pub status: SessionStatus,
    pub pending: Option<PendingQuery>,
    pub current: Option<StateView>,
    pub queue: QueueSummary,
    pub discovered: Vec<VertexSet>,
    pub minimal_sets: VertexSetFamily,
    pub events: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Shared {
    events: Vec<SessionEvent>,
    pending: Option<(u64, Query)>,
    status: SessionStatus,
    answered: HashMap<u64, Answer>,
    names: BTreeSet<String>,
    error: Option<String>,
}

struct Progress {
    state: Mutex<Shared>,
    changed: Condvar,
}

impl Progress {
    fn lock(&self) -> MutexGuard<'_, Shared> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }
}

/// Hands queries to the outside world through the shared state and blocks for answers.
struct ChannelOracle {
    answers: Receiver<Answer>,
}

impl Oracle for ChannelOracle {
    fn answer(&mut self, _query: &Query) -> Result<Answer, OracleError> {
        // The query itself was published by the event observer before this call.
        self.answers.recv().map_err(|_| OracleError::Aborted)
    }
}

struct LiveSession {
    header: TranscriptHeader,
    progress: Arc<Progress>,
    answers: Option<Sender<Answer>>,
    engine: Option<JoinHandle<()>>,
    budget: usize,
}

impl LiveSession {
    fn start(request: &CreateSession, budget: usize) -> Self {
        let header = TranscriptHeader::new(&request.x, &request.y, &request.config);
        let progress = Arc::new(Progress {
            state: Mutex::new(Shared {
                events: Vec::new(),
                pending: None,
                status: SessionStatus::Running,
                answered: HashMap::new(),
                names: [request.x.clone(), request.y.clone()].into(),
                error: None,
            }),
            changed: Condvar::new(),
        });
        let (tx, rx) = mpsc::channel();
        let shared = Arc::clone(&progress);
        let (x, y, config) = (request.x.clone(), request.y.clone(), request.config.clone());
        let engine = std::thread::spawn(move || {
            let mut oracle = ChannelOracle { answers: rx };
            let observer_shared = Arc::clone(&shared);
            let mut observe = move |e: &SessionEvent| {
                let mut s = observer_shared.lock();
                match &e.payload {
                    EventPayload::QueryIssued { id, query } => {
                        s.pending = Some((*id, query.clone()));
                        s.status = SessionStatus::AwaitingAnswer;
                    }
                    EventPayload::AnswerReceived { .. } => {
                        s.pending = None;
                        s.status = SessionStatus::Running;
                    }
                    _ => {}
                }
                s.events.push(e.clone());
                observer_shared.changed.notify_all();
            };
            let outcome =
                confounder_select_observed(&mut oracle, &x, &y, &config, Some(&mut observe));
            let mut s = shared.lock();
            s.pending = None;
            match outcome {
                Ok(result) => {
                    s.status = if result.exhausted {
                        SessionStatus::Completed
                    } else {
                        SessionStatus::Capped
                    };
                }
                Err(e) => {
                    if e == ExpansionError::Oracle(OracleError::Aborted) {
                        s.status = SessionStatus::Aborted;
                    } else {
                        s.status = SessionStatus::Failed;
                        s.error = Some(e.to_string());
                    }
                    let seq = s.events.len() as u64 + 1;
                    s.events.push(SessionEvent {
                        seq,
                        payload: EventPayload::Finished {
                            status: FinishStatus::Aborted,
                        },
                    });
                }
            }
            shared.changed.notify_all();
        });
        LiveSession {
            header,
            progress,
            answers: Some(tx),
            engine: Some(engine),
            budget,
        }
    }

    /// Blocks until the engine asks a query other than `after` or stops.
    fn wait_for_step(&self, after: Option<u64>) -> Result<(), SessionError> {
        let guard = self.progress.lock();
        let (_guard, timeout) = self
            .progress
            .changed
            .wait_timeout_while(guard, ENGINE_STEP_TIMEOUT, |s| {
                let next_query = matches!(&s.pending, Some((id, _)) if Some(*id) != after);
                !(next_query || s.status.is_terminal())
            })
            .unwrap_or_else(|p| p.into_inner());
        if timeout.timed_out() {
            return Err(SessionError::Timeout);
        }
        Ok(())
    }

    fn snapshot(&self, id: SessionId) -> SessionSnapshot {
        let s = self.progress.lock();
        let mut current: Option<StateView> = None;
        let mut queue = QueueSummary {
            pushed: 0,
            popped: 0,
            waiting: 0,
        };
        let mut discovered: Vec<VertexSet> = Vec::new();
        for e in &s.events {
            match &e.payload {
                EventPayload::StatePushed { .. } => queue.pushed += 1,
                EventPayload::StatePopped { state, mincut } => {
                    queue.popped += 1;
                    current = Some(StateView {
                        uncertain: state.uncertain(&self.header.x, &self.header.y),
                        state: state.clone(),
                        mincut: *mincut,
                        selected: None,
                    });
                }
                EventPayload::EdgeSelected { pair } => {
                    if let Some(view) = current.as_mut() {
                        view.selected = Some(pair.clone());
                    }
                }
                EventPayload::SetEmitted { set } if !discovered.contains(set) => {
                    discovered.push(set.clone());
                }
                _ => {}
            }
        }
        queue.waiting = queue.pushed - queue.popped.min(queue.pushed);
        SessionSnapshot {
            id,
            x: self.header.x.clone(),
            y: self.header.y.clone(),
            status: s.status,
            pending: s.pending.as_ref().map(|(qid, q)| PendingQuery {
                id: *qid,
                query: q.clone(),
                prompt: q.prompt(),
            }),
            current,
            queue,
            minimal_sets: VertexSetFamily::from_sets(discovered.iter().cloned()).minimal_members(),
            discovered,
            events: s.events.len(),
            error: s.error.clone(),
        }
    }

    fn answer(&mut self, request: &AnswerRequest) -> Result<(), SessionError> {
        let mut s = self.progress.lock();
        let (pending_id, query) = match &s.pending {
            Some((pid, q)) if *pid == request.query_id => (*pid, q.clone()),
            _ => {
                // A repeat of an answer already given is acknowledged without effect.
                if let Some(previous) = s.answered.get(&request.query_id) {
                    let same = match (&request.answer, &request.reply) {
                        (Some(a), None) => a == previous,
                        (None, Some(_)) => true,
                        _ => false,
                    };
                    if same {
                        return Ok(());
                    }
                    return Err(SessionError::Conflict(format!(
                        "query {} was already answered differently",
                        request.query_id
                    )));
                }
                return Err(SessionError::Conflict(match &s.pending {
                    Some((pid, _)) => {
                        format!("query {} is not pending; query {pid} is", request.query_id)
                    }
                    None => "no query is pending".to_string(),
                }));
            }
        };
        let answer = match (&request.answer, &request.reply) {
            (Some(a), None) => a.clone(),
            (None, Some(text)) => query.parse_reply(text)?,
            _ => {
                return Err(SessionError::Validation(OracleError::Unparseable(
                    "give exactly one of `answer` or `reply`".to_string(),
                )))
            }
        };
        validate_answer(&query, &answer)?;
        let mut grown = s.names.clone();
        grown.extend(answer.names());
        if grown.len() > self.budget {
            return Err(OracleError::BudgetExceeded { limit: self.budget }.into());
        }
        s.names = grown;
        s.answered.insert(pending_id, answer.clone());
        drop(s);
        let sender = self
            .answers
            .as_ref()
            .ok_or_else(|| SessionError::Conflict("session is closed".to_string()))?;
        sender
            .send(answer)
            .map_err(|_| SessionError::Conflict("session engine has stopped".to_string()))?;
        self.wait_for_step(Some(pending_id))
    }

    fn abort(&mut self) {
        self.answers = None;
        if let Some(engine) = self.engine.take() {
            let _ = engine.join();
        }
    }

    fn transcript(&self) -> Transcript {
        Transcript::new(self.header.clone(), self.progress.lock().events.clone())
    }
}

impl Drop for LiveSession {
    fn drop(&mut self) {
        self.abort();
    }
}

/// Holds live sessions. Requests for one session are serialised; distinct sessions
/// proceed independently.
pub struct SessionManager {
    sessions: Mutex<BTreeMap<SessionId, Arc<Mutex<LiveSession>>>>,
    next_id: AtomicU64,
    budget: usize,
}

impl Default for SessionManager {
    fn default() -> Self {
        Self::new()
    }
}

impl SessionManager {
    pub fn new() -> Self {
        Self::with_budget(DEFAULT_VERTEX_BUDGET)
    }

    /// Limits how many distinct vertex names one session may introduce.
    pub fn with_budget(budget: usize) -> Self {
        SessionManager {
            sessions: Mutex::new(BTreeMap::new()),
            next_id: AtomicU64::new(1),
            budget,
        }
    }

    fn get(&self, id: SessionId) -> Result<Arc<Mutex<LiveSession>>, SessionError> {
        self.sessions
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .get(&id)
            .cloned()
            .ok_or(SessionError::NotFound(id))
    }

    /// Starts a session and runs it to its first query.
    pub fn create(&self, request: &CreateSession) -> Result<SessionSnapshot, SessionError> {
        for v in [&request.x, &request.y] {
            if !is_identifier(v) {
                return Err(OracleError::InvalidName(v.clone()).into());
            }
        }
        if request.x == request.y {
            return Err(SessionError::Conflict(
                "treatment and outcome must differ".to_string(),
            ));
        }
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let live = LiveSession::start(request, self.budget);
        live.wait_for_step(None)?;
        let snapshot = live.snapshot(id);
        self.sessions
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .insert(id, Arc::new(Mutex::new(live)));
        Ok(snapshot)
    }

    pub fn snapshot(&self, id: SessionId) -> Result<SessionSnapshot, SessionError> {
        let live = self.get(id)?;
        let live = live.lock().unwrap_or_else(|p| p.into_inner());
        Ok(live.snapshot(id))
    }

    /// Answers the pending query and runs the engine to its next query or to completion.
    pub fn answer(
        &self,
        id: SessionId,
        request: &AnswerRequest,
    ) -> Result<SessionSnapshot, SessionError> {
        let live = self.get(id)?;
        let mut live = live.lock().unwrap_or_else(|p| p.into_inner());
        live.answer(request)?;
        Ok(live.snapshot(id))
    }

    pub fn transcript(&self, id: SessionId) -> Result<Transcript, SessionError> {
        let live = self.get(id)?;
        let live = live.lock().unwrap_or_else(|p| p.into_inner());
        Ok(live.transcript())
    }

    /// Stops the engine; the session and its transcript stay available.
    pub fn abort(&self, id: SessionId) -> Result<SessionSnapshot, SessionError> {
        let live = self.get(id)?;
        let mut live = live.lock().unwrap_or_else(|p| p.into_inner());
        live.abort();
        Ok(live.snapshot(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vset;

    fn sample() -> Transcript {
        Transcript::new(
            TranscriptHeader::new("X", "Y", &ExpansionConfig::default()),
            vec![
                SessionEvent {
                    seq: 1,
                    payload: EventPayload::QueryIssued {
                        id: 1,
                        query: Query::CommonCause {
                            a: "X".into(),
                            b: "Y".into(),
                            given: vset(["B"]),
                        },
                    },
                },
                SessionEvent {
                    seq: 2,
                    payload: EventPayload::AnswerReceived {
                        id: 1,
                        answer: Answer::CommonCause { cause: None },
                    },
                },
                SessionEvent {
                    seq: 3,
                    payload: EventPayload::Finished {
                        status: FinishStatus::Completed,
                    },
                },
            ],
        )
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let t = sample();
        let text = t.encode();
        let back = Transcript::decode(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.encode(), text);
    }

    #[test]
    fn event_wire_shape() {
        let line = serde_json::to_string(&sample().events[2]).unwrap();
        assert_eq!(
            line,
            r#"{"seq":3,"kind":"finished","payload":{"status":"completed"}}"#
        );
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let mut lines: Vec<String> = sample().encode().lines().map(str::to_string).collect();
        lines[2] = lines[2].replace(r#""answer":{"#, r#""answer":{"extra":1,"#);
        let err = Transcript::decode(&lines.join("\n")).unwrap_err();
        assert_eq!(err.line(), Some(3));

        let mut lines: Vec<String> = sample().encode().lines().map(str::to_string).collect();
        lines[1] = lines[1].replacen('{', r#"{"when":0,"#, 1);
        let err = Transcript::decode(&lines.join("\n")).unwrap_err();
        assert!(
            matches!(
                err,
                TranscriptError::Event {
                    line: 2,
                    index: 0,
                    ..
                }
            ),
            "{err}"
        );

        let mut lines: Vec<String> = sample().encode().lines().map(str::to_string).collect();
        lines[1] = lines[1].replace(r#""given":["B"]"#, r#""given":["B"],"note":"x""#);
        assert!(Transcript::decode(&lines.join("\n")).is_err());
    }

    #[test]
    fn decreasing_seq_is_rejected_at_offending_event() {
        let text = sample().encode().replace(r#""seq":2"#, r#""seq":1"#);
        let err = Transcript::decode(&text).unwrap_err();
        assert!(
            matches!(
                err,
                TranscriptError::Event {
                    line: 3,
                    index: 1,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn header_only_is_valid() {
        let t = Transcript::new(
            TranscriptHeader::new("X", "Y", &ExpansionConfig::default()),
            vec![],
        );
        assert_eq!(Transcript::decode(&t.encode()).unwrap(), t);
        assert_eq!(Transcript::decode(""), Err(TranscriptError::MissingHeader));
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let text = sample()
            .encode()
            .replacen(r#""schema_version":1"#, r#""schema_version":9"#, 1);
        assert_eq!(
            Transcript::decode(&text),
            Err(TranscriptError::SchemaVersion { found: 9 })
        );
    }

    #[test]
    fn answered_queries_pair_by_id() {
        let pairs = sample().answered_queries();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].1, Answer::CommonCause { cause: None });
    }
}
