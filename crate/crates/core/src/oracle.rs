// SPDX-License-Identifier: MIT
//! The elicitation interface: common causes, observability and mediators.
//!
//! Three implementations share the [`Oracle`] trait: [`GraphOracle`] answers from a known
//! graph, [`ReplayOracle`] answers from a recorded transcript and [`PromptOracle`] asks a
//! person through any text reader/writer pair.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adjustment::{self, AdjustmentError, VertexSetFamily};
use crate::graph::{format_set, is_identifier, Admg, GraphError, VertexSet};

/// Default number of distinct vertex names a live session may introduce.
pub const DEFAULT_VERTEX_BUDGET: usize = 64;

/// A question put to the oracle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Query {
    /// Is there a common cause of `a` and `b` whose effects are not fully mediated by `given`?
    CommonCause {
        a: String,
        b: String,
        given: VertexSet,
    },
    /// Is `vertex` observed?
    IsObserved { vertex: String },
    /// Which observed sets, together with `base`, fully mediate the effect of `cause` on
    /// `a` or on `b`?
    FindMediator {
        a: String,
        b: String,
        cause: String,
        base: VertexSet,
    },
}

/// An answer to a [`Query`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Answer {
    CommonCause { cause: Option<String> },
    IsObserved { observed: bool },
    FindMediator { sets: VertexSetFamily },
}

impl Answer {
    fn kind_name(&self) -> &'static str {
        match self {
            Answer::CommonCause { .. } => "common_cause",
            Answer::IsObserved { .. } => "is_observed",
            Answer::FindMediator { .. } => "find_mediator",
        }
    }

    /// Vertex names mentioned by the answer.
    pub fn names(&self) -> BTreeSet<String> {
        match self {
            Answer::CommonCause { cause } => cause.iter().cloned().collect(),
            Answer::IsObserved { .. } => BTreeSet::new(),
            Answer::FindMediator { sets } => sets.iter().flatten().cloned().collect(),
        }
    }
}

impl Query {
    fn kind_name(&self) -> &'static str {
        match self {
            Query::CommonCause { .. } => "common_cause",
            Query::IsObserved { .. } => "is_observed",
            Query::FindMediator { .. } => "find_mediator",
        }
    }

    /// Vertex names mentioned by the query.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        match self {
            Query::CommonCause { a, b, given } => {
                out.insert(a.clone());
                out.insert(b.clone());
                out.extend(given.iter().cloned());
            }
            Query::IsObserved { vertex } => {
                out.insert(vertex.clone());
            }
            Query::FindMediator { a, b, cause, base } => {
                out.insert(a.clone());
                out.insert(b.clone());
                out.insert(cause.clone());
                out.extend(base.iter().cloned());
            }
        }
        out
    }

    /// The question in plain language.
    pub fn prompt(&self) -> String {
        fn given_clause(s: &VertexSet) -> String {
            if s.is_empty() {
                "nothing (S is empty)".to_string()
            } else {
                format_set(s)
            }
        }
        match self {
            Query::CommonCause { a, b, given } => format!(
                "Is there a common cause C of {a} and {b} such that neither its effect on {a} \
                 nor its effect on {b} is fully mediated by S = {}? \
                 Name it, or answer `none`.",
                given_clause(given)
            ),
            Query::IsObserved { vertex } => format!("Is {vertex} observed? Answer `yes` or `no`."),
            Query::FindMediator { a, b, cause, base } => format!(
                "What are some of the observed variables that, when combined with those \
                 already in S = {}, fully mediate the causal effect of \
                 {cause} on {a} or the causal effect of {cause} on {b}? Give one set per \
                 group separated by `;` with names separated by `,`, or answer `none`.",
                given_clause(base)
            ),
        }
    }

    /// Parses a free-text reply to this query.
    pub fn parse_reply(&self, text: &str) -> Result<Answer, OracleError> {
        let t = text.trim();
        let none = t.is_empty() || t.eq_ignore_ascii_case("none") || t.eq_ignore_ascii_case("no");
        let answer = match self {
            Query::CommonCause { .. } => Answer::CommonCause {
                cause: if none { None } else { Some(t.to_string()) },
            },
            Query::IsObserved { .. } => {
                let observed = match t.to_ascii_lowercase().as_str() {
                    "y" | "yes" | "true" => true,
                    "n" | "no" | "false" => false,
                    _ => return Err(OracleError::Unparseable(t.to_string())),
                };
                Answer::IsObserved { observed }
            }
            Query::FindMediator { .. } => {
                let sets = if none {
                    VertexSetFamily::new()
                } else {
                    t.split(';')
                        .map(|group| {
                            group
                                .split(',')
                                .map(str::trim)
                                .filter(|s| !s.is_empty())
                                .map(str::to_string)
                                .collect::<VertexSet>()
                        })
                        .filter(|s| !s.is_empty())
                        .collect()
                };
                Answer::FindMediator { sets }
            }
        };
        validate_answer(self, &answer)?;
        Ok(answer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Adjustment(#[from] AdjustmentError),
    #[error("invalid vertex name `{0}`: names must match [A-Za-z_][A-Za-z0-9_]*")]
    InvalidName(String),
    #[error("cannot understand reply `{0}`")]
    Unparseable(String),
    #[error("a {expected} query received a {got} answer")]
    WrongAnswerKind {
        expected: &'static str,
        got: &'static str,
    },
    #[error("answer names `{0}`, which the question already rules out")]
    InadmissibleVertex(String),
    #[error("no recorded answer for {0:?}")]
    Divergence(Box<Query>),
    #[error("vertex budget of {limit} exceeded")]
    BudgetExceeded { limit: usize },
    #[error("session aborted")]
    Aborted,
    #[error("i/o error: {0}")]
    Io(String),
}

/// Checks that `answer` has the right kind for `query` and mentions only admissible,
/// well-formed vertex names.
pub fn validate_answer(query: &Query, answer: &Answer) -> Result<(), OracleError> {
    let mismatch = || OracleError::WrongAnswerKind {
        expected: query.kind_name(),
        got: answer.kind_name(),
    };
    for name in answer.names() {
        if !is_identifier(&name) {
            return Err(OracleError::InvalidName(name));
        }
    }
    match (query, answer) {
        (Query::CommonCause { a, b, given }, Answer::CommonCause { cause }) => {
            if let Some(c) = cause {
                if c == a || c == b || given.contains(c) {
                    return Err(OracleError::InadmissibleVertex(c.clone()));
                }
            }
            Ok(())
        }
        (Query::IsObserved { .. }, Answer::IsObserved { .. }) => Ok(()),
        (Query::FindMediator { a, b, cause, .. }, Answer::FindMediator { sets }) => {
            for v in sets.iter().flatten() {
                if v == a || v == b || v == cause {
                    return Err(OracleError::InadmissibleVertex(v.clone()));
                }
            }
            Ok(())
        }
        _ => Err(mismatch()),
    }
}

/// Something that can answer elicitation queries.
pub trait Oracle {
    fn answer(&mut self, query: &Query) -> Result<Answer, OracleError>;

    /// Called once before an expansion for treatment `x` and outcome `y` starts.
    fn begin(&mut self, _x: &str, _y: &str) -> Result<(), OracleError> {
        Ok(())
    }
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn answer(&mut self, query: &Query) -> Result<Answer, OracleError> {
        (**self).answer(query)
    }
    fn begin(&mut self, x: &str, y: &str) -> Result<(), OracleError> {
        (**self).begin(x, y)
    }
}

/// Answers from a known ground-truth graph.
///
/// Bidirected edges are first replaced by fresh latent parents, so every confounding arc
/// is witnessed by a common cause. Among several common causes the lexicographically
/// greatest is returned. Once [`Oracle::begin`] has fixed the treatment and outcome,
/// mediator candidates are observed vertices other than the treatment, the outcome and
/// their descendants; before that they are the observed adjustment sets for the queried
/// pair.
#[derive(Debug, Clone)]
pub struct GraphOracle {
    truth: Admg,
    dag: Admg,
    endpoints: Option<(String, String)>,
}

impl GraphOracle {
    pub fn new(truth: &Admg) -> Self {
        GraphOracle {
            truth: truth.clone(),
            dag: truth.canonical_dag(),
            endpoints: None,
        }
    }

    /// Fixes the treatment and outcome up front.
    pub fn with_endpoints(mut self, x: &str, y: &str) -> Self {
        self.endpoints = Some((x.to_string(), y.to_string()));
        self
    }

    pub fn graph(&self) -> &Admg {
        &self.truth
    }

    pub fn common_cause(
        &self,
        a: &str,
        b: &str,
        t: &VertexSet,
    ) -> Result<Option<String>, OracleError> {
        Ok(adjustment::common_causes(&self.dag, a, b, t)?
            .into_iter()
            .next_back())
    }

    pub fn is_observed(&self, v: &str) -> Result<bool, OracleError> {
        Ok(self.dag.is_observed(v)?)
    }

    pub fn find_mediator(
        &self,
        a: &str,
        b: &str,
        cause: &str,
        base: &VertexSet,
    ) -> Result<VertexSetFamily, OracleError> {
        let Some((x, y)) = &self.endpoints else {
            return Ok(adjustment::enumerate_minimal_mediator_sets(
                &self.dag, a, b, cause, base,
            )?);
        };
        let pool: VertexSet = adjustment::adjustment_pool(&self.dag, x, y, true)?
            .into_iter()
            .filter(|v| v != a && v != b && v != cause && !base.contains(v))
            .collect();
        Ok(adjustment::mediator_sets_over(
            &self.dag, a, b, cause, base, &pool,
        )?)
    }
}

impl Oracle for GraphOracle {
    fn answer(&mut self, query: &Query) -> Result<Answer, OracleError> {
        Ok(match query {
            Query::CommonCause { a, b, given } => Answer::CommonCause {
                cause: self.common_cause(a, b, given)?,
            },
            Query::IsObserved { vertex } => Answer::IsObserved {
                observed: self.is_observed(vertex)?,
            },
            Query::FindMediator { a, b, cause, base } => Answer::FindMediator {
                sets: self.find_mediator(a, b, cause, base)?,
            },
        })
    }

    fn begin(&mut self, x: &str, y: &str) -> Result<(), OracleError> {
        self.truth.require(x)?;
        self.truth.require(y)?;
        self.endpoints = Some((x.to_string(), y.to_string()));
        Ok(())
    }
}

/// Answers from recorded `(query, answer)` pairs, looked up by exact query match.
///
/// When a query was recorded several times its answers are handed out in recorded order,
/// the last one repeating once they run out.
#[derive(Debug, Clone, Default)]
pub struct ReplayOracle {
    answers: HashMap<Query, VecDeque<Answer>>,
    last: HashMap<Query, Answer>,
}

impl ReplayOracle {
    pub fn new<I: IntoIterator<Item = (Query, Answer)>>(pairs: I) -> Self {
        let mut answers: HashMap<Query, VecDeque<Answer>> = HashMap::new();
        for (q, a) in pairs {
            answers.entry(q).or_default().push_back(a);
        }
        ReplayOracle {
            answers,
            last: HashMap::new(),
        }
    }

    /// Recorded answers that were never handed out.
    pub fn unused(&self) -> usize {
        self.answers.values().map(VecDeque::len).sum()
    }
}

impl Oracle for ReplayOracle {
    fn answer(&mut self, query: &Query) -> Result<Answer, OracleError> {
        if let Some(a) = self.answers.get_mut(query).and_then(VecDeque::pop_front) {
            self.last.insert(query.clone(), a.clone());
            return Ok(a);
        }
        self.last
            .get(query)
            .cloned()
            .ok_or_else(|| OracleError::Divergence(Box::new(query.clone())))
    }
}

/// Asks a person through a text interface, re-prompting on malformed replies.
pub struct PromptOracle<R, W> {
    input: R,
    output: W,
    universe: BTreeSet<String>,
    budget: usize,
}

impl<R: BufRead, W: Write> PromptOracle<R, W> {
    pub fn new(input: R, output: W) -> Self {
        PromptOracle {
            input,
            output,
            universe: BTreeSet::new(),
            budget: DEFAULT_VERTEX_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn into_output(self) -> W {
        self.output
    }
}

impl<R: BufRead, W: Write> Oracle for PromptOracle<R, W> {
    fn begin(&mut self, x: &str, y: &str) -> Result<(), OracleError> {
        self.universe.insert(x.to_string());
        self.universe.insert(y.to_string());
        Ok(())
    }

    fn answer(&mut self, query: &Query) -> Result<Answer, OracleError> {
        let io = |e: std::io::Error| OracleError::Io(e.to_string());
        loop {
            writeln!(self.output, "{}", query.prompt()).map_err(io)?;
            write!(self.output, "> ").map_err(io)?;
            self.output.flush().map_err(io)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io)? == 0 {
                return Err(OracleError::Aborted);
            }
            match query.parse_reply(&line) {
                Ok(answer) => {
                    let mut grown = self.universe.clone();
                    grown.extend(answer.names());
                    if grown.len() > self.budget {
                        return Err(OracleError::BudgetExceeded { limit: self.budget });
                    }
                    self.universe = grown;
                    return Ok(answer);
                }
                Err(e) => writeln!(self.output, "  {e}; please try again.").map_err(io)?,
            }
        }
    }
}
