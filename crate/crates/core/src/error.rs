use std::fmt;

use crate::lp::LpStatus;
use crate::variants::Violation;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
    #[error("duplicate node name `{0}`")]
    DuplicateNode(String),
    #[error("edge index {0} out of range")]
    InvalidEdge(usize),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("edge weight must be finite and nonnegative, got {0}")]
    InvalidWeight(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("lifted-cut condition ({condition}) violated at node `{node}`")]
    LabelCondition { condition: LabelCondition, node: String },
    #[error("linear program is {0}")]
    LpNotOptimal(LpStatus),
    #[error("linear program solver failed: {0}")]
    LpNumerical(String),
    #[error("rounding did not finish within {0} iterations (degenerate embedding?)")]
    RoundingStalled(u64),
    #[error("invalid rounding parameters: {0}")]
    Params(String),
    #[error("instance is infeasible: {0}")]
    Infeasible(Violation),
    #[error("{what} = {value} exceeds the configured cap {cap}; {suggestion}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
        suggestion: &'static str,
    },
    #[error("oracle budget exceeded: {0}")]
    Budget(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

/// Which of the two lifted-cut side conditions failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelCondition {
    /// A terminal must carry exactly its own label.
    TerminalLabel,
    /// Every non-terminal must allow the extra label.
    ExtraLabel,
    /// Every label list must be nonempty and inside the label universe.
    NonEmpty,
}

impl fmt::Display for LabelCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelCondition::TerminalLabel => f.write_str("A: terminal s_i must have label set {i}"),
            LabelCondition::ExtraLabel => f.write_str("B: free node must allow the extra label"),
            LabelCondition::NonEmpty => f.write_str("label set must be nonempty and in range"),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
