//! Error taxonomy shared by every module in the crate.

use thiserror::Error;

/// What a graph-file validation failure was about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationKind {
    /// An edge listed from one endpoint but not the other.
    Asymmetry,
    /// A vertex lists more neighbors than the declared degree bound.
    DegreeBound,
    /// The same neighbor appears twice in one adjacency list.
    MultiEdge,
    /// A vertex lists itself as a neighbor.
    SelfLoop,
}

impl std::fmt::Display for ValidationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ValidationKind::Asymmetry => "asymmetry",
            ValidationKind::DegreeBound => "degree-bound",
            ValidationKind::MultiEdge => "multi-edge",
            ValidationKind::SelfLoop => "self-loop",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error ({kind}): {msg}")]
    Validation { kind: ValidationKind, msg: String },

    /// An instance-family request that cannot be satisfied
    /// (e.g. an odd-length even cycle, or n*d odd for a d-regular graph).
    #[error("infeasible instance spec: {0}")]
    Spec(String),

    /// Out-of-domain arguments to an otherwise total operation.
    #[error("usage error: {0}")]
    Usage(String),

    /// Trimming removed every atom, or rejection sampling cannot terminate.
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    /// The support estimator exceeded its iteration cap.
    #[error("support estimate overflowed the iteration cap ({0} doubling rounds)")]
    EstimateOverflow(u32),

    /// The start-vertex sampler found no vertex with an incident edge of
    /// positive weight; the effective graph is empty.
    #[error("no start vertex: the edge-weighted start distribution is identically zero")]
    NoStartVertex,

    /// A brute-force oracle was asked for more work than its cap allows.
    #[error("size cap exceeded: {0}")]
    Cap(String),

    /// The integer edge-multiplicity scale is too coarse for the distribution.
    #[error("scale error: {0}")]
    Scale(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
