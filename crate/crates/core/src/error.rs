use thiserror::Error;

/// Engine errors. Verdicts (not-semistable, degree mismatch verdicts in
/// reports) are not errors; these are contract violations and guards.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("dual graph is not connected")]
    DisconnectedCurve,

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("node `{node}` references unknown component `{end}`")]
    DanglingNodeEnd { node: String, end: String },

    #[error("subcurves share components")]
    OverlappingSubcurves,

    #[error("subcurve must be nonempty")]
    EmptySubcurve,

    #[error("subcurve must be proper")]
    ImproperSubcurve,

    #[error("unknown node index {0}")]
    UnknownNode(usize),

    #[error("unknown component index {0}")]
    UnknownComponent(usize),

    #[error("chain length for node {0} must be at least 1")]
    InvalidChainLength(usize),

    #[error("multidegree has {actual} entries, curve has {expected} components")]
    WrongLength { expected: usize, actual: usize },

    #[error("polarization rank {rank} does not divide total degree {total}")]
    InvalidPolarization { rank: i64, total: i64 },

    #[error("total degree {actual} does not match required degree {expected}")]
    DegreeMismatch { expected: i64, actual: i64 },

    #[error("search space of size {0} exceeds the configured cap")]
    SearchTooLarge(u128),

    #[error("no quasistable twister found within the search box (cap {0})")]
    NoQuasistableTwister(i64),

    #[error("components {i} and {j} share no node")]
    ComponentsNotAdjacent { i: usize, j: usize },

    #[error("node `{0}` is not reducible")]
    NotReducibleNode(String),

    #[error("class is not admissible: chain over node `{node}` has degree {degree}")]
    NotAdmissible { node: String, degree: i64 },

    #[error("invariant violation: {0}")]
    PaperInvariantViolation(String),
}
