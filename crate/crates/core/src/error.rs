use crate::lattice::Position;

/// Errors raised by the lattice, oracle and dynamics layers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Some complete triple `p, p+(1,0), p+(0,1)` sums to 1.
    #[error("three-dot rule violated at {} base position(s), first at {}", .0.len(), .0[0])]
    RuleViolation(Vec<Position>),

    #[error("cell assignment has {got} values but the geometry has {expected} cells")]
    CellCountMismatch { expected: usize, got: usize },

    #[error("free coordinates do not determine cell {0}")]
    InsufficientFreeSet(Position),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("operation requires a triangle geometry")]
    NotATriangle,

    #[error("position {0} lies outside the window")]
    OutOfWindow(Position),

    #[error("cell {0} is not in Y")]
    NotInY(Position),

    #[error("trajectory left the window at {0}")]
    WindowExit(Position),

    #[error("configuration matches none of the twelve ribbon states")]
    NotInSupport,

    #[error("window admits {0} ribbon states; enlarge it")]
    Ambiguous(usize),

    #[error("cylinder event constrains {0} twice")]
    DuplicatePosition(Position),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("partitions {0} and {1} are not compatible")]
    NotCompatible(usize, usize),

    #[error("partition {0} is malformed: {1}")]
    MalformedPartition(usize, String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
