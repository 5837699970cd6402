use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tree order k must be at least 1, got {0}")]
    InvalidTreeOrder(usize),

    #[error("ball of order {k} and radius {radius} exceeds {limit} vertices")]
    BallTooLarge { k: usize, radius: usize, limit: usize },

    #[error("vertex {0} is not part of the ball")]
    UnknownVertex(usize),

    #[error("vertex {0} lies on the outer shell and has no successors inside the ball")]
    LeafVertex(usize),

    #[error("spin count q must be at least 2, got {0}")]
    InvalidSpinCount(usize),

    #[error("inverse temperature beta must be positive and finite")]
    NonPositiveBeta,

    #[error("parameter {name} must be positive and finite")]
    NonPositiveParameter { name: &'static str },

    #[error("table must be {q}x{q}, found {rows} rows or a row of the wrong length")]
    TableShape { q: usize, rows: usize },

    #[error("tables for one model must be homogeneous: all entries rational or all floating")]
    MixedTable,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("stochastic matrix entry ({row}, {col}) must be positive")]
    NonPositiveProbability { row: usize, col: usize },

    #[error("row {row} of the stochastic matrix sums to {sum}, expected 1")]
    NotStochastic { row: usize, sum: String },

    #[error("configuration assigns {got} spins, expected {expected}")]
    ConfigurationLength { got: usize, expected: usize },

    #[error("spin index {spin} at position {position} is out of range for q = {q}")]
    SpinOutOfRange { position: usize, spin: usize, q: usize },

    #[error("boundary configuration has {got} spins but shell W_{shell} has {expected} vertices")]
    ShellMismatch { shell: usize, got: usize, expected: usize },

    #[error("missing field value at vertex {0}")]
    MissingField(String),

    #[error("field vector at vertex {vertex} has dimension {got}, expected {expected}")]
    FieldDimension { vertex: usize, got: usize, expected: usize },

    #[error("enumerating {q}^{vertices} configurations exceeds the cap of {cap}")]
    EnumerationCap { q: usize, vertices: usize, cap: usize },

    #[error("invalid level: {0}")]
    InvalidLevel(String),

    #[error("difference set is {found}, operation requires {expected}")]
    WrongKind { expected: &'static str, found: &'static str },

    #[error("invalid rational literal {0:?}")]
    InvalidRational(String),

    #[error("invalid vertex word {0:?}")]
    InvalidWord(String),

    #[error("invalid input:\n  {}", .0.join("\n  "))]
    Schema(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
