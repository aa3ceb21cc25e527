use thiserror::Error;

/// Errors raised by the combinatorial and numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n={expected}, found n={found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension n={0}: must lie in [3, 64]")]
    InvalidDimension(usize),

    #[error("invalid multi-index: {0}")]
    InvalidMultiIndex(String),

    #[error("invalid edge ({i},{j}) for n={n}: 1 <= i < j <= n required")]
    InvalidEdge { i: usize, j: usize, n: usize },

    #[error("edge set is not maximal: its Lie closure adds {missing} edge(s)")]
    NotMaximal { missing: usize },

    #[error("empty symmetry: the edge set has no edges")]
    EmptySymmetry,

    #[error("invalid symmetry: {0}")]
    InvalidSymmetry(String),

    #[error("invalid balanced type: {0}")]
    InvalidBalancedType(String),

    #[error("empty family of symmetries")]
    EmptyFamily,

    #[error("degenerate family: {0}")]
    DegenerateFamily(String),

    #[error("non-positive delta {0}: exponents are inconsistent with the family")]
    NonPositiveDelta(String),

    #[error("enumeration cap exceeded: J_max = {j_max} > cap {cap}")]
    CapExceeded { j_max: String, cap: u64 },

    #[error("non-finite integrand value {value} at sample {index}; singular integrands must be truncated")]
    NonFiniteSample { index: u64, value: f64 },

    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("internal arithmetic error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
