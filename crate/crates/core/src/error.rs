use thiserror::Error;

/// Errors raised by the calculus, algebra and expansion layers.
///
/// Points are carried as their rendered text so the error type stays
/// independent of the scalar representation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QcalcError {
    #[error("point {point} is outside the frame domain ({reason})")]
    DomainError { point: String, reason: String },
    #[error("zero tension at {point}: theta(tau(p), sigma(p)) = 0, the point is excluded from the calculus")]
    ZeroTension { point: String },
    #[error("sample set is empty")]
    EmptySamples,
    #[error("map is not homogeneous: ratio {first} differs from {other}")]
    NotHomogeneous { first: String, other: String },
    #[error("every sample pair has zero tension")]
    DegenerateSample,
    #[error("directed map has non-positive homogeneity coefficient {0}")]
    DirectionConflict(String),
    #[error("invalid frame parameters: {0}")]
    InvalidParams(String),
    #[error("map does not commute with sigma and tau at {point}")]
    CommutationFailure { point: String },
    #[error("function is not a D-constant: D(zeta)({point}) = {value}")]
    NotInKernel { point: String, value: String },
    #[error("shape mismatch: {0}")]
    BadShape(String),
    #[error("operator is not right invertible (rank {rank} < {rows} rows)")]
    NotRightInvertible { rank: usize, rows: usize },
    #[error("supplied operator is not a right inverse: D*R != I")]
    NotARightInverse,
    #[error("supplied operator is not an initial operator for D: {0}")]
    NotAnInitialOperator(String),
    #[error("(n+1)*dim ker D = {needed} exceeds the domain dimension {available}")]
    DimensionOverflow { needed: usize, available: usize },
    #[error("vector is not a D-polynomial of degree <= {0}")]
    NotAPolynomial(usize),
    #[error("bases do not form a direct sum decomposition: {0}")]
    NotADirectSum(String),
    #[error("subspace is not invariant: {0}")]
    InvarianceFailure(String),
    #[error("quantum integer [{0}] vanishes")]
    ZeroFactor(usize),
    #[error("sigma has no declared inverse and is not the identity")]
    NoInverse,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("not a D-polynomial up to {0}")]
    DegreeExceeded(usize),
    #[error("basis has {0} labels; supply the component split W = sum W_s")]
    MultiLabelUnsupported(usize),
    #[error("unknown basis label {0}")]
    UnknownLabel(String),
    #[error("orbit grid degenerates at node {0}: consecutive nodes coincide")]
    GridDegenerate(usize),
    #[error("orbit grid too short: need {needed} nodes, have {available}")]
    GridExhausted { needed: usize, available: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QcalcError>;
