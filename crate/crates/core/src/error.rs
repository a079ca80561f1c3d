use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable x{index} out of range for dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0} (must be between 1 and 8)")]
    UnsupportedDimension(usize),
    #[error("empty polynomial")]
    EmptyPolynomial,
    #[error("origin lies in the support: the germ does not vanish at 0")]
    OriginInSupport,
    #[error("not a singular germ: the gradient does not vanish at the origin")]
    NotSingular,
    #[error("face does not belong to the Newton diagram: {0}")]
    ForeignFace(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no sample points found")]
    NoSamplePoints,
    #[error("domain mismatch between Puiseux series")]
    DomainMismatch,
    #[error("point outside the domain: {0}")]
    OutOfDomain(String),
    #[error("exponent denominator {0} exceeds the cap {1}")]
    DenominatorCap(i64, i64),
    #[error("negative exponent produced by differentiation: {0}")]
    NegativeExponent(String),
    #[error("polydisc violation: series {index} has norm {norm} above radius {radius}")]
    PolydiscViolation { index: usize, norm: f64, radius: f64 },
    #[error("coordinate hyperplane x{0} is contained in the zero set of the face polynomial")]
    CoordinatePlane(usize),
    #[error("no coordinate pair with nonsingular Jacobian: {0}")]
    SingularJacobian(String),
    #[error("root solve diverged: {0}")]
    Divergence(String),
    #[error("vanishing gradient at {0:?}")]
    VanishingGradient(Vec<f64>),
    #[error("derivative {value:e} below threshold at {at:?}")]
    SmallDerivative { value: f64, at: Vec<f64> },
    #[error("contraction factor {0} not below 1 after shrinking epsilon")]
    NoContraction(f64),
    #[error("exponent {0} lies off the lattice")]
    LatticeMismatch(String),
    #[error("omega not bounded below: min {0:e}")]
    DegenerateOmega(f64),
    #[error("flow blow-up at r = {r:e} (growth rate {rate:e})")]
    FlowBlowUp { r: f64, rate: f64 },
    #[error("Lyapunov check failed: {0}")]
    Lyapunov(String),
    #[error("mixed leading exponents {0:?} cannot be split into fast and slow blocks")]
    MixedExponents(Vec<f64>),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("mode cutoff insufficient: tail {tail:e} vs total {total:e}")]
    ModeCutoff { tail: f64, total: f64 },
    #[error("ill-conditioned dictionary (condition number {0:e})")]
    IllConditioned(f64),
    #[error("perturbation not subordinate: kappa = {0}")]
    NotSubordinate(String),
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
