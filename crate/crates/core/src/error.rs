use thiserror::Error;

pub type Result<T> = std::result::Result<T, CglError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CglError {
    #[error("diffusion coefficient a must be positive, got {0}")]
    NonPositiveDiffusion(f64),
    #[error("nonlinearity power sigma must be positive, got {0}")]
    NonPositivePower(f64),
    #[error("b = beta = 0: the nonlinear phase gamma is undefined")]
    ZeroNonlinearity,
    #[error("invalid trigonometric parameters: {0}")]
    InvalidTrigParams(String),

    #[error("bad grid specification: {0}")]
    BadGridSpec(String),
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("bad exponent {0}")]
    BadExponent(f64),

    #[error("degenerate parameters: omega*cos(theta) + k*sin(theta) = {0:e}")]
    DegenerateParameters(f64),
    #[error("eta = {0} is not positive (gamma inconsistent with d?)")]
    NegativeEta(f64),
    #[error("soliton frequency epsilon = {0} is not positive")]
    NonPositiveFrequency(f64),
    #[error("profile does not decay at the box edge: |psi| = {edge:e} > {tol:e}")]
    EdgeDecayViolated { edge: f64, tol: f64 },

    #[error("eigen-index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("Newton iteration diverged at mu = {mu} after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { mu: f64, iterations: usize, residual: f64 },
    #[error("Jacobian is singular at mu = {mu}")]
    JacobianSingular { mu: f64 },
    #[error("branch continuation failed at mu = {mu}: {source}")]
    ContinuationFailed { mu: f64, source: Box<CglError> },
    #[error("need at least {needed} branch points, have {found}")]
    NotEnoughPoints { needed: usize, found: usize },
    #[error("branch is not invertible in k: {0}")]
    BranchNotInvertible(String),

    #[error("nonlinear substep blows up at node {node} (t* = {t_star:e} < dt = {dt:e})")]
    SubstepBlowup { node: usize, t_star: f64, dt: f64 },
    #[error("invalid evolution spec: {0}")]
    BadEvolveSpec(String),

    #[error("trajectory lacks monitors: {0}")]
    MissingMonitors(String),

    #[error("dense eigensolve failed: {0}")]
    EigensolveFailed(String),
    #[error("profile is identically zero")]
    ZeroProfile,

    #[error("parse error: {0}")]
    Parse(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CglError {
    fn from(e: std::io::Error) -> Self {
        CglError::Io(e.to_string())
    }
}
