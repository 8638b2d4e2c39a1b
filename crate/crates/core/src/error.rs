use thiserror::Error;

/// Errors raised by the spectral solvers.
///
/// Hypothesis violations carry the hypothesis name (H2, H2', BCD, BCN) so
/// that configuration problems surface with the vocabulary of the models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("field mismatch: {0}")]
    Mismatch(String),

    #[error("H2 violated: smallest eigenvalue {lambda1:e} is not positive ({context})")]
    H2Violation { lambda1: f64, context: String },

    #[error("H2' violated: -Δ has smallest eigenvalue {lambda1:e} under {bc} boundary conditions")]
    H2PrimeViolation { lambda1: f64, bc: String },

    #[error("BCD violated: Dirichlet boundary conditions require h(0,x) = 0")]
    BcdViolation,

    #[error("BCN violated: Neumann boundary conditions require n·D_x h(u,x) = 0 on the boundary")]
    BcnViolation,

    #[error(
        "nonzero average: θ-average has magnitude {magnitude:e}, no solution of ω·∇θ U = r exists"
    )]
    NonzeroAverage { magnitude: f64 },

    #[error("small divisor underflow: |ω·k| = {divisor:e} at k = {k:?}")]
    DivisorUnderflow { k: Vec<i64>, divisor: f64 },

    #[error("multiplier underflow near a resonance: |λ| = {modulus:e} at k = {k:?}, n = {n}")]
    MultiplierUnderflow { k: Vec<i64>, n: usize, modulus: f64 },

    #[error("resonance proximity: multiplier at k = {k:?}, n = {n} cancels to relative size {ratio:e} (guard {guard:e})")]
    ResonanceProximity {
        k: Vec<i64>,
        n: usize,
        ratio: f64,
        guard: f64,
    },

    #[error("pole proximity: |1 + u| = {distance:e} below guard {guard:e}")]
    PoleProximity { distance: f64, guard: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("derivative of order {order} not available for this nonlinearity")]
    DerivativeUnavailable { order: usize },

    #[error("small parameter ε = 0 is not allowed for model {0}")]
    ZeroEpsilon(String),

    #[error("non-resonance condition fails for order {order}: k = {k:?} gives |k|^-1 log|ω·k|^-1 = {term:.6} > 2πρ/M = {bound:.6}")]
    Nonresonance {
        order: usize,
        k: Vec<i64>,
        term: f64,
        bound: f64,
    },

    #[error("Lindstedt order {order}: {cause}")]
    AtOrder { order: usize, cause: Box<Error> },

    #[error(
        "Newton iteration diverged after {iterations} iterations (last residual {residual:e})"
    )]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian: {0}")]
    SingularJacobian(String),

    #[error("iteration left the ball of radius {radius:e} (norm {norm:e}) after {iterations} iterations")]
    BallExit {
        iterations: usize,
        norm: f64,
        radius: f64,
    },

    #[error("no convergence after {iterations} iterations (last step {step:e})")]
    MaxIterations { iterations: usize, step: f64 },

    #[error("ε = {re}{im:+}i is outside the domain {domain}")]
    OutOfDomain { re: f64, im: f64, domain: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("residual underflow: only {usable} ladder points above the floor ({range})")]
    ResidualUnderflow { usable: usize, range: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
