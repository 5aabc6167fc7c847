use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({0}, {1}) outside domain disk of radius {2}")]
    OutsideDomain(f64, f64, f64),

    #[error("regular point, nothing to normalize: both Hessian eigenvalues nonzero")]
    RegularPoint,

    #[error("degenerate point: {0}")]
    Degenerate(String),

    #[error("gradient of J below tolerance on the zero-curvature curve near ({0}, {1})")]
    DegenerateCurve(f64, f64),

    #[error("Newton failed to converge at u = {0} after {1} iterations")]
    NonConvergence(f64, usize),

    #[error("quadrature budget of {budget} nodes exceeded; achieved tolerance {achieved:e}")]
    QuadratureBudget { budget: usize, achieved: f64 },

    #[error("too few usable samples for a decay fit: {0} (need >= 8)")]
    TooFewSamples(usize),

    #[error("exponents must be >= 2: got 1/p = {0}, 1/q = {1}")]
    ExponentDomain(f64, f64),

    #[error("level {0} is within {1:e} of a critical value of the lattice symbol")]
    CriticalLevel(f64, f64),

    #[error("spectral parameter {0} too close to an exceptional value")]
    ExceptionalValue(f64),

    #[error("unknown catalog surface: {0}")]
    UnknownSurface(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
