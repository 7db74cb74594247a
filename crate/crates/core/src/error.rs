use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid unit system: {0}")]
    InvalidUnits(String),

    #[error("weak-field regime violated: |phi|/c^2 = {ratio:e} >= {limit:e}")]
    WeakFieldViolation { ratio: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("superluminal in this metric: g(u,u) = {0:e} is not timelike")]
    Superluminal(f64),

    #[error("velocity guard violated: |v|/c = {0:e} exceeds 0.3")]
    VelocityGuard(f64),

    #[error("coincident particle positions (r = 0)")]
    CoincidentParticles,

    #[error("singular field evaluation at a point charge")]
    SingularEvaluation,

    #[error("state is in {found} representation, expected {expected}")]
    WrongRepresentation {
        expected: &'static str,
        found: &'static str,
    },

    #[error("non-convex Lagrangian: velocity Hessian is not positive definite")]
    NonConvex,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("degenerate scaling probe: {0}")]
    DegenerateProbe(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("field model error: {0}")]
    Field(String),
}

pub type Result<T> = std::result::Result<T, Error>;
