use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("Jacobi eigensolver did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("point outside the domain of h")]
    OutsideDomain,
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension { what: &'static str, got: usize, expected: usize },
    #[error("invalid curvature pair: m = {m}, M = {upper}")]
    Curvature { m: f64, upper: f64 },
    #[error("linear map is zero")]
    ZeroOperator,
    #[error("prox evaluation failed: {0}")]
    Prox(#[from] LinalgError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcgError {
    #[error("numerical breakdown at ACG iteration {iter}")]
    NumericalBreakdown { iter: usize },
    #[error(transparent)]
    Oracle(#[from] ProblemError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("(chi, theta, sigma) = ({chi}, {theta}, {sigma}) violates 2(1-theta)(2-theta)chi <= theta^2 or the box constraints")]
    InvalidChiTheta { chi: f64, theta: f64, sigma: f64 },
    #[error("prox stepsize {lambda} exceeds 1/m = {limit}; the subproblem may be nonconvex")]
    StepsizeTooLarge { lambda: f64, limit: f64 },
    #[error("invalid parameter {name} = {value}")]
    Invalid { name: &'static str, value: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchmarkError {
    #[error("curvature ratio {target} unreachable after {attempts} attempts")]
    Unreachable { target: f64, attempts: usize },
    #[error("Fantope shift bisection failed to bracket (k = {k}, n = {n})")]
    FantopeBracket { k: usize, n: usize },
    #[error("invalid instance parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}
