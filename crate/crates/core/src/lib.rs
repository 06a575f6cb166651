//! Solvers for linearly constrained nonconvex composite problems
//!
//! ```text
//! min f(z) + h(z)  s.t.  A z = b
//! ```
//!
//! where `f` is smooth with lower and upper curvatures `(m, M)`, `h` is a
//! closed convex function with a cheap prox, and `A` is linear.
//!
//! The crate provides the AIDAL outer method ([`aidal_solve`]), its
//! backtracking-stepsize variant ([`adaptive_solve`]), the inner ACG solver
//! ([`acg_solve`]) and generators for three benchmark families.

pub mod acg;
pub mod adaptive;
pub mod aidal;
pub mod benchmarks;
pub mod error;
pub mod linalg;
pub mod oracles;
pub mod problem;

pub use acg::{acg_iteration_bound, acg_solve, AcgResult, CompositeSubproblem};
pub use adaptive::{adaptive_solve, AdaptiveParams};
pub use aidal::{
    aidal_solve, diagnostic_constants, AidalParams, Certificate, DiagnosticConstants, DiagnosticInputs, OuterRecord,
    PotentialWeights, SolveError, SolveFailure, SolveReport, TerminationMode,
};
pub use error::{AcgError, BenchmarkError, LinalgError, ParamError, ProblemError};
pub use linalg::DenseMatrix;
pub use problem::{ConstrainedProblem, LinearConstraint, LinearMap, ProxOracle, SmoothOracle};
