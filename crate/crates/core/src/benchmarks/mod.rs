//! Benchmark problem families and their seeded generators.

pub mod instance;
pub mod lcqm;
pub mod lcqp;
pub mod prox;
pub mod quadratic;
pub mod rng;
pub mod spca;

pub use instance::{Family, GeneratedInstance, InstanceSpec};
pub use lcqm::{gen_lcqm, LcqmInstance};
pub use lcqp::{gen_lcqp, LcqpInstance};
pub use prox::{mcp_value_grad, project_fantope, project_simplex, project_spectraplex, prox_l1};
pub use spca::{gen_spca, SpcaInstance, SPCA_DEFAULT_N};
