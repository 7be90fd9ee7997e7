//! Kernel builders for the parametric amplifiers.

mod opa;
mod opo;
mod pump;
mod twpa;

pub use opa::{build_opa, OpaParams};
pub use opo::{build_opo, OpoParams};
pub use pump::GaussianPump;
pub use twpa::{build_twpa, TwpaParams};
