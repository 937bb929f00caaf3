//! Depth image inpainting with low rank and gradient-sparsity priors.
//!
//! Four methods are available: plain nuclear-norm completion ([`Method::Lr`])
//! and three ADMM variants that add anisotropic total variation, the L0
//! gradient, or the low gradient measure that discounts unit steps.

pub mod admm;
pub mod config;
pub mod error;
pub mod fusion;
pub mod image;
pub mod io;
pub mod lowrank;
pub mod mask;
pub mod metrics;
pub mod synthetic;
pub mod tv;

pub use admm::{objective, objective_at, solve, solve_from, SolverState};
pub use config::{AdmmStart, Method, SolverConfig};
pub use error::{Error, Result};
pub use image::{DepthImage, Mask};
pub use metrics::EvalReport;
