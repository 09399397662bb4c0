//! Weighted likelihood estimation for the normal linear model.

pub mod config;
pub mod density;
pub mod disparity;
pub mod solver;
pub mod weight;

pub use config::{derive_bandwidth_constant, single_outlier_delta, Bandwidth, ComponentSource, WleConfig};
pub use density::{kernel_density, pearson_residuals, smoothed_model_density, KdeMethod};
pub use disparity::disparity;
pub use solver::{irls_solve, solve_wle, CandidateRoot, IrlsOutcome, WleSolution};
pub use weight::{raf, weight, Raf};
