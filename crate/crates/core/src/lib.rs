//! Classical and weighted-likelihood robust estimators for balanced linear
//! panel data, plus a Monte Carlo harness for comparing them.
//!
//! ```
//! use panel_wle::{estimate, EstimatorKind, PanelDataset, WleConfig};
//!
//! let x = vec![0.0, 1.0, 2.0, 4.0, -1.0, 3.0];
//! let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v).collect();
//! let panel = PanelDataset::from_arrays(3, 2, 1, y, x).unwrap();
//! let fit = estimate(EstimatorKind::Wpols, &panel, &WleConfig::default()).unwrap();
//! assert!((fit.fit.beta[0] - 2.0).abs() < 1e-10);
//! ```

pub mod error;
pub mod linalg;
pub mod ols;
pub mod panel;
pub mod rng;
pub mod sim;
pub mod robust;
pub mod transform;
pub mod variance;
pub mod wle;

pub use error::{Error, Result};
pub use ols::{
    estimate_variance_components, fit_between, fit_classical, fit_fixed_effects, fit_pooled_ols, fit_random_effects,
    fit_random_effects_with_theta, Coefficient, EstimatorFit, EstimatorKind,
};
pub use panel::{read_csv, validate_panel, ColumnSpec, PanelDataset, RawRow};
pub use robust::{estimate, fit_wbe, fit_wfe, fit_wpols, fit_wre, fit_wre_from, fit_wre_with_theta, RobustFit};
pub use transform::{between_transform, quasi_demean, quasi_demean_with_theta, within_transform, TransformKind, TransformedData};
pub use variance::VarianceComponents;
pub use wle::{WleConfig, WleSolution};
