use serde::Serialize;

use super::density::KdeMethod;
use super::weight::{weight, Raf};
use crate::error::{Error, Result};

/// Target weight at the reference distance used to derive the bandwidth
/// constant when none is given.
pub const DEFAULT_TARGET_WEIGHT: f64 = 0.10;
pub const DEFAULT_REF_DISTANCE: f64 = 3.0;

/// Bandwidth `h = c * sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Constant(f64),
    /// Choose `c` so that an isolated point at `ref_distance` sigmas from a
    /// normal model receives weight `target_weight`.
    TargetWeight { target_weight: f64, ref_distance: f64 },
}

impl Default for Bandwidth {
    fn default() -> Self {
        Bandwidth::TargetWeight { target_weight: DEFAULT_TARGET_WEIGHT, ref_distance: DEFAULT_REF_DISTANCE }
    }
}

/// Which variance components feed the weighted random-effects transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentSource {
    /// Weighted within and between fits.
    #[default]
    Robust,
    /// The unweighted moment estimator.
    Classical,
}

impl std::str::FromStr for ComponentSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "robust" => Ok(ComponentSource::Robust),
            "classical" => Ok(ComponentSource::Classical),
            other => Err(Error::Config(format!("unknown component source `{other}` (expected robust or classical)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WleConfig {
    pub raf: Raf,
    pub bandwidth: Bandwidth,
    pub n_bootstrap: usize,
    /// Rows per bootstrap start; `None` means design columns + 2.
    pub subsample_size: Option<usize>,
    pub max_iterations: usize,
    pub beta_tolerance: f64,
    pub root_dedup_tolerance: f64,
    pub seed: u64,
    pub kde: KdeMethod,
    pub theta_components: ComponentSource,
}

impl Default for WleConfig {
    fn default() -> Self {
        WleConfig {
            raf: Raf::Hellinger,
            bandwidth: Bandwidth::default(),
            n_bootstrap: 30,
            subsample_size: None,
            max_iterations: 500,
            beta_tolerance: 1e-6,
            root_dedup_tolerance: 1e-3,
            seed: 0,
            kde: KdeMethod::Binned,
            theta_components: ComponentSource::Robust,
        }
    }
}

impl WleConfig {
    pub fn identity() -> Self {
        WleConfig { raf: Raf::Identity, ..WleConfig::default() }
    }

    pub fn bandwidth_constant(&self) -> Result<f64> {
        match self.bandwidth {
            Bandwidth::Constant(c) if c.is_finite() && c > 0.0 => Ok(c),
            Bandwidth::Constant(c) => Err(Error::Config(format!("bandwidth constant must be positive, got {c}"))),
            Bandwidth::TargetWeight { target_weight, ref_distance } => derive_bandwidth_constant(target_weight, ref_distance),
        }
    }

    pub fn subsample_for(&self, n_cols: usize) -> usize {
        self.subsample_size.unwrap_or(n_cols + 2)
    }

    pub fn validate(&self, n_cols: usize) -> Result<()> {
        if self.n_bootstrap == 0 {
            return Err(Error::Config("n_bootstrap must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.beta_tolerance > 0.0 && self.root_dedup_tolerance > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        let m = self.subsample_for(n_cols);
        if m <= n_cols {
            return Err(Error::Config(format!("subsample size {m} must exceed the {n_cols} design columns")));
        }
        self.bandwidth_constant().map(|_| ())
    }
}

/// Pearson residual of an isolated point `d` sigmas from a normal model
/// whose kernel-smoothed empirical density at the point is one full kernel.
pub fn single_outlier_delta(d: f64, c: f64) -> f64 {
    let c2 = c * c;
    ((1.0 + c2) / c2).sqrt() * (d * d / (2.0 * (1.0 + c2))).exp() - 1.0
}

/// Hellinger weight of that point as a function of `c`.
pub fn single_outlier_weight(d: f64, c: f64) -> f64 {
    weight(single_outlier_delta(d, c), Raf::Hellinger)
}

/// Bisection for `c` with `single_outlier_weight(ref_distance, c) = target_weight`.
/// The weight increases with `c`, from 0 towards 1.
pub fn derive_bandwidth_constant(target_weight: f64, ref_distance: f64) -> Result<f64> {
    if !(target_weight > 0.0 && target_weight < 1.0) {
        return Err(Error::Domain(format!("target weight must lie in (0, 1), got {target_weight}")));
    }
    if !(ref_distance > 0.0 && ref_distance.is_finite()) {
        return Err(Error::Domain(format!("reference distance must be positive, got {ref_distance}")));
    }
    let (mut lo, mut hi) = (1e-6_f64, 1e6_f64);
    let f = |c: f64| single_outlier_weight(ref_distance, c) - target_weight;
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::Domain(format!(
            "target weight {target_weight} at distance {ref_distance} is unreachable for c in [{lo:e}, {hi:e}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
