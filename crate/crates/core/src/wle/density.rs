//! Residual kernel density `f*`, smoothed model density `m*` and Pearson
//! residuals `delta = f*/m* - 1`.

use serde::Serialize;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// How `f*` is evaluated inside the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KdeMethod {
    /// Direct O(n) sum per evaluation point.
    Exact,
    /// Linear binning on a grid of spacing `h/8`, Gaussian taps to `6h`,
    /// linear interpolation. Relative error well below 1%.
    #[default]
    Binned,
}

impl std::str::FromStr for KdeMethod {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(KdeMethod::Exact),
            "binned" => Ok(KdeMethod::Binned),
            other => Err(crate::error::Error::Config(format!("unknown kde method `{other}` (expected exact or binned)"))),
        }
    }
}

/// `(1/n) sum_j phi_h(r - r_j)` with a normal kernel of variance `h^2`.
pub fn kernel_density(residuals: &[f64], r: f64, h: f64) -> f64 {
    let n = residuals.len() as f64;
    let s: f64 = residuals
        .iter()
        .map(|rj| {
            let z = (r - rj) / h;
            (-0.5 * z * z).exp()
        })
        .sum();
    s * INV_SQRT_2PI / (h * n)
}

/// Log of [`kernel_density`] by log-sum-exp; finite far from the data.
pub fn log_kernel_density(residuals: &[f64], r: f64, h: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for rj in residuals {
        let z = (r - rj) / h;
        best = best.max(-0.5 * z * z);
    }
    let s: f64 = residuals
        .iter()
        .map(|rj| {
            let z = (r - rj) / h;
            (-0.5 * z * z - best).exp()
        })
        .sum();
    best + s.ln() - (residuals.len() as f64).ln() - h.ln() - LN_SQRT_2PI
}

/// Normal model density convolved with the kernel: `N(0, sigma^2 + h^2)` at `r`.
pub fn smoothed_model_density(r: f64, sigma: f64, h: f64) -> f64 {
    log_smoothed_model_density(r, sigma, h).exp()
}

pub fn log_smoothed_model_density(r: f64, sigma: f64, h: f64) -> f64 {
    let v = sigma * sigma + h * h;
    -0.5 * r * r / v - 0.5 * v.ln() - LN_SQRT_2PI
}

/// Pearson residuals at each residual, computed in log space.
pub fn pearson_residuals(residuals: &[f64], sigma: f64, h: f64) -> Vec<f64> {
    log_density_ratios(residuals, sigma, h, KdeMethod::Exact)
        .into_iter()
        .map(|l| l.exp() - 1.0)
        .collect()
}

/// `ln f*(r_i) - ln m*(r_i)` for every residual.
pub fn log_density_ratios(residuals: &[f64], sigma: f64, h: f64, method: KdeMethod) -> Vec<f64> {
    let smoother = KernelSmoother::new(residuals, h, method);
    residuals
        .iter()
        .map(|&r| smoother.log_density(r) - log_smoothed_model_density(r, sigma, h))
        .collect()
}

const BINS_PER_BANDWIDTH: f64 = 8.0;
const TAP_RADIUS: usize = 48; // six bandwidths
const MAX_GRID: usize = 1 << 21;

/// `f*` prepared for repeated evaluation.
pub enum KernelSmoother<'a> {
    Exact { residuals: &'a [f64], h: f64 },
    Binned { lo: f64, step: f64, density: Vec<f64> },
}

impl<'a> KernelSmoother<'a> {
    pub fn new(residuals: &'a [f64], h: f64, method: KdeMethod) -> Self {
        if method == KdeMethod::Binned {
            if let Some(b) = Self::binned(residuals, h) {
                return b;
            }
        }
        KernelSmoother::Exact { residuals, h }
    }

    fn binned(residuals: &[f64], h: f64) -> Option<Self> {
        let (min, max) = residuals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
        if !(min.is_finite() && max.is_finite() && h > 0.0) {
            return None;
        }
        let step = h / BINS_PER_BANDWIDTH;
        let lo = min - (TAP_RADIUS + 1) as f64 * step;
        let span = ((max - lo) / step).ceil();
        if !(span.is_finite() && span < MAX_GRID as f64) {
            return None;
        }
        let len = span as usize + TAP_RADIUS + 3;
        let mut counts = vec![0.0; len];
        for &r in residuals {
            let pos = (r - lo) / step;
            let j = pos.floor();
            let frac = pos - j;
            let j = j as usize;
            counts[j] += 1.0 - frac;
            counts[j + 1] += frac;
        }
        let taps: Vec<f64> = (0..=TAP_RADIUS)
            .map(|k| {
                let z = k as f64 / BINS_PER_BANDWIDTH;
                (-0.5 * z * z).exp()
            })
            .collect();
        let mut density = vec![0.0; len];
        for (j, &c) in counts.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            density[j] += c * taps[0];
            for k in 1..=TAP_RADIUS {
                density[j - k] += c * taps[k];
                density[j + k] += c * taps[k];
            }
        }
        let norm = INV_SQRT_2PI / (h * residuals.len() as f64);
        density.iter_mut().for_each(|d| *d *= norm);
        Some(KernelSmoother::Binned { lo, step, density })
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            KernelSmoother::Exact { residuals, h } => kernel_density(residuals, x, *h),
            KernelSmoother::Binned { lo, step, density } => {
                let pos = (x - lo) / step;
                if pos.is_nan() || pos < 0.0 || pos >= (density.len() - 1) as f64 {
                    return 0.0;
                }
                let j = pos.floor() as usize;
                let frac = pos - j as f64;
                density[j] * (1.0 - frac) + density[j + 1] * frac
            }
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match self {
            KernelSmoother::Exact { residuals, h } => log_kernel_density(residuals, x, *h),
            KernelSmoother::Binned { .. } => self.density(x).ln(),
        }
    }
}
