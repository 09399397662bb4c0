use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Idiosyncratic and individual-effect variances of the one-way error
/// components model. The quasi-demeaning weight is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceComponents {
    sigma2_eps: f64,
    sigma2_alpha: f64,
    n_periods: usize,
}

impl VarianceComponents {
    pub fn new(sigma2_eps: f64, sigma2_alpha: f64, n_periods: usize) -> Result<Self> {
        if !(sigma2_eps.is_finite() && sigma2_eps >= 0.0) {
            return Err(Error::Domain(format!("sigma2_eps must be finite and >= 0, got {sigma2_eps}")));
        }
        if !(sigma2_alpha.is_finite() && sigma2_alpha >= 0.0) {
            return Err(Error::Domain(format!("sigma2_alpha must be finite and >= 0, got {sigma2_alpha}")));
        }
        if n_periods == 0 {
            return Err(Error::Domain("n_periods must be positive".into()));
        }
        Ok(VarianceComponents { sigma2_eps, sigma2_alpha, n_periods })
    }

    pub fn sigma2_eps(&self) -> f64 {
        self.sigma2_eps
    }

    pub fn sigma2_alpha(&self) -> f64 {
        self.sigma2_alpha
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    /// Compound error variance.
    pub fn sigma2_nu(&self) -> f64 {
        self.sigma2_alpha + self.sigma2_eps
    }

    /// `1 - sqrt(s2e / (s2e + T s2a))`. Both variances zero means no
    /// individual effect, so the weight is 0.
    pub fn theta(&self) -> f64 {
        let denom = self.sigma2_eps + self.n_periods as f64 * self.sigma2_alpha;
        if denom <= 0.0 {
            return 0.0;
        }
        1.0 - (self.sigma2_eps / denom).sqrt()
    }

    /// Per-individual `T x T` error covariance.
    pub fn omega(&self) -> DMatrix<f64> {
        let t = self.n_periods;
        DMatrix::from_fn(t, t, |r, c| if r == c { self.sigma2_eps + self.sigma2_alpha } else { self.sigma2_alpha })
    }
}
