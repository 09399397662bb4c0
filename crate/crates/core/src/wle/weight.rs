use serde::Serialize;

use crate::error::{Error, Result};

/// Residual adjustment function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Raf {
    #[default]
    Hellinger,
    /// `A(delta) = delta`; every weight is 1 and the fit is maximum likelihood.
    Identity,
}

impl std::str::FromStr for Raf {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hellinger" => Ok(Raf::Hellinger),
            "identity" => Ok(Raf::Identity),
            other => Err(Error::Config(format!("unknown RAF `{other}` (expected hellinger or identity)"))),
        }
    }
}

pub fn raf(delta: f64, kind: Raf) -> Result<f64> {
    if delta.is_nan() || delta < -1.0 {
        return Err(Error::Domain(format!("Pearson residual must be >= -1, got {delta}")));
    }
    Ok(match kind {
        Raf::Hellinger => 2.0 * ((delta + 1.0).sqrt() - 1.0),
        Raf::Identity => delta,
    })
}

/// `min(1, [A(delta) + 1]^+ / (delta + 1))`, zero at `delta = -1`.
pub fn weight(delta: f64, kind: Raf) -> f64 {
    match kind {
        Raf::Identity => 1.0,
        Raf::Hellinger => {
            if delta.is_nan() || delta <= -1.0 {
                return 0.0;
            }
            hellinger_from_root((delta + 1.0).sqrt())
        }
    }
}

/// Weight from `ln(f*/m*) = ln(delta + 1)`, which stays finite where the
/// densities themselves underflow.
pub fn weight_from_log_ratio(log_ratio: f64, kind: Raf) -> f64 {
    match kind {
        Raf::Identity => 1.0,
        Raf::Hellinger => {
            if log_ratio.is_nan() {
                return 0.0;
            }
            hellinger_from_root((0.5 * log_ratio).exp())
        }
    }
}

/// With `u = sqrt(delta + 1)` the Hellinger weight is `(2u - 1) / u^2`,
/// which is at most 1 and negative exactly when `u < 1/2`.
fn hellinger_from_root(u: f64) -> f64 {
    if u.is_nan() || u < 0.5 || u.is_infinite() {
        return 0.0;
    }
    ((2.0 * u - 1.0) / (u * u)).clamp(0.0, 1.0)
}

/// Squared-Hellinger disparity generator `G(delta) = 2 (sqrt(delta + 1) - 1)^2`.
pub fn hellinger_g(delta: f64) -> f64 {
    let s = (delta + 1.0).max(0.0).sqrt() - 1.0;
    2.0 * s * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raf_spot_values() {
        assert_eq!(raf(0.0, Raf::Hellinger).unwrap(), 0.0);
        assert_eq!(raf(0.0, Raf::Identity).unwrap(), 0.0);
        assert_eq!(raf(3.0, Raf::Hellinger).unwrap(), 2.0);
        assert_eq!(raf(-1.0, Raf::Hellinger).unwrap(), -2.0);
        assert!(raf(-1.5, Raf::Hellinger).is_err());
    }

    #[test]
    fn weight_spot_values() {
        assert_eq!(weight(0.0, Raf::Hellinger), 1.0);
        assert!((weight(3.0, Raf::Hellinger) - 0.75).abs() < 1e-15);
        assert!((weight(8.0, Raf::Hellinger) - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(weight(-1.0, Raf::Hellinger), 0.0);
        assert!(weight(1e300, Raf::Hellinger) < 1e-100);
        assert_eq!(weight(123.0, Raf::Identity), 1.0);
    }

    #[test]
    fn positive_part_boundary() {
        // delta + 1 < 1/4 gives A + 1 < 0
        assert_eq!(weight(-0.76, Raf::Hellinger), 0.0);
        assert!(weight(-0.74, Raf::Hellinger) > 0.0);
    }

    #[test]
    fn log_form_agrees() {
        for d in [-0.7, -0.2, 0.0, 0.5, 3.0, 8.0, 1e4] {
            let a = weight(d, Raf::Hellinger);
            let b = weight_from_log_ratio((d + 1.0_f64).ln(), Raf::Hellinger);
            assert!((a - b).abs() < 1e-12, "{d}: {a} vs {b}");
        }
        assert_eq!(weight_from_log_ratio(f64::INFINITY, Raf::Hellinger), 0.0);
        assert_eq!(weight_from_log_ratio(f64::NEG_INFINITY, Raf::Hellinger), 0.0);
    }

    #[test]
    fn generator_vanishes_at_zero() {
        assert_eq!(hellinger_g(0.0), 0.0);
        assert_eq!(hellinger_g(-1.0), 2.0);
    }
}
