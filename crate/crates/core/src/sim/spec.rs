use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dgp {
    /// Regressors correlated with the individual effect: `x = z + alpha`.
    FixedEffects,
    /// Regressors independent of the individual effect.
    RandomEffects,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorLaw {
    Normal01,
    StudentT5,
    /// Laplace with rate 1 (variance 2).
    DoubleExp1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    RandomVertical,
    RandomLeverage,
    ConcentratedVertical,
    ConcentratedLeverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Contamination {
    pub scheme: Scheme,
    pub m: usize,
}

/// How the N individual effects are laid over the N*T cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum EffectLayout {
    /// Cell `(i, t)` gets `alpha_i`.
    #[default]
    PerIndividual,
    /// The length-N effect vector is recycled along the individual-major
    /// cell order, so cell number `r` gets `alpha_{r mod N}`.
    Recycled,
}

/// Which t-ratios count towards the reported power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PowerRule {
    /// Share of replications with `|b/se| > Q(1 - gamma/2)`.
    #[default]
    Rejection,
    /// Share with `Q(gamma/2) <= b/se <= Q(1 - gamma/2)`.
    AcceptanceBand,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSpec {
    pub dgp: Dgp,
    pub n: usize,
    pub t: usize,
    pub beta_true: Vec<f64>,
    pub error_law: ErrorLaw,
    pub contamination: Option<Contamination>,
    pub replications: usize,
    pub gamma: f64,
    pub seed: u64,
    pub alpha_layout: EffectLayout,
    pub power_rule: PowerRule,
}

impl SimSpec {
    pub fn new(dgp: Dgp, n: usize, t: usize) -> Self {
        SimSpec {
            dgp,
            n,
            t,
            beta_true: vec![2.4, -1.2],
            error_law: ErrorLaw::Normal01,
            contamination: None,
            replications: 100,
            gamma: 0.05,
            seed: 1,
            alpha_layout: EffectLayout::PerIndividual,
            power_rule: PowerRule::Rejection,
        }
    }

    pub fn k(&self) -> usize {
        self.beta_true.len()
    }

    /// Contaminated share of the N*T cells.
    pub fn level(&self) -> f64 {
        self.contamination.map_or(0.0, |c| c.m as f64 / (self.n * self.t) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.t < 2 {
            return Err(Error::Config(format!("panel {}x{} needs N >= 2 and T >= 2", self.n, self.t)));
        }
        if self.beta_true.is_empty() || self.beta_true.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("beta must be a non-empty list of finite values".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if let Some(c) = self.contamination {
            check_contamination(c.scheme, c.m, self.n, self.t)?;
        }
        Ok(())
    }
}

/// Cells per contaminated individual under the concentrated schemes.
pub fn block_len(t: usize) -> usize {
    t.div_ceil(2)
}

pub(crate) fn check_contamination(scheme: Scheme, m: usize, n: usize, t: usize) -> Result<()> {
    if m > n * t {
        return Err(Error::InfeasibleContamination(format!("{m} outliers exceed the {} cells", n * t)));
    }
    if scheme.is_concentrated() {
        let b = block_len(t);
        if !m.is_multiple_of(b) {
            return Err(Error::InfeasibleContamination(format!(
                "{m} outliers are not whole blocks of {b} cells (T = {t})"
            )));
        }
        if m / b > n {
            return Err(Error::InfeasibleContamination(format!("{} blocks needed but only {n} individuals", m / b)));
        }
    }
    Ok(())
}

impl Scheme {
    pub fn is_concentrated(self) -> bool {
        matches!(self, Scheme::ConcentratedVertical | Scheme::ConcentratedLeverage)
    }

    pub fn is_leverage(self) -> bool {
        matches!(self, Scheme::RandomLeverage | Scheme::ConcentratedLeverage)
    }
}

macro_rules! named {
    ($ty:ty, $what:literal, $($variant:path => $name:literal $(| $alias:literal)*),+ $(,)?) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.pad(match self { $($variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name $(| $alias)* => Ok($variant),)+
                    other => Err(Error::Config(format!(concat!("unknown ", $what, " `{}`"), other))),
                }
            }
        }
    };
}

named!(Dgp, "dgp", Dgp::FixedEffects => "I" | "i" | "fe" | "fixed_effects", Dgp::RandomEffects => "II" | "ii" | "re" | "random_effects");
named!(ErrorLaw, "error law", ErrorLaw::Normal01 => "normal", ErrorLaw::StudentT5 => "t5", ErrorLaw::DoubleExp1 => "dexp");
named!(
    Scheme,
    "contamination scheme",
    Scheme::RandomVertical => "random_vertical",
    Scheme::RandomLeverage => "random_leverage",
    Scheme::ConcentratedVertical => "concentrated_vertical",
    Scheme::ConcentratedLeverage => "concentrated_leverage",
);
named!(EffectLayout, "alpha layout", EffectLayout::PerIndividual => "per_individual", EffectLayout::Recycled => "recycled");
named!(PowerRule, "power rule", PowerRule::Rejection => "rejection", PowerRule::AcceptanceBand => "acceptance_band");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for d in [Dgp::FixedEffects, Dgp::RandomEffects] {
            assert_eq!(d.to_string().parse::<Dgp>().unwrap(), d);
        }
        for s in [Scheme::RandomVertical, Scheme::RandomLeverage, Scheme::ConcentratedVertical, Scheme::ConcentratedLeverage] {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("cauchy".parse::<ErrorLaw>().is_err());
    }

    #[test]
    fn block_feasibility() {
        assert!(check_contamination(Scheme::ConcentratedVertical, 12, 120, 2).is_ok());
        assert!(check_contamination(Scheme::ConcentratedLeverage, 24, 80, 3).is_ok());
        assert!(check_contamination(Scheme::ConcentratedLeverage, 5, 80, 3).is_err());
        assert!(check_contamination(Scheme::RandomVertical, 7, 2, 3).is_err());
    }
}
