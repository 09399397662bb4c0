//! Pooled, between, fixed-effects and random-effects least squares.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{least_squares, residuals};
use crate::panel::PanelDataset;
use crate::transform::{between_transform, pooled, quasi_demean_with_theta, within_transform, TransformedData};
use crate::variance::VarianceComponents;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Pols,
    Wpols,
    Be,
    Wbe,
    Fe,
    Wfe,
    Re,
    Wre,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 8] = [
        EstimatorKind::Pols,
        EstimatorKind::Wpols,
        EstimatorKind::Be,
        EstimatorKind::Wbe,
        EstimatorKind::Fe,
        EstimatorKind::Wfe,
        EstimatorKind::Re,
        EstimatorKind::Wre,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Pols => "pols",
            EstimatorKind::Wpols => "wpols",
            EstimatorKind::Be => "be",
            EstimatorKind::Wbe => "wbe",
            EstimatorKind::Fe => "fe",
            EstimatorKind::Wfe => "wfe",
            EstimatorKind::Re => "re",
            EstimatorKind::Wre => "wre",
        }
    }

    pub fn is_weighted(self) -> bool {
        matches!(self, EstimatorKind::Wpols | EstimatorKind::Wbe | EstimatorKind::Wfe | EstimatorKind::Wre)
    }

    /// The unweighted estimator a weighted one generalises (identity for classical kinds).
    pub fn classical(self) -> EstimatorKind {
        match self {
            EstimatorKind::Wpols => EstimatorKind::Pols,
            EstimatorKind::Wbe => EstimatorKind::Be,
            EstimatorKind::Wfe => EstimatorKind::Fe,
            EstimatorKind::Wre => EstimatorKind::Re,
            other => other,
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown estimator `{s}` (expected one of pols, wpols, be, wbe, fe, wfe, re, wre)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficient {
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorFit {
    pub kind: EstimatorKind,
    /// Slope coefficients, one per regressor.
    pub beta: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub intercept: Option<Coefficient>,
    /// Residuals of the transformed regression, one per transformed row.
    pub residuals: Vec<f64>,
    pub sigma_hat: f64,
    pub weights: Vec<f64>,
    /// Sum of weights (the row count for unweighted fits).
    pub n_obs_effective: f64,
    pub df_resid: f64,
    /// Quasi-demeaning weight for random-effects fits.
    pub theta: Option<f64>,
}

/// Row-major design of a transformed regression, with an optional leading
/// intercept column holding `intercept`.
pub(crate) fn design(td: &TransformedData, intercept: Option<f64>) -> (Vec<f64>, usize) {
    let Some(c) = intercept else {
        return (td.x.clone(), td.n_cols);
    };
    let p = td.n_cols + 1;
    let mut x = Vec::with_capacity(td.n_rows() * p);
    for r in 0..td.n_rows() {
        x.push(c);
        x.extend_from_slice(td.x_row(r));
    }
    (x, p)
}

/// Builds a fit from full coefficient vectors (intercept first if present).
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble(
    kind: EstimatorKind,
    has_intercept: bool,
    coef: &[f64],
    inv_diag: &[f64],
    residuals: Vec<f64>,
    weights: Vec<f64>,
    sigma2: f64,
    df_resid: f64,
    theta: Option<f64>,
) -> EstimatorFit {
    let se: Vec<f64> = inv_diag.iter().map(|d| (sigma2 * d).max(0.0).sqrt()).collect();
    let off = usize::from(has_intercept);
    EstimatorFit {
        kind,
        beta: coef[off..].to_vec(),
        std_errors: se[off..].to_vec(),
        intercept: has_intercept.then(|| Coefficient { estimate: coef[0], std_error: se[0] }),
        residuals,
        sigma_hat: sigma2.max(0.0).sqrt(),
        n_obs_effective: weights.iter().sum(),
        weights,
        df_resid,
        theta,
    }
}

fn ols(kind: EstimatorKind, td: &TransformedData, intercept: Option<f64>, df: f64, theta: Option<f64>) -> Result<EstimatorFit> {
    if df <= 0.0 {
        return Err(Error::Domain(format!("{kind}: no residual degrees of freedom")));
    }
    let (x, p) = design(td, intercept);
    let ls = least_squares(&x, p, &td.y, None)?;
    let res = residuals(&x, p, &td.y, &ls.beta);
    let rss: f64 = res.iter().map(|r| r * r).sum();
    let n = td.n_rows();
    Ok(assemble(kind, intercept.is_some(), &ls.beta, &ls.xtwx_inv_diag, res, vec![1.0; n], rss / df, df, theta))
}

pub(crate) fn pooled_df(p: &PanelDataset) -> f64 {
    p.n_rows() as f64 - p.n_regressors() as f64 - 1.0
}

pub(crate) fn between_df(p: &PanelDataset) -> f64 {
    p.n_individuals() as f64 - p.n_regressors() as f64 - 1.0
}

pub(crate) fn within_df(p: &PanelDataset) -> f64 {
    (p.n_rows() - p.n_individuals()) as f64 - p.n_regressors() as f64
}

pub(crate) fn check_between(p: &PanelDataset) -> Result<()> {
    let needed = p.n_regressors() + 1;
    if p.n_individuals() <= needed {
        return Err(Error::TooFewIndividuals { n_individuals: p.n_individuals(), needed });
    }
    Ok(())
}

/// Within-transformed data, rejecting regressors without time variation.
pub(crate) fn checked_within(p: &PanelDataset) -> Result<TransformedData> {
    let w = within_transform(p);
    let k = p.n_regressors();
    for j in 0..k {
        let scale = (0..p.n_rows()).map(|r| p.x()[r * k + j].abs()).fold(0.0, f64::max);
        let spread = (0..w.n_rows()).map(|r| w.x[r * k + j].abs()).fold(0.0, f64::max);
        if spread <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NoWithinVariation { regressor: j + 1 });
        }
    }
    Ok(w)
}

/// Intercept column of the quasi-demeaned regression, absent once it vanishes.
pub(crate) fn quasi_intercept(theta: f64) -> Option<f64> {
    let c = 1.0 - theta;
    (c > 1e-12).then_some(c)
}

pub fn fit_pooled_ols(p: &PanelDataset) -> Result<EstimatorFit> {
    ols(EstimatorKind::Pols, &pooled(p), Some(1.0), pooled_df(p), None)
}

pub fn fit_between(p: &PanelDataset) -> Result<EstimatorFit> {
    check_between(p)?;
    ols(EstimatorKind::Be, &between_transform(p), Some(1.0), between_df(p), None)
}

pub fn fit_fixed_effects(p: &PanelDataset) -> Result<EstimatorFit> {
    let w = checked_within(p)?;
    ols(EstimatorKind::Fe, &w, None, within_df(p), None)
}

/// Within/between moment estimator with the `s2e / T` correction and a
/// zero clamp on the individual-effect variance.
pub fn estimate_variance_components(p: &PanelDataset) -> Result<VarianceComponents> {
    let fe = fit_fixed_effects(p)?;
    let be = fit_between(p)?;
    components_from_scales(fe.sigma_hat, be.sigma_hat, p)
}

/// Moment formulas on given within and between residual scales. Values at
/// rounding level relative to the response are treated as exact zeros.
pub(crate) fn components_from_scales(sigma_within: f64, sigma_between: f64, p: &PanelDataset) -> Result<VarianceComponents> {
    let t = p.n_periods();
    let floor = 1e-24 * p.y().iter().map(|v| v * v).sum::<f64>() / p.n_rows() as f64;
    let chop = |v: f64| if v <= floor { 0.0 } else { v };
    let s2e = chop(sigma_within * sigma_within);
    let s2a = chop((sigma_between * sigma_between - s2e / t as f64).max(0.0));
    VarianceComponents::new(s2e, s2a, t)
}

pub fn fit_random_effects(p: &PanelDataset) -> Result<EstimatorFit> {
    let vc = estimate_variance_components(p)?;
    fit_random_effects_with_theta(p, vc.theta())
}

/// Random-effects regression at an externally supplied quasi-demeaning weight.
pub fn fit_random_effects_with_theta(p: &PanelDataset, theta: f64) -> Result<EstimatorFit> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta must lie in [0, 1], got {theta}")));
    }
    let td = quasi_demean_with_theta(p, theta);
    let icpt = quasi_intercept(theta);
    let df = p.n_rows() as f64 - p.n_regressors() as f64 - f64::from(u8::from(icpt.is_some()));
    ols(EstimatorKind::Re, &td, icpt, df, Some(theta))
}

/// Dispatches one of the classical kinds.
pub fn fit_classical(kind: EstimatorKind, p: &PanelDataset) -> Result<EstimatorFit> {
    match kind.classical() {
        EstimatorKind::Pols => fit_pooled_ols(p),
        EstimatorKind::Be => fit_between(p),
        EstimatorKind::Fe => fit_fixed_effects(p),
        _ => fit_random_effects(p),
    }
}
