//! Weighted likelihood versions of the four panel estimators.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{least_squares, residuals};
use crate::ols::{
    assemble, between_df, check_between, checked_within, components_from_scales, design, estimate_variance_components,
    fit_classical, pooled_df, quasi_intercept, within_df, EstimatorFit, EstimatorKind,
};
use crate::panel::PanelDataset;
use crate::transform::{between_transform, pooled, quasi_demean_with_theta, TransformedData};
use crate::wle::{solve_wle, ComponentSource, WleConfig, WleSolution};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustFit {
    pub fit: EstimatorFit,
    /// Root-search details; `None` for classical kinds and fallbacks.
    pub wle: Option<WleSolution>,
    pub theta_used: Option<f64>,
    /// Set when no bootstrap start converged and the classical fit was returned.
    pub fallback: bool,
}

impl RobustFit {
    fn classical(fit: EstimatorFit, fallback: bool) -> Self {
        let theta_used = fit.theta;
        RobustFit { fit, wle: None, theta_used, fallback }
    }
}

/// Solves the weighted equations on a transformed regression. Standard
/// errors use `sigma_w^2 diag((X'WX)^-1)` with the classical residual
/// degrees of freedom scaled by the mean weight.
fn weighted(
    kind: EstimatorKind,
    td: &TransformedData,
    intercept: Option<f64>,
    df_classical: f64,
    theta: Option<f64>,
    cfg: &WleConfig,
) -> Result<std::result::Result<RobustFit, Error>> {
    let (x, p) = design(td, intercept);
    let sol = match solve_wle(&td.y, &x, p, cfg) {
        Ok(sol) => sol,
        Err(e @ Error::NoConvergedRoot { .. }) => return Ok(Err(e)),
        Err(e) => return Err(e),
    };
    let n = td.n_rows() as f64;
    let r = residuals(&x, p, &td.y, &sol.beta);
    let sw: f64 = sol.weights.iter().sum();
    let df = df_classical * sw / n;
    let sigma2 = r.iter().zip(&sol.weights).map(|(r, w)| w * r * r).sum::<f64>() / df;
    let inv_diag = match least_squares(&x, p, &td.y, Some(&sol.weights)) {
        Ok(ls) => ls.xtwx_inv_diag,
        Err(Error::RankDeficient { rank, columns }) => return Err(Error::RankDeficientUnderWeights { rank, columns }),
        Err(e) => return Err(e),
    };
    let fit = assemble(kind, intercept.is_some(), &sol.beta, &inv_diag, r, sol.weights.clone(), sigma2, df, theta);
    Ok(Ok(RobustFit { fit, wle: Some(sol), theta_used: theta, fallback: false }))
}

/// Runs the weighted fit, substituting the classical one when no root converges.
fn with_fallback(
    kind: EstimatorKind,
    attempt: Result<std::result::Result<RobustFit, Error>>,
    classical: impl FnOnce() -> Result<EstimatorFit>,
) -> Result<RobustFit> {
    match attempt? {
        Ok(fit) => Ok(fit),
        Err(_) => {
            let mut fit = classical()?;
            fit.kind = kind;
            Ok(RobustFit::classical(fit, true))
        }
    }
}

pub fn fit_wpols(p: &PanelDataset, cfg: &WleConfig) -> Result<RobustFit> {
    let td = pooled(p);
    let attempt = weighted(EstimatorKind::Wpols, &td, Some(1.0), pooled_df(p), None, cfg);
    with_fallback(EstimatorKind::Wpols, attempt, || fit_classical(EstimatorKind::Pols, p))
}

pub fn fit_wbe(p: &PanelDataset, cfg: &WleConfig) -> Result<RobustFit> {
    check_between(p)?;
    let td = between_transform(p);
    let attempt = weighted(EstimatorKind::Wbe, &td, Some(1.0), between_df(p), None, cfg);
    with_fallback(EstimatorKind::Wbe, attempt, || fit_classical(EstimatorKind::Be, p))
}

pub fn fit_wfe(p: &PanelDataset, cfg: &WleConfig) -> Result<RobustFit> {
    let td = checked_within(p)?;
    let attempt = weighted(EstimatorKind::Wfe, &td, None, within_df(p), None, cfg);
    with_fallback(EstimatorKind::Wfe, attempt, || fit_classical(EstimatorKind::Fe, p))
}

pub fn fit_wre(p: &PanelDataset, cfg: &WleConfig) -> Result<RobustFit> {
    match cfg.theta_components {
        ComponentSource::Robust => {
            let wfe = fit_wfe(p, cfg)?;
            let wbe = fit_wbe(p, cfg)?;
            fit_wre_from(p, cfg, &wfe, &wbe)
        }
        ComponentSource::Classical => {
            let theta = estimate_variance_components(p)?.theta();
            fit_wre_with_theta(p, cfg, theta)
        }
    }
}

/// Weighted random effects reusing already computed weighted within and
/// between fits for the variance components.
pub fn fit_wre_from(p: &PanelDataset, cfg: &WleConfig, wfe: &RobustFit, wbe: &RobustFit) -> Result<RobustFit> {
    let vc = components_from_scales(wfe.fit.sigma_hat, wbe.fit.sigma_hat, p)?;
    fit_wre_with_theta(p, cfg, vc.theta())
}

pub fn fit_wre_with_theta(p: &PanelDataset, cfg: &WleConfig, theta: f64) -> Result<RobustFit> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta must lie in [0, 1], got {theta}")));
    }
    let td = quasi_demean_with_theta(p, theta);
    let icpt = quasi_intercept(theta);
    let df = p.n_rows() as f64 - p.n_regressors() as f64 - f64::from(u8::from(icpt.is_some()));
    let attempt = weighted(EstimatorKind::Wre, &td, icpt, df, Some(theta), cfg);
    with_fallback(EstimatorKind::Wre, attempt, || crate::ols::fit_random_effects_with_theta(p, theta))
}

/// Fits any of the eight estimators. Classical kinds come back with
/// `wle = None` and unit weights.
pub fn estimate(kind: EstimatorKind, p: &PanelDataset, cfg: &WleConfig) -> Result<RobustFit> {
    match kind {
        EstimatorKind::Wpols => fit_wpols(p, cfg),
        EstimatorKind::Wbe => fit_wbe(p, cfg),
        EstimatorKind::Wfe => fit_wfe(p, cfg),
        EstimatorKind::Wre => fit_wre(p, cfg),
        classical => Ok(RobustFit::classical(fit_classical(classical, p)?, false)),
    }
}
