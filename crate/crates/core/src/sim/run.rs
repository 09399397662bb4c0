use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::dgp::{contaminate, generate_panel};
use super::spec::{PowerRule, SimSpec};
use crate::error::Result;
use crate::ols::{fit_classical, EstimatorKind};
use crate::panel::PanelDataset;
use crate::rng::{derive_seed, stream_rng};
use crate::robust::{fit_wbe, fit_wfe, fit_wpols, fit_wre, fit_wre_from, RobustFit};
use crate::wle::{ComponentSource, WleConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub kind: EstimatorKind,
    /// Mean over replications of the squared slope error norm.
    pub mse: f64,
    pub power: Vec<f64>,
    pub mean_beta: Vec<f64>,
    /// Weighted fits that fell back to the classical estimate.
    pub n_fallbacks: usize,
    /// Replications where the estimator could not be computed at all.
    pub n_failed: usize,
    /// Replications entering the averages.
    pub n_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub spec: SimSpec,
    pub estimators: Vec<EstimatorSummary>,
    pub runtime_secs: f64,
}

impl SimResult {
    pub fn get(&self, kind: EstimatorKind) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.kind == kind)
    }
}

/// One estimator in one replication.
#[derive(Debug, Clone)]
struct Draw {
    beta: Vec<f64>,
    se: Vec<f64>,
    fallback: bool,
}

/// The panel of replication `index` after contamination.
pub fn replication_panel(spec: &SimSpec, index: u64) -> Result<(PanelDataset, Vec<bool>)> {
    let p = generate_panel(spec, index)?;
    match spec.contamination {
        None => {
            let n = p.n_rows();
            Ok((p, vec![false; n]))
        }
        Some(c) => contaminate(&p, c.scheme, c.m, &spec.beta_true, &mut stream_rng(spec.seed, 2 * index + 1)),
    }
}

/// Fits every requested estimator on one panel, sharing the weighted
/// within and between fits with the weighted random-effects fit.
fn fit_all(p: &PanelDataset, kinds: &[EstimatorKind], cfg: &WleConfig) -> Vec<Option<Draw>> {
    let mut cache: BTreeMap<EstimatorKind, Option<RobustFit>> = BTreeMap::new();
    let reuse = cfg.theta_components == ComponentSource::Robust;
    let robust = |kind: EstimatorKind, cache: &mut BTreeMap<EstimatorKind, Option<RobustFit>>| -> Option<RobustFit> {
        if let Some(hit) = cache.get(&kind) {
            return hit.clone();
        }
        let fit = match kind {
            EstimatorKind::Wpols => fit_wpols(p, cfg).ok(),
            EstimatorKind::Wbe => fit_wbe(p, cfg).ok(),
            EstimatorKind::Wfe => fit_wfe(p, cfg).ok(),
            _ => None,
        };
        cache.insert(kind, fit.clone());
        fit
    };
    kinds
        .iter()
        .map(|&kind| {
            let fit = match kind {
                EstimatorKind::Wre if reuse => {
                    let wfe = robust(EstimatorKind::Wfe, &mut cache);
                    let wbe = robust(EstimatorKind::Wbe, &mut cache);
                    wfe.zip(wbe).and_then(|(a, b)| fit_wre_from(p, cfg, &a, &b).ok())
                }
                EstimatorKind::Wre => fit_wre(p, cfg).ok(),
                k if k.is_weighted() => robust(k, &mut cache),
                k => fit_classical(k, p).ok().map(|fit| RobustFit { theta_used: fit.theta, fit, wle: None, fallback: false }),
            }?;
            Some(Draw { beta: fit.fit.beta, se: fit.fit.std_errors, fallback: fit.fallback })
        })
        .collect()
}

/// Monte Carlo loop. Replications run in parallel; each draws from its own
/// counter-based streams and results are reduced in replication order, so
/// the output does not depend on the thread count.
pub fn run_simulation(spec: &SimSpec, kinds: &[EstimatorKind], cfg: &WleConfig) -> Result<SimResult> {
    spec.validate()?;
    cfg.validate(spec.k() + 1)?;
    let started = Instant::now();
    let draws: Vec<Vec<Option<Draw>>> = (0..spec.replications as u64)
        .into_par_iter()
        .map(|s| -> Result<Vec<Option<Draw>>> {
            let (p, _) = replication_panel(spec, s)?;
            let rep_cfg = WleConfig { seed: derive_seed(spec.seed, s), ..cfg.clone() };
            Ok(fit_all(&p, kinds, &rep_cfg))
        })
        .collect::<Result<_>>()?;

    let q = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(1.0 - spec.gamma / 2.0);
    let k = spec.k();
    let estimators = kinds
        .iter()
        .enumerate()
        .map(|(e, &kind)| {
            let mut sq = 0.0;
            let mut hits = vec![0usize; k];
            let mut sum_beta = vec![0.0; k];
            let (mut used, mut failed, mut fallbacks) = (0usize, 0usize, 0usize);
            for rep in &draws {
                let Some(d) = &rep[e] else {
                    failed += 1;
                    continue;
                };
                used += 1;
                fallbacks += usize::from(d.fallback);
                for j in 0..k {
                    let err = d.beta[j] - spec.beta_true[j];
                    sq += err * err;
                    sum_beta[j] += d.beta[j];
                    let t = d.beta[j] / d.se[j];
                    let counted = match spec.power_rule {
                        PowerRule::Rejection => t.abs() > q,
                        PowerRule::AcceptanceBand => t.abs() <= q,
                    };
                    hits[j] += usize::from(counted);
                }
            }
            let denom = used as f64;
            EstimatorSummary {
                kind,
                mse: sq / denom,
                power: hits.iter().map(|&h| h as f64 / denom).collect(),
                mean_beta: sum_beta.iter().map(|b| b / denom).collect(),
                n_fallbacks: fallbacks,
                n_failed: failed,
                n_used: used,
            }
        })
        .collect();
    Ok(SimResult { spec: spec.clone(), estimators, runtime_secs: started.elapsed().as_secs_f64() })
}
