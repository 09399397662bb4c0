//! Iteratively reweighted solution of the weighted likelihood estimating
//! equations, with a bootstrap root search and minimum-disparity selection.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use super::config::WleConfig;
use super::density::log_density_ratios;
use super::disparity::{disparity_with, QUADRATURE_INTERVALS};
use super::weight::{weight_from_log_ratio, Raf};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, residuals};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrlsOutcome {
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateRoot {
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub disparity: f64,
    /// Bootstrap start that first reached this root.
    pub start: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WleSolution {
    pub beta: Vec<f64>,
    pub sigma_nu: f64,
    pub weights: Vec<f64>,
    pub disparity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub candidate_roots: Vec<CandidateRoot>,
    /// Index into `candidate_roots` of the returned root.
    pub selected: usize,
    pub failed_starts: usize,
    pub bandwidth_constant: f64,
}

/// Weights of residuals `r` under a normal model with scale `sigma`.
pub fn compute_weights(r: &[f64], sigma: f64, c: f64, cfg: &WleConfig) -> Vec<f64> {
    match cfg.raf {
        Raf::Identity => vec![1.0; r.len()],
        raf => log_density_ratios(r, sigma, c * sigma, cfg.kde)
            .into_iter()
            .map(|l| weight_from_log_ratio(l, raf))
            .collect(),
    }
}

fn weighted_scale(r: &[f64], w: &[f64]) -> f64 {
    let sw: f64 = w.iter().sum();
    let s: f64 = r.iter().zip(w).map(|(r, w)| w * r * r).sum();
    (s / sw).sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Reweighting iteration from `init_beta`. The initial scale defaults to the
/// residual standard error at `init_beta`.
pub fn irls_solve(
    y: &[f64],
    x: &[f64],
    n_cols: usize,
    init_beta: &[f64],
    init_sigma: Option<f64>,
    cfg: &WleConfig,
) -> Result<IrlsOutcome> {
    let c = cfg.bandwidth_constant()?;
    irls_with_constant(y, x, n_cols, init_beta, init_sigma, c, cfg)
}

fn irls_with_constant(
    y: &[f64],
    x: &[f64],
    n_cols: usize,
    init_beta: &[f64],
    init_sigma: Option<f64>,
    c: f64,
    cfg: &WleConfig,
) -> Result<IrlsOutcome> {
    let n = y.len();
    let exact_floor = 1e-12 * max_abs(y).max(f64::MIN_POSITIVE);
    let exact = |r: &[f64]| max_abs(r) <= exact_floor;
    let degenerate = || Error::RankDeficientUnderWeights { rank: 0, columns: n_cols };
    let mut beta = init_beta.to_vec();
    let mut r = residuals(x, n_cols, y, &beta);
    if exact(&r) {
        return Ok(IrlsOutcome { beta, sigma: 0.0, weights: vec![1.0; n], iterations: 0, converged: true });
    }
    let mut sigma = match init_sigma {
        Some(s) if s > exact_floor && s.is_finite() => s,
        _ => {
            let df = n.saturating_sub(n_cols).max(1) as f64;
            (r.iter().map(|v| v * v).sum::<f64>() / df).sqrt()
        }
    };
    let mut w = compute_weights(&r, sigma, c, cfg);

    for it in 1..=cfg.max_iterations {
        // Weight mass on fewer rows than parameters cannot define a scale.
        let mass: f64 = w.iter().sum();
        if mass.is_nan() || mass <= n_cols as f64 {
            return Err(degenerate());
        }
        let next = match least_squares(x, n_cols, y, Some(&w)) {
            Ok(ls) => ls.beta,
            Err(Error::RankDeficient { rank, columns }) => return Err(Error::RankDeficientUnderWeights { rank, columns }),
            Err(e) => return Err(e),
        };
        r = residuals(x, n_cols, y, &next);
        let step = next.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let converged = step <= cfg.beta_tolerance * (1.0 + max_abs(&next));
        beta = next;
        if exact(&r) {
            return Ok(IrlsOutcome { beta, sigma: 0.0, weights: vec![1.0; n], iterations: it, converged: true });
        }
        sigma = weighted_scale(&r, &w);
        if !(sigma > exact_floor && sigma.is_finite()) {
            return Err(degenerate());
        }
        w = compute_weights(&r, sigma, c, cfg);
        if converged {
            // Close the scale equation at the reported weights.
            sigma = weighted_scale(&r, &w);
            if !(sigma > exact_floor && sigma.is_finite()) {
                return Err(degenerate());
            }
            return Ok(IrlsOutcome { beta, sigma, weights: w, iterations: it, converged: true });
        }
    }
    Ok(IrlsOutcome { beta, sigma, weights: w, iterations: cfg.max_iterations, converged: false })
}

/// Start `b`: least squares on a random subsample, then reweighting on all rows.
fn run_start(b: usize, y: &[f64], x: &[f64], n_cols: usize, m: usize, c: f64, cfg: &WleConfig) -> Option<IrlsOutcome> {
    let n = y.len();
    let idx: Vec<usize> = if m >= n {
        (0..n).collect()
    } else {
        let mut v = sample(&mut stream_rng(cfg.seed, b as u64), n, m).into_vec();
        v.sort_unstable();
        v
    };
    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let xs: Vec<f64> = idx.iter().flat_map(|&i| x[i * n_cols..(i + 1) * n_cols].iter().copied()).collect();
    let ls = least_squares(&xs, n_cols, &ys, None).ok()?;
    let rss: f64 = residuals(&xs, n_cols, &ys, &ls.beta).iter().map(|r| r * r).sum();
    let sigma0 = (rss / (m.min(n) - n_cols) as f64).sqrt();
    let out = irls_with_constant(y, x, n_cols, &ls.beta, Some(sigma0), c, cfg).ok()?;
    out.converged.then_some(out)
}

/// Bootstrap root search: every start is iterated to a root, roots closer
/// than `root_dedup_tolerance` are merged, and the root with the smallest
/// disparity is returned. Ties go to the earliest start.
pub fn solve_wle(y: &[f64], x: &[f64], n_cols: usize, cfg: &WleConfig) -> Result<WleSolution> {
    cfg.validate(n_cols)?;
    let n = y.len();
    if x.len() != n * n_cols {
        return Err(Error::InvalidShape(format!("design has {} values, expected {n} x {n_cols}", x.len())));
    }
    let m = cfg.subsample_for(n_cols);
    if n < m {
        return Err(Error::InvalidShape(format!("{n} rows cannot supply subsamples of {m}")));
    }
    let c = cfg.bandwidth_constant()?;

    let outcomes: Vec<Option<IrlsOutcome>> =
        (0..cfg.n_bootstrap).into_par_iter().map(|b| run_start(b, y, x, n_cols, m, c, cfg)).collect();

    let failed_starts = outcomes.iter().filter(|o| o.is_none()).count();
    let mut roots: Vec<CandidateRoot> = Vec::new();
    let mut root_weights: Vec<Vec<f64>> = Vec::new();
    for (b, out) in outcomes.into_iter().enumerate() {
        let Some(out) = out else { continue };
        let dup = roots.iter().any(|root| {
            root.beta.iter().zip(&out.beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= cfg.root_dedup_tolerance
        });
        if dup {
            continue;
        }
        let r = residuals(x, n_cols, y, &out.beta);
        let disparity = if out.sigma > 0.0 {
            disparity_with(&r, out.sigma, c * out.sigma, cfg.kde, QUADRATURE_INTERVALS)
        } else {
            0.0 // exact fit
        };
        roots.push(CandidateRoot { beta: out.beta, sigma: out.sigma, disparity, start: b, iterations: out.iterations });
        root_weights.push(out.weights);
    }
    if roots.is_empty() {
        return Err(Error::NoConvergedRoot { starts: cfg.n_bootstrap });
    }
    let mut best = 0;
    for (i, root) in roots.iter().enumerate().skip(1) {
        if root.disparity < roots[best].disparity - 1e-12 {
            best = i;
        }
    }
    let chosen = &roots[best];
    Ok(WleSolution {
        beta: chosen.beta.clone(),
        sigma_nu: chosen.sigma,
        weights: root_weights.swap_remove(best),
        disparity: chosen.disparity,
        iterations: chosen.iterations,
        converged: true,
        selected: best,
        failed_starts,
        bandwidth_constant: c,
        candidate_roots: roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_design(n: usize) -> (Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let x = xs.iter().flat_map(|&v| [1.0, v]).collect();
        let y = xs.iter().map(|v| 1.0 + 2.0 * v).collect();
        (x, y)
    }

    #[test]
    fn noiseless_converges_immediately() {
        let (x, y) = line_design(40);
        let out = irls_solve(&y, &x, 2, &[0.5, 1.5], None, &WleConfig::default()).unwrap();
        assert!(out.converged && out.iterations <= 3);
        assert!((out.beta[0] - 1.0).abs() < 1e-10 && (out.beta[1] - 2.0).abs() < 1e-10);
        assert!(out.weights.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn identity_raf_is_least_squares() {
        let (x, mut y) = line_design(50);
        for (i, v) in y.iter_mut().enumerate() {
            *v += ((i * 7919) % 13) as f64 / 13.0 - 0.5;
        }
        let ols = least_squares(&x, 2, &y, None).unwrap().beta;
        let out = irls_solve(&y, &x, 2, &[0.0, 0.0], None, &WleConfig::identity()).unwrap();
        for (a, b) in out.beta.iter().zip(&ols) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn scale_equation_closes() {
        let (x, mut y) = line_design(80);
        for (i, v) in y.iter_mut().enumerate() {
            *v += ((i * 31) % 17) as f64 / 17.0 - 0.5;
        }
        y[3] += 40.0;
        let sol = solve_wle(&y, &x, 2, &WleConfig::default()).unwrap();
        let r = residuals(&x, 2, &y, &sol.beta);
        let eq: f64 = r.iter().zip(&sol.weights).map(|(r, w)| w * (r * r / (sol.sigma_nu * sol.sigma_nu) - 1.0)).sum();
        assert!(eq.abs() < 1e-8, "{eq}");
        assert!(sol.weights[3] < 0.05);
    }

    #[test]
    fn too_few_rows() {
        let (x, y) = line_design(3);
        assert!(matches!(solve_wle(&y, &x, 2, &WleConfig::default()), Err(Error::InvalidShape(_))));
    }
}
