use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal, StandardNormal, StudentT};

use super::spec::{block_len, check_contamination, Dgp, EffectLayout, ErrorLaw, Scheme, SimSpec};
use crate::error::Result;
use crate::panel::PanelDataset;
use crate::rng::stream_rng;

fn draw_error<R: Rng + ?Sized>(law: ErrorLaw, t5: &StudentT<f64>, rng: &mut R) -> f64 {
    match law {
        ErrorLaw::Normal01 => StandardNormal.sample(rng),
        ErrorLaw::StudentT5 => t5.sample(rng),
        ErrorLaw::DoubleExp1 => {
            let e: f64 = Exp1.sample(rng);
            if rng.random::<bool>() {
                e
            } else {
                -e
            }
        }
    }
}

/// Replication `index` of the design: `y = x'beta + alpha + eps` with
/// standard normal effects and regressors; under the fixed-effects design
/// every regressor also carries the effect.
pub fn generate_panel(spec: &SimSpec, index: u64) -> Result<PanelDataset> {
    let mut rng = stream_rng(spec.seed, 2 * index);
    let (n, t, k) = (spec.n, spec.t, spec.k());
    let rows = n * t;
    let t5 = StudentT::new(5.0).expect("valid degrees of freedom");

    let alpha: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut x: Vec<f64> = (0..rows * k).map(|_| StandardNormal.sample(&mut rng)).collect();
    let eps: Vec<f64> = (0..rows).map(|_| draw_error(spec.error_law, &t5, &mut rng)).collect();

    let effect = |r: usize| match spec.alpha_layout {
        EffectLayout::PerIndividual => alpha[r / t],
        EffectLayout::Recycled => alpha[r % n],
    };
    let mut y = Vec::with_capacity(rows);
    for r in 0..rows {
        let a = effect(r);
        let xr = &mut x[r * k..(r + 1) * k];
        if spec.dgp == Dgp::FixedEffects {
            xr.iter_mut().for_each(|v| *v += a);
        }
        y.push(xr.iter().zip(&spec.beta_true).map(|(x, b)| x * b).sum::<f64>() + a + eps[r]);
    }
    PanelDataset::from_arrays(n, t, k, y, x)
}

/// Replaces `m` cells by outliers. Returns the new panel and a mask of the
/// altered cells (row order of the panel).
///
/// Vertical outliers flip and triple the response; concentrated ones also
/// add `N(50, 1)`. Leverage points redraw every regressor from `N(5, 2^2)`,
/// move the response along the true regression to the new regressors and
/// then apply `y <- -3y + N(20, 2^2)`. Concentrated schemes contaminate
/// `ceil(T/2)` consecutive periods of `m / ceil(T/2)` distinct individuals.
pub fn contaminate<R: Rng + ?Sized>(
    p: &PanelDataset,
    scheme: Scheme,
    m: usize,
    beta_true: &[f64],
    rng: &mut R,
) -> Result<(PanelDataset, Vec<bool>)> {
    let (n, t, k) = (p.n_individuals(), p.n_periods(), p.n_regressors());
    check_contamination(scheme, m, n, t)?;
    let mut mask = vec![false; n * t];
    if m == 0 {
        return Ok((p.clone(), mask));
    }
    let cells: Vec<usize> = if scheme.is_concentrated() {
        let b = block_len(t);
        let chosen = sample(rng, n, m / b).into_vec();
        let mut cells = Vec::with_capacity(m);
        for i in chosen {
            let start = rng.random_range(0..=t - b);
            cells.extend((start..start + b).map(|s| p.row(i, s)));
        }
        cells
    } else {
        sample(rng, n * t, m).into_vec()
    };

    let mut y = p.y().to_vec();
    let mut x = p.x().to_vec();
    let lev = Normal::new(5.0, 2.0).expect("valid normal");
    let shift = Normal::new(20.0, 2.0).expect("valid normal");
    let far = Normal::new(50.0, 1.0).expect("valid normal");
    for r in cells {
        mask[r] = true;
        match scheme {
            Scheme::RandomVertical => y[r] *= -3.0,
            Scheme::ConcentratedVertical => y[r] = -3.0 * y[r] + far.sample(rng),
            Scheme::RandomLeverage | Scheme::ConcentratedLeverage => {
                for (j, b) in beta_true.iter().enumerate().take(k) {
                    let old = x[r * k + j];
                    let new = lev.sample(rng);
                    x[r * k + j] = new;
                    y[r] += (new - old) * b;
                }
                y[r] = -3.0 * y[r] + shift.sample(rng);
            }
        }
    }
    Ok((p.with_values(y, x)?, mask))
}
