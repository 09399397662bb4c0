use panel_wle::linalg::residuals;
use panel_wle::ols::{fit_classical, fit_fixed_effects};
use panel_wle::wle::{solve_wle, weight, Raf};
use panel_wle::{
    between_transform, quasi_demean_with_theta, transform::pooled, within_transform, EstimatorKind, PanelDataset,
    VarianceComponents, WleConfig,
};
use proptest::prelude::*;

fn panel_strategy() -> impl Strategy<Value = PanelDataset> {
    (2usize..7, 2usize..5, 1usize..3).prop_flat_map(|(n, t, k)| {
        (prop::collection::vec(-50.0..50.0f64, n * t), prop::collection::vec(-10.0..10.0f64, n * t * k))
            .prop_map(move |(y, x)| PanelDataset::from_arrays(n, t, k, y, x).unwrap())
    })
}

/// Two-regressor panel with enough rows for every estimator.
fn fit_panel_strategy() -> impl Strategy<Value = PanelDataset> {
    (5usize..9, 3usize..5).prop_flat_map(|(n, t)| {
        (prop::collection::vec(-5.0..5.0f64, n * t), prop::collection::vec(-3.0..3.0f64, n * t * 2))
            .prop_map(move |(y, x)| PanelDataset::from_arrays(n, t, 2, y, x).unwrap())
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn within_is_idempotent(p in panel_strategy()) {
        let once = within_transform(&p);
        let again = within_transform(&p.with_values(once.y.clone(), once.x.clone()).unwrap());
        for (a, b) in once.y.iter().chain(&once.x).zip(again.y.iter().chain(&again.x)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn between_means_recombine(p in panel_strategy()) {
        let b = between_transform(&p);
        let t = p.n_periods();
        for i in 0..p.n_individuals() {
            let mean = (0..t).map(|s| p.y_at(i, s)).sum::<f64>() / t as f64;
            prop_assert!((b.y[i] - mean).abs() <= 1e-12);
        }
    }

    #[test]
    fn quasi_endpoints(p in panel_strategy()) {
        let zero = quasi_demean_with_theta(&p, 0.0);
        let base = pooled(&p);
        prop_assert_eq!(&zero.y, &base.y);
        prop_assert_eq!(&zero.x, &base.x);
        let one = quasi_demean_with_theta(&p, 1.0);
        let w = within_transform(&p);
        for (a, b) in one.y.iter().chain(&one.x).zip(w.y.iter().chain(&w.x)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn within_ignores_individual_shifts(p in panel_strategy(), shifts in prop::collection::vec(-100.0..100.0f64, 6)) {
        let t = p.n_periods();
        let y: Vec<f64> = p.y().iter().enumerate().map(|(r, v)| v + shifts[r / t]).collect();
        let a = within_transform(&p);
        let b = within_transform(&p.with_response(y).unwrap());
        for (u, v) in a.y.iter().zip(&b.y) {
            prop_assert!((u - v).abs() <= 1e-10);
        }
    }

    #[test]
    fn fixed_effects_ignores_individual_shifts(p in fit_panel_strategy(), shifts in prop::collection::vec(-100.0..100.0f64, 8)) {
        let t = p.n_periods();
        let y: Vec<f64> = p.y().iter().enumerate().map(|(r, v)| v + shifts[r / t]).collect();
        let a = fit_fixed_effects(&p).unwrap();
        let b = fit_fixed_effects(&p.with_response(y).unwrap()).unwrap();
        for (u, v) in a.beta.iter().zip(&b.beta) {
            prop_assert!(rel_close(*u, *v, 1e-9));
        }
    }

    #[test]
    fn theta_stays_in_unit_interval(s2e in 0.0..10.0f64, s2a in 0.0..10.0f64, t in 2usize..30) {
        let th = VarianceComponents::new(s2e, s2a, t).unwrap().theta();
        prop_assert!((0.0..1.0).contains(&th) || (s2e == 0.0 && th == 1.0));
    }

    #[test]
    fn classical_fits_are_scale_equivariant(p in fit_panel_strategy(), s in 0.1..20.0f64) {
        let scaled = p.with_response(p.y().iter().map(|v| v * s).collect()).unwrap();
        for kind in [EstimatorKind::Pols, EstimatorKind::Be, EstimatorKind::Fe, EstimatorKind::Re] {
            let (Ok(a), Ok(b)) = (fit_classical(kind, &p), fit_classical(kind, &scaled)) else { continue };
            for j in 0..2 {
                prop_assert!(rel_close(b.beta[j], s * a.beta[j], 1e-10), "{} beta", kind);
                prop_assert!(rel_close(b.std_errors[j], s * a.std_errors[j], 1e-10), "{} se", kind);
            }
        }
    }

    #[test]
    fn hellinger_weights_are_bounded_and_monotone(deltas in prop::collection::vec(-1.0..1e4f64, 2..40)) {
        let mut d = deltas;
        d.sort_by(f64::total_cmp);
        for w in d.iter().map(|&x| weight(x, Raf::Hellinger)) {
            prop_assert!((0.0..=1.0).contains(&w));
        }
        let pos: Vec<f64> = d.iter().copied().filter(|&x| x >= 0.0).collect();
        for pair in pos.windows(2) {
            prop_assert!(weight(pair[1], Raf::Hellinger) <= weight(pair[0], Raf::Hellinger));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn wle_is_location_scale_equivariant(
        seed in 0u64..1000,
        a in 0.2..5.0f64,
        b0 in -10.0..10.0f64,
        b1 in -10.0..10.0f64,
        outlier in 5.0..50.0f64,
    ) {
        let n = 60;
        let xs: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.71 + seed as f64).sin() * 2.0).collect();
        let x: Vec<f64> = xs.iter().flat_map(|&v| [1.0, v]).collect();
        let mut y: Vec<f64> = xs.iter().enumerate().map(|(i, v)| 0.5 + v + ((i as f64) * 1.3 + seed as f64).cos()).collect();
        y[0] += outlier;
        // The stopping rule is relative to 1 + max|beta|, so iterate far past
        // it to compare fixed points rather than stopping iterates.
        let cfg = WleConfig { seed, beta_tolerance: 1e-14, max_iterations: 5000, ..WleConfig::default() };
        let base = solve_wle(&y, &x, 2, &cfg).unwrap();
        let moved: Vec<f64> = y.iter().zip(&xs).map(|(v, xv)| a * v + b0 + b1 * xv).collect();
        let sol = solve_wle(&moved, &x, 2, &cfg).unwrap();
        prop_assert!(rel_close(sol.beta[0], a * base.beta[0] + b0, 1e-8));
        prop_assert!(rel_close(sol.beta[1], a * base.beta[1] + b1, 1e-8));
        prop_assert!(rel_close(sol.sigma_nu, a * base.sigma_nu, 1e-8));
    }

    #[test]
    fn scale_equation_holds_at_the_root(seed in 0u64..1000, outlier in 5.0..50.0f64) {
        let n = 50;
        let xs: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.53 + seed as f64).cos() * 3.0).collect();
        let x: Vec<f64> = xs.iter().flat_map(|&v| [1.0, v]).collect();
        let mut y: Vec<f64> = xs.iter().enumerate().map(|(i, v)| 2.0 * v + ((i * 7 + seed as usize) % 11) as f64 / 5.0).collect();
        y[3] -= outlier;
        let sol = solve_wle(&y, &x, 2, &WleConfig { seed, ..WleConfig::default() }).unwrap();
        let r = residuals(&x, 2, &y, &sol.beta);
        let eq: f64 = r.iter().zip(&sol.weights).map(|(r, w)| w * (r * r / sol.sigma_nu.powi(2) - 1.0)).sum();
        prop_assert!(eq.abs() <= 1e-8, "{}", eq);
    }

    #[test]
    fn wle_is_deterministic(p in fit_panel_strategy(), seed in 0u64..100) {
        let cfg = WleConfig { seed, ..WleConfig::default() };
        for kind in [EstimatorKind::Wpols, EstimatorKind::Wfe, EstimatorKind::Wre] {
            let a = panel_wle::estimate(kind, &p, &cfg);
            let b = panel_wle::estimate(kind, &p, &cfg);
            prop_assert_eq!(a.is_ok(), b.is_ok());
            if let (Ok(a), Ok(b)) = (a, b) {
                prop_assert_eq!(a, b);
            }
        }
    }
}
