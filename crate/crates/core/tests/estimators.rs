use panel_wle::ols::{
    estimate_variance_components, fit_between, fit_classical, fit_fixed_effects, fit_pooled_ols, fit_random_effects,
    fit_random_effects_with_theta,
};
use panel_wle::sim::{replication_panel, Dgp, Scheme, SimSpec};
use panel_wle::{estimate, fit_wpols, fit_wre_with_theta, EstimatorKind, Error, PanelDataset, WleConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn noiseless(n: usize, t: usize) -> PanelDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..n * t * 2).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y = x.chunks(2).map(|r| 2.4 * r[0] - 1.2 * r[1]).collect();
    PanelDataset::from_arrays(n, t, 2, y, x).unwrap()
}

#[test]
fn every_estimator_is_exact_on_noiseless_data() {
    let p = noiseless(12, 3);
    for kind in EstimatorKind::ALL {
        let fit = estimate(kind, &p, &WleConfig::default()).unwrap();
        assert!((fit.fit.beta[0] - 2.4).abs() < 1e-10, "{kind}: {:?}", fit.fit.beta);
        assert!((fit.fit.beta[1] + 1.2).abs() < 1e-10, "{kind}: {:?}", fit.fit.beta);
    }
    let vc = estimate_variance_components(&p).unwrap();
    assert_eq!((vc.sigma2_eps(), vc.sigma2_alpha(), vc.theta()), (0.0, 0.0, 0.0));
}

#[test]
fn exact_line_with_intercept() {
    let x = vec![0.5, 1.0, -1.0, 2.0, 3.0, 0.0];
    let y = x.iter().map(|v| 2.0 * v).collect();
    let fit = fit_pooled_ols(&PanelDataset::from_arrays(3, 2, 1, y, x).unwrap()).unwrap();
    assert!(fit.intercept.unwrap().estimate.abs() < 1e-10 && (fit.beta[0] - 2.0).abs() < 1e-10);
}

#[test]
fn degenerate_designs_are_reported() {
    let flat = PanelDataset::from_arrays(3, 2, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![1.0; 6]).unwrap();
    assert!(matches!(fit_pooled_ols(&flat), Err(Error::RankDeficient { .. })));

    let two = PanelDataset::from_arrays(2, 2, 1, vec![1.0, 2.0, 3.0, 4.0], vec![0.1, 0.4, 0.2, 0.9]).unwrap();
    assert!(matches!(fit_between(&two), Err(Error::TooFewIndividuals { .. })));

    let invariant =
        PanelDataset::from_arrays(3, 2, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![1.0, 1.0, 2.0, 2.0, 5.0, 5.0]).unwrap();
    assert!(matches!(fit_fixed_effects(&invariant), Err(Error::NoWithinVariation { regressor: 1 })));
}

#[test]
fn constant_between_response() {
    let x = vec![0.3, 1.1, -0.4, 2.0, 0.9, 1.7, -1.0, 0.2];
    let y = vec![4.0, 6.0, 5.5, 4.5, 3.0, 7.0, 5.0, 5.0];
    let fit = fit_between(&PanelDataset::from_arrays(4, 2, 1, y, x).unwrap()).unwrap();
    assert!(fit.beta[0].abs() < 1e-10 && (fit.intercept.unwrap().estimate - 5.0).abs() < 1e-10);
}

#[test]
fn variance_components_are_recovered() {
    let (n, t) = (500, 5);
    let (mut se, mut sa) = (0.0, 0.0);
    for s in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + s);
        let mut x = Vec::with_capacity(n * t);
        let mut y = Vec::with_capacity(n * t);
        for _ in 0..n {
            let a: f64 = rng.sample(StandardNormal);
            for _ in 0..t {
                let v: f64 = rng.sample(StandardNormal);
                let e: f64 = rng.sample(StandardNormal);
                x.push(v);
                y.push(1.5 * v + a + e);
            }
        }
        let vc = estimate_variance_components(&PanelDataset::from_arrays(n, t, 1, y, x).unwrap()).unwrap();
        se += vc.sigma2_eps() / 50.0;
        sa += vc.sigma2_alpha() / 50.0;
    }
    assert!((se - 1.0).abs() < 0.15 && (sa - 1.0).abs() < 0.15, "{se} {sa}");
}

#[test]
fn between_variance_below_the_floor_is_clamped() {
    // Individual means lie exactly on a line, so the between regression has
    // no residual variance.
    let x = vec![0.0, 1.0, 1.0, 3.0, 2.0, 2.5, 4.0, 3.0];
    let e = [0.5, -0.5, -1.0, 1.0, 0.3, -0.3, 0.8, -0.8];
    let y = x.iter().zip(e).map(|(v, e)| 1.0 + 2.0 * v + e).collect();
    let p = PanelDataset::from_arrays(4, 2, 1, y, x).unwrap();
    let vc = estimate_variance_components(&p).unwrap();
    assert_eq!(vc.sigma2_alpha(), 0.0);
    let (re, pols) = (fit_random_effects(&p).unwrap(), fit_pooled_ols(&p).unwrap());
    assert!((re.beta[0] - pols.beta[0]).abs() < 1e-10);

    let cfg = WleConfig::default();
    let wre = fit_wre_with_theta(&p, &cfg, 0.0).unwrap();
    let wpols = fit_wpols(&p, &cfg).unwrap();
    assert!((wre.fit.beta[0] - wpols.fit.beta[0]).abs() < 1e-8);
}

#[test]
fn theta_path_runs_from_pooled_to_within() {
    let mut spec = SimSpec::new(Dgp::FixedEffects, 15, 4);
    spec.seed = 8;
    let (p, _) = replication_panel(&spec, 0).unwrap();
    let pols = fit_pooled_ols(&p).unwrap();
    let fe = fit_fixed_effects(&p).unwrap();
    let at = |th: f64| fit_random_effects_with_theta(&p, th).unwrap().beta;
    for j in 0..2 {
        assert!((at(0.0)[j] - pols.beta[j]).abs() < 1e-10);
        assert!((at(1.0)[j] - fe.beta[j]).abs() < 1e-10);
    }
    let mut prev = at(0.0);
    for s in 1..=50 {
        let cur = at(s as f64 / 50.0);
        let jump = cur.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(jump < 0.5, "discontinuity at theta {}", s as f64 / 50.0);
        prev = cur;
    }
}

#[test]
fn identity_raf_reproduces_classical_fits() {
    let mut spec = SimSpec::new(Dgp::RandomEffects, 20, 3);
    spec.seed = 4;
    let (p, _) = replication_panel(&spec, 0).unwrap();
    let cfg = WleConfig::identity();
    for kind in [EstimatorKind::Wpols, EstimatorKind::Wbe, EstimatorKind::Wfe, EstimatorKind::Wre] {
        let robust = estimate(kind, &p, &cfg).unwrap().fit;
        let classical = fit_classical(kind.classical(), &p).unwrap();
        let tol = if kind == EstimatorKind::Wre { 1e-6 } else { 1e-10 };
        for j in 0..2 {
            assert!((robust.beta[j] - classical.beta[j]).abs() <= tol, "{kind}");
            assert!((robust.std_errors[j] - classical.std_errors[j]).abs() <= tol, "{kind}");
        }
    }
}

#[test]
fn contaminated_rows_get_less_weight() {
    for scheme in [Scheme::RandomVertical, Scheme::RandomLeverage, Scheme::ConcentratedVertical, Scheme::ConcentratedLeverage]
    {
        let mut spec = SimSpec::new(Dgp::RandomEffects, 120, 2);
        spec.contamination = Some(panel_wle::sim::Contamination { scheme, m: 12 });
        let (mut dirty, mut clean) = ((0.0, 0usize), (0.0, 0usize));
        for s in 0..50 {
            let (p, mask) = replication_panel(&spec, s).unwrap();
            let fit = fit_wpols(&p, &WleConfig { seed: s, ..WleConfig::default() }).unwrap();
            for (w, m) in fit.fit.weights.iter().zip(&mask) {
                let slot = if *m { &mut dirty } else { &mut clean };
                slot.0 += w;
                slot.1 += 1;
            }
        }
        let (md, mc) = (dirty.0 / dirty.1 as f64, clean.0 / clean.1 as f64);
        assert!(md < mc, "{scheme}: contaminated {md} vs clean {mc}");
    }
}

#[test]
fn weights_lie_in_unit_interval() {
    let mut spec = SimSpec::new(Dgp::FixedEffects, 40, 3);
    spec.contamination = Some(panel_wle::sim::Contamination { scheme: Scheme::RandomLeverage, m: 12 });
    let (p, _) = replication_panel(&spec, 0).unwrap();
    for kind in [EstimatorKind::Wpols, EstimatorKind::Wbe, EstimatorKind::Wfe, EstimatorKind::Wre] {
        let fit = estimate(kind, &p, &WleConfig::default()).unwrap();
        assert!(fit.fit.weights.iter().all(|w| (0.0..=1.0).contains(w)), "{kind}");
    }
}

#[test]
fn clean_efficiency_matches_least_squares() {
    let spec = SimSpec::new(Dgp::RandomEffects, 100, 4);
    let (mut ols, mut wle) = (0.0, 0.0);
    for s in 0..200 {
        let (p, _) = replication_panel(&spec, s).unwrap();
        let a = fit_pooled_ols(&p).unwrap();
        let b = fit_wpols(&p, &WleConfig { seed: s, ..WleConfig::default() }).unwrap();
        for j in 0..2 {
            ols += (a.beta[j] - spec.beta_true[j]).powi(2);
            wle += (b.fit.beta[j] - spec.beta_true[j]).powi(2);
        }
    }
    let ratio = wle / ols;
    assert!((0.9..=1.1).contains(&ratio), "{ratio}");
}
