//! Fits classical and weighted estimators to one contaminated simulated panel.
//!
//! cargo run --release -p panel-wle --example robust_fit

use panel_wle::sim::{replication_panel, Contamination, Dgp, Scheme, SimSpec};
use panel_wle::{estimate, EstimatorKind, WleConfig};

fn main() -> panel_wle::Result<()> {
    let mut spec = SimSpec::new(Dgp::RandomEffects, 80, 3);
    spec.contamination = Some(Contamination { scheme: Scheme::ConcentratedLeverage, m: 24 });
    let (panel, mask) = replication_panel(&spec, 0)?;
    println!("true slopes {:?}, {} contaminated cells", spec.beta_true, mask.iter().filter(|&&m| m).count());

    let cfg = WleConfig::default();
    for kind in EstimatorKind::ALL {
        let fit = estimate(kind, &panel, &cfg)?;
        let low = fit.fit.weights.iter().filter(|&&w| w < 0.5).count();
        println!("{kind:>6}  beta = [{:8.4}, {:8.4}]  se = [{:.4}, {:.4}]  weights < 0.5: {low}",
            fit.fit.beta[0], fit.fit.beta[1], fit.fit.std_errors[0], fit.fit.std_errors[1]);
    }
    Ok(())
}
