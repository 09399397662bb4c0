use super::density::{smoothed_model_density, KdeMethod, KernelSmoother};

/// Composite Simpson intervals used for the disparity integral.
pub const QUADRATURE_INTERVALS: usize = 2048;

/// Squared-Hellinger disparity `int G(delta(x)) m*(x) dx`, evaluated as the
/// equivalent `int 2 (sqrt f* - sqrt m*)^2 dx` over
/// `[min r - 5(sigma + h), max r + 5(sigma + h)]`.
pub fn disparity(residuals: &[f64], sigma: f64, h: f64) -> f64 {
    disparity_with(residuals, sigma, h, KdeMethod::Exact, QUADRATURE_INTERVALS)
}

pub fn disparity_with(residuals: &[f64], sigma: f64, h: f64, method: KdeMethod, intervals: usize) -> f64 {
    let intervals = intervals.max(2) & !1;
    let (min, max) = residuals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let pad = 5.0 * (sigma + h);
    let (a, b) = (min - pad, max + pad);
    let step = (b - a) / intervals as f64;
    let smoother = KernelSmoother::new(residuals, h, method);
    let integrand = |x: f64| {
        let d = smoother.density(x).sqrt() - smoothed_model_density(x, sigma, h).sqrt();
        2.0 * d * d
    };
    let mut sum = integrand(a) + integrand(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(a + i as f64 * step);
    }
    sum * step / 3.0
}
