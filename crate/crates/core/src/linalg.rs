//! Rank-revealing (weighted) least squares: QR of the scaled design, then
//! an SVD of the small triangular factor.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value threshold below which a design is singular.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub beta: Vec<f64>,
    /// Diagonal of `(X'WX)^{-1}`.
    pub xtwx_inv_diag: Vec<f64>,
}

/// Minimises `sum_i w_i (y_i - x_i'b)^2`. `x` is row-major with `n_cols`
/// columns; `weights = None` means ordinary least squares.
pub fn least_squares(x: &[f64], n_cols: usize, y: &[f64], weights: Option<&[f64]>) -> Result<LeastSquares> {
    let n = y.len();
    debug_assert_eq!(x.len(), n * n_cols);
    if n < n_cols || n_cols == 0 {
        return Err(Error::RankDeficient { rank: n.min(n_cols), columns: n_cols });
    }
    let scale = |i: usize| weights.map_or(1.0, |w| w[i].max(0.0).sqrt());
    let a = DMatrix::from_fn(n, n_cols, |i, j| scale(i) * x[i * n_cols + j]);
    let mut b = DVector::from_fn(n, |i, _| scale(i) * y[i]);

    let qr = a.qr();
    qr.q_tr_mul(&mut b);
    let r = qr.r();
    let svd = r.svd(true, true);
    let s = &svd.singular_values;
    let s_max = s.max();
    let rank = s.iter().filter(|&&v| v > RANK_TOLERANCE * s_max).count();
    if s_max <= 0.0 || rank < n_cols {
        return Err(Error::RankDeficient { rank, columns: n_cols });
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");

    // beta = V S^-1 U' (Q'b)[..p]
    let qtb = b.rows(0, n_cols);
    let mut coef = u.transpose() * qtb;
    for (c, sv) in coef.iter_mut().zip(s.iter()) {
        *c /= sv;
    }
    let beta = v_t.transpose() * coef;

    let xtwx_inv_diag = (0..n_cols)
        .map(|j| (0..n_cols).map(|k| (v_t[(k, j)] / s[k]).powi(2)).sum())
        .collect();
    Ok(LeastSquares { beta: beta.iter().copied().collect(), xtwx_inv_diag })
}

/// `y - X b` for a row-major design.
pub fn residuals(x: &[f64], n_cols: usize, y: &[f64], beta: &[f64]) -> Vec<f64> {
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi - x[i * n_cols..(i + 1) * n_cols].iter().zip(beta).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0];
        let y = [1.0, 3.0, 5.0];
        let ls = least_squares(&x, 2, &y, None).unwrap();
        assert!((ls.beta[0] - 1.0).abs() < 1e-12);
        assert!((ls.beta[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_diagonal_matches_two_by_two() {
        // X'X = [[3, 3], [3, 5]], inverse diag = (5/6, 3/6)
        let x = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0];
        let ls = least_squares(&x, 2, &[0.0, 1.0, 0.0], None).unwrap();
        assert!((ls.xtwx_inv_diag[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((ls.xtwx_inv_diag[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn collinear_columns_rejected() {
        let x = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        assert!(matches!(least_squares(&x, 2, &[1.0, 2.0, 3.0], None), Err(Error::RankDeficient { rank: 1, columns: 2 })));
    }

    #[test]
    fn zero_weights_drop_rows() {
        let x = [1.0, 1.0, 1.0, 1.0];
        let y = [1.0, 2.0, 3.0, 100.0];
        let ls = least_squares(&x, 1, &y, Some(&[1.0, 1.0, 1.0, 0.0])).unwrap();
        assert!((ls.beta[0] - 2.0).abs() < 1e-12);
    }
}
