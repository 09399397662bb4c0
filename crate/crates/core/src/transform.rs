//! Pooled, within, between and quasi-demeaning transforms.

use crate::panel::PanelDataset;
use crate::variance::VarianceComponents;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformKind {
    Pooled,
    Within,
    Between,
    Quasi { theta: f64 },
}

/// Maps a transformed row back to the panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowRef {
    Cell { individual: usize, period: usize },
    Individual(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedData {
    pub y: Vec<f64>,
    /// Row-major, `n_cols` values per row.
    pub x: Vec<f64>,
    pub n_cols: usize,
    pub row_index: Vec<RowRef>,
    pub kind: TransformKind,
}

impl TransformedData {
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn x_row(&self, row: usize) -> &[f64] {
        &self.x[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.x[r * self.n_cols + col]).collect()
    }
}

fn cell_index(p: &PanelDataset) -> Vec<RowRef> {
    (0..p.n_individuals())
        .flat_map(|i| (0..p.n_periods()).map(move |t| RowRef::Cell { individual: i, period: t }))
        .collect()
}

/// Per-individual means: (ybar of length N, xbar row-major N x K).
pub fn individual_means(p: &PanelDataset) -> (Vec<f64>, Vec<f64>) {
    let (n, t, k) = (p.n_individuals(), p.n_periods(), p.n_regressors());
    let tf = t as f64;
    let mut ybar = vec![0.0; n];
    let mut xbar = vec![0.0; n * k];
    for i in 0..n {
        let mut sy = 0.0;
        for s in 0..t {
            let r = p.row(i, s);
            sy += p.y()[r];
            for (acc, v) in xbar[i * k..(i + 1) * k].iter_mut().zip(p.x_row(r)) {
                *acc += v;
            }
        }
        ybar[i] = sy / tf;
        for acc in &mut xbar[i * k..(i + 1) * k] {
            *acc /= tf;
        }
    }
    (ybar, xbar)
}

pub fn pooled(p: &PanelDataset) -> TransformedData {
    TransformedData {
        y: p.y().to_vec(),
        x: p.x().to_vec(),
        n_cols: p.n_regressors(),
        row_index: cell_index(p),
        kind: TransformKind::Pooled,
    }
}

/// Subtracts `theta` times the individual mean from every column.
fn demean_by(p: &PanelDataset, theta: f64, kind: TransformKind) -> TransformedData {
    let (ybar, xbar) = individual_means(p);
    let k = p.n_regressors();
    let mut y = Vec::with_capacity(p.n_rows());
    let mut x = Vec::with_capacity(p.n_rows() * k);
    for i in 0..p.n_individuals() {
        for t in 0..p.n_periods() {
            let r = p.row(i, t);
            y.push(p.y()[r] - theta * ybar[i]);
            x.extend(p.x_row(r).iter().zip(&xbar[i * k..(i + 1) * k]).map(|(v, m)| v - theta * m));
        }
    }
    TransformedData { y, x, n_cols: k, row_index: cell_index(p), kind }
}

pub fn within_transform(p: &PanelDataset) -> TransformedData {
    demean_by(p, 1.0, TransformKind::Within)
}

pub fn between_transform(p: &PanelDataset) -> TransformedData {
    let (y, x) = individual_means(p);
    TransformedData {
        y,
        x,
        n_cols: p.n_regressors(),
        row_index: (0..p.n_individuals()).map(RowRef::Individual).collect(),
        kind: TransformKind::Between,
    }
}

pub fn quasi_demean(p: &PanelDataset, vc: &VarianceComponents) -> TransformedData {
    quasi_demean_with_theta(p, vc.theta())
}

/// Quasi-demeaning with an externally supplied weight in `[0, 1]`.
pub fn quasi_demean_with_theta(p: &PanelDataset, theta: f64) -> TransformedData {
    if theta == 0.0 {
        let mut out = pooled(p);
        out.kind = TransformKind::Quasi { theta };
        return out;
    }
    demean_by(p, theta, TransformKind::Quasi { theta })
}
