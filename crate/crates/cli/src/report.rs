//! Output formatting for `fit`.

use std::fmt::Write as _;

use anyhow::Result;
use panel_wle::{PanelDataset, RobustFit};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct FitRow {
    pub estimator: String,
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
    pub sigma: f64,
    pub theta: Option<f64>,
    pub n_obs: f64,
    pub weight_min: Option<f64>,
    pub weight_median: Option<f64>,
    pub weights_below_half: Option<usize>,
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy)]
struct WeightSummary {
    min: f64,
    median: f64,
    below_half: usize,
}

fn summarize(w: &[f64]) -> Option<WeightSummary> {
    if w.is_empty() {
        return None;
    }
    let mut s = w.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    let median = if s.len() % 2 == 1 { s[mid] } else { 0.5 * (s[mid - 1] + s[mid]) };
    Some(WeightSummary { min: s[0], median, below_half: s.iter().filter(|&&v| v < 0.5).count() })
}

fn weight_summary(f: &RobustFit) -> Option<WeightSummary> {
    if f.fit.kind.is_weighted() {
        summarize(&f.fit.weights)
    } else {
        None
    }
}

pub fn rows(fits: &[RobustFit], names: &[String]) -> Vec<FitRow> {
    let mut out = Vec::new();
    for f in fits {
        let ws = weight_summary(f);
        let terms = f
            .fit
            .intercept
            .iter()
            .map(|c| ("(intercept)".to_string(), c.estimate, c.std_error))
            .chain(names.iter().zip(f.fit.beta.iter().zip(&f.fit.std_errors)).map(|(n, (b, s))| (n.clone(), *b, *s)));
        for (term, estimate, std_error) in terms {
            out.push(FitRow {
                estimator: f.fit.kind.to_string(),
                term,
                estimate,
                std_error,
                sigma: f.fit.sigma_hat,
                theta: f.theta_used,
                n_obs: f.fit.n_obs_effective,
                weight_min: ws.map(|w| w.min),
                weight_median: ws.map(|w| w.median),
                weights_below_half: ws.map(|w| w.below_half),
                fallback: f.fallback,
            });
        }
    }
    out
}

pub fn csv(rows: &[FitRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn pad(s: &str, w: usize) -> String {
    format!("{s:>w$}")
}

/// One column per estimator with `estimate (se)` cells.
pub fn text(fits: &[RobustFit], names: &[String]) -> String {
    let mut terms: Vec<String> = Vec::new();
    if fits.iter().any(|f| f.fit.intercept.is_some()) {
        terms.push("(intercept)".into());
    }
    terms.extend(names.iter().cloned());

    let cell = |f: &RobustFit, term: &str| -> String {
        let coef = if term == "(intercept)" {
            f.fit.intercept.map(|c| (c.estimate, c.std_error))
        } else {
            names.iter().position(|n| n == term).map(|j| (f.fit.beta[j], f.fit.std_errors[j]))
        };
        coef.map_or_else(|| "-".into(), |(b, s)| format!("{b:.4} ({s:.4})"))
    };
    let mut table: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend(fits.iter().map(|f| f.fit.kind.to_string()));
    table.push(header);
    for t in &terms {
        let mut row = vec![t.clone()];
        row.extend(fits.iter().map(|f| cell(f, t)));
        table.push(row);
    }
    let mut extra = |label: &str, g: &dyn Fn(&RobustFit) -> String| {
        let mut row = vec![label.to_string()];
        row.extend(fits.iter().map(g));
        table.push(row);
    };
    extra("sigma", &|f| format!("{:.4}", f.fit.sigma_hat));
    extra("theta", &|f| f.theta_used.map_or_else(|| "-".into(), |t| format!("{t:.4}")));
    extra("weight min", &|f| weight_summary(f).map_or_else(|| "-".into(), |w| format!("{:.4}", w.min)));
    extra("weight median", &|f| weight_summary(f).map_or_else(|| "-".into(), |w| format!("{:.4}", w.median)));
    extra("weights < 0.5", &|f| weight_summary(f).map_or_else(|| "-".into(), |w| w.below_half.to_string()));
    extra("fallback", &|f| if f.fallback { "yes".into() } else { "no".into() });

    let cols = table[0].len();
    let widths: Vec<usize> = (0..cols).map(|j| table.iter().map(|r| r[j].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &table {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, &w))| if j == 0 { format!("{c:<w$}") } else { pad(c, w) })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

/// Per-row weights of the weighted fits. Between-regression rows are whole
/// individuals and carry an empty time field.
pub fn weights_csv(fits: &[RobustFit], p: &PanelDataset) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["estimator", "id", "time", "weight"])?;
    let t = p.n_periods();
    for f in fits.iter().filter(|f| f.fit.kind.is_weighted()) {
        let name = f.fit.kind.to_string();
        let cell_level = f.fit.weights.len() == p.n_rows();
        for (row, weight) in f.fit.weights.iter().enumerate() {
            let (id, time) = if cell_level {
                (&p.ids()[row / t], p.times()[row % t].as_str())
            } else {
                (&p.ids()[row], "")
            };
            w.write_record([name.as_str(), id, time, &weight.to_string()])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
