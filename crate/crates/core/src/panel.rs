//! Balanced long-format panel storage.
//!
//! Observations are stored individual-major: row `r = i * T + t` holds
//! individual `i` at period `t`. Regressors are row-major, `K` values per row.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// One long-format observation before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub id: String,
    pub time: String,
    pub y: f64,
    pub x: Vec<f64>,
}

/// Column names used to pull a panel out of a CSV file.
#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub id: String,
    pub time: String,
    pub y: String,
    pub x: Vec<String>,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        ColumnSpec {
            id: "id".into(),
            time: "time".into(),
            y: "y".into(),
            x: vec!["x1".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    n_individuals: usize,
    n_periods: usize,
    n_regressors: usize,
    y: Vec<f64>,
    x: Vec<f64>,
    ids: Vec<String>,
    times: Vec<String>,
}

impl PanelDataset {
    /// Builds a panel from individual-major arrays with generated labels `1..=N`, `1..=T`.
    pub fn from_arrays(
        n_individuals: usize,
        n_periods: usize,
        n_regressors: usize,
        y: Vec<f64>,
        x: Vec<f64>,
    ) -> Result<Self> {
        let ids = (1..=n_individuals).map(|i| i.to_string()).collect();
        let times = (1..=n_periods).map(|t| t.to_string()).collect();
        Self::from_parts(n_individuals, n_periods, n_regressors, y, x, ids, times)
    }

    pub fn from_parts(
        n_individuals: usize,
        n_periods: usize,
        n_regressors: usize,
        y: Vec<f64>,
        x: Vec<f64>,
        ids: Vec<String>,
        times: Vec<String>,
    ) -> Result<Self> {
        check_shape(n_individuals, n_periods, n_regressors)?;
        let n_rows = n_individuals * n_periods;
        if y.len() != n_rows || x.len() != n_rows * n_regressors {
            return Err(Error::InvalidShape(format!(
                "expected {} responses and {} regressor values, got {} and {}",
                n_rows,
                n_rows * n_regressors,
                y.len(),
                x.len()
            )));
        }
        if ids.len() != n_individuals || times.len() != n_periods {
            return Err(Error::InvalidShape("label vectors do not match N and T".into()));
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row, column: "y".into() });
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                row: pos / n_regressors,
                column: format!("x{}", pos % n_regressors + 1),
            });
        }
        Ok(PanelDataset { n_individuals, n_periods, n_regressors, y, x, ids, times })
    }

    pub fn n_individuals(&self) -> usize {
        self.n_individuals
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn n_regressors(&self) -> usize {
        self.n_regressors
    }

    pub fn n_rows(&self) -> usize {
        self.n_individuals * self.n_periods
    }

    #[inline]
    pub fn row(&self, individual: usize, period: usize) -> usize {
        individual * self.n_periods + period
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Row-major `NT x K` regressor block.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_row(&self, row: usize) -> &[f64] {
        &self.x[row * self.n_regressors..(row + 1) * self.n_regressors]
    }

    pub fn y_at(&self, individual: usize, period: usize) -> f64 {
        self.y[self.row(individual, period)]
    }

    pub fn x_at(&self, individual: usize, period: usize, regressor: usize) -> f64 {
        self.x[self.row(individual, period) * self.n_regressors + regressor]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn times(&self) -> &[String] {
        &self.times
    }

    /// Returns a copy with the response replaced.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        Self::from_parts(
            self.n_individuals,
            self.n_periods,
            self.n_regressors,
            y,
            self.x.clone(),
            self.ids.clone(),
            self.times.clone(),
        )
    }

    /// Returns a copy with response and regressors replaced.
    pub fn with_values(&self, y: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        Self::from_parts(
            self.n_individuals,
            self.n_periods,
            self.n_regressors,
            y,
            x,
            self.ids.clone(),
            self.times.clone(),
        )
    }

    /// Writes the long-format CSV (`id,time,y,x1,...,xK`). Values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string(), "time".to_string(), "y".to_string()];
        header.extend((1..=self.n_regressors).map(|k| format!("x{k}")));
        wtr.write_record(&header)?;
        for i in 0..self.n_individuals {
            for t in 0..self.n_periods {
                let r = self.row(i, t);
                let mut rec = vec![self.ids[i].clone(), self.times[t].clone(), self.y[r].to_string()];
                rec.extend(self.x_row(r).iter().map(|v| v.to_string()));
                wtr.write_record(&rec)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

fn check_shape(n: usize, t: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidShape(format!("need at least 2 individuals, got {n}")));
    }
    if t < 2 {
        return Err(Error::InvalidShape(format!("need at least 2 periods, got {t}")));
    }
    if k < 1 {
        return Err(Error::InvalidShape("need at least one regressor".into()));
    }
    if n * t <= k {
        return Err(Error::InvalidShape(format!(
            "{} observations cannot identify {} coefficients",
            n * t,
            k
        )));
    }
    Ok(())
}

/// Orders labels numerically when both parse as numbers, lexically otherwise.
pub(crate) fn compare_labels(a: &str, b: &str) -> Ordering {
    match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
        (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => {
            x.partial_cmp(&y).unwrap_or(Ordering::Equal).then_with(|| a.cmp(b))
        }
        _ => a.cmp(b),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Label(String);

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_labels(&self.0, &other.0)
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Validates raw long-format rows and packs them into a balanced panel
/// sorted by `(id, time)`.
pub fn validate_panel(rows: &[RawRow]) -> Result<PanelDataset> {
    let first = rows.first().ok_or(Error::EmptyInput)?;
    let k = first.x.len();
    for (r, row) in rows.iter().enumerate() {
        if row.x.len() != k {
            return Err(Error::InvalidShape(format!(
                "row {r} has {} regressors, expected {k}",
                row.x.len()
            )));
        }
        if !row.y.is_finite() {
            return Err(Error::NonFiniteValue { row: r, column: "y".into() });
        }
        if let Some(j) = row.x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row: r, column: format!("x{}", j + 1) });
        }
    }

    let mut cells: BTreeMap<Label, BTreeMap<Label, usize>> = BTreeMap::new();
    let mut all_times: BTreeMap<Label, ()> = BTreeMap::new();
    for (r, row) in rows.iter().enumerate() {
        let per_id = cells.entry(Label(row.id.clone())).or_default();
        if per_id.insert(Label(row.time.clone()), r).is_some() {
            return Err(Error::DuplicateCell { id: row.id.clone(), time: row.time.clone() });
        }
        all_times.insert(Label(row.time.clone()), ());
    }

    let times: Vec<String> = all_times.into_keys().map(|l| l.0).collect();
    let n = cells.len();
    let t = times.len();
    let mut y = Vec::with_capacity(n * t);
    let mut x = Vec::with_capacity(n * t * k);
    let mut ids = Vec::with_capacity(n);
    for (id, per_id) in &cells {
        if per_id.len() != t {
            let missing = times
                .iter()
                .find(|time| !per_id.contains_key(&Label((*time).clone())))
                .cloned()
                .unwrap_or_default();
            return Err(Error::UnbalancedPanel { id: id.0.clone(), time: missing });
        }
        for &r in per_id.values() {
            y.push(rows[r].y);
            x.extend_from_slice(&rows[r].x);
        }
        ids.push(id.0.clone());
    }
    PanelDataset::from_parts(n, t, k, y, x, ids, times)
}

/// Reads a long-format CSV, picking the named columns.
pub fn read_csv<R: Read>(reader: R, columns: &ColumnSpec) -> Result<PanelDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let lookup = |name: &str| -> Result<usize> {
        index.get(name).copied().ok_or_else(|| {
            Error::Schema(format!(
                "column `{name}` not found in header [{}]; expected long format `id,time,y,x1,...,xK` \
                 with one row per (id, time) cell",
                headers.iter().collect::<Vec<_>>().join(",")
            ))
        })
    };
    if columns.x.is_empty() {
        return Err(Error::Schema("at least one regressor column is required".into()));
    }
    let id_col = lookup(&columns.id)?;
    let time_col = lookup(&columns.time)?;
    let y_col = lookup(&columns.y)?;
    let x_cols: Vec<usize> = columns.x.iter().map(|c| lookup(c)).collect::<Result<_>>()?;

    let parse = |rec: &csv::StringRecord, col: usize, name: &str, line: usize| -> Result<f64> {
        let raw = rec.get(col).unwrap_or("");
        if raw.is_empty() {
            return Err(Error::Schema(format!("missing value in column `{name}` (data line {line})")));
        }
        let v: f64 = raw.parse().map_err(|_| {
            Error::Schema(format!("cannot parse `{raw}` in column `{name}` (data line {line})"))
        })?;
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { row: line, column: name.to_string() });
        }
        Ok(v)
    };

    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = line + 1;
        let id = rec.get(id_col).unwrap_or("").to_string();
        let time = rec.get(time_col).unwrap_or("").to_string();
        if id.is_empty() || time.is_empty() {
            return Err(Error::Schema(format!("missing id/time label (data line {line})")));
        }
        let y = parse(&rec, y_col, &columns.y, line)?;
        let x = x_cols
            .iter()
            .zip(&columns.x)
            .map(|(&c, name)| parse(&rec, c, name, line))
            .collect::<Result<Vec<_>>>()?;
        rows.push(RawRow { id, time, y, x });
    }
    validate_panel(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, time: &str, y: f64, x: f64) -> RawRow {
        RawRow { id: id.into(), time: time.into(), y, x: vec![x] }
    }

    #[test]
    fn packs_complete_two_by_two() {
        let rows = vec![row("b", "2", 4.0, 0.4), row("a", "1", 1.0, 0.1), row("b", "1", 3.0, 0.3), row("a", "2", 2.0, 0.2)];
        let p = validate_panel(&rows).unwrap();
        assert_eq!((p.n_individuals(), p.n_periods(), p.n_regressors()), (2, 2, 1));
        assert_eq!(p.y(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.x(), &[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(p.ids(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn missing_row_is_unbalanced() {
        let rows = vec![row("a", "1", 1.0, 0.1), row("a", "2", 2.0, 0.2), row("b", "1", 3.0, 0.3)];
        match validate_panel(&rows) {
            Err(Error::UnbalancedPanel { id, time }) => {
                assert_eq!(id, "b");
                assert_eq!(time, "2");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_response_rejected() {
        let rows = vec![row("a", "1", f64::NAN, 0.1), row("a", "2", 2.0, 0.2), row("b", "1", 3.0, 0.3), row("b", "2", 1.0, 0.0)];
        assert!(matches!(validate_panel(&rows), Err(Error::NonFiniteValue { row: 0, .. })));
    }

    #[test]
    fn duplicate_cell_rejected() {
        let rows = vec![row("a", "1", 1.0, 0.1), row("a", "1", 2.0, 0.2)];
        match validate_panel(&rows) {
            Err(Error::DuplicateCell { id, time }) => assert_eq!((id.as_str(), time.as_str()), ("a", "1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        let rows: Vec<RawRow> = ["10", "2", "1"]
            .iter()
            .flat_map(|id| (1..=2).map(move |t| row(id, &t.to_string(), 0.0, t as f64)))
            .collect();
        let p = validate_panel(&rows).unwrap();
        assert_eq!(p.ids(), &["1".to_string(), "2".to_string(), "10".to_string()]);
    }

    #[test]
    fn single_period_rejected() {
        let rows = vec![row("a", "1", 1.0, 0.1), row("b", "1", 2.0, 0.2)];
        assert!(matches!(validate_panel(&rows), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let p = PanelDataset::from_arrays(2, 3, 2, vec![0.1, 1.0 / 3.0, -2.5e-7, 4.0, 5.0, 6.0], (0..12).map(|v| v as f64 * 0.7).collect()).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let cols = ColumnSpec { x: vec!["x1".into(), "x2".into()], ..Default::default() };
        let q = read_csv(buf.as_slice(), &cols).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn csv_missing_column_names_schema() {
        let data = "id,period,y,x1\n1,1,0,0\n";
        let err = read_csv(data.as_bytes(), &ColumnSpec::default()).unwrap_err();
        assert!(err.to_string().contains("`time`"), "{err}");
    }
}
