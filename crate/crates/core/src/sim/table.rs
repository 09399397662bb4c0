use super::run::SimResult;

pub const CSV_HEADER: &str = "estimator,dgp,N,T,error,scheme,level,mse,power_b1,power_b2,fallbacks";

/// Fixed notation with four significant digits.
pub fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return "NaN".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (3 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding may carry into a new digit, e.g. 9.9996 -> 10.000
    let rounded: f64 = s.parse().unwrap_or(x);
    if decimals > 0 && rounded.abs() >= 10f64.powi(mag + 1) {
        return format!("{x:.prec$}", prec = decimals - 1);
    }
    s
}

fn opt(v: Option<&f64>) -> String {
    v.map_or_else(String::new, |x| sig4(*x))
}

fn cells(r: &SimResult) -> Vec<[String; 11]> {
    let spec = &r.spec;
    let scheme = spec.contamination.map_or_else(|| "none".to_string(), |c| c.scheme.to_string());
    r.estimators
        .iter()
        .map(|e| {
            [
                e.kind.to_string(),
                spec.dgp.to_string(),
                spec.n.to_string(),
                spec.t.to_string(),
                spec.error_law.to_string(),
                scheme.clone(),
                sig4(spec.level()),
                sig4(e.mse),
                opt(e.power.first()),
                opt(e.power.get(1)),
                (e.n_fallbacks + e.n_failed).to_string(),
            ]
        })
        .collect()
}

/// One CSV row per (estimator, scenario), in input order.
pub fn emit_table(results: &[SimResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in results.iter().flat_map(cells) {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Column-aligned text rendering of the same table.
pub fn render_text(results: &[SimResult]) -> String {
    let header: Vec<String> = CSV_HEADER.split(',').map(str::to_string).collect();
    let rows: Vec<Vec<String>> = results.iter().flat_map(cells).map(|r| r.to_vec()).collect();
    let widths: Vec<usize> =
        (0..header.len()).map(|j| rows.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0)).collect();
    let line = |r: &[String]| {
        r.iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, w))| if j < 6 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(&header);
    out.push('\n');
    for r in &rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}
