//! Simulation grid files.
//!
//! One `key = value` per line, `#` starts a comment. Grid keys take
//! comma-separated lists and the grid is their Cartesian product:
//!
//! ```text
//! dgp           = I, II                  # I: effects in regressors, II: independent
//! error         = normal, t5, dexp
//! contamination = none, random_vertical:12, concentrated_leverage:24
//! panels        = 120x2, 80x3
//! ```
//!
//! Scalar keys: `replications`, `seed`, `gamma`, `alpha_layout`
//! (`per_individual` | `recycled`), `power_rule` (`rejection` |
//! `acceptance_band`), `beta` (comma-separated vector) and `estimators`
//! (list or `all`). Weighting overrides: `raf`, `c`, `target_weight`,
//! `ref_distance`, `n_bootstrap`, `subsample_size`, `max_iterations`,
//! `beta_tolerance`, `root_dedup_tolerance`, `kde`, `theta_components`.

use std::collections::BTreeSet;
use std::str::FromStr;

use super::spec::{Contamination, Dgp, EffectLayout, ErrorLaw, PowerRule, Scheme, SimSpec};
use crate::error::{Error, Result};
use crate::ols::EstimatorKind;
use crate::wle::{Bandwidth, WleConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// One spec per grid cell, in file order of the grid keys.
    pub specs: Vec<SimSpec>,
    pub estimators: Vec<EstimatorKind>,
    pub wle: WleConfig,
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("invalid value `{value}` for key `{key}`")))
}

fn parse_list<T: FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    list(value).map(str::parse).collect()
}

fn parse_panel(s: &str) -> Result<(usize, usize)> {
    let (n, t) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Config(format!("panel `{s}` must look like NxT")))?;
    Ok((parse_one("panels", n)?, parse_one("panels", t)?))
}

fn parse_contamination(s: &str) -> Result<Option<Contamination>> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    let (scheme, m) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("contamination `{s}` must be `none` or `scheme:m`")))?;
    Ok(Some(Contamination { scheme: scheme.parse::<Scheme>()?, m: parse_one("contamination", m)? }))
}

pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut base = SimSpec::new(Dgp::RandomEffects, 2, 2);
    let mut dgps = vec![Dgp::RandomEffects];
    let mut errors = vec![ErrorLaw::Normal01];
    let mut contaminations: Vec<Option<Contamination>> = vec![None];
    let mut panels: Option<Vec<(usize, usize)>> = None;
    let mut estimators = EstimatorKind::ALL.to_vec();
    let mut wle = WleConfig::default();
    let (mut c, mut target, mut dref) = (None, None, None);
    let mut seen = BTreeSet::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(Error::Config(format!("duplicate key `{key}`")));
        }
        match key {
            "replications" => base.replications = parse_one(key, value)?,
            "seed" => base.seed = parse_one(key, value)?,
            "gamma" => base.gamma = parse_one(key, value)?,
            "beta" => base.beta_true = list(value).map(|v| parse_one(key, v)).collect::<Result<_>>()?,
            "alpha_layout" => base.alpha_layout = value.parse::<EffectLayout>()?,
            "power_rule" => base.power_rule = value.parse::<PowerRule>()?,
            "estimators" => {
                estimators = if value.eq_ignore_ascii_case("all") { EstimatorKind::ALL.to_vec() } else { parse_list(value)? }
            }
            "dgp" => dgps = parse_list(value)?,
            "error" => errors = parse_list(value)?,
            "contamination" => contaminations = list(value).map(parse_contamination).collect::<Result<_>>()?,
            "panels" => panels = Some(list(value).map(parse_panel).collect::<Result<_>>()?),
            "raf" => wle.raf = value.parse()?,
            "c" => c = Some(parse_one::<f64>(key, value)?),
            "target_weight" => target = Some(parse_one::<f64>(key, value)?),
            "ref_distance" => dref = Some(parse_one::<f64>(key, value)?),
            "n_bootstrap" => wle.n_bootstrap = parse_one(key, value)?,
            "subsample_size" => wle.subsample_size = Some(parse_one(key, value)?),
            "max_iterations" => wle.max_iterations = parse_one(key, value)?,
            "beta_tolerance" => wle.beta_tolerance = parse_one(key, value)?,
            "root_dedup_tolerance" => wle.root_dedup_tolerance = parse_one(key, value)?,
            "kde" => wle.kde = value.parse()?,
            "theta_components" => wle.theta_components = value.parse()?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
    }

    wle.bandwidth = match (c, target, dref) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Error::Config("set either `c` or `target_weight`/`ref_distance`, not both".into()))
        }
        (Some(c), None, None) => Bandwidth::Constant(c),
        (None, t, d) => match wle.bandwidth {
            Bandwidth::TargetWeight { target_weight, ref_distance } => Bandwidth::TargetWeight {
                target_weight: t.unwrap_or(target_weight),
                ref_distance: d.unwrap_or(ref_distance),
            },
            b => b,
        },
    };
    let panels = panels.ok_or_else(|| Error::Config("missing required key `panels`".into()))?;
    if estimators.is_empty() || dgps.is_empty() || errors.is_empty() || contaminations.is_empty() || panels.is_empty() {
        return Err(Error::Config("grid keys and `estimators` need at least one value".into()));
    }

    let mut specs = Vec::new();
    for &dgp in &dgps {
        for &error_law in &errors {
            for &contamination in &contaminations {
                for &(n, t) in &panels {
                    let spec = SimSpec { dgp, n, t, error_law, contamination, ..base.clone() };
                    spec.validate()?;
                    specs.push(spec);
                }
            }
        }
    }
    wle.validate(base.beta_true.len() + 1)?;
    Ok(SimConfig { specs, estimators, wle })
}
