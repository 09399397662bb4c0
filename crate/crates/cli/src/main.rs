mod report;

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use panel_wle::sim::{emit_table, parse_config, render_text, run_simulation};
use panel_wle::wle::config::single_outlier_weight;
use panel_wle::wle::{derive_bandwidth_constant, Bandwidth, Raf};
use panel_wle::{estimate, read_csv, ColumnSpec, EstimatorKind, WleConfig};

#[derive(Parser)]
#[command(name = "panelwle", version, about = "Classical and weighted-likelihood panel regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum RafArg {
    Hellinger,
    Identity,
}

#[derive(Subcommand)]
enum Command {
    /// Fit estimators to a long-format CSV panel.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "id")]
        id: String,
        #[arg(long, default_value = "time")]
        time: String,
        #[arg(long, default_value = "y")]
        y: String,
        /// Comma-separated regressor columns.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        /// Comma-separated subset of pols,wpols,be,wbe,fe,wfe,re,wre.
        #[arg(long, value_delimiter = ',', default_value = "pols,wpols,be,wbe,fe,wfe,re,wre")]
        estimators: Vec<String>,
        #[arg(long, value_enum, default_value = "hellinger")]
        raf: RafArg,
        /// Bandwidth constant; derived from the default target weight if omitted.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write per-row weights of every weighted fit to this CSV.
        #[arg(long)]
        dump_weights: Option<PathBuf>,
    },
    /// Run a simulation grid and write the results CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Derive the bandwidth constant from a target outlier weight.
    DeriveBandwidth {
        #[arg(long)]
        target_weight: f64,
        #[arg(long, default_value_t = 3.0)]
        ref_distance: f64,
    },
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Estimation(anyhow::Error),
}

impl Failure {
    fn classify(err: anyhow::Error) -> Self {
        match err.downcast_ref::<panel_wle::Error>() {
            Some(e) if !e.is_input_error() => Failure::Estimation(err),
            _ => Failure::Input(err),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit { data, id, time, y, x, estimators, raf, c, seed, out, format, dump_weights } => {
            let args = FitArgs { data, columns: ColumnSpec { id, time, y, x }, estimators, raf, c, seed, out, format, dump_weights };
            cmd_fit(&args)
        }
        Command::Simulate { config, out, seed, jobs } => cmd_simulate(&config, &out, seed, jobs),
        Command::DeriveBandwidth { target_weight, ref_distance } => {
            cmd_derive_bandwidth(target_weight, ref_distance).map_err(Failure::Input)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Estimation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

struct FitArgs {
    data: PathBuf,
    columns: ColumnSpec,
    estimators: Vec<String>,
    raf: RafArg,
    c: Option<f64>,
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
    dump_weights: Option<PathBuf>,
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
    }
}

fn cmd_fit(a: &FitArgs) -> Result<(), Failure> {
    let kinds: Vec<EstimatorKind> = a
        .estimators
        .iter()
        .map(|s| s.parse::<EstimatorKind>())
        .collect::<panel_wle::Result<_>>()
        .map_err(|e| Failure::Input(e.into()))?;
    let file = File::open(&a.data).with_context(|| format!("opening {}", a.data.display())).map_err(Failure::Input)?;
    let panel = read_csv(BufReader::new(file), &a.columns)
        .with_context(|| format!("reading {}", a.data.display()))
        .map_err(Failure::classify)?;

    let mut cfg = WleConfig {
        raf: match a.raf {
            RafArg::Hellinger => Raf::Hellinger,
            RafArg::Identity => Raf::Identity,
        },
        seed: a.seed,
        ..WleConfig::default()
    };
    if let Some(c) = a.c {
        cfg.bandwidth = Bandwidth::Constant(c);
    }
    cfg.bandwidth_constant().map_err(|e| Failure::Input(e.into()))?;

    let fits = kinds
        .iter()
        .map(|&k| estimate(k, &panel, &cfg).with_context(|| format!("fitting {k}")))
        .collect::<Result<Vec<_>>>()
        .map_err(Failure::classify)?;

    let rows = report::rows(&fits, &a.columns.x);
    let text = match a.format {
        Format::Csv => report::csv(&rows).map_err(Failure::Input)?,
        Format::Json => serde_json::to_string_pretty(&rows).map_err(|e| Failure::Input(e.into()))? + "\n",
        Format::Text => report::text(&fits, &a.columns.x),
    };
    write_output(a.out.as_ref(), &text).map_err(Failure::Input)?;
    if let Some(path) = &a.dump_weights {
        let csv = report::weights_csv(&fits, &panel).map_err(Failure::Input)?;
        write_output(Some(path), &csv).map_err(Failure::Input)?;
    }
    Ok(())
}

fn cmd_simulate(config: &PathBuf, out: &PathBuf, seed: Option<u64>, jobs: Option<usize>) -> Result<(), Failure> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display())).map_err(Failure::Input)?;
    let mut grid = parse_config(&text).with_context(|| format!("in {}", config.display())).map_err(Failure::Input)?;
    if let Some(s) = seed {
        grid.specs.iter_mut().for_each(|spec| spec.seed = s);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Input(anyhow!("cannot start {} worker threads: {e}", jobs.unwrap_or(0))))?;

    let total = grid.specs.len();
    let mut results = Vec::new();
    let mut failures = 0;
    for (i, spec) in grid.specs.iter().enumerate() {
        let label = format!(
            "dgp={} N={} T={} error={} contamination={}",
            spec.dgp,
            spec.n,
            spec.t,
            spec.error_law,
            spec.contamination.map_or_else(|| "none".to_string(), |c| format!("{}:{}", c.scheme, c.m))
        );
        match pool.install(|| run_simulation(spec, &grid.estimators, &grid.wle)) {
            Ok(r) => {
                eprintln!("[{}/{total}] {label} done in {:.1}s", i + 1, r.runtime_secs);
                results.push(r);
            }
            Err(e) => {
                failures += 1;
                eprintln!("[{}/{total}] {label} failed: {e}", i + 1);
            }
        }
    }
    fs::write(out, emit_table(&results)).with_context(|| format!("writing {}", out.display())).map_err(Failure::Input)?;
    print!("{}", render_text(&results));
    if results.is_empty() && failures > 0 {
        return Err(Failure::Estimation(anyhow!("all {failures} grid cells failed")));
    }
    Ok(())
}

fn cmd_derive_bandwidth(target_weight: f64, ref_distance: f64) -> Result<()> {
    let c = derive_bandwidth_constant(target_weight, ref_distance)?;
    println!("c = {c:.6}");
    println!("distance  weight");
    for d in 1..=5 {
        println!("{:>7}s  {:.6}", d, single_outlier_weight(d as f64, c));
    }
    Ok(())
}
