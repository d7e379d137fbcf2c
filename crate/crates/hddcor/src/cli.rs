//! The `hddcor` command line.
//!
//! Exit codes: 0 on success, 2 for usage or input errors, 3 for numerical
//! failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hddcor_core::calibration::{run_test, Method, PermutationConfig, DEFAULT_PERMUTATIONS};
use hddcor_core::oracle::{
    kernel_identity_max_gap, pop_dcov_moments, pop_dcov_via_d, pop_dvar,
    pop_kernel_identity_check, verify_prop_bounds, MarginalBounds, Side,
};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiment::{render_reports, ExperimentConfig};
use crate::io::{
    parse_joint_json, read_sample_csv, read_to_string, render_test_result, to_csv, to_json,
    write_output, Format,
};
use crate::pipeline::{
    comparison_csv, load_and_align, rolling_compare, rolling_pvalues, series_csv, Cutoff,
    PValueRecord, RollingOptions, DEFAULT_Q, DEFAULT_WINDOW,
};

/// Distance-correlation independence tests for high-dimensional data.
#[derive(Debug, Parser)]
#[command(name = "hddcor", version)]
pub struct Cli {
    /// Worker threads [default: available cores].
    #[arg(long, global = true, env = "HDDCOR_THREADS")]
    pub threads: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file [default: stdout].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for permutations and simulations.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test independence of two samples stored as CSV.
    Test(TestArgs),
    /// Run a Monte Carlo experiment grid from a TOML or JSON config.
    Simulate(SimulateArgs),
    /// Rolling-window p-values over two date-indexed CSV tables.
    Rolling(RollingArgs),
    /// Exact population quantities of a discrete joint distribution.
    Oracle(OracleArgs),
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

/// Arguments of `test`.
#[derive(Debug, Args)]
pub struct TestArgs {
    /// CSV of the `X` sample, one row per observation.
    #[arg(long)]
    pub x: PathBuf,
    /// CSV of the `Y` sample.
    #[arg(long)]
    pub y: PathBuf,
    /// Calibration: normal-tn, normal-tr, gamma, rv or mdcor.
    #[arg(long, default_value = "normal-tn", value_parser = parse_method)]
    pub method: Method,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Permutations for rv and mdcor.
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
}

/// Arguments of `simulate`.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment config (`.toml`, or `.json`).
    #[arg(long)]
    pub config: PathBuf,
    /// Keep per-replicate statistics in JSON output.
    #[arg(long)]
    pub samples: bool,
}

/// Arguments of `rolling`.
#[derive(Debug, Args)]
pub struct RollingArgs {
    /// CSV table of `X` series with a leading `date` column.
    #[arg(long)]
    pub x: PathBuf,
    /// CSV table of `Y` series.
    #[arg(long)]
    pub y: PathBuf,
    /// Trailing window length in rows.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Calibration.
    #[arg(long, default_value = "normal-tn", value_parser = parse_method)]
    pub method: Method,
    /// FDR level of the BH cutoff.
    #[arg(long, default_value_t = DEFAULT_Q)]
    pub q: f64,
    /// Permutations for rv and mdcor.
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    /// Report normal-tn and rv side by side (ignores --method).
    #[arg(long)]
    pub compare: bool,
    /// Cutoff JSON path [default: `<out>.cutoff.json`, or stderr].
    #[arg(long)]
    pub cutoff_out: Option<PathBuf>,
}

/// Arguments of `oracle`.
#[derive(Debug, Args)]
pub struct OracleArgs {
    /// JSON `{"atoms": [{"x": [..], "y": [..], "p": ..}, ..]}`.
    #[arg(long)]
    pub joint: PathBuf,
    /// Moment exponent of the bound checks, in (0, 1/2].
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
}

fn default_threads(cli: Option<usize>) -> usize {
    cli.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Parses the process arguments, runs and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let threads = default_threads(cli.threads);
    if threads == 0 {
        return Err(Error::Input("--threads must be positive".into()));
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Test(a) => {
            let x = read_sample_csv(&a.x)?;
            let y = read_sample_csv(&a.y)?;
            if x.n() != y.n() {
                return Err(Error::Input(format!(
                    "row counts differ: {} in {} and {} in {}",
                    x.n(),
                    a.x.display(),
                    y.n(),
                    a.y.display()
                )));
            }
            let perm = PermutationConfig {
                permutations: a.permutations,
                seed: cli.seed.unwrap_or(0),
            };
            let r = run_test(a.method, &x, &y, a.alpha, perm)?;
            write_output(out, &render_test_result(&r, cli.format)?)
        }
        Command::Simulate(a) => {
            let mut cfg = ExperimentConfig::read(&a.config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if cli.threads.is_some() {
                cfg.threads = None;
            }
            let reports = cfg.run(threads)?;
            write_output(out, &render_reports(&reports, cli.format, a.samples)?)
        }
        Command::Rolling(a) => rolling(cli, a, threads),
        Command::Oracle(a) => oracle(cli, a),
    }
}

#[derive(Serialize)]
struct SeriesJson<'a> {
    method: &'a str,
    window: usize,
    cutoff: &'a Cutoff,
    records: &'a [PValueRecord],
}

fn rolling(cli: &Cli, a: &RollingArgs, threads: usize) -> Result<()> {
    if !(a.q > 0.0 && a.q < 1.0) {
        return Err(Error::Input(format!("--q must lie in (0, 1) (got {})", a.q)));
    }
    let al = load_and_align(&a.x, &a.y)?;
    for (side, dropped) in [("x", &al.dropped_x), ("y", &al.dropped_y)] {
        if !dropped.is_empty() {
            eprintln!("dropped {side} columns with missing values: {}", dropped.join(", "));
        }
    }
    let opts = RollingOptions {
        window: a.window,
        permutations: a.permutations,
        seed: cli.seed.unwrap_or(0),
        threads,
    };
    let (body, sidecar) = if a.compare {
        let c = rolling_compare(&al.x, &al.y, a.q, opts)?;
        let body = match cli.format {
            Format::Csv => comparison_csv(&c)?,
            Format::Json => to_json(&[
                SeriesJson {
                    method: c.tn.method.name(),
                    window: c.tn.window,
                    cutoff: &c.cutoffs[0],
                    records: &c.tn.records,
                },
                SeriesJson {
                    method: c.rv.method.name(),
                    window: c.rv.window,
                    cutoff: &c.cutoffs[1],
                    records: &c.rv.records,
                },
            ])?,
        };
        (body, to_json(&c.cutoffs)?)
    } else {
        let s = rolling_pvalues(&al.x, &al.y, a.method, opts)?;
        let cut = Cutoff::of(&s, a.q)?;
        let body = match cli.format {
            Format::Csv => series_csv(&s, &cut)?,
            Format::Json => to_json(&SeriesJson {
                method: s.method.name(),
                window: s.window,
                cutoff: &cut,
                records: &s.records,
            })?,
        };
        (body, to_json(&cut)?)
    };
    write_output(cli.out.as_deref(), &body)?;
    let sidecar_path = a.cutoff_out.clone().or_else(|| {
        cli.out.as_deref().map(|o| {
            let mut s = o.as_os_str().to_owned();
            s.push(".cutoff.json");
            PathBuf::from(s)
        })
    });
    match sidecar_path {
        Some(p) => write_sidecar(&p, &sidecar),
        None => {
            eprint!("{}", String::from_utf8_lossy(&sidecar));
            Ok(())
        }
    }
}

fn write_sidecar(path: &Path, bytes: &[u8]) -> Result<()> {
    write_output(Some(path), bytes)
}

#[derive(Serialize)]
struct MarginalSummary {
    degenerate: bool,
    prop1_ratio: Option<f64>,
    prop2_lhs: f64,
    prop2_bound: f64,
    prop2_ratio: Option<f64>,
    prop2_holds: bool,
    prop3_ratio: Option<f64>,
}

impl From<&MarginalBounds> for MarginalSummary {
    fn from(m: &MarginalBounds) -> Self {
        Self {
            degenerate: m.degenerate,
            prop1_ratio: m.prop1.ratio,
            prop2_lhs: m.prop2.lhs,
            prop2_bound: m.prop2.bound,
            prop2_ratio: m.prop2.ratio,
            prop2_holds: m.prop2_holds,
            prop3_ratio: m.prop3.ratio,
        }
    }
}

#[derive(Serialize)]
struct BoundsSummary {
    tau: f64,
    all_pass: bool,
    x: MarginalSummary,
    y: MarginalSummary,
}

#[derive(Serialize)]
struct OracleReport {
    atoms: usize,
    v2_xy: f64,
    v2_xy_via_d: f64,
    v2_x: f64,
    v2_y: f64,
    dcor2: Option<f64>,
    moment_identity: bool,
    kernel_identity: bool,
    kernel_identity_gap: f64,
    bounds: BoundsSummary,
}

fn oracle(cli: &Cli, a: &OracleArgs) -> Result<()> {
    let joint = parse_joint_json(&read_to_string(&a.joint)?)?;
    let v2_xy = pop_dcov_moments(&joint);
    let v2_xy_via_d = pop_dcov_via_d(&joint);
    let v2_x = pop_dvar(&joint, Side::X);
    let v2_y = pop_dvar(&joint, Side::Y);
    let props = verify_prop_bounds(&joint.centered(), a.tau)?;
    let report = OracleReport {
        atoms: joint.atoms().len(),
        v2_xy,
        v2_xy_via_d,
        v2_x,
        v2_y,
        dcor2: (v2_x * v2_y > 0.0).then(|| v2_xy / (v2_x * v2_y).sqrt()),
        moment_identity: (v2_xy - v2_xy_via_d).abs() <= 1e-12 * v2_xy.abs().max(1.0),
        kernel_identity: pop_kernel_identity_check(&joint),
        kernel_identity_gap: kernel_identity_max_gap(&joint),
        bounds: BoundsSummary {
            tau: props.tau,
            all_pass: props.all_pass(),
            x: (&props.x).into(),
            y: (&props.y).into(),
        },
    };
    let body = match cli.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", &serde_json::to_value(&report)?, &mut rows);
            to_csv(rows.iter().map(|(k, v)| KeyValue { quantity: k, value: v }))?
        }
    };
    write_output(cli.out.as_deref(), &body)
}

#[derive(Serialize)]
struct KeyValue<'a> {
    quantity: &'a str,
    value: &'a str,
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Null => out.push((prefix.into(), String::new())),
        other => out.push((prefix.into(), other.to_string())),
    }
}
