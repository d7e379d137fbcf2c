//! Experiment grids read from TOML or JSON.
//!
//! ```toml
//! example = "ex1"
//! replicates = 5000
//! seed = 1
//! kde = true
//!
//! [[grid]]
//! n = 100
//! p = 10
//! ```
//!
//! `q` defaults to `p`, and an omitted `p` means `2 [sqrt(n)]`.

use std::path::Path;

use hddcor_core::calibration::{Method, DEFAULT_PERMUTATIONS};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_to_string, to_csv, to_json, Format};
use crate::simulate::{null_distribution_report, power_curve, power_table_dim, Example, MCReport, SimConfig};

fn default_alpha() -> f64 {
    0.05
}

fn default_methods() -> Vec<Method> {
    vec![Method::NormalTn]
}

fn default_permutations() -> usize {
    DEFAULT_PERMUTATIONS
}

/// One design point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    /// Sample size.
    pub n: usize,
    /// Dimension of `X`.
    pub p: Option<usize>,
    /// Dimension of `Y`.
    pub q: Option<usize>,
}

/// A grid of Monte Carlo experiments sharing one example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Design.
    pub example: Example,
    /// Replicates per grid point.
    pub replicates: usize,
    /// Significance level.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Base seed.
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; the command line may override.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Methods evaluated on shared replicates.
    #[serde(default = "default_methods", with = "crate::method_name::list")]
    pub methods: Vec<Method>,
    /// Null-distribution report with the KDE gap of `T_n` instead of
    /// rejection rates.
    #[serde(default)]
    pub kde: bool,
    /// Permutations for the permutation methods.
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    /// Design points.
    pub grid: Vec<GridPoint>,
}

impl ExperimentConfig {
    /// Parses JSON when `json` is set, TOML otherwise.
    pub fn parse(text: &str, json: bool) -> Result<Self> {
        let cfg: Self = if json {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a `.json` or `.toml` file.
    pub fn read(path: &Path) -> Result<Self> {
        let json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&read_to_string(path)?, json)
    }

    /// Checks every grid point.
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods is empty".into()));
        }
        if self.kde && !self.example.is_null() {
            return Err(Error::Config(format!(
                "kde reports need a null example, not {}",
                self.example
            )));
        }
        for (i, c) in self.configs(1).iter().enumerate() {
            c.validate().map_err(|e| e.context(format!("grid point {}", i + 1)))?;
        }
        Ok(())
    }

    /// One [`SimConfig`] per grid point.
    pub fn configs(&self, threads: usize) -> Vec<SimConfig> {
        self.grid
            .iter()
            .map(|g| {
                let p = g.p.unwrap_or_else(|| power_table_dim(g.n));
                SimConfig {
                    example: self.example,
                    n: g.n,
                    p,
                    q: g.q.unwrap_or(p),
                    replicates: self.replicates,
                    alpha: self.alpha,
                    method: self.methods[0],
                    seed: self.seed,
                    threads: self.threads.unwrap_or(threads),
                    permutations: self.permutations,
                }
            })
            .collect()
    }

    /// Runs the grid with `threads` workers (unless the config pins its
    /// own count).
    pub fn run(&self, threads: usize) -> Result<Vec<MCReport>> {
        let configs = self.configs(threads);
        if self.kde {
            configs.iter().map(null_distribution_report).collect()
        } else {
            power_curve(&configs, &self.methods)
        }
    }
}

#[derive(Serialize)]
struct ReportRow {
    example: Example,
    n: usize,
    p: usize,
    q: usize,
    #[serde(with = "crate::method_name")]
    method: Method,
    alpha: f64,
    replicates: usize,
    rate: f64,
    stderr: f64,
    kde_max_gap: Option<f64>,
}

/// CSV (one row per report) or JSON (an array of reports). `T_n` samples
/// are kept only when `samples` is set.
pub fn render_reports(reports: &[MCReport], format: Format, samples: bool) -> Result<Vec<u8>> {
    match format {
        Format::Csv => to_csv(reports.iter().map(|r| ReportRow {
            example: r.example,
            n: r.n,
            p: r.p,
            q: r.q,
            method: r.method,
            alpha: r.alpha,
            replicates: r.replicates,
            rate: r.rate,
            stderr: r.stderr,
            kde_max_gap: r.kde_max_gap,
        })),
        Format::Json => {
            let stripped: Vec<MCReport>;
            let out = if samples {
                reports
            } else {
                stripped = reports
                    .iter()
                    .cloned()
                    .map(|mut r| {
                        r.statistic_samples = None;
                        r
                    })
                    .collect();
                &stripped
            };
            to_json(out)
        }
    }
}
