//! Data generators for the simulation examples and the Monte Carlo engine.
//!
//! Every replicate draws from its own ChaCha8 stream keyed by
//! `(seed, replicate index)`, and results are gathered in replicate order,
//! so reports are bit-identical for any thread count.

use std::fmt;
use std::str::FromStr;

use hddcor_core::calibration::{
    mdcor_permutation_test, rv_permutation_test, AsymptoticInputs, Method, MIN_PERMUTATIONS,
};
use hddcor_core::kde::max_gap_to_standard_normal;
use hddcor_core::SampleMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simulation designs.
///
/// | example | `X` covariance | `Y` |
/// |---|---|---|
/// | `Ex1` | `0.7^{|i-j|}` | independent copy of `X`'s law (null) |
/// | `Ex2` | `0.5^{|i-j|}` | independent copy of `X`'s law (null) |
/// | `Ex3` | `0.5^{|i-j|}` | `0.2 (X_i + X_i^2) + t_4` noise |
/// | `Ex4` | identity | `X_i^2` |
/// | `Ex5` | `0.5^{|i-j|}` | `X_i^2` |
/// | `Ex6` | `0.7^{|i-j|}` | `(sum_i X_i)^2 / p`, scalar |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    /// Independent AR(1) normals, `rho = 0.7`.
    Ex1,
    /// Independent AR(1) normals, `rho = 0.5`.
    Ex2,
    /// Noisy quadratic-plus-linear coordinatewise map.
    Ex3,
    /// Coordinatewise square, independent coordinates.
    Ex4,
    /// Coordinatewise square, correlated coordinates.
    Ex5,
    /// Scaled squared coordinate sum.
    Ex6,
}

impl Example {
    /// All examples in order.
    pub const ALL: [Example; 6] = [
        Example::Ex1,
        Example::Ex2,
        Example::Ex3,
        Example::Ex4,
        Example::Ex5,
        Example::Ex6,
    ];

    /// AR(1) coefficient of `X`.
    pub fn rho(self) -> f64 {
        match self {
            Example::Ex1 | Example::Ex6 => 0.7,
            Example::Ex2 | Example::Ex3 | Example::Ex5 => 0.5,
            Example::Ex4 => 0.0,
        }
    }

    /// Whether `X` and `Y` are independent.
    pub fn is_null(self) -> bool {
        matches!(self, Example::Ex1 | Example::Ex2)
    }

    /// Dimension of `Y` given the requested `(p, q)`.
    pub fn y_dim(self, p: usize, q: usize) -> usize {
        match self {
            Example::Ex1 | Example::Ex2 => q,
            Example::Ex3 | Example::Ex4 | Example::Ex5 => p,
            Example::Ex6 => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Example::Ex1 => "ex1",
            Example::Ex2 => "ex2",
            Example::Ex3 => "ex3",
            Example::Ex4 => "ex4",
            Example::Ex5 => "ex5",
            Example::Ex6 => "ex6",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Example::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown example `{s}`")))
    }
}

/// `2 [sqrt(n)]`, the dimension used by the power table.
pub fn power_table_dim(n: usize) -> usize {
    2 * (n as f64).sqrt().floor() as usize
}

/// One Monte Carlo experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Design.
    pub example: Example,
    /// Sample size.
    pub n: usize,
    /// Dimension of `X`.
    pub p: usize,
    /// Requested dimension of `Y`; see [`Example::y_dim`].
    pub q: usize,
    /// Monte Carlo replicates.
    pub replicates: usize,
    /// Significance level.
    pub alpha: f64,
    /// Test calibration.
    #[serde(with = "crate::method_name")]
    pub method: Method,
    /// Base seed of the replicate streams.
    pub seed: u64,
    /// Worker threads.
    pub threads: usize,
    /// Permutations for the permutation methods.
    pub permutations: usize,
}

impl SimConfig {
    /// Config with `q = p`, 2000 replicates, `alpha = 0.05`, `T_n`, seed 0,
    /// one thread and 199 permutations.
    pub fn new(example: Example, n: usize, p: usize) -> Self {
        Self {
            example,
            n,
            p,
            q: p,
            replicates: 2000,
            alpha: 0.05,
            method: Method::NormalTn,
            seed: 0,
            threads: 1,
            permutations: hddcor_core::calibration::DEFAULT_PERMUTATIONS,
        }
    }

    /// Effective dimension of `Y`.
    pub fn y_dim(&self) -> usize {
        self.example.y_dim(self.p, self.q)
    }

    /// Checks the ranges of every field.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n < 4 {
            return fail(format!("n must be at least 4 (got {})", self.n));
        }
        if self.p == 0 || self.q == 0 {
            return fail("dimensions must be positive".into());
        }
        if self.replicates < 100 {
            return fail(format!(
                "replicates must be at least 100 (got {})",
                self.replicates
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail(format!("alpha must lie in (0, 1] (got {})", self.alpha));
        }
        if self.threads == 0 {
            return fail("threads must be positive".into());
        }
        if self.permutations < MIN_PERMUTATIONS {
            return fail(format!(
                "permutations must be at least {MIN_PERMUTATIONS} (got {})",
                self.permutations
            ));
        }
        Ok(())
    }
}

/// Factor `L` of the AR(1) covariance `Sigma_{ij} = rho^{|i-j|}`.
///
/// `L_{i,0} = rho^i` and `L_{i,j} = rho^{i-j} sqrt(1 - rho^2)` for
/// `1 <= j <= i`, so `L z` is the recurrence
/// `x_i = rho x_{i-1} + sqrt(1 - rho^2) z_i` and costs O(d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArFactor {
    d: usize,
    rho: f64,
    innovation: f64,
}

impl ArFactor {
    /// Fails unless `|rho| < 1` and `d >= 1`.
    pub fn new(d: usize, rho: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Input("dimension must be positive".into()));
        }
        let innovation = (1.0 - rho * rho).sqrt();
        if !(innovation > 0.0) {
            return Err(Error::Input(format!(
                "AR(1) covariance with rho = {rho} is not positive definite"
            )));
        }
        Ok(Self { d, rho, innovation })
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Overwrites `z` with `L z`.
    pub fn apply(&self, z: &mut [f64]) {
        for i in 1..z.len() {
            z[i] = self.rho * z[i - 1] + self.innovation * z[i];
        }
    }

    /// Dense row-major `L`.
    pub fn dense(&self) -> Vec<f64> {
        let d = self.d;
        let mut l = vec![0.0; d * d];
        for i in 0..d {
            l[i * d] = self.rho.powi(i as i32);
            for j in 1..=i {
                l[i * d + j] = self.rho.powi((i - j) as i32) * self.innovation;
            }
        }
        l
    }

    /// `n` independent rows from `N(0, Sigma)`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> SampleMatrix {
        let mut values = vec![0.0; n * self.d];
        for row in values.chunks_exact_mut(self.d) {
            for v in row.iter_mut() {
                *v = StandardNormal.sample(rng);
            }
            self.apply(row);
        }
        SampleMatrix::new(values, n, self.d).expect("finite normal draws")
    }
}

/// `n` rows from `N(0, Sigma)` with `Sigma_{ij} = rho^{|i-j|}`.
pub fn sample_ar_normal<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    rho: f64,
    rng: &mut R,
) -> Result<SampleMatrix> {
    Ok(ArFactor::new(d, rho)?.sample(n, rng))
}

/// Student `t_4` draw as `Z / sqrt(chi2_4 / 4)`.
fn t4<R: Rng + ?Sized>(chi: &ChiSquared<f64>, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    z / (chi.sample(rng) / 4.0).sqrt()
}

/// One replicate's `(X, Y)` pair.
pub fn generate_example<R: Rng + ?Sized>(
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<(SampleMatrix, SampleMatrix)> {
    let (n, p) = (cfg.n, cfg.p);
    let x = ArFactor::new(p, cfg.example.rho())?.sample(n, rng);
    let y = match cfg.example {
        Example::Ex1 | Example::Ex2 => ArFactor::new(cfg.q, cfg.example.rho())?.sample(n, rng),
        Example::Ex3 => {
            let chi = ChiSquared::new(4.0).expect("valid degrees of freedom");
            let v = x
                .as_slice()
                .iter()
                .map(|&u| 0.2 * (u + u * u) + t4(&chi, rng))
                .collect();
            SampleMatrix::new(v, n, p)?
        }
        Example::Ex4 | Example::Ex5 => {
            SampleMatrix::new(x.as_slice().iter().map(|u| u * u).collect(), n, p)?
        }
        Example::Ex6 => {
            let v: Vec<f64> = x
                .rows()
                .map(|r| {
                    let s: f64 = r.iter().sum();
                    s * s / p as f64
                })
                .collect();
            SampleMatrix::column(&v)?
        }
    };
    Ok((x, y))
}

/// Generator of replicate `index`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f` on a pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Failures the engine absorbs as non-rejections: degenerate samples on
/// which a calibration is undefined.
fn is_numerical(e: &hddcor_core::Error) -> bool {
    use hddcor_core::Error as C;
    matches!(
        e,
        C::StudentizationUndefined | C::DegenerateVariance | C::ZeroDenominator
    )
}

/// Outcome of one method on one replicate: `None` when the calibration
/// failed numerically.
type Decision = Option<bool>;

struct Replicate {
    decisions: Vec<Decision>,
    t_n: f64,
}

fn run_replicate(cfg: &SimConfig, methods: &[Method], index: u64) -> Result<Replicate> {
    let mut rng = replicate_rng(cfg.seed, index);
    let (x, y) = generate_example(cfg, &mut rng)?;
    let perm_seed: u64 = rng.random();
    let asymptotic = match AsymptoticInputs::new(&x, &y) {
        Ok(a) => Some(a),
        Err(e) if is_numerical(&e) => None,
        Err(e) => return Err(e.into()),
    };
    let mut decisions = Vec::with_capacity(methods.len());
    for &m in methods {
        let r = match m {
            Method::RvPermutation => {
                rv_permutation_test(&x, &y, cfg.alpha, cfg.permutations, perm_seed)
            }
            Method::MdcorPermutation => {
                mdcor_permutation_test(&x, &y, cfg.alpha, cfg.permutations, perm_seed)
            }
            _ => match &asymptotic {
                Some(a) => a.test(m, cfg.alpha),
                None => Err(hddcor_core::Error::DegenerateVariance),
            },
        };
        decisions.push(match r {
            Ok(t) => Some(t.reject),
            Err(e) if is_numerical(&e) => None,
            Err(e) => return Err(e.into()),
        });
    }
    let t_n = asymptotic.map_or(0.0, |a| a.estimates.t_n());
    Ok(Replicate { decisions, t_n })
}

/// Per-replicate decisions of several methods on shared data.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMatrix {
    /// Methods, in column order.
    pub methods: Vec<Method>,
    /// `decisions[m][r]`: whether method `m` rejected on replicate `r`
    /// (`false` on numerical failure).
    pub decisions: Vec<Vec<bool>>,
    /// Numerical failures per method.
    pub failures: Vec<usize>,
    /// `T_n` per replicate (0 where undefined).
    pub t_n: Vec<f64>,
}

impl DecisionMatrix {
    /// Rejection rate of method column `m`.
    pub fn rate(&self, m: usize) -> f64 {
        let d = &self.decisions[m];
        d.iter().filter(|r| **r).count() as f64 / d.len() as f64
    }

    /// Fraction of replicates on which methods `a` and `b` agree.
    pub fn agreement(&self, a: usize, b: usize) -> f64 {
        let (da, db) = (&self.decisions[a], &self.decisions[b]);
        da.iter().zip(db).filter(|(u, v)| u == v).count() as f64 / da.len() as f64
    }
}

/// Runs every method on each replicate of `cfg` (its `method` field is
/// ignored).
pub fn mc_decisions(cfg: &SimConfig, methods: &[Method]) -> Result<DecisionMatrix> {
    cfg.validate()?;
    let reps: Vec<Result<Replicate>> = with_threads(cfg.threads, || {
        (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|r| run_replicate(cfg, methods, r))
            .collect()
    })?;
    let mut out = DecisionMatrix {
        methods: methods.to_vec(),
        decisions: vec![Vec::with_capacity(cfg.replicates); methods.len()],
        failures: vec![0; methods.len()],
        t_n: Vec::with_capacity(cfg.replicates),
    };
    for rep in reps {
        let rep = rep?;
        for (m, d) in rep.decisions.into_iter().enumerate() {
            out.decisions[m].push(d.unwrap_or(false));
            out.failures[m] += usize::from(d.is_none());
        }
        out.t_n.push(rep.t_n);
    }
    Ok(out)
}

/// Monte Carlo summary of one method at one design point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    /// Design.
    pub example: Example,
    /// Sample size.
    pub n: usize,
    /// Dimension of `X`.
    pub p: usize,
    /// Effective dimension of `Y`.
    pub q: usize,
    /// Method.
    #[serde(with = "crate::method_name")]
    pub method: Method,
    /// Significance level.
    pub alpha: f64,
    /// Replicates.
    pub replicates: usize,
    /// Rejection rate.
    pub rate: f64,
    /// Binomial standard error `sqrt(rate (1 - rate) / replicates)`.
    pub stderr: f64,
    /// Replicates on which the calibration was undefined (counted as
    /// non-rejections).
    pub failures: usize,
    /// `max |KDE - phi|` of the `T_n` sample, for null reports.
    pub kde_max_gap: Option<f64>,
    /// `T_n` per replicate, for null reports.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub statistic_samples: Option<Vec<f64>>,
}

impl MCReport {
    fn from_column(cfg: &SimConfig, d: &DecisionMatrix, m: usize) -> Self {
        let rate = d.rate(m);
        Self {
            example: cfg.example,
            n: cfg.n,
            p: cfg.p,
            q: cfg.y_dim(),
            method: d.methods[m],
            alpha: cfg.alpha,
            replicates: cfg.replicates,
            rate,
            stderr: (rate * (1.0 - rate) / cfg.replicates as f64).sqrt(),
            failures: d.failures[m],
            kde_max_gap: None,
            statistic_samples: None,
        }
    }
}

/// Rejection rate of `cfg.method`.
pub fn mc_rejection_rate(cfg: &SimConfig) -> Result<MCReport> {
    let d = mc_decisions(cfg, &[cfg.method])?;
    Ok(MCReport::from_column(cfg, &d, 0))
}

/// Null distribution of `T_n`: rejection rate of the normal calibration,
/// the `T_n` sample and its KDE distance to the standard normal density.
pub fn null_distribution_report(cfg: &SimConfig) -> Result<MCReport> {
    if !cfg.example.is_null() {
        return Err(Error::Config(format!(
            "{} is not a null example",
            cfg.example
        )));
    }
    let d = mc_decisions(cfg, &[Method::NormalTn])?;
    let mut report = MCReport::from_column(cfg, &d, 0);
    report.kde_max_gap = Some(max_gap_to_standard_normal(&d.t_n)?);
    report.statistic_samples = Some(d.t_n);
    Ok(report)
}

/// One report per grid point per method; methods share replicates within a
/// grid point. An empty `methods` uses each config's own method.
pub fn power_curve(grid: &[SimConfig], methods: &[Method]) -> Result<Vec<MCReport>> {
    if let Some(first) = grid.first() {
        if grid.iter().any(|c| c.example != first.example) {
            return Err(Error::Config("grid mixes examples".into()));
        }
    }
    let mut out = Vec::new();
    for cfg in grid {
        let ms: Vec<Method> = if methods.is_empty() {
            vec![cfg.method]
        } else {
            methods.to_vec()
        };
        let d = mc_decisions(cfg, &ms)?;
        out.extend((0..ms.len()).map(|m| MCReport::from_column(cfg, &d, m)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_matches_dense_product_and_cholesky() {
        let f = ArFactor::new(5, 0.7).unwrap();
        let l = f.dense();
        // L L' reproduces Sigma.
        for i in 0..5 {
            for j in 0..5 {
                let s: f64 = (0..5).map(|k| l[i * 5 + k] * l[j * 5 + k]).sum();
                let want = 0.7f64.powi((i as i32 - j as i32).abs());
                assert!((s - want).abs() < 1e-14);
            }
        }
        let z = [0.3, -1.2, 0.8, 2.0, -0.5];
        let mut x = z;
        f.apply(&mut x);
        for i in 0..5 {
            let want: f64 = (0..5).map(|k| l[i * 5 + k] * z[k]).sum();
            assert!((x[i] - want).abs() < 1e-14);
        }
        assert!(ArFactor::new(3, 1.0).is_err());
        assert!(ArFactor::new(0, 0.5).is_err());
    }

    #[test]
    fn examples_follow_their_maps() {
        let mut cfg = SimConfig::new(Example::Ex4, 30, 4);
        let (x, y) = generate_example(&cfg, &mut replicate_rng(1, 0)).unwrap();
        for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
            assert_eq!(*b, a * a);
        }
        cfg.example = Example::Ex6;
        cfg.q = 9;
        let (x, y) = generate_example(&cfg, &mut replicate_rng(1, 0)).unwrap();
        assert_eq!(y.d(), 1);
        for (r, v) in x.rows().zip(y.as_slice()) {
            let s: f64 = r.iter().sum();
            assert_eq!(*v, s * s / 4.0);
        }
        cfg.example = Example::Ex2;
        let (x, y) = generate_example(&cfg, &mut replicate_rng(1, 0)).unwrap();
        assert_eq!((x.d(), y.d()), (4, 9));
    }

    #[test]
    fn same_stream_same_sample() {
        let cfg = SimConfig::new(Example::Ex3, 12, 3);
        let a = generate_example(&cfg, &mut replicate_rng(5, 3)).unwrap();
        let b = generate_example(&cfg, &mut replicate_rng(5, 3)).unwrap();
        let c = generate_example(&cfg, &mut replicate_rng(5, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn validation() {
        let ok = SimConfig::new(Example::Ex1, 10, 2);
        assert!(ok.validate().is_ok());
        for bad in [
            SimConfig { n: 3, ..ok },
            SimConfig { replicates: 0, ..ok },
            SimConfig { alpha: 0.0, ..ok },
            SimConfig { threads: 0, ..ok },
            SimConfig { permutations: 10, ..ok },
            SimConfig { q: 0, ..ok },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn power_table_dims() {
        let dims: Vec<usize> = [10, 40, 70, 100, 130, 160]
            .iter()
            .map(|&n| power_table_dim(n))
            .collect();
        // Integer part: sqrt(160) = 12.65 gives 24.
        assert_eq!(dims, [6, 12, 16, 20, 22, 24]);
    }

    #[test]
    fn alpha_one_always_rejects() {
        let mut cfg = SimConfig::new(Example::Ex2, 8, 2);
        cfg.replicates = 100;
        cfg.alpha = 1.0;
        let reports = power_curve(&[cfg], &Method::ALL).unwrap();
        assert_eq!(reports.len(), 5);
        for r in reports {
            assert_eq!(r.rate, 1.0, "{}", r.method);
            assert_eq!(r.stderr, 0.0);
        }
    }

    #[test]
    fn null_report_requires_null_example() {
        let mut cfg = SimConfig::new(Example::Ex4, 8, 2);
        cfg.replicates = 100;
        assert!(null_distribution_report(&cfg).is_err());
        cfg.example = Example::Ex1;
        let r = null_distribution_report(&cfg).unwrap();
        assert_eq!(r.statistic_samples.as_ref().unwrap().len(), 100);
        assert!(r.kde_max_gap.unwrap() > 0.0);
    }
}
