//! Calibrated independence tests.
//!
//! Three asymptotic calibrations of the distance covariance:
//!
//! - `NormalTn`: reject when `T_n > Phi^{-1}(1 - alpha)`;
//! - `NormalTr`: the same rule applied to the studentized `T_R`;
//! - `Gamma`: a two-moment gamma fit to `n V*_n(X, Y)`, rejecting when
//!   `n V*_n > Gamma_{1-alpha}(beta1, beta2) - mu`.
//!
//! Two permutation-calibrated baselines: the RV coefficient (linear
//! dependence only) and a marginally aggregated distance covariance (sum of
//! coordinate-wise `V*_n`). Both are inner products of fixed `n x n`
//! matrices, so a row permutation of `Y` only relabels one factor and each
//! permuted statistic costs O(n^2).
//!
//! All rejection rules are strict, so a statistic sitting exactly on the
//! critical value is not rejected. At `alpha >= 1` every method rejects.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::centering::{frobenius, pairwise_distances, u_center, CenteredDistanceMatrix};
use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;
use crate::special::{gamma_quantile, gamma_sf, normal_quantile, normal_sf};
use crate::statistics::{u_centered, DcovEstimates};

/// Default number of permutations.
pub const DEFAULT_PERMUTATIONS: usize = 199;

/// Minimum number of permutations accepted.
pub const MIN_PERMUTATIONS: usize = 99;

/// Test calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Normal approximation of `T_n`.
    NormalTn,
    /// Normal approximation of `T_R`.
    NormalTr,
    /// Gamma approximation of `n V*_n`.
    Gamma,
    /// RV coefficient with permutation p-value.
    RvPermutation,
    /// Marginally aggregated distance covariance with permutation p-value.
    MdcorPermutation,
}

impl Method {
    /// All methods in a fixed order.
    pub const ALL: [Method; 5] = [
        Method::NormalTn,
        Method::NormalTr,
        Method::Gamma,
        Method::RvPermutation,
        Method::MdcorPermutation,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Method::NormalTn => "normal-tn",
            Method::NormalTr => "normal-tr",
            Method::Gamma => "gamma",
            Method::RvPermutation => "rv",
            Method::MdcorPermutation => "mdcor",
        }
    }

    /// Whether the p-value comes from permutations.
    pub fn is_permutation(self) -> bool {
        matches!(self, Method::RvPermutation | Method::MdcorPermutation)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or(Error::Shape("unknown method"))
    }
}

/// Outcome of one test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    /// Calibration used.
    pub method: Method,
    /// `T_n`, `T_R`, `n V*_n`, the RV coefficient or the mdCor sum.
    pub statistic: f64,
    /// p-value in `[0, 1]`.
    pub p_value: f64,
    /// Significance level.
    pub alpha: f64,
    /// Decision.
    pub reject: bool,
}

impl TestResult {
    /// Result of a one-sided normal calibration: `p = 1 - Phi(stat)`,
    /// reject iff `stat > Phi^{-1}(1 - alpha)`.
    pub fn from_normal(method: Method, statistic: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let reject = alpha >= 1.0 || statistic > normal_quantile(1.0 - alpha)?;
        Ok(Self {
            method,
            statistic,
            p_value: normal_sf(statistic),
            alpha,
            reject,
        })
    }

    /// Result of a permutation calibration: reject iff `p <= alpha`.
    pub fn from_permutation(method: Method, statistic: f64, p_value: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            method,
            statistic,
            p_value,
            alpha,
            reject: p_value <= alpha,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
        });
    }
    Ok(())
}

/// Distance summaries shared by the asymptotic calibrations, computed with
/// one pass over each distance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticInputs {
    /// Unbiased covariances and `R*_n`.
    pub estimates: DcovEstimates,
    /// `sum_{i!=j} |X_i - X_j|`.
    pub distance_sum_x: f64,
    /// `sum_{i!=j} |Y_i - Y_j|`.
    pub distance_sum_y: f64,
}

impl AsymptoticInputs {
    /// Computes the summaries of a paired sample.
    pub fn new(x: &SampleMatrix, y: &SampleMatrix) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::SampleSizeMismatch(x.n(), y.n()));
        }
        let dx = pairwise_distances(x);
        let dy = pairwise_distances(y);
        let a = u_center(&dx)?;
        let b = u_center(&dy)?;
        Ok(Self {
            estimates: DcovEstimates::from_centered(&a, &b, x.n())?,
            distance_sum_x: dx.total(),
            distance_sum_y: dy.total(),
        })
    }

    /// Moment-matched gamma parameters; fails unless `V*_n(X) V*_n(Y) > 0`.
    pub fn gamma_params(&self) -> Result<GammaParams> {
        let est = &self.estimates;
        let vv = est.vstar_x * est.vstar_y;
        if !(vv > 0.0) {
            return Err(Error::DegenerateVariance);
        }
        let n = est.n as f64;
        let mu = self.distance_sum_x * self.distance_sum_y / (n * n * (n - 1.0) * (n - 1.0));
        let beta2_hat = mu / (2.0 * vv);
        Ok(GammaParams {
            beta1_hat: mu * beta2_hat,
            beta2_hat,
            mu,
        })
    }

    /// Runs one asymptotic calibration. Permutation methods are rejected.
    pub fn test(&self, method: Method, alpha: f64) -> Result<TestResult> {
        match method {
            Method::NormalTn => TestResult::from_normal(method, self.estimates.t_n(), alpha),
            Method::NormalTr => TestResult::from_normal(method, self.estimates.t_r()?, alpha),
            Method::Gamma => {
                check_alpha(alpha)?;
                let g = self.gamma_params()?;
                let statistic = self.estimates.n as f64 * self.estimates.vstar_xy;
                let critical = gamma_quantile(1.0 - alpha, g.beta1_hat, g.beta2_hat)? - g.mu;
                Ok(TestResult {
                    method,
                    statistic,
                    p_value: gamma_sf(statistic + g.mu, g.beta1_hat, g.beta2_hat)?,
                    alpha,
                    reject: alpha >= 1.0 || statistic > critical,
                })
            }
            Method::RvPermutation | Method::MdcorPermutation => {
                Err(Error::Shape("permutation method has no asymptotic calibration"))
            }
        }
    }
}

/// Normal calibration of `T_n`.
pub fn normal_test_tn(x: &SampleMatrix, y: &SampleMatrix, alpha: f64) -> Result<TestResult> {
    let est = DcovEstimates::new(x, y)?;
    TestResult::from_normal(Method::NormalTn, est.t_n(), alpha)
}

/// Normal calibration of `T_R`.
pub fn normal_test_tr(x: &SampleMatrix, y: &SampleMatrix, alpha: f64) -> Result<TestResult> {
    let est = DcovEstimates::new(x, y)?;
    TestResult::from_normal(Method::NormalTr, est.t_r()?, alpha)
}

/// Moment-matched gamma parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    /// Shape, `mu^2 / (2 V*_n(X) V*_n(Y))`.
    pub beta1_hat: f64,
    /// Rate, `mu / (2 V*_n(X) V*_n(Y))`.
    pub beta2_hat: f64,
    /// `mu = (n(n-1))^{-2} sum_{i!=j} |X_i - X_j| sum_{i!=j} |Y_i - Y_j|`.
    pub mu: f64,
}

/// Estimates the gamma parameters of a paired sample.
pub fn gamma_params(x: &SampleMatrix, y: &SampleMatrix) -> Result<GammaParams> {
    AsymptoticInputs::new(x, y)?.gamma_params()
}

/// Gamma calibration of `n V*_n(X, Y)`.
pub fn gamma_test(x: &SampleMatrix, y: &SampleMatrix, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    AsymptoticInputs::new(x, y)?.test(Method::Gamma, alpha)
}

/// Row-major `n x n` Gram matrix of the column-centered sample.
fn centered_gram(x: &SampleMatrix) -> Vec<f64> {
    let c = x.column_centered();
    let n = c.n();
    let mut g = alloc::vec![0.0; n * n];
    for k in 0..n {
        for l in k..n {
            let v: f64 = c.row(k).iter().zip(c.row(l)).map(|(a, b)| a * b).sum();
            g[k * n + l] = v;
            g[l * n + k] = v;
        }
    }
    g
}

/// Precomputed pieces of the RV coefficient.
struct RvParts {
    gx: Vec<f64>,
    gy: Vec<f64>,
    norm: f64,
    n: usize,
}

impl RvParts {
    fn new(x: &SampleMatrix, y: &SampleMatrix) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::SampleSizeMismatch(x.n(), y.n()));
        }
        let n = x.n();
        if n < 2 {
            return Err(Error::Shape("RV coefficient needs n >= 2"));
        }
        let gx = centered_gram(x);
        let gy = centered_gram(y);
        let denom = frobenius(&gx, &gx, n, None) * frobenius(&gy, &gy, n, None);
        if !(denom > 0.0) {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self {
            gx,
            gy,
            norm: libm::sqrt(denom),
            n,
        })
    }

    fn value(&self, perm: Option<&[usize]>) -> f64 {
        frobenius(&self.gx, &self.gy, self.n, perm) / self.norm
    }
}

/// RV coefficient `tr(S_xy S_yx) / sqrt(tr(S_xx^2) tr(S_yy^2))`, evaluated
/// through the centered Gram matrices (`tr(S_xy S_yx)` is proportional to
/// `<X X', Y Y'>`).
pub fn rv_coefficient(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    Ok(RvParts::new(x, y)?.value(None))
}

/// Sum of U-centered matrices over coordinates: `sum_j A*(X_col_j)`.
fn summed_u_centered(x: &SampleMatrix) -> Result<CenteredDistanceMatrix> {
    let mut acc = u_centered(&x.column_matrix(0))?;
    for j in 1..x.d() {
        acc.add_assign(&u_centered(&x.column_matrix(j))?)?;
    }
    Ok(acc)
}

struct MdcorParts {
    a: CenteredDistanceMatrix,
    b: CenteredDistanceMatrix,
    scale: f64,
}

impl MdcorParts {
    fn new(x: &SampleMatrix, y: &SampleMatrix) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::SampleSizeMismatch(x.n(), y.n()));
        }
        let n = x.n();
        if n < 4 {
            return Err(Error::SampleSizeBelowFour(n));
        }
        Ok(Self {
            a: summed_u_centered(x)?,
            b: summed_u_centered(y)?,
            scale: 1.0 / (n as f64 * (n as f64 - 3.0)),
        })
    }

    fn value(&self, perm: Option<&[usize]>) -> Result<f64> {
        let inner = match perm {
            None => self.a.inner(&self.b)?,
            Some(p) => self.a.inner_permuted(&self.b, p)?,
        };
        Ok(inner * self.scale)
    }
}

/// Marginally aggregated statistic `sum_{i,j} V*_n(X_col_i, Y_col_j)`.
///
/// `V*_n` is bilinear in the U-centered matrices, so the double sum collapses
/// to one inner product of coordinate-summed matrices.
pub fn mdcor_stat(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    MdcorParts::new(x, y)?.value(None)
}

/// The `index`-th seeded uniform permutation of `0..n`. Each index draws
/// from its own ChaCha stream, so permutations can be generated in any order.
pub fn seeded_permutation(seed: u64, index: u64, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm
}

fn check_permutations(b: usize) -> Result<()> {
    if b < MIN_PERMUTATIONS {
        return Err(Error::Domain {
            name: "permutations",
            value: b as f64,
        });
    }
    Ok(())
}

/// Ties within this relative distance of the observed statistic count as
/// exceedances.
const TIE_TOL: f64 = 1e-12;

fn count_pvalue(observed: f64, permuted: impl Iterator<Item = Result<f64>>, b: usize) -> Result<f64> {
    let threshold = observed - TIE_TOL * libm::fabs(observed);
    let mut exceed = 0usize;
    for s in permuted {
        if s? >= threshold {
            exceed += 1;
        }
    }
    Ok((1 + exceed) as f64 / (b + 1) as f64)
}

/// Permutation p-value `(1 + #{b : stat(X, pi_b Y) >= stat(X, Y)}) / (B + 1)`
/// for an arbitrary statistic.
pub fn permutation_pvalue<F>(
    stat_fn: F,
    x: &SampleMatrix,
    y: &SampleMatrix,
    b: usize,
    seed: u64,
) -> Result<f64>
where
    F: Fn(&SampleMatrix, &SampleMatrix) -> Result<f64>,
{
    check_permutations(b)?;
    if x.n() != y.n() {
        return Err(Error::SampleSizeMismatch(x.n(), y.n()));
    }
    let observed = stat_fn(x, y)?;
    let n = y.n();
    let permuted = (0..b).map(|i| stat_fn(x, &y.permute_rows(&seeded_permutation(seed, i as u64, n))));
    count_pvalue(observed, permuted, b)
}

/// RV coefficient with a permutation p-value.
pub fn rv_permutation_test(
    x: &SampleMatrix,
    y: &SampleMatrix,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<TestResult> {
    check_permutations(b)?;
    let parts = RvParts::new(x, y)?;
    let observed = parts.value(None);
    let permuted = (0..b).map(|i| Ok(parts.value(Some(&seeded_permutation(seed, i as u64, parts.n)))));
    let p = count_pvalue(observed, permuted, b)?;
    TestResult::from_permutation(Method::RvPermutation, observed, p, alpha)
}

/// Marginally aggregated distance covariance with a permutation p-value.
pub fn mdcor_permutation_test(
    x: &SampleMatrix,
    y: &SampleMatrix,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<TestResult> {
    check_permutations(b)?;
    let parts = MdcorParts::new(x, y)?;
    let observed = parts.value(None)?;
    let n = x.n();
    let permuted = (0..b).map(|i| parts.value(Some(&seeded_permutation(seed, i as u64, n))));
    let p = count_pvalue(observed, permuted, b)?;
    TestResult::from_permutation(Method::MdcorPermutation, observed, p, alpha)
}

/// Permutation settings for the baseline methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationConfig {
    /// Number of permutations.
    pub permutations: usize,
    /// Seed of the permutation streams.
    pub seed: u64,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        Self {
            permutations: DEFAULT_PERMUTATIONS,
            seed: 0,
        }
    }
}

/// Runs one method. `perm` is ignored by the asymptotic calibrations.
pub fn run_test(
    method: Method,
    x: &SampleMatrix,
    y: &SampleMatrix,
    alpha: f64,
    perm: PermutationConfig,
) -> Result<TestResult> {
    match method {
        Method::NormalTn => normal_test_tn(x, y, alpha),
        Method::NormalTr => normal_test_tr(x, y, alpha),
        Method::Gamma => gamma_test(x, y, alpha),
        Method::RvPermutation => rv_permutation_test(x, y, alpha, perm.permutations, perm.seed),
        Method::MdcorPermutation => {
            mdcor_permutation_test(x, y, alpha, perm.permutations, perm.seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::{self, vstar};
    use rand::rngs::SmallRng;
    use rand::Rng;

    fn random(n: usize, d: usize, rng: &mut SmallRng) -> SampleMatrix {
        let v: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        SampleMatrix::new(v, n, d).unwrap()
    }

    #[test]
    fn normal_boundaries() {
        let r = TestResult::from_normal(Method::NormalTn, 0.0, 0.05).unwrap();
        assert_eq!(r.p_value, 0.5);
        assert!(!r.reject);
        let crit = normal_quantile(0.95).unwrap();
        let r = TestResult::from_normal(Method::NormalTn, crit, 0.05).unwrap();
        assert!((r.p_value - 0.05).abs() < 1e-15);
        assert!(!r.reject);
        let r = TestResult::from_normal(Method::NormalTn, crit + 1e-9, 0.05).unwrap();
        assert!(r.reject);
        assert!(TestResult::from_normal(Method::NormalTr, -50.0, 1.0).unwrap().reject);
        assert!(TestResult::from_normal(Method::NormalTn, 1.0, 0.0).is_err());
    }

    #[test]
    fn pvalue_decreases_with_statistic() {
        let mut last = 1.0;
        for i in -40..40 {
            let p = TestResult::from_normal(Method::NormalTn, i as f64 / 8.0, 0.05)
                .unwrap()
                .p_value;
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn tr_tracks_tn_for_small_correlation() {
        let mut rng = SmallRng::seed_from_u64(21);
        let x = random(40, 5, &mut rng);
        let y = random(40, 5, &mut rng);
        let est = DcovEstimates::new(&x, &y).unwrap();
        assert!(est.rstar.abs() < 0.2);
        let n: f64 = 40.0;
        let approx = est.t_n() * ((n * (n - 3.0) - 2.0) / (n * (n - 1.0))).sqrt()
            / (1.0 - est.rstar * est.rstar).sqrt();
        assert!((est.t_r().unwrap() - approx).abs() < 1e-12);
        let a = normal_test_tn(&x, &y, 0.05).unwrap();
        let b = normal_test_tr(&x, &y, 0.05).unwrap();
        assert_eq!(a.reject, b.reject);
    }

    #[test]
    fn gamma_params_invariant_and_degeneracy() {
        let mut rng = SmallRng::seed_from_u64(22);
        let x = random(12, 3, &mut rng);
        let y = random(12, 2, &mut rng);
        let g = gamma_params(&x, &y).unwrap();
        assert!((g.beta1_hat - g.mu * g.beta2_hat).abs() <= 1e-12 * g.beta1_hat);
        let r = gamma_test(&x, &y, 0.05).unwrap();
        assert!((0.0..=1.0).contains(&r.p_value));
        assert_eq!(r.reject, r.p_value < 0.05);
        let c = SampleMatrix::column(&[1.0; 12]).unwrap();
        assert_eq!(gamma_test(&c, &y, 0.05), Err(Error::DegenerateVariance));
    }

    #[test]
    fn shared_inputs_match_direct_calls() {
        let mut rng = SmallRng::seed_from_u64(27);
        let x = random(16, 3, &mut rng);
        let y = random(16, 4, &mut rng);
        let inputs = AsymptoticInputs::new(&x, &y).unwrap();
        assert_eq!(inputs.estimates, DcovEstimates::new(&x, &y).unwrap());
        let tn = normal_test_tn(&x, &y, 0.1).unwrap();
        assert_eq!(inputs.test(Method::NormalTn, 0.1).unwrap(), tn);
        let tr = normal_test_tr(&x, &y, 0.1).unwrap();
        assert_eq!(inputs.test(Method::NormalTr, 0.1).unwrap(), tr);
        assert!(inputs.test(Method::RvPermutation, 0.1).is_err());
    }

    #[test]
    fn gamma_mu_by_definition() {
        let x = SampleMatrix::column(&[0.0, 1.0, 3.0, 7.0]).unwrap();
        let y = SampleMatrix::column(&[2.0, -1.0, 0.5, 4.0]).unwrap();
        let sa: f64 = [1.0, 3.0, 7.0, 2.0, 6.0, 4.0].iter().sum::<f64>() * 2.0;
        let sb: f64 = [3.0, 1.5, 2.0, 1.5, 5.0, 3.5].iter().sum::<f64>() * 2.0;
        let g = gamma_params(&x, &y).unwrap();
        assert!((g.mu - sa * sb / (16.0 * 9.0)).abs() < 1e-12);
    }

    // Definitional route: p x q covariance blocks and traces.
    fn rv_by_covariances(x: &SampleMatrix, y: &SampleMatrix) -> f64 {
        let (xc, yc) = (x.column_centered(), y.column_centered());
        let cov = |a: &SampleMatrix, b: &SampleMatrix| -> Vec<Vec<f64>> {
            (0..a.d())
                .map(|i| {
                    (0..b.d())
                        .map(|j| (0..a.n()).map(|k| a.get(k, i) * b.get(k, j)).sum())
                        .collect()
                })
                .collect()
        };
        let sq = |m: &Vec<Vec<f64>>| m.iter().flatten().map(|v| v * v).sum::<f64>();
        sq(&cov(&xc, &yc)) / (sq(&cov(&xc, &xc)) * sq(&cov(&yc, &yc))).sqrt()
    }

    #[test]
    fn rv_matches_definition_and_edge_cases() {
        let mut rng = SmallRng::seed_from_u64(23);
        let x = random(15, 4, &mut rng);
        let y = random(15, 3, &mut rng);
        let rv = rv_coefficient(&x, &y).unwrap();
        assert!((rv - rv_by_covariances(&x, &y)).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&rv));
        assert!((rv_coefficient(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let swapped: Vec<f64> = x.rows().flat_map(|r| [r[2], r[0], r[3], r[1]]).collect();
        let xp = SampleMatrix::new(swapped, 15, 4).unwrap();
        assert!((rv_coefficient(&x, &xp).unwrap() - 1.0).abs() < 1e-12);
        let c = SampleMatrix::column(&[3.0; 15]).unwrap();
        assert_eq!(rv_coefficient(&c, &y), Err(Error::ZeroDenominator));
    }

    #[test]
    fn mdcor_is_sum_of_componentwise_vstar() {
        let mut rng = SmallRng::seed_from_u64(24);
        let x = random(11, 3, &mut rng);
        let y = random(11, 2, &mut rng);
        let mut want = 0.0;
        for i in 0..3 {
            for j in 0..2 {
                want += vstar(&x.column_matrix(i), &y.column_matrix(j)).unwrap();
            }
        }
        assert!((mdcor_stat(&x, &y).unwrap() - want).abs() < 1e-12);
        let x1 = x.column_matrix(0);
        let y1 = y.column_matrix(1);
        assert!((mdcor_stat(&x1, &y1).unwrap() - vstar(&x1, &y1).unwrap()).abs() < 1e-14);
        let c = SampleMatrix::column(&[1.0; 11]).unwrap();
        assert_eq!(mdcor_stat(&c, &y).unwrap(), 0.0);
    }

    #[test]
    fn fast_permutation_paths_match_generic() {
        let mut rng = SmallRng::seed_from_u64(25);
        let x = random(20, 3, &mut rng);
        let y: Vec<f64> = x.rows().map(|r| r[0] * r[0] + 0.5 * r[1]).collect();
        let y = SampleMatrix::column(&y).unwrap();
        let generic = permutation_pvalue(rv_coefficient, &x, &y, 199, 9).unwrap();
        let fast = rv_permutation_test(&x, &y, 0.05, 199, 9).unwrap();
        assert_eq!(generic, fast.p_value);
        let generic = permutation_pvalue(mdcor_stat, &x, &y, 199, 9).unwrap();
        let fast = mdcor_permutation_test(&x, &y, 0.05, 199, 9).unwrap();
        assert_eq!(generic, fast.p_value);
    }

    #[test]
    fn permutation_counting() {
        let mut rng = SmallRng::seed_from_u64(26);
        let x = random(10, 2, &mut rng);
        let y = random(10, 2, &mut rng);
        let constant = |_: &SampleMatrix, _: &SampleMatrix| Ok(4.2);
        assert_eq!(permutation_pvalue(constant, &x, &y, 99, 1).unwrap(), 1.0);
        // Only the unpermuted sample scores 1.
        let ranked = |_: &SampleMatrix, y2: &SampleMatrix| {
            Ok(if y2 == &y { 1.0 } else { 0.0 })
        };
        assert_eq!(permutation_pvalue(ranked, &x, &y, 99, 1).unwrap(), 0.01);
        let a = permutation_pvalue(statistics::vstar, &x, &y, 99, 5).unwrap();
        let b = permutation_pvalue(statistics::vstar, &x, &y, 99, 5).unwrap();
        assert_eq!(a, b);
        assert!(permutation_pvalue(constant, &x, &y, 50, 1).is_err());
    }

    #[test]
    fn seeded_permutations_are_permutations() {
        let p = seeded_permutation(3, 7, 50);
        let mut s = p.clone();
        s.sort_unstable();
        assert_eq!(s, (0..50).collect::<Vec<_>>());
        assert_eq!(p, seeded_permutation(3, 7, 50));
        assert_ne!(p, seeded_permutation(3, 8, 50));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("t-test".parse::<Method>().is_err());
    }
}
