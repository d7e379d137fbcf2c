//! Sample distance covariance and correlation statistics.
//!
//! The unbiased estimator `V*_n(X, Y) = (n(n-3))^{-1} sum_{k != l} A*_{k,l} B*_{k,l}`
//! is built from U-centered distance matrices. It is also a U-statistic of
//! order four with kernel [`kernel_h`]; [`vstar_via_ustat`] evaluates that
//! representation by brute force and serves as the correctness oracle.

use crate::centering::{double_center, pairwise_distances, u_center, CenteredDistanceMatrix};
use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;

/// Default sample-size cap for the O(n^4) U-statistic oracle.
pub const USTAT_CAP: usize = 12;

/// Unbiased squared distance covariances and the bias-corrected correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcovEstimates {
    /// `V*_n(X, Y)`.
    pub vstar_xy: f64,
    /// `V*_n(X) = V*_n(X, X)`.
    pub vstar_x: f64,
    /// `V*_n(Y)`.
    pub vstar_y: f64,
    /// `R*_n(X, Y)`, zero on the degenerate branch.
    pub rstar: f64,
    /// Sample size.
    pub n: usize,
}

impl DcovEstimates {
    /// Computes all three unbiased covariances from the two samples.
    pub fn new(x: &SampleMatrix, y: &SampleMatrix) -> Result<Self> {
        let n = check_pair(x, y)?;
        let a = u_centered(x)?;
        let b = u_centered(y)?;
        Self::from_centered(&a, &b, n)
    }

    /// Same as [`DcovEstimates::new`] for precomputed U-centered matrices.
    pub fn from_centered(
        a: &CenteredDistanceMatrix,
        b: &CenteredDistanceMatrix,
        n: usize,
    ) -> Result<Self> {
        let scale = unbiased_scale(n)?;
        let vstar_xy = a.inner(b)? * scale;
        let vstar_x = a.inner(a)? * scale;
        let vstar_y = b.inner(b)? * scale;
        Ok(Self {
            vstar_xy,
            vstar_x,
            vstar_y,
            rstar: correlation(vstar_xy, vstar_x, vstar_y),
            n,
        })
    }

    /// `sqrt(n(n-1)/2) R*_n`.
    pub fn t_n(&self) -> f64 {
        rescale_factor(self.n) * self.rstar
    }

    /// `sqrt(n(n-3)/2 - 1) R*_n / sqrt(1 - R*_n^2)`.
    pub fn t_r(&self) -> Result<f64> {
        studentize(self.rstar, self.n)
    }
}

/// Plug-in (biased) squared distance covariance and correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PluginEstimates {
    /// `V^2_n(X, Y)`.
    pub vn2_xy: f64,
    /// `R^2_n(X, Y)`.
    pub rn2: f64,
    /// Sample size.
    pub n: usize,
}

impl PluginEstimates {
    /// Computes the plug-in estimates from double-centered matrices.
    pub fn new(x: &SampleMatrix, y: &SampleMatrix) -> Result<Self> {
        let n = check_pair(x, y)?;
        let a = double_center(&pairwise_distances(x));
        let b = double_center(&pairwise_distances(y));
        let nn = (n * n) as f64;
        let vn2_xy = a.inner(&b)? / nn;
        let vx = a.inner(&a)? / nn;
        let vy = b.inner(&b)? / nn;
        Ok(Self {
            vn2_xy,
            rn2: correlation(vn2_xy, vx, vy),
            n,
        })
    }
}

fn check_pair(x: &SampleMatrix, y: &SampleMatrix) -> Result<usize> {
    if x.n() != y.n() {
        return Err(Error::SampleSizeMismatch(x.n(), y.n()));
    }
    Ok(x.n())
}

fn unbiased_scale(n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::SampleSizeBelowFour(n));
    }
    Ok(1.0 / (n as f64 * (n as f64 - 3.0)))
}

fn correlation(xy: f64, x: f64, y: f64) -> f64 {
    let denom = x * y;
    if denom > 0.0 {
        xy / libm::sqrt(denom)
    } else {
        0.0
    }
}

/// `sqrt(n(n-1)/2)`.
pub fn rescale_factor(n: usize) -> f64 {
    let n = n as f64;
    libm::sqrt(n * (n - 1.0) / 2.0)
}

/// Studentized transform `sqrt(n(n-3)/2 - 1) r / sqrt(1 - r^2)`.
pub fn studentize(rstar: f64, n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::SampleSizeBelowFour(n));
    }
    if libm::fabs(rstar) >= 1.0 {
        return Err(Error::StudentizationUndefined);
    }
    let nf = n as f64;
    let dof = nf * (nf - 3.0) / 2.0 - 1.0;
    Ok(libm::sqrt(dof) * rstar / libm::sqrt(1.0 - rstar * rstar))
}

/// U-centered distance matrix of a sample (needs `n >= 4`).
pub fn u_centered(x: &SampleMatrix) -> Result<CenteredDistanceMatrix> {
    u_center(&pairwise_distances(x))
}

/// Unbiased squared sample distance covariance `V*_n(X, Y)`.
pub fn vstar(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    let n = check_pair(x, y)?;
    let scale = unbiased_scale(n)?;
    Ok(u_centered(x)?.inner(&u_centered(y)?)? * scale)
}

/// Bias-corrected distance correlation `R*_n(X, Y)`.
pub fn rstar(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    Ok(DcovEstimates::new(x, y)?.rstar)
}

/// Plug-in squared distance covariance `V^2_n(X, Y) = n^{-2} sum A_{k,l} B_{k,l}`.
pub fn plugin_vn2(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    Ok(PluginEstimates::new(x, y)?.vn2_xy)
}

/// Rescaled statistic `T_n = sqrt(n(n-1)/2) R*_n`.
pub fn t_n(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    Ok(DcovEstimates::new(x, y)?.t_n())
}

/// Studentized statistic `T_R`. Fails when `|R*_n| = 1`.
pub fn t_r(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    DcovEstimates::new(x, y)?.t_r()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum())
}

/// The symmetric order-four kernel whose average over all 4-subsets is
/// `V*_n(X, Y)`.
///
/// With `a_ij = |x_i - x_j|`, `b_ij = |y_i - y_j|`:
/// `h = (1/4) sum_{i != j} a_ij b_ij - (1/4) sum_i (sum_{j != i} a_ij)(sum_{j != i} b_ij)
///    + (1/24) (sum_{i != j} a_ij)(sum_{i != j} b_ij)`.
pub fn kernel_h(x: [&[f64]; 4], y: [&[f64]; 4]) -> Result<f64> {
    for pts in [&x, &y] {
        let d = pts[0].len();
        if let Some(bad) = pts.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch(d, bad.len()));
        }
    }
    let mut a = [[0.0; 4]; 4];
    let mut b = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in (i + 1)..4 {
            a[i][j] = euclid(x[i], x[j]);
            a[j][i] = a[i][j];
            b[i][j] = euclid(y[i], y[j]);
            b[j][i] = b[i][j];
        }
    }
    Ok(kernel_from_pairs(&a, &b))
}

/// [`kernel_h`] evaluated on precomputed pairwise quantities. Only the
/// off-diagonal entries are read.
pub fn kernel_from_pairs(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> f64 {
    let mut cross = 0.0;
    let mut rowprod = 0.0;
    let mut total_a = 0.0;
    let mut total_b = 0.0;
    for i in 0..4 {
        let mut ra = 0.0;
        let mut rb = 0.0;
        for j in 0..4 {
            if i != j {
                cross += a[i][j] * b[i][j];
                ra += a[i][j];
                rb += b[i][j];
            }
        }
        rowprod += ra * rb;
        total_a += ra;
        total_b += rb;
    }
    cross / 4.0 - rowprod / 4.0 + total_a * total_b / 24.0
}

/// `V*_n` as the average of [`kernel_h`] over all `C(n, 4)` subsets, capped
/// at [`USTAT_CAP`].
pub fn vstar_via_ustat(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    vstar_via_ustat_capped(x, y, USTAT_CAP)
}

/// [`vstar_via_ustat`] with an explicit cap on `n`.
pub fn vstar_via_ustat_capped(x: &SampleMatrix, y: &SampleMatrix, cap: usize) -> Result<f64> {
    let n = check_pair(x, y)?;
    if n < 4 {
        return Err(Error::SampleSizeBelowFour(n));
    }
    if n > cap {
        return Err(Error::BruteForceCap { n, cap });
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                for l in (k + 1)..n {
                    let idx = [i, j, k, l];
                    total += kernel_h(idx.map(|r| x.row(r)), idx.map(|r| y.row(r)))?;
                    count += 1;
                }
            }
        }
    }
    Ok(total / count as f64)
}
