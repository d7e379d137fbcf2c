//! Gaussian kernel density estimate and its distance to the standard
//! normal density.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::special::normal_pdf;

/// Number of grid points.
pub const GRID_POINTS: usize = 512;

/// Grid half-width: the grid spans `[-GRID_LIMIT, GRID_LIMIT]`.
pub const GRID_LIMIT: f64 = 4.0;

/// Type-7 sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule `0.9 min(sd, IQR / 1.34) R^{-1/5}`.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let r = samples.len();
    if r < 2 {
        return Err(Error::Shape("bandwidth needs at least two samples"));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Shape("non-finite sample"));
    }
    let mean = crate::pairwise_sum(samples) / r as f64;
    let sq: Vec<f64> = samples.iter().map(|v| (v - mean) * (v - mean)).collect();
    let sd = libm::sqrt(crate::pairwise_sum(&sq) / (r - 1) as f64);
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if !(spread > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    Ok(0.9 * spread * libm::pow(r as f64, -0.2))
}

/// Evenly spaced grid of `GRID_POINTS` points on `[-GRID_LIMIT, GRID_LIMIT]`.
pub fn grid() -> Vec<f64> {
    let step = 2.0 * GRID_LIMIT / (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(|i| -GRID_LIMIT + i as f64 * step).collect()
}

/// Gaussian KDE with bandwidth `bw` evaluated at `points`.
pub fn gaussian_kde(samples: &[f64], bw: f64, points: &[f64]) -> Vec<f64> {
    let scale = 1.0 / (samples.len() as f64 * bw);
    let mut terms = alloc::vec![0.0; samples.len()];
    points
        .iter()
        .map(|&t| {
            for (s, &v) in terms.iter_mut().zip(samples) {
                *s = normal_pdf((t - v) / bw);
            }
            crate::pairwise_sum(&terms) * scale
        })
        .collect()
}

/// `max |KDE(t) - phi(t)|` over the grid, with Silverman's bandwidth.
pub fn max_gap_to_standard_normal(samples: &[f64]) -> Result<f64> {
    let bw = silverman_bandwidth(samples)?;
    let g = grid();
    Ok(gaussian_kde(samples, bw, &g)
        .iter()
        .zip(&g)
        .map(|(f, &t)| libm::fabs(f - normal_pdf(t)))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0, 10.0];
        assert_eq!(quantile_sorted(&s, 0.25), 2.0);
        assert_eq!(quantile_sorted(&s, 0.5), 3.0);
        assert_eq!(quantile_sorted(&s, 0.75), 4.0);
        assert_eq!(quantile_sorted(&[1.0, 2.0], 0.25), 1.25);
    }

    #[test]
    fn bandwidth_by_hand() {
        let s = [1.0, 2.0, 3.0, 4.0, 10.0];
        // sd = sqrt(12.5), IQR / 1.34 = 2 / 1.34 is smaller.
        let want = 0.9 * (2.0 / 1.34) * libm::pow(5.0, -0.2);
        assert!((silverman_bandwidth(&s).unwrap() - want).abs() < 1e-15);
        // Zero IQR falls back to sd.
        let s = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let sd = libm::sqrt(0.875 / 7.0);
        let want = 0.9 * sd * libm::pow(8.0, -0.2);
        assert!((silverman_bandwidth(&s).unwrap() - want).abs() < 1e-15);
        assert!(silverman_bandwidth(&[2.0; 4]).is_err());
        assert!(silverman_bandwidth(&[2.0]).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = grid();
        assert_eq!(g.len(), 512);
        assert_eq!(g[0], -4.0);
        assert!((g[511] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn single_point_kde_is_scaled_kernel() {
        let f = gaussian_kde(&[0.5], 2.0, &[0.5, 2.5]);
        assert!((f[0] - normal_pdf(0.0) / 2.0).abs() < 1e-16);
        assert!((f[1] - normal_pdf(1.0) / 2.0).abs() < 1e-16);
    }

    #[test]
    fn normal_scores_are_close() {
        // Normal quantiles at (i - 0.5) / R.
        let r = 2000;
        let s: Vec<f64> = (0..r)
            .map(|i| crate::special::normal_quantile((i as f64 + 0.5) / r as f64).unwrap())
            .collect();
        let gap = max_gap_to_standard_normal(&s).unwrap();
        assert!(gap < 0.02, "gap {gap}");
        let shifted: Vec<f64> = s.iter().map(|v| v + 1.0).collect();
        assert!(max_gap_to_standard_normal(&shifted).unwrap() > 0.15);
    }
}
