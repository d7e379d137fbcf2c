//! Benjamini–Hochberg step-up cutoff.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest `p_(k)` with `p_(k) <= k q / m` over the ascending order
/// statistics, or `0` when no `k` qualifies. p-values not above the cutoff
/// are rejected.
pub fn bh_cutoff(pvalues: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain { name: "q", value: q });
    }
    if let Some(&p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain {
            name: "p-value",
            value: p,
        });
    }
    let mut sorted: Vec<f64> = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .rev()
        .find(|(i, p)| **p <= (*i + 1) as f64 * q / m)
        .map_or(0.0, |(_, p)| *p))
}

/// Number of p-values at or below the cutoff.
pub fn bh_rejections(pvalues: &[f64], q: f64) -> Result<usize> {
    let cut = bh_cutoff(pvalues, q)?;
    if cut == 0.0 {
        return Ok(0);
    }
    Ok(pvalues.iter().filter(|p| **p <= cut).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_up_examples() {
        let p = [0.01, 0.04, 0.03, 0.20];
        // k = 3: 0.04 <= 0.075.
        assert_eq!(bh_cutoff(&p, 0.10).unwrap(), 0.04);
        assert_eq!(bh_rejections(&p, 0.10).unwrap(), 3);
        assert_eq!(bh_cutoff(&[0.5, 0.9], 0.10).unwrap(), 0.0);
        assert_eq!(bh_rejections(&[0.5, 0.9], 0.10).unwrap(), 0);
        // Step-up passes over the failing k = 1.
        assert_eq!(bh_cutoff(&[0.06, 0.07], 0.10).unwrap(), 0.07);
        assert_eq!(bh_cutoff(&[], 0.10).unwrap(), 0.0);
    }

    #[test]
    fn validation() {
        assert!(bh_cutoff(&[0.1], 0.0).is_err());
        assert!(bh_cutoff(&[0.1], 1.0).is_err());
        assert!(bh_cutoff(&[1.1], 0.1).is_err());
        assert!(bh_cutoff(&[f64::NAN], 0.1).is_err());
    }
}
