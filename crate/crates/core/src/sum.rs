const BLOCK: usize = 32;

/// Pairwise (tree) summation: roundoff grows as O(log n) instead of O(n).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn beats_naive_on_many_small_terms() {
        let v = alloc::vec![0.1; 1 << 20];
        let exact = 104_857.6;
        let naive: f64 = v.iter().sum();
        let tree = pairwise_sum(&v);
        assert!((tree - exact).abs() <= (naive - exact).abs());
        assert!((tree - exact).abs() < 1e-8);
    }
}
