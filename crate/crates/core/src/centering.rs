//! Pairwise Euclidean distances and the two centering transforms.
//!
//! Double-centering subtracts row and column means and adds back the grand
//! mean. U-centering uses the `1/(n-2)` and `1/((n-1)(n-2))` weights instead,
//! which is what makes the downstream covariance estimator unbiased. Both are
//! O(n^2) given row and column sums.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;
use crate::sum::pairwise_sum;

/// Radicands below this fraction of `|x|^2 + |y|^2` are recomputed directly.
const CANCELLATION_GUARD: f64 = 1e-6;

/// Symmetric `n x n` matrix of pairwise distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Vec<f64>,
    n: usize,
}

impl DistanceMatrix {
    /// Wraps a row-major `n x n` matrix after checking symmetry, a zero
    /// diagonal and nonnegativity.
    pub fn new(values: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 || values.len() != n * n {
            return Err(Error::Shape("distance matrix must be n x n with n >= 1"));
        }
        for k in 0..n {
            if values[k * n + k] != 0.0 {
                return Err(Error::Shape("distance matrix diagonal must be zero"));
            }
            for l in 0..n {
                let v = values[k * n + l];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: k, col: l });
                }
                if v < 0.0 {
                    return Err(Error::Shape("distances must be nonnegative"));
                }
                if v != values[l * n + k] {
                    return Err(Error::Shape("distance matrix must be symmetric"));
                }
            }
        }
        Ok(Self { values, n })
    }

    /// Matrix size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(k, l)`.
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k * self.n + l]
    }

    /// Row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Row `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    /// Sum of all off-diagonal entries, `sum_{k != l} a_{k,l}`.
    pub fn total(&self) -> f64 {
        let rows: Vec<f64> = self.values.chunks_exact(self.n).map(pairwise_sum).collect();
        pairwise_sum(&rows)
    }

    fn row_and_column_sums(&self) -> (Vec<f64>, Vec<f64>, f64) {
        let n = self.n;
        let rows: Vec<f64> = self.values.chunks_exact(n).map(pairwise_sum).collect();
        let mut col = vec![0.0; n];
        let cols: Vec<f64> = (0..n)
            .map(|l| {
                for (k, c) in col.iter_mut().enumerate() {
                    *c = self.values[k * n + l];
                }
                pairwise_sum(&col)
            })
            .collect();
        let total = pairwise_sum(&rows);
        (rows, cols, total)
    }
}

/// Which centering produced a [`CenteredDistanceMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    /// `A_{k,l}`: zero row and column sums.
    DoubleCentered,
    /// `A*_{k,l}`: zero off-diagonal row sums, zero diagonal.
    UCentered,
}

/// A double- or U-centered distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDistanceMatrix {
    values: Vec<f64>,
    kind: Centering,
    n: usize,
}

impl CenteredDistanceMatrix {
    /// Matrix size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Centering kind.
    pub fn kind(&self) -> Centering {
        self.kind
    }

    /// Entry `(k, l)`.
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k * self.n + l]
    }

    /// Row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// `sum_{k,l} self_{k,l} other_{k,l}`. The diagonal of a U-centered matrix
    /// is zero, so this is also the off-diagonal sum the unbiased estimator
    /// needs.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::SampleSizeMismatch(self.n, other.n));
        }
        Ok(frobenius(&self.values, &other.values, self.n, None))
    }

    /// `sum_{k,l} self_{k,l} other_{perm[k], perm[l]}`: the inner product
    /// after relabeling the observations of `other`.
    pub fn inner_permuted(&self, other: &Self, perm: &[usize]) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::SampleSizeMismatch(self.n, other.n));
        }
        if perm.len() != self.n {
            return Err(Error::Shape("permutation length must equal n"));
        }
        Ok(frobenius(&self.values, &other.values, self.n, Some(perm)))
    }

    /// Entrywise sum of same-kind matrices.
    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SampleSizeMismatch(self.n, other.n));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    /// Largest absolute residual of the defining sum-zero invariant: row and
    /// column sums for double-centering, off-diagonal row sums for
    /// U-centering.
    pub fn max_invariant_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let row = pairwise_sum(&self.values[k * n..(k + 1) * n]);
            worst = worst.max(libm::fabs(row));
            if self.kind == Centering::DoubleCentered {
                let col: Vec<f64> = (0..n).map(|i| self.values[i * n + k]).collect();
                worst = worst.max(libm::fabs(pairwise_sum(&col)));
            }
        }
        worst
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }
}

pub(crate) fn frobenius(a: &[f64], b: &[f64], n: usize, perm: Option<&[usize]>) -> f64 {
    let mut scratch = vec![0.0; n];
    let rows: Vec<f64> = (0..n)
        .map(|k| {
            let ra = &a[k * n..(k + 1) * n];
            match perm {
                None => {
                    let rb = &b[k * n..(k + 1) * n];
                    for ((s, x), y) in scratch.iter_mut().zip(ra).zip(rb) {
                        *s = x * y;
                    }
                }
                Some(p) => {
                    let pk = p[k] * n;
                    for ((s, x), &pl) in scratch.iter_mut().zip(ra).zip(p) {
                        *s = x * b[pk + pl];
                    }
                }
            }
            pairwise_sum(&scratch)
        })
        .collect();
    pairwise_sum(&rows)
}

/// Euclidean distances between all pairs of rows.
///
/// Uses the Gram form `sqrt(max(0, |x|^2 + |y|^2 - 2<x,y>))` on
/// column-centered data, falling back to the direct sum of squared
/// differences where the Gram form cancels badly.
pub fn pairwise_distances(x: &SampleMatrix) -> DistanceMatrix {
    let n = x.n();
    let centered = x.column_centered();
    let norms: Vec<f64> = centered.rows().map(|r| dot(r, r)).collect();
    let mut values = vec![0.0; n * n];
    for k in 0..n {
        let rk = centered.row(k);
        for l in (k + 1)..n {
            let rl = centered.row(l);
            let scale = norms[k] + norms[l];
            let radicand = scale - 2.0 * dot(rk, rl);
            let sq = if radicand < CANCELLATION_GUARD * scale {
                squared_difference(rk, rl)
            } else {
                radicand
            };
            let dist = libm::sqrt(sq.max(0.0));
            values[k * n + l] = dist;
            values[l * n + k] = dist;
        }
    }
    DistanceMatrix { values, n }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn squared_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

/// `A_{k,l} = a_{k,l} - colmean_l - rowmean_k + grandmean`.
pub fn double_center(d: &DistanceMatrix) -> CenteredDistanceMatrix {
    let n = d.n;
    let (rows, cols, total) = d.row_and_column_sums();
    let nf = n as f64;
    let grand = total / (nf * nf);
    let mut values = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..n {
            values[k * n + l] = d.get(k, l) - cols[l] / nf - rows[k] / nf + grand;
        }
    }
    CenteredDistanceMatrix {
        values,
        kind: Centering::DoubleCentered,
        n,
    }
}

/// U-centering with the `n - 2` and `(n - 1)(n - 2)` denominators. The
/// diagonal is set to zero. Requires `n >= 4`.
pub fn u_center(d: &DistanceMatrix) -> Result<CenteredDistanceMatrix> {
    let n = d.n;
    if n < 4 {
        return Err(Error::SampleSizeBelowFour(n));
    }
    let (rows, cols, total) = d.row_and_column_sums();
    let nf = n as f64;
    let grand = total / ((nf - 1.0) * (nf - 2.0));
    let mut values = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..n {
            if k != l {
                values[k * n + l] =
                    d.get(k, l) - cols[l] / (nf - 2.0) - rows[k] / (nf - 2.0) + grand;
            }
        }
    }
    Ok(CenteredDistanceMatrix {
        values,
        kind: Centering::UCentered,
        n,
    })
}
