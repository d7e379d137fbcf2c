use alloc::vec::Vec;

use crate::error::{Error, Result};

/// An `n x d` sample: rows are observations, columns are coordinates.
///
/// Stored row-major. Every entry is finite and both dimensions are at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    values: Vec<f64>,
    n: usize,
    d: usize,
}

impl SampleMatrix {
    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn new(values: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Shape("need at least one row and one column"));
        }
        if values.len() != n * d {
            return Err(Error::Shape("value count does not equal n * d"));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                col: pos % d,
            });
        }
        Ok(Self { values, n, d })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::Shape("ragged rows"));
            }
            values.extend_from_slice(r);
        }
        Self::new(values, rows.len(), d)
    }

    /// A single-column matrix.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec(), values.len(), 1)
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of coordinates.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Row-major backing storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Observation `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.d..(k + 1) * self.d]
    }

    /// Entry `(k, j)`.
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.d + j]
    }

    /// Iterator over rows.
    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    /// Copy of coordinate `j` as an `n x 1` matrix.
    pub fn column_matrix(&self, j: usize) -> Self {
        let values = self.rows().map(|r| r[j]).collect();
        Self {
            values,
            n: self.n,
            d: 1,
        }
    }

    /// Rows `start..end` as a new matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.n {
            return Err(Error::Shape("row range out of bounds"));
        }
        Ok(Self {
            values: self.values[start * self.d..end * self.d].to_vec(),
            n: end - start,
            d: self.d,
        })
    }

    /// Rows reordered so that row `k` of the result is row `perm[k]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n, "permutation length");
        let mut values = Vec::with_capacity(self.values.len());
        for &k in perm {
            values.extend_from_slice(self.row(k));
        }
        Self {
            values,
            n: self.n,
            d: self.d,
        }
    }

    /// Every entry multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            n: self.n,
            d: self.d,
        }
    }

    /// Column means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut means = alloc::vec![0.0; self.d];
        for r in self.rows() {
            for (m, v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        let inv = 1.0 / self.n as f64;
        means.iter_mut().for_each(|m| *m *= inv);
        means
    }

    /// Copy with each column shifted to mean zero.
    pub fn column_centered(&self) -> Self {
        let means = self.column_means();
        let mut values = self.values.clone();
        for r in values.chunks_exact_mut(self.d) {
            for (v, m) in r.iter_mut().zip(&means) {
                *v -= m;
            }
        }
        Self {
            values,
            n: self.n,
            d: self.d,
        }
    }
}
