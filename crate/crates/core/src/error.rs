use thiserror::Error;

/// Errors raised by the statistical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A sample matrix entry was NaN or infinite.
    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite {
        /// Observation index.
        row: usize,
        /// Coordinate index.
        col: usize,
    },
    /// The matrix shape is empty or inconsistent.
    #[error("invalid shape: {0}")]
    Shape(&'static str),
    /// The two samples have different numbers of observations.
    #[error("sample size mismatch: {0} vs {1}")]
    SampleSizeMismatch(usize, usize),
    /// Vectors that must share a dimension do not.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    /// U-centering and the unbiased estimator need at least four observations.
    #[error("sample size below 4 (n = {0})")]
    SampleSizeBelowFour(usize),
    /// `T_R` divides by `sqrt(1 - R*^2)`.
    #[error("studentization undefined at |R*| = 1")]
    StudentizationUndefined,
    /// The gamma calibration needs `V*_n(X) V*_n(Y) > 0`.
    #[error("degenerate marginal distance variance")]
    DegenerateVariance,
    /// The RV coefficient needs nonconstant data.
    #[error("zero denominator: constant data")]
    ZeroDenominator,
    /// Brute-force enumeration above the configured cap.
    #[error("n = {n} exceeds the brute-force cap {cap} (cost grows as n^4)")]
    BruteForceCap {
        /// Requested sample size.
        n: usize,
        /// Configured cap.
        cap: usize,
    },
    /// Too many atoms for exact 4-fold enumeration.
    #[error("{atoms} atoms exceed the enumeration cap {cap}")]
    AtomCap {
        /// Atom count.
        atoms: usize,
        /// Configured cap.
        cap: usize,
    },
    /// The discrete distribution is malformed.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),
    /// The moment formulas assume mean-zero marginals.
    #[error("center the distribution first")]
    NotCentered,
    /// A parameter is outside its domain.
    #[error("{name} out of domain: {value}")]
    Domain {
        /// Parameter name.
        name: &'static str,
        /// Offending value.
        value: f64,
    },
}

/// Result alias for this crate.
pub type Result<T> = core::result::Result<T, Error>;
