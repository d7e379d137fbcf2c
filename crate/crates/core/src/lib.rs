//! Kernels for high-dimensional independence testing with the bias-corrected
//! distance correlation.
//!
//! The crate is `no_std` (with `alloc`) and carries no IO. It provides
//!
//! - [`centering`]: Euclidean distance matrices, double- and U-centering;
//! - [`statistics`]: unbiased squared distance covariance, the rescaled
//!   statistic `T_n = sqrt(n(n-1)/2) R*_n`, its studentized cousin `T_R`, and
//!   the 4-point U-statistic kernel used as a brute-force oracle;
//! - [`calibration`]: normal, gamma and permutation calibrated tests, plus the
//!   RV-coefficient and marginally aggregated baselines;
//! - [`oracle`]: exact enumeration of population moments for finite discrete
//!   joint distributions;
//! - [`fdr`], [`kde`], [`special`]: supporting numerics.
//!
//! ```
//! use hddcor_core::{statistics, SampleMatrix};
//!
//! let x = SampleMatrix::from_rows(&[[1.0], [2.0], [3.0], [4.0], [5.0]]).unwrap();
//! let t = statistics::t_n(&x, &x).unwrap();
//! assert!((t - 10f64.sqrt()).abs() < 1e-12);
//! ```
#![no_std]
#![warn(missing_docs)]

extern crate alloc;

pub mod calibration;
pub mod centering;
mod error;
pub mod fdr;
pub mod kde;
mod matrix;
pub mod oracle;
pub mod special;
pub mod statistics;
mod sum;

pub use calibration::{Method, TestResult};
pub use centering::{CenteredDistanceMatrix, Centering, DistanceMatrix};
pub use error::{Error, Result};
pub use matrix::SampleMatrix;
pub use oracle::DiscreteJoint;
pub use sum::pairwise_sum;
