#![allow(dead_code)]

use std::ops::Range;

use hddcor::pipeline::TimeSeriesTable;
use hddcor::simulate::replicate_rng;
use hddcor_core::SampleMatrix;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Signal {
    None,
    /// `Y_j = |X_j| - E|X_j| + noise`: uncorrelated with every `X_i`.
    Abs,
    /// `Y_j = X_j + X_{j+1} + noise`.
    Linear,
}

pub struct Fixture {
    pub x: TimeSeriesTable,
    pub y: TimeSeriesTable,
    pub period: Range<usize>,
}

/// `rows` dates of `n1` X series and `n2` Y series of standard normal
/// returns; the signal is present only on `period`.
pub fn planted(rows: usize, n1: usize, n2: usize, period: Range<usize>, signal: Signal, seed: u64) -> Fixture {
    let mut rng = replicate_rng(seed, 0);
    let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let xv = draw(rows * n1);
    let mut yv = draw(rows * n2);
    for t in period.clone() {
        let xr = &xv[t * n1..(t + 1) * n1];
        for j in 0..n2 {
            let y = &mut yv[t * n2 + j];
            match signal {
                Signal::None => {}
                Signal::Abs => *y = 0.5 * *y + xr[j % n1].abs() - (2.0 / std::f64::consts::PI).sqrt(),
                Signal::Linear => *y = 0.5 * *y + xr[j % n1] + xr[(j + 1) % n1],
            }
        }
    }
    let dates: Vec<String> = (0..rows)
        .map(|i| format!("{:04}-{:02}-{:02}", 2000 + i / 336, 1 + (i / 28) % 12, 1 + i % 28))
        .collect();
    let table = |v: Vec<f64>, d: usize, prefix: &str| TimeSeriesTable {
        dates: dates.clone(),
        names: (0..d).map(|j| format!("{prefix}{j}")).collect(),
        data: SampleMatrix::new(v, rows, d).unwrap(),
    };
    Fixture {
        x: table(xv, n1, "x"),
        y: table(yv, n2, "y"),
        period,
    }
}

/// The planted-period fixture shared by the pipeline, CLI and acceptance
/// tests: 400 dates, 5 X series, 5 Y series, signal on dates 200..300.
pub fn planted_default(signal: Signal) -> Fixture {
    planted(400, 5, 5, 200..300, signal, 20240601)
}
