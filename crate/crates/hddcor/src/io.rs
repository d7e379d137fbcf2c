//! Sample CSV files, discrete-distribution JSON and output sinks.

use std::fs;
use std::io::Write;
use std::path::Path;

use hddcor_core::calibration::TestResult;
use hddcor_core::oracle::{Atom, DiscreteJoint};
use hddcor_core::SampleMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reads a file into a string.
pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses a numeric CSV sample: header row required, one observation per
/// row. A leading column named `date` is skipped.
pub fn parse_sample_csv(text: &str) -> Result<SampleMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Input(format!("header: {e}")))?
        .clone();
    let skip = usize::from(headers.get(0).is_some_and(|h| h.eq_ignore_ascii_case("date")));
    let d = headers.len() - skip;
    if d == 0 {
        return Err(Error::Input("no numeric columns".into()));
    }
    let mut values = Vec::new();
    let mut n = 0;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Input(format!("row {}: {e}", row + 1)))?;
        for (col, cell) in rec.iter().enumerate().skip(skip) {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Input(format!(
                    "row {}, column `{}`: cannot parse `{cell}` as a number",
                    row + 1,
                    &headers[col]
                ))
            })?;
            values.push(v);
        }
        n += 1;
    }
    Ok(SampleMatrix::new(values, n, d)?)
}

/// Reads a sample CSV file.
pub fn read_sample_csv(path: &Path) -> Result<SampleMatrix> {
    parse_sample_csv(&read_to_string(path)?)
        .map_err(|e| match e {
            Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
            other => other,
        })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomJson {
    x: Vec<f64>,
    y: Vec<f64>,
    p: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointJson {
    atoms: Vec<AtomJson>,
}

/// Parses `{"atoms": [{"x": [..], "y": [..], "p": ..}, ..]}`.
pub fn parse_joint_json(text: &str) -> Result<DiscreteJoint> {
    let j: JointJson =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("joint JSON: {e}")))?;
    let atoms = j
        .atoms
        .into_iter()
        .map(|a| Atom {
            x: a.x,
            y: a.y,
            prob: a.p,
        })
        .collect();
    Ok(DiscreteJoint::new(atoms)?)
}

/// Serializes a distribution in the format read by [`parse_joint_json`].
pub fn joint_to_json(joint: &DiscreteJoint) -> String {
    let j = JointJson {
        atoms: joint
            .atoms()
            .iter()
            .map(|a| AtomJson {
                x: a.x.clone(),
                y: a.y.clone(),
                p: a.prob,
            })
            .collect(),
    };
    serde_json::to_string(&j).expect("finite values serialize")
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    /// Comma-separated with a header row.
    #[default]
    Csv,
    /// JSON.
    Json,
}

#[derive(Serialize)]
struct TestRow {
    #[serde(with = "crate::method_name")]
    method: hddcor_core::calibration::Method,
    statistic: f64,
    p_value: f64,
    alpha: f64,
    reject: bool,
}

impl From<&TestResult> for TestRow {
    fn from(r: &TestResult) -> Self {
        Self {
            method: r.method,
            statistic: r.statistic,
            p_value: r.p_value,
            alpha: r.alpha,
            reject: r.reject,
        }
    }
}

/// Renders CSV rows with a header.
pub fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::Input(format!("csv buffer: {e}")))
}

/// Renders pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Renders a test result: `method,statistic,p_value,alpha,reject`.
pub fn render_test_result(r: &TestResult, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => to_csv([TestRow::from(r)]),
        Format::Json => to_json(&TestRow::from(r)),
    }
}
