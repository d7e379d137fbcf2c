//! Rolling-window dependence screening over two date-indexed tables.
//!
//! For each date `t` with at least `window` rows up to and including `t`,
//! the trailing `window` rows of both tables form one sample pair. Dates are
//! opaque keys ordered lexicographically (ISO-8601 sorts correctly).

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use hddcor_core::calibration::{run_test, Method, PermutationConfig};
use hddcor_core::fdr::bh_cutoff;
use hddcor_core::SampleMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::read_to_string;
use crate::simulate::{replicate_rng, with_threads};

/// Default trailing window, in rows.
pub const DEFAULT_WINDOW: usize = 66;

/// Default FDR level.
pub const DEFAULT_Q: f64 = 0.10;

/// Parsed CSV before alignment; `None` marks an empty cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    /// Date keys in file order.
    pub dates: Vec<String>,
    /// Series names.
    pub names: Vec<String>,
    /// Row-major cells.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl RawTable {
    /// Parses a CSV whose first column is `date`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| Error::Input(format!("header: {e}")))?
            .clone();
        if !headers.get(0).is_some_and(|h| h.eq_ignore_ascii_case("date")) {
            return Err(Error::Input("first column must be `date`".into()));
        }
        let names: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
        let mut dates = Vec::new();
        let mut cells = Vec::new();
        let mut seen = HashSet::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Input(format!("row {}: {e}", row + 1)))?;
            let date = rec[0].to_owned();
            if !seen.insert(date.clone()) {
                return Err(Error::Input(format!("duplicate date `{date}`")));
            }
            let vals = rec
                .iter()
                .skip(1)
                .enumerate()
                .map(|(c, cell)| {
                    if cell.is_empty() {
                        return Ok(None);
                    }
                    match cell.parse::<f64>() {
                        Ok(v) if v.is_finite() => Ok(Some(v)),
                        _ => Err(Error::Input(format!(
                            "date `{date}`, column `{}`: cannot parse `{cell}`",
                            names[c]
                        ))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            dates.push(date);
            cells.push(vals);
        }
        Ok(Self {
            dates,
            names,
            cells,
        })
    }

    /// Reads and parses a file.
    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?).map_err(|e| match e {
            Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// Cleaned table: strictly increasing dates, no missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesTable {
    /// Date keys, strictly increasing.
    pub dates: Vec<String>,
    /// Series names.
    pub names: Vec<String>,
    /// Rows are dates, columns are series.
    pub data: SampleMatrix,
}

impl TimeSeriesTable {
    /// Number of dates.
    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    /// Number of series.
    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    /// CSV with a leading `date` column, readable by [`RawTable::parse`].
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(std::iter::once("date").chain(self.names.iter().map(String::as_str)))?;
        for (date, row) in self.dates.iter().zip(self.data.rows()) {
            w.write_record(std::iter::once(date.clone()).chain(row.iter().map(f64::to_string)))?;
        }
        w.into_inner()
            .map_err(|e| Error::Input(format!("csv buffer: {e}")))
    }
}

/// Result of [`align`].
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    /// `X` table on the shared dates.
    pub x: TimeSeriesTable,
    /// `Y` table on the shared dates.
    pub y: TimeSeriesTable,
    /// `X` columns dropped for missing cells.
    pub dropped_x: Vec<String>,
    /// `Y` columns dropped for missing cells.
    pub dropped_y: Vec<String>,
}

fn restrict(raw: &RawTable, dates: &[String], side: &str) -> Result<(TimeSeriesTable, Vec<String>)> {
    let index: BTreeMap<&str, usize> = raw
        .dates
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i))
        .collect();
    let rows: Vec<&Vec<Option<f64>>> = dates.iter().map(|d| &raw.cells[index[d.as_str()]]).collect();
    let keep: Vec<usize> = (0..raw.names.len())
        .filter(|&c| rows.iter().all(|r| r[c].is_some()))
        .collect();
    let dropped = (0..raw.names.len())
        .filter(|c| !keep.contains(c))
        .map(|c| raw.names[c].clone())
        .collect();
    if keep.is_empty() {
        return Err(Error::Input(format!(
            "every {side} column has a missing value on the shared dates"
        )));
    }
    let values = rows
        .iter()
        .flat_map(|r| keep.iter().map(move |&c| r[c].expect("kept column")))
        .collect();
    Ok((
        TimeSeriesTable {
            dates: dates.to_vec(),
            names: keep.iter().map(|&c| raw.names[c].clone()).collect(),
            data: SampleMatrix::new(values, dates.len(), keep.len())?,
        },
        dropped,
    ))
}

/// Inner-joins two tables on date, then drops every column with a missing
/// cell on the shared dates.
pub fn align(x: &RawTable, y: &RawTable) -> Result<Aligned> {
    let ys: HashSet<&str> = y.dates.iter().map(String::as_str).collect();
    let mut dates: Vec<String> = x
        .dates
        .iter()
        .filter(|d| ys.contains(d.as_str()))
        .cloned()
        .collect();
    if dates.is_empty() {
        return Err(Error::Input("empty date intersection".into()));
    }
    dates.sort();
    let (xt, dropped_x) = restrict(x, &dates, "X")?;
    let (yt, dropped_y) = restrict(y, &dates, "Y")?;
    Ok(Aligned {
        x: xt,
        y: yt,
        dropped_x,
        dropped_y,
    })
}

/// Reads both files and aligns them.
pub fn load_and_align(file_x: &Path, file_y: &Path) -> Result<Aligned> {
    align(&RawTable::read(file_x)?, &RawTable::read(file_y)?)
}

/// Settings of a rolling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingOptions {
    /// Trailing rows per window, including the current date.
    pub window: usize,
    /// Permutations for the permutation methods.
    pub permutations: usize,
    /// Base seed; each date gets its own permutation stream.
    pub seed: u64,
    /// Worker threads.
    pub threads: usize,
}

impl Default for RollingOptions {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            permutations: hddcor_core::calibration::DEFAULT_PERMUTATIONS,
            seed: 0,
            threads: 1,
        }
    }
}

/// One date of a rolling series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValueRecord {
    /// Last date of the window.
    pub date: String,
    /// Test statistic on the window.
    pub statistic: f64,
    /// p-value on the window.
    pub p_value: f64,
}

/// Per-date p-values of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueSeries {
    /// Method.
    pub method: Method,
    /// Window length.
    pub window: usize,
    /// Records in date order.
    pub records: Vec<PValueRecord>,
}

impl PValueSeries {
    /// BH cutoff over all records.
    pub fn cutoff(&self, q: f64) -> Result<f64> {
        let ps: Vec<f64> = self.records.iter().map(|r| r.p_value).collect();
        Ok(bh_cutoff(&ps, q)?)
    }
}

fn check_tables(x: &TimeSeriesTable, y: &TimeSeriesTable, window: usize) -> Result<()> {
    if x.dates != y.dates {
        return Err(Error::Input("tables do not share dates".into()));
    }
    if window < 4 {
        return Err(Error::Input(format!("window must be at least 4 (got {window})")));
    }
    if window > x.n_rows() {
        return Err(Error::Input(format!(
            "window {window} exceeds the {} available rows",
            x.n_rows()
        )));
    }
    Ok(())
}

/// Statistic and p-value of `method` on the trailing window of every
/// eligible date.
pub fn rolling_pvalues(
    x: &TimeSeriesTable,
    y: &TimeSeriesTable,
    method: Method,
    opts: RollingOptions,
) -> Result<PValueSeries> {
    check_tables(x, y, opts.window)?;
    let w = opts.window;
    let records: Vec<Result<PValueRecord>> = with_threads(opts.threads, || {
        (w - 1..x.n_rows())
            .into_par_iter()
            .map(|t| {
                let xs = x.data.slice_rows(t + 1 - w, t + 1)?;
                let ys = y.data.slice_rows(t + 1 - w, t + 1)?;
                let perm = PermutationConfig {
                    permutations: opts.permutations,
                    seed: replicate_rng(opts.seed, t as u64).random(),
                };
                let r = run_test(method, &xs, &ys, 0.05, perm)
                    .map_err(|e| Error::from(e).context(format!("date `{}`", x.dates[t])))?;
                Ok(PValueRecord {
                    date: x.dates[t].clone(),
                    statistic: r.statistic,
                    p_value: r.p_value,
                })
            })
            .collect()
    })?;
    Ok(PValueSeries {
        method,
        window: w,
        records: records.into_iter().collect::<Result<_>>()?,
    })
}

/// BH cutoff of one series, as written to the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cutoff {
    /// Method name.
    pub method: String,
    /// FDR level.
    pub q: f64,
    /// Largest rejected p-value, 0 when nothing is rejected.
    pub cutoff: f64,
}

impl Cutoff {
    /// Cutoff of a series.
    pub fn of(series: &PValueSeries, q: f64) -> Result<Self> {
        Ok(Self {
            method: series.method.name().into(),
            q,
            cutoff: series.cutoff(q)?,
        })
    }

    /// Whether a p-value is rejected at this cutoff.
    pub fn flags(&self, p: f64) -> bool {
        self.cutoff > 0.0 && p <= self.cutoff
    }
}

/// `T_n` against the RV coefficient on the same windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Normal calibration of `T_n`.
    pub tn: PValueSeries,
    /// RV coefficient with permutation p-values.
    pub rv: PValueSeries,
    /// BH cutoffs of `tn` and `rv`.
    pub cutoffs: [Cutoff; 2],
}

/// Runs both screens and their BH cutoffs at level `q`.
pub fn rolling_compare(
    x: &TimeSeriesTable,
    y: &TimeSeriesTable,
    q: f64,
    opts: RollingOptions,
) -> Result<Comparison> {
    let tn = rolling_pvalues(x, y, Method::NormalTn, opts)?;
    let rv = rolling_pvalues(x, y, Method::RvPermutation, opts)?;
    let cutoffs = [Cutoff::of(&tn, q)?, Cutoff::of(&rv, q)?];
    Ok(Comparison { tn, rv, cutoffs })
}

#[derive(Serialize)]
struct SeriesRow<'a> {
    date: &'a str,
    statistic: f64,
    p_value: f64,
    flagged: bool,
}

/// CSV `date,statistic,p_value,flagged`.
pub fn series_csv(series: &PValueSeries, cutoff: &Cutoff) -> Result<Vec<u8>> {
    crate::io::to_csv(series.records.iter().map(|r| SeriesRow {
        date: &r.date,
        statistic: r.statistic,
        p_value: r.p_value,
        flagged: cutoff.flags(r.p_value),
    }))
}

#[derive(Serialize)]
struct CompareRow<'a> {
    date: &'a str,
    normal_tn_statistic: f64,
    normal_tn_p_value: f64,
    normal_tn_flagged: bool,
    rv_statistic: f64,
    rv_p_value: f64,
    rv_flagged: bool,
}

/// CSV with both methods side by side, one row per date.
pub fn comparison_csv(c: &Comparison) -> Result<Vec<u8>> {
    crate::io::to_csv(c.tn.records.iter().zip(&c.rv.records).map(|(a, b)| CompareRow {
        date: &a.date,
        normal_tn_statistic: a.statistic,
        normal_tn_p_value: a.p_value,
        normal_tn_flagged: c.cutoffs[0].flags(a.p_value),
        rv_statistic: b.statistic,
        rv_p_value: b.p_value,
        rv_flagged: c.cutoffs[1].flags(b.p_value),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hddcor_core::special::normal_sf;

    fn table(rows: &[(&str, &[Option<f64>])], names: &[&str]) -> RawTable {
        RawTable {
            dates: rows.iter().map(|r| r.0.to_string()).collect(),
            names: names.iter().map(|s| s.to_string()).collect(),
            cells: rows.iter().map(|r| r.1.to_vec()).collect(),
        }
    }

    #[test]
    fn parse_marks_blanks_and_rejects_garbage() {
        let t = RawTable::parse("date,a,b\n2020-01-02,1,\n2020-01-01,2,3\n").unwrap();
        assert_eq!(t.cells[0], vec![Some(1.0), None]);
        assert_eq!(t.names, ["a", "b"]);
        assert!(RawTable::parse("day,a\n1,2\n").is_err());
        assert!(RawTable::parse("date,a\nx,abc\n").is_err());
        assert!(RawTable::parse("date,a\nx,1\nx,2\n").is_err());
    }

    #[test]
    fn join_sorts_and_drops_incomplete_columns() {
        let x = table(
            &[
                ("2020-01-03", &[Some(3.0), Some(1.0)]),
                ("2020-01-01", &[Some(1.0), None]),
                ("2020-01-02", &[Some(2.0), Some(1.0)]),
            ],
            &["a", "b"],
        );
        let y = table(
            &[("2020-01-02", &[Some(5.0)]), ("2020-01-03", &[Some(6.0)]), ("2020-01-09", &[None])],
            &["c"],
        );
        let al = align(&x, &y).unwrap();
        assert_eq!(al.x.dates, ["2020-01-02", "2020-01-03"]);
        // `b` is complete on the shared dates.
        assert!(al.dropped_x.is_empty());
        assert_eq!(al.x.data.as_slice(), &[2.0, 1.0, 3.0, 1.0]);
        assert_eq!(al.y.data.as_slice(), &[5.0, 6.0]);
        let x2 = table(&[("2020-01-02", &[Some(1.0), None]), ("2020-01-03", &[Some(2.0), Some(1.0)])], &["a", "b"]);
        let al = align(&x2, &y).unwrap();
        assert_eq!(al.dropped_x, ["b"]);
        assert_eq!(al.x.names, ["a"]);
        let far = table(&[("1999-01-01", &[Some(1.0)])], &["c"]);
        assert_eq!(align(&x, &far).unwrap_err().to_string(), "empty date intersection");
    }

    fn synthetic(n: usize, seed: u64) -> (TimeSeriesTable, TimeSeriesTable) {
        let mut rng = replicate_rng(seed, 0);
        let dates: Vec<String> = (0..n).map(|i| format!("d{i:04}")).collect();
        let mut mk = |d: usize| {
            let v: Vec<f64> = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
            TimeSeriesTable {
                dates: dates.clone(),
                names: (0..d).map(|j| format!("s{j}")).collect(),
                data: SampleMatrix::new(v, n, d).unwrap(),
            }
        };
        (mk(3), mk(2))
    }

    #[test]
    fn csv_round_trip() {
        let (x, _) = synthetic(6, 3);
        let raw = RawTable::parse(std::str::from_utf8(&x.to_csv().unwrap()).unwrap()).unwrap();
        let al = align(&raw, &raw).unwrap();
        assert_eq!(al.x, x);
    }

    #[test]
    fn rolling_records_and_pvalues() {
        let (x, y) = synthetic(30, 1);
        let opts = RollingOptions {
            window: 10,
            ..Default::default()
        };
        let s = rolling_pvalues(&x, &y, Method::NormalTn, opts).unwrap();
        assert_eq!(s.records.len(), 21);
        assert_eq!(s.records[0].date, "d0009");
        for r in &s.records {
            assert!((r.p_value - normal_sf(r.statistic)).abs() < 1e-12);
        }
        let full = RollingOptions { window: 30, ..opts };
        let one = rolling_pvalues(&x, &y, Method::NormalTn, full).unwrap();
        assert_eq!(one.records.len(), 1);
        assert_eq!(one.records[0].date, "d0029");
        let too_long = RollingOptions { window: 31, ..opts };
        assert!(rolling_pvalues(&x, &y, Method::NormalTn, too_long).is_err());
        let too_short = RollingOptions { window: 3, ..opts };
        assert!(rolling_pvalues(&x, &y, Method::NormalTn, too_short).is_err());
    }

    #[test]
    fn rolling_is_thread_independent() {
        let (x, y) = synthetic(25, 2);
        let opts = RollingOptions {
            window: 12,
            permutations: 99,
            seed: 4,
            threads: 1,
        };
        let a = rolling_compare(&x, &y, 0.1, opts).unwrap();
        let b = rolling_compare(&x, &y, 0.1, RollingOptions { threads: 3, ..opts }).unwrap();
        assert_eq!(a, b);
        let csv = String::from_utf8(comparison_csv(&a).unwrap()).unwrap();
        assert!(csv.starts_with("date,normal_tn_statistic,normal_tn_p_value,normal_tn_flagged,rv_statistic"));
        assert_eq!(csv.lines().count(), 15);
    }
}
