//! Figure inputs: (series, x, mean, stderr, count) tables from runs.csv.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::mean_stderr;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("runs file lacks column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: cannot parse `{value}` in column `{column}`")]
    BadValue { row: usize, column: String, value: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const PLOT_HEADER: &[&str] = &["series", "x", "mean", "stderr", "count"];

const NEEDED: &[&str] = &[
    "algorithm",
    "n",
    "k",
    "beta",
    "status",
    "total_movement_m",
    "sent_bytes",
    "primary_loss_pct",
    "general_loss_pct",
    "event_time_s",
];

/// The columns of runs.csv that the figures use.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub algorithm: String,
    pub n: usize,
    pub k: usize,
    pub beta: Option<f64>,
    pub status: String,
    pub total_movement_m: f64,
    pub sent_bytes: f64,
    pub primary_loss_pct: f64,
    pub general_loss_pct: f64,
    pub event_time_s: Option<f64>,
}

impl RunRow {
    /// `linar b=0.3` for the protocol, the bare name otherwise.
    pub fn label(&self) -> String {
        match self.beta {
            Some(b) => format!("{} b={b}", self.algorithm),
            None => self.algorithm.clone(),
        }
    }
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRow>, PlotError> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let mut idx = BTreeMap::new();
    for &c in NEEDED {
        let i = header
            .iter()
            .position(|h| h == c)
            .ok_or_else(|| PlotError::MissingColumn(c.to_string()))?;
        idx.insert(c, i);
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let cell = |c: &str| rec.get(idx[c]).unwrap_or("");
        let bad = |c: &str| PlotError::BadValue {
            row: row + 1,
            column: c.to_string(),
            value: cell(c).to_string(),
        };
        let num = |c: &str| cell(c).parse::<f64>().map_err(|_| bad(c));
        let int = |c: &str| cell(c).parse::<usize>().map_err(|_| bad(c));
        let opt = |c: &str| -> Result<Option<f64>, PlotError> {
            if cell(c).is_empty() {
                Ok(None)
            } else {
                num(c).map(Some)
            }
        };
        out.push(RunRow {
            algorithm: cell("algorithm").to_string(),
            n: int("n")?,
            k: int("k")?,
            beta: opt("beta")?,
            status: cell("status").to_string(),
            total_movement_m: num("total_movement_m")?,
            sent_bytes: num("sent_bytes")?,
            primary_loss_pct: num("primary_loss_pct")?,
            general_loss_pct: num("general_loss_pct")?,
            event_time_s: opt("event_time_s")?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub series: String,
    pub x: f64,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Groups rows by (series, x) and averages `y`; rows where `y` is missing
/// are skipped. Output is sorted by series, then x.
pub fn aggregate(
    rows: &[RunRow],
    series: impl Fn(&RunRow) -> String,
    x: impl Fn(&RunRow) -> f64,
    y: impl Fn(&RunRow) -> Option<f64>,
) -> Vec<Point> {
    let mut groups: BTreeMap<(String, u64), Vec<f64>> = BTreeMap::new();
    for r in rows {
        if let Some(v) = y(r) {
            // f64 keys as ordered bits; all x values are non-negative
            groups.entry((series(r), x(r).to_bits())).or_default().push(v);
        }
    }
    groups
        .into_iter()
        .map(|((series, xb), vals)| {
            let (mean, stderr) = mean_stderr(&vals);
            Point {
                series,
                x: f64::from_bits(xb),
                mean,
                stderr,
                count: vals.len(),
            }
        })
        .collect()
}

pub fn write_points(path: &Path, points: &[Point]) -> Result<(), PlotError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(PLOT_HEADER)?;
    for p in points {
        w.write_record([
            p.series.clone(),
            format!("{}", p.x),
            format!("{}", p.mean + 0.0),
            format!("{}", p.stderr + 0.0),
            p.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

type Metric = fn(&RunRow) -> Option<f64>;

const METRICS: &[(&str, Metric)] = &[
    ("movement", |r| Some(r.total_movement_m)),
    ("bytes", |r| Some(r.sent_bytes)),
    ("primary_loss", |r| Some(r.primary_loss_pct)),
    ("general_loss", |r| Some(r.general_loss_pct)),
    ("event_time", |r| r.event_time_s),
];

/// Writes `<metric>_vs_n.csv` and `<metric>_vs_k.csv` for every metric, and
/// `<metric>_vs_beta.csv` for the protocol. Only rows whose algorithm is in
/// `algorithms` (all when empty) and that did not error are used.
pub fn emit_plotdata(runs: &Path, out: &Path, algorithms: &[String]) -> Result<Vec<PathBuf>, PlotError> {
    let rows: Vec<RunRow> = read_runs(runs)?
        .into_iter()
        .filter(|r| !r.status.starts_with("error"))
        .filter(|r| algorithms.is_empty() || algorithms.iter().any(|a| a.eq_ignore_ascii_case(&r.algorithm)))
        .collect();
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for &(name, y) in METRICS {
        let vs_n = aggregate(&rows, |r| format!("{} k={}", r.label(), r.k), |r| r.n as f64, y);
        let vs_k = aggregate(&rows, |r| format!("{} n={}", r.label(), r.n), |r| r.k as f64, y);
        let beta_rows: Vec<RunRow> = rows.iter().filter(|r| r.beta.is_some()).cloned().collect();
        let vs_beta = aggregate(
            &beta_rows,
            |r| format!("{} n={} k={}", r.algorithm, r.n, r.k),
            |r| r.beta.expect("filtered"),
            y,
        );
        for (suffix, pts) in [("n", vs_n), ("k", vs_k), ("beta", vs_beta)] {
            let path = out.join(format!("{name}_vs_{suffix}.csv"));
            write_points(&path, &pts)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alg: &str, n: usize, k: usize, beta: Option<f64>, mv: f64) -> RunRow {
        RunRow {
            algorithm: alg.into(),
            n,
            k,
            beta,
            status: "restored".into(),
            total_movement_m: mv,
            sent_bytes: 0.0,
            primary_loss_pct: 0.0,
            general_loss_pct: 0.0,
            event_time_s: None,
        }
    }

    #[test]
    fn groups_and_sorts() {
        let rows = vec![
            row("greedy", 40, 1, None, 3.0),
            row("greedy", 20, 1, None, 1.0),
            row("greedy", 20, 1, None, 3.0),
            row("linar", 20, 1, Some(0.3), 5.0),
        ];
        let pts = aggregate(&rows, |r| r.label(), |r| r.n as f64, |r| Some(r.total_movement_m));
        assert_eq!(pts.len(), 3);
        assert_eq!((pts[0].series.as_str(), pts[0].x, pts[0].mean, pts[0].count), ("greedy", 20.0, 2.0, 2));
        assert_eq!(pts[1].x, 40.0);
        assert_eq!(pts[2].series, "linar b=0.3");
        assert!(aggregate(&rows, |r| r.label(), |r| r.n as f64, |r| r.event_time_s).is_empty());
    }
}
