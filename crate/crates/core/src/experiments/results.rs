use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model_reduction::{LatentTable, RadialHistogram};
use crate::{Error, Result};

/// One metric of one sweep cell, aggregated over repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub family: String,
    pub method: String,
    pub metric: String,
    pub reduced_dim: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub sigma: f64,
    pub grid_in: usize,
    pub grid_out: usize,
    /// Grid of the test inputs (equals `grid_in` except in grid transfer).
    pub test_grid: usize,
    pub repeats: usize,
    pub seed: u64,
    pub scale: String,
    /// Mean over repeats.
    pub value: f64,
    /// Sample standard deviation over repeats.
    pub std: f64,
    pub wallclock_s: f64,
    pub data_fingerprint: String,
    pub config_fingerprint: String,
}

pub const HEADER: [&str; 19] = [
    "experiment",
    "family",
    "method",
    "metric",
    "reduced_dim",
    "n_train",
    "n_test",
    "sigma",
    "grid_in",
    "grid_out",
    "test_grid",
    "repeats",
    "seed",
    "scale",
    "value",
    "std",
    "wallclock_s",
    "data_fingerprint",
    "config_fingerprint",
];

impl ResultRow {
    /// Identity of the cell and metric, independent of the measured values.
    pub fn key(&self) -> (String, String, String, usize, usize, u64, usize) {
        (
            self.experiment.clone(),
            self.method.clone(),
            self.metric.clone(),
            self.reduced_dim,
            self.n_train,
            self.sigma.to_bits(),
            self.test_grid,
        )
    }

    /// Mean and std over the per-repeat values.
    pub fn aggregate(mut self, values: &[f64]) -> Self {
        let s = crate::model_reduction::ErrorStats::of(values);
        self.value = s.mean;
        self.std = s.std;
        self.repeats = values.len();
        self
    }
}

/// A cell that could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: String,
    pub error: String,
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// `None` when fewer than two distinct abscissae are available.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let (xs, ys) = (&xs[..n], &ys[..n]);
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: n,
    })
}

/// Fit of `log y` against `log x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Dims,
    SampleComplexity,
    Noise,
    Projection,
    GridTransfer,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Dims => "dims",
            SweepKind::SampleComplexity => "sample_complexity",
            SweepKind::Noise => "noise",
            SweepKind::Projection => "projection",
            SweepKind::GridTransfer => "grid_transfer",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        [
            SweepKind::Dims,
            SweepKind::SampleComplexity,
            SweepKind::Noise,
            SweepKind::Projection,
            SweepKind::GridTransfer,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Format(format!("unknown experiment `{s}`")))
    }
}

/// Rows of one sweep plus its derived summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub rows: Vec<ResultRow>,
    pub failures: Vec<CellFailure>,
    /// Trend fit of the series sweeps (log-log for n, linear in σ²).
    pub fit: Option<LinearFit>,
    pub latent: Option<LatentTable>,
    pub radial: Option<RadialHistogram>,
}

impl SweepResult {
    pub fn new(kind: SweepKind) -> Self {
        Self {
            kind,
            rows: Vec::new(),
            failures: Vec::new(),
            fit: None,
            latent: None,
            radial: None,
        }
    }

    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    /// Rows of one metric (and method, if given), in stored order.
    pub fn metric<'a>(&'a self, metric: &'a str, method: Option<&'a str>) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.metric == metric && method.is_none_or(|m| r.method == m))
    }

    /// Sorts rows by key so that results do not depend on execution order.
    pub fn sort(&mut self) {
        self.rows.sort_by_key(|r| r.key());
        self.failures.sort_by(|a, b| a.cell.cmp(&b.cell));
    }
}

pub fn write_rows_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let io = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(io)?;
    w.write_record(HEADER).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let io = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let header = r.headers().map_err(io)?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Format(format!("{}: unexpected header", path.display())));
    }
    r.deserialize().map(|row| row.map_err(io)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: f64) -> ResultRow {
        ResultRow {
            experiment: "dims".into(),
            family: "transport".into(),
            method: "aenet".into(),
            metric: "rel_err_pct".into(),
            reduced_dim: 2,
            n_train: 10,
            n_test: 5,
            sigma: 0.1,
            grid_in: 32,
            grid_out: 32,
            test_grid: 32,
            repeats: 1,
            seed: 3,
            scale: "desk".into(),
            value: v,
            std: 0.0,
            wallclock_s: 1.5,
            data_fingerprint: "ab".into(),
            config_fingerprint: "cd".into(),
        }
    }

    #[test]
    fn csv_round_trip_and_empty_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_rows_csv(&[], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap().trim(), HEADER.join(","));
        assert!(read_rows_csv(&p).unwrap().is_empty());
        let rows = vec![row(1.0 / 3.0), row(1e-300), row(12.5)];
        write_rows_csv(&rows, &p).unwrap();
        assert_eq!(read_rows_csv(&p).unwrap(), rows);
    }

    #[test]
    fn fits() {
        let f = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0], &[2.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_none());
        let g = loglog_fit(&[1.0, 10.0, 100.0], &[1.0, 0.1, 0.01]).unwrap();
        assert!((g.slope + 1.0).abs() < 1e-12);
        assert!(loglog_fit(&[1.0, 2.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn aggregate_uses_sample_std() {
        let r = row(0.0).aggregate(&[1.0, 3.0]);
        assert_eq!(r.value, 2.0);
        assert!((r.std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.repeats, 2);
    }
}
