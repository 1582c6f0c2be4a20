//! Linear (PCA) and nonlinear (autoencoder) reduction of discretized inputs,
//! with projection-error and latent-space diagnostics.

mod autoencoder;
mod pca;
pub(crate) mod persist;

pub use autoencoder::{train_autoencoder, AeArch, AutoEncoder};
pub use pca::{fit_pca, PcaModel};
pub use persist::{load_autoencoder, load_pca, save_autoencoder, save_pca, ReductionMeta};

use serde::{Deserialize, Serialize};

use crate::discretization::QuadratureRule;
use crate::pde_data::IntrinsicParams;
use crate::tensor_nn::DenseMatrix;
use crate::{Error, Result};

/// Encode-then-decode on a batch of row samples.
pub trait Reconstruct {
    fn reconstruct_batch(&self, u: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>>;
}

impl Reconstruct for PcaModel {
    fn reconstruct_batch(&self, u: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        self.decode_batch(&self.encode_batch(u)?)
    }
}

impl Reconstruct for AutoEncoder {
    fn reconstruct_batch(&self, u: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        self.decode_batch(&self.encode_batch(u)?)
    }
}

/// Mean and spread of a per-sample (or per-run) relative error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean: f64,
    /// Sample standard deviation; zero for fewer than two values.
    pub std: f64,
    pub count: usize,
    /// Samples dropped because their norm vanished.
    pub excluded: usize,
}

impl ErrorStats {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                count,
                excluded: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            count,
            excluded: 0,
        }
    }
}

/// Per-sample `‖u − R(u)‖_S / ‖u‖_S`, skipping zero-norm samples.
pub fn relative_errors(
    truth: &DenseMatrix<f64>,
    approx: &DenseMatrix<f64>,
    rule: &QuadratureRule,
) -> Result<(Vec<f64>, usize)> {
    if truth.shape() != approx.shape() {
        return Err(Error::Dimension(format!(
            "truth {:?} vs approximation {:?}",
            truth.shape(),
            approx.shape()
        )));
    }
    if rule.weights().len() != truth.cols() {
        return Err(Error::Dimension(format!(
            "{} quadrature weights for {} nodes",
            rule.weights().len(),
            truth.cols()
        )));
    }
    let mut errs = Vec::with_capacity(truth.rows());
    let mut excluded = 0;
    for (u, v) in truth.iter_rows().zip(approx.iter_rows()) {
        let norm = rule.norm_values(u);
        if norm == 0.0 {
            excluded += 1;
            continue;
        }
        errs.push(rule.dist_sq_values(u, v).sqrt() / norm);
    }
    if excluded > 0 {
        log::warn!("{excluded} zero-norm samples excluded from the relative error");
    }
    Ok((errs, excluded))
}

/// Relative projection error of a reduction model over the rows of `data`.
pub fn projection_error<M: Reconstruct + ?Sized>(
    model: &M,
    data: &DenseMatrix<f64>,
    rule: &QuadratureRule,
) -> Result<ErrorStats> {
    let recon = model.reconstruct_batch(data)?;
    let (errs, excluded) = relative_errors(data, &recon, rule)?;
    let mut stats = ErrorStats::of(&errs);
    stats.excluded = excluded;
    Ok(stats)
}

/// Encoder outputs joined with the intrinsic parameters of each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentTable {
    pub latent: DenseMatrix<f64>,
    pub params: Vec<IntrinsicParams>,
}

impl LatentTable {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn latent_dim(&self) -> usize {
        self.latent.cols()
    }

    /// Columns `z1, …, zd, a, h`.
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = (1..=self.latent_dim()).map(|k| format!("z{k}")).collect();
        h.push("a".into());
        h.push("h".into());
        h
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        let mut r = self.latent.row(i).to_vec();
        r.push(self.params[i].a);
        r.push(self.params[i].h);
        r
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for i in 0..self.len() {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn latent_features(ae: &AutoEncoder, data: &DenseMatrix<f64>, params: &[IntrinsicParams]) -> Result<LatentTable> {
    if params.len() != data.rows() {
        return Err(Error::Dimension(format!(
            "{} parameter records for {} samples",
            params.len(),
            data.rows()
        )));
    }
    Ok(LatentTable {
        latent: ae.encode_batch(data)?,
        params: params.to_vec(),
    })
}

/// Histogram of distances from the centroid of 2-D latent points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialHistogram {
    pub center: [f64; 2],
    /// `bins + 1` edges from 0 to the largest radius.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl RadialHistogram {
    /// Fraction of points closer to the centre than `frac` of the largest
    /// radius. Small values for moderate `frac` indicate a hole in the middle.
    pub fn inner_fraction(&self, frac: f64) -> f64 {
        let total: usize = self.counts.iter().sum();
        if total == 0 {
            return 0.0;
        }
        let r_cut = frac * self.edges.last().copied().unwrap_or(0.0);
        let inside: usize = self
            .counts
            .iter()
            .zip(self.edges.windows(2))
            .filter(|(_, e)| e[1] <= r_cut)
            .map(|(c, _)| c)
            .sum();
        inside as f64 / total as f64
    }
}

pub fn radial_histogram(latent: &DenseMatrix<f64>, bins: usize) -> Result<RadialHistogram> {
    if latent.cols() != 2 {
        return Err(Error::Dimension(format!("radial histogram needs 2-D codes, got {}", latent.cols())));
    }
    if latent.rows() == 0 || bins == 0 {
        return Err(Error::Empty("radial histogram of no points or no bins".into()));
    }
    let n = latent.rows() as f64;
    let mut center = [0.0; 2];
    for r in latent.iter_rows() {
        center[0] += r[0] / n;
        center[1] += r[1] / n;
    }
    let radii: Vec<f64> = latent
        .iter_rows()
        .map(|r| (r[0] - center[0]).hypot(r[1] - center[1]))
        .collect();
    let r_max = radii.iter().cloned().fold(0.0, f64::max);
    let edges: Vec<f64> = (0..=bins).map(|k| r_max * k as f64 / bins as f64).collect();
    let mut counts = vec![0; bins];
    for r in radii {
        let k = if r_max > 0.0 {
            ((r / r_max * bins as f64) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    Ok(RadialHistogram { center, edges, counts })
}
