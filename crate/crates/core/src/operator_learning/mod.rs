//! Operator estimators built on reduced representations: AENet (a frozen
//! autoencoder encoder followed by a latent-to-output network), PCANet and an
//! unstacked DeepONet, plus test metrics and prediction on foreign grids.

mod aenet;
mod deeponet;
mod pcanet;
mod persist;

pub use aenet::{train_aenet_stage2, AeNetModel, GammaArch};
pub use deeponet::{train_deeponet, DeepONetArch, DeepONetModel};
pub use pcanet::{train_pcanet, PcaNetModel, PCANET_OUTPUT_DIM};
pub use persist::{load_model, save_model, AnyModel};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{ensure_same_grid, interpolate, stack, DiscreteFunction, Grid1D, InterpMethod, QuadratureRule};
use crate::model_reduction::{relative_errors, ErrorStats};
use crate::pde_data::FunctionPairDataset;
use crate::tensor_nn::DenseMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "aenet")]
    AeNet,
    #[serde(rename = "pcanet")]
    PcaNet,
    #[serde(rename = "deeponet")]
    DeepONet,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::AeNet, Method::PcaNet, Method::DeepONet];

    pub fn name(self) -> &'static str {
        match self {
            Method::AeNet => "aenet",
            Method::PcaNet => "pcanet",
            Method::DeepONet => "deeponet",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Config(format!("unknown method `{name}`")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A trained map from sampled inputs to sampled outputs on fixed grids.
pub trait OperatorModel: Sync {
    fn method(&self) -> Method;

    fn grid_in(&self) -> &Grid1D;

    fn grid_out(&self) -> &Grid1D;

    /// Predictions for a block of raw input rows on the training input grid.
    fn predict_rows(&self, inputs: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>>;

    /// Row-wise prediction, split across threads in chunks.
    fn predict_batch(&self, inputs: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        if inputs.cols() != self.grid_in().len() {
            return Err(Error::GridMismatch(format!(
                "{} input values per sample, model expects {}",
                inputs.cols(),
                self.grid_in().len()
            )));
        }
        const CHUNK: usize = 256;
        if inputs.rows() <= CHUNK {
            return self.predict_rows(inputs);
        }
        let starts: Vec<usize> = (0..inputs.rows()).step_by(CHUNK).collect();
        let parts = starts
            .par_iter()
            .map(|&s| {
                let idx: Vec<usize> = (s..(s + CHUNK).min(inputs.rows())).collect();
                self.predict_rows(&inputs.select_rows(&idx))
            })
            .collect::<Result<Vec<_>>>()?;
        let cols = self.grid_out().len();
        let mut data = Vec::with_capacity(inputs.rows() * cols);
        for p in parts {
            data.extend(p.into_vec());
        }
        DenseMatrix::from_vec(inputs.rows(), cols, data)
    }

    /// Prediction for one input sampled on the training input grid.
    fn predict(&self, u: &DiscreteFunction) -> Result<DiscreteFunction> {
        if u.grid() != self.grid_in() {
            return Err(Error::GridMismatch(format!(
                "{} nodes on [{}, {}] vs {} on [{}, {}]",
                u.len(),
                u.grid().x_lo(),
                u.grid().x_hi(),
                self.grid_in().len(),
                self.grid_in().x_lo(),
                self.grid_in().x_hi()
            )));
        }
        let m = DenseMatrix::from_vec(1, u.len(), u.values().to_vec())?;
        DiscreteFunction::new(*self.grid_out(), self.predict_batch(&m)?.into_vec())
    }
}

/// Interpolates `u` onto the training input grid, then predicts there.
pub fn predict_on_foreign_grid<M: OperatorModel + ?Sized>(
    model: &M,
    u: &DiscreteFunction,
    method: InterpMethod,
) -> Result<DiscreteFunction> {
    let resampled = interpolate(u, model.grid_in(), method)?;
    model.predict(&resampled)
}

/// Errors of a model on a test set against the clean outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestMetrics {
    /// Per-sample `100·‖pred − v‖/‖v‖`, averaged over samples.
    pub relative_pct: ErrorStats,
    /// `100·sqrt(Σ‖pred − v‖² / Σ‖v‖²)`.
    pub pooled_relative_pct: f64,
    /// Mean of `‖pred − v‖²`.
    pub squared_error: f64,
}

fn test_predictions<M: OperatorModel + ?Sized>(
    model: &M,
    test: &FunctionPairDataset,
    rule_out: &QuadratureRule,
) -> Result<(DenseMatrix<f64>, DenseMatrix<f64>)> {
    if test.is_empty() {
        return Err(Error::Empty("test set has no samples".into()));
    }
    let gin = test.grid_in().expect("nonempty");
    let gout = test.grid_out().expect("nonempty");
    if gin != model.grid_in() {
        return Err(Error::GridMismatch("test inputs are not on the training input grid".into()));
    }
    ensure_same_grid(gout, model.grid_out(), "test outputs")?;
    ensure_same_grid(rule_out.grid(), gout, "output quadrature")?;
    let pred = model.predict_batch(&test.input_matrix()?)?;
    Ok((pred, stack(&test.clean_outputs)?))
}

pub fn evaluate<M: OperatorModel + ?Sized>(
    model: &M,
    test: &FunctionPairDataset,
    rule_out: &QuadratureRule,
) -> Result<TestMetrics> {
    let (pred, truth) = test_predictions(model, test, rule_out)?;
    metrics_from(&pred, &truth, rule_out)
}

pub fn metrics_from(pred: &DenseMatrix<f64>, truth: &DenseMatrix<f64>, rule_out: &QuadratureRule) -> Result<TestMetrics> {
    let (rel, excluded) = relative_errors(truth, pred, rule_out)?;
    let pct: Vec<f64> = rel.iter().map(|r| 100.0 * r).collect();
    let mut relative_pct = ErrorStats::of(&pct);
    relative_pct.excluded = excluded;
    let (mut err_sq, mut norm_sq) = (0.0, 0.0);
    for (v, p) in truth.iter_rows().zip(pred.iter_rows()) {
        err_sq += rule_out.dist_sq_values(v, p);
        norm_sq += rule_out.norm_values(v).powi(2);
    }
    Ok(TestMetrics {
        relative_pct,
        pooled_relative_pct: if norm_sq > 0.0 { 100.0 * (err_sq / norm_sq).sqrt() } else { f64::NAN },
        squared_error: err_sq / truth.rows() as f64,
    })
}

/// Mean and sample std of the per-sample relative error, in percent.
pub fn relative_test_error<M: OperatorModel + ?Sized>(
    model: &M,
    test: &FunctionPairDataset,
    rule_out: &QuadratureRule,
) -> Result<ErrorStats> {
    Ok(evaluate(model, test, rule_out)?.relative_pct)
}

/// Mean over the test set of the squared weighted output error.
pub fn squared_generalization_error<M: OperatorModel + ?Sized>(
    model: &M,
    test: &FunctionPairDataset,
    rule_out: &QuadratureRule,
) -> Result<f64> {
    Ok(evaluate(model, test, rule_out)?.squared_error)
}

pub(crate) fn scale_for(max_abs: f64) -> f64 {
    if max_abs > 0.0 && max_abs.is_finite() {
        1.0 / max_abs
    } else {
        1.0
    }
}

pub(crate) fn check_training_set(train: &FunctionPairDataset) -> Result<(Grid1D, Grid1D)> {
    if train.is_empty() {
        return Err(Error::Empty("training set has no samples".into()));
    }
    train.validate()?;
    Ok((*train.grid_in().expect("nonempty"), *train.grid_out().expect("nonempty")))
}
