use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::matrix::{DenseMatrix, Real};
use super::mlp::{weighted_squared_loss, Mlp};
use crate::rng::{stream, stream_rng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 1e-3,
            batch_size: 64,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// A model the mini-batch trainer can optimise.
pub trait Trainable<T: Real> {
    fn param_blocks(&self) -> Vec<&[T]>;

    fn param_blocks_mut(&mut self) -> Vec<&mut [T]>;

    /// Loss on one batch; adds its gradient into `grads` (one vector per
    /// parameter block, zeroed by the caller).
    fn batch_loss_and_grad(
        &self,
        inputs: &DenseMatrix<T>,
        targets: &DenseMatrix<T>,
        weights: Option<&[T]>,
        grads: &mut [Vec<T>],
    ) -> Result<f64>;
}

impl<T: Real> Trainable<T> for Mlp<T> {
    fn param_blocks(&self) -> Vec<&[T]> {
        vec![self.params()]
    }

    fn param_blocks_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.params_mut()]
    }

    fn batch_loss_and_grad(
        &self,
        inputs: &DenseMatrix<T>,
        targets: &DenseMatrix<T>,
        weights: Option<&[T]>,
        grads: &mut [Vec<T>],
    ) -> Result<f64> {
        let cache = self.forward_cached(inputs)?;
        let (loss, d_out) = weighted_squared_loss(cache.output(), targets, weights)?;
        self.backward(&cache, &d_out, &mut grads[0], false);
        Ok(loss)
    }
}

/// Per-epoch mean training loss.
pub type LossHistory = Vec<f64>;

/// Mini-batch Adam over `epochs × ⌈n / batch_size⌉` steps.
///
/// Rows are reshuffled every epoch from a stream keyed by `cfg.seed`, so two
/// runs with the same inputs and configuration are bit-identical.
pub fn train<T: Real, M: Trainable<T>>(
    model: &mut M,
    inputs: &DenseMatrix<T>,
    targets: &DenseMatrix<T>,
    cfg: &TrainConfig,
    weights: Option<&[T]>,
) -> Result<LossHistory> {
    cfg.validate()?;
    let n = inputs.rows();
    if n == 0 {
        return Err(Error::Empty("training set has no samples".into()));
    }
    if targets.rows() != n {
        return Err(Error::Dimension(format!("{n} inputs vs {} targets", targets.rows())));
    }
    if let Some(w) = weights {
        if w.iter().any(|v| !(*v > T::zero())) {
            return Err(Error::Config("loss weights must be positive".into()));
        }
    }

    let sizes: Vec<usize> = model.param_blocks().iter().map(|b| b.len()).collect();
    let mut state = AdamState::<T>::new(&sizes);
    let mut grads: Vec<Vec<T>> = sizes.iter().map(|&s| vec![T::zero(); s]).collect();
    let mut rng = stream_rng(cfg.seed, &[stream::SHUFFLE]);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            let x = inputs.select_rows(idx);
            let y = targets.select_rows(idx);
            for g in grads.iter_mut() {
                g.iter_mut().for_each(|v| *v = T::zero());
            }
            let loss = model.batch_loss_and_grad(&x, &y, weights, &mut grads)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, batch, loss });
            }
            total += loss * idx.len() as f64;
            let mut blocks = model.param_blocks_mut();
            adam_step(&mut blocks, &grads, &mut state, cfg.learning_rate)?;
        }
        let mean = total / n as f64;
        log::debug!("epoch {epoch}: loss {mean:.6e}");
        history.push(mean);
    }
    Ok(history)
}
