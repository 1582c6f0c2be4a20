use serde::{Deserialize, Serialize};

use crate::discretization::QuadratureRule;
use crate::rng::derive_seed;
use crate::tensor_nn::{train, weighted_squared_loss, DenseMatrix, LossHistory, Mlp, TrainConfig, Trainable};
use crate::{Error, Result};

/// Hidden widths of the encoder (input → latent) and decoder (latent →
/// input). Both end in an affine layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AeArch {
    pub encoder_hidden: Vec<usize>,
    pub decoder_hidden: Vec<usize>,
}

impl Default for AeArch {
    /// `500, 500, 500, 500, d, 500, 500, 500`.
    fn default() -> Self {
        Self::uniform(500)
    }
}

impl AeArch {
    /// Four encoder and three decoder hidden layers of one width.
    pub fn uniform(width: usize) -> Self {
        Self {
            encoder_hidden: vec![width; 4],
            decoder_hidden: vec![width; 3],
        }
    }

    fn dims(&self, input: usize, latent: usize) -> (Vec<usize>, Vec<usize>) {
        let mut enc = vec![input];
        enc.extend(&self.encoder_hidden);
        enc.push(latent);
        let mut dec = vec![latent];
        dec.extend(&self.decoder_hidden);
        dec.push(input);
        (enc, dec)
    }
}

/// Encoder/decoder pair acting on inputs multiplied by `input_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoEncoder {
    encoder: Mlp<f32>,
    decoder: Mlp<f32>,
    input_scale: f64,
}

impl AutoEncoder {
    pub fn new(encoder: Mlp<f32>, decoder: Mlp<f32>, input_scale: f64) -> Result<Self> {
        if encoder.output_dim() != decoder.input_dim() || encoder.input_dim() != decoder.output_dim() {
            return Err(Error::Dimension(format!(
                "encoder {:?} and decoder {:?} do not chain",
                encoder.dims(),
                decoder.dims()
            )));
        }
        if !(input_scale > 0.0 && input_scale.is_finite()) {
            return Err(Error::Config(format!("invalid input scale {input_scale}")));
        }
        Ok(Self {
            encoder,
            decoder,
            input_scale,
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn encoder(&self) -> &Mlp<f32> {
        &self.encoder
    }

    pub fn decoder(&self) -> &Mlp<f32> {
        &self.decoder
    }

    pub fn input_scale(&self) -> f64 {
        self.input_scale
    }

    pub fn into_parts(self) -> (Mlp<f32>, Mlp<f32>, f64) {
        (self.encoder, self.decoder, self.input_scale)
    }

    /// Latent codes of raw (unscaled) inputs.
    pub fn encode_batch(&self, u: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        let s = self.input_scale;
        let x = u.map(|v| (v * s) as f32);
        Ok(self.encoder.forward(&x)?.cast())
    }

    /// Raw-scale reconstructions of latent codes.
    pub fn decode_batch(&self, z: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        let inv = 1.0 / self.input_scale;
        Ok(self.decoder.forward(&z.cast())?.map(|v| v as f64 * inv))
    }
}

impl Trainable<f32> for AutoEncoder {
    fn param_blocks(&self) -> Vec<&[f32]> {
        vec![self.encoder.params(), self.decoder.params()]
    }

    fn param_blocks_mut(&mut self) -> Vec<&mut [f32]> {
        vec![self.encoder.params_mut(), self.decoder.params_mut()]
    }

    fn batch_loss_and_grad(
        &self,
        inputs: &DenseMatrix<f32>,
        targets: &DenseMatrix<f32>,
        weights: Option<&[f32]>,
        grads: &mut [Vec<f32>],
    ) -> Result<f64> {
        let enc = self.encoder.forward_cached(inputs)?;
        let dec = self.decoder.forward_cached(enc.output())?;
        let (loss, d_out) = weighted_squared_loss(dec.output(), targets, weights)?;
        let (g_enc, g_dec) = grads.split_at_mut(1);
        let d_latent = self
            .decoder
            .backward(&dec, &d_out, &mut g_dec[0], true)
            .expect("input gradient requested");
        self.encoder.backward(&enc, &d_latent, &mut g_enc[0], false);
        Ok(loss)
    }
}

/// Fits an autoencoder to the rows of `data` by minimising the
/// quadrature-weighted reconstruction error of the scaled inputs.
pub fn train_autoencoder(
    data: &DenseMatrix<f64>,
    latent_dim: usize,
    arch: &AeArch,
    cfg: &TrainConfig,
    rule: &QuadratureRule,
) -> Result<(AutoEncoder, LossHistory)> {
    if latent_dim == 0 {
        return Err(Error::Config("latent dimension must be at least 1".into()));
    }
    if data.rows() == 0 {
        return Err(Error::Empty("no training inputs".into()));
    }
    if rule.weights().len() != data.cols() {
        return Err(Error::Dimension(format!(
            "{} quadrature weights for {} input nodes",
            rule.weights().len(),
            data.cols()
        )));
    }
    let max = data.max_abs();
    let scale = if max > 0.0 { 1.0 / max } else { 1.0 };
    let (enc_dims, dec_dims) = arch.dims(data.cols(), latent_dim);
    let mut ae = AutoEncoder::new(
        Mlp::init(&enc_dims, derive_seed(cfg.seed, &[1]))?,
        Mlp::init(&dec_dims, derive_seed(cfg.seed, &[2]))?,
        scale,
    )?;
    let x = data.map(|v| (v * scale) as f32);
    let w: Vec<f32> = rule.weights().iter().map(|&v| v as f32).collect();
    let history = train(&mut ae, &x, &x, cfg, Some(&w))?;
    Ok((ae, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{make_quadrature, Grid1D, QuadratureKind};

    fn toy(n: usize, dim: usize) -> DenseMatrix<f64> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (0..dim).map(|j| 3.0 * ((j as f64 + 1.0) * t).sin()).collect()
            })
            .collect();
        DenseMatrix::from_rows(&rows).unwrap()
    }

    fn rule(dim: usize) -> QuadratureRule {
        make_quadrature(&Grid1D::periodic(0.0, 1.0, dim).unwrap(), QuadratureKind::Midpoint).unwrap()
    }

    #[test]
    fn one_epoch_smoke() {
        let x = toy(10, 6);
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 4,
            ..Default::default()
        };
        let (ae, h) = train_autoencoder(&x, 2, &AeArch::uniform(8), &cfg, &rule(6)).unwrap();
        assert_eq!(h.len(), 1);
        assert!(h[0].is_finite());
        assert_eq!(ae.latent_dim(), 2);
        assert_eq!(ae.encoder().dims(), &[6, 8, 8, 8, 8, 2]);
        assert_eq!(ae.decoder().dims(), &[2, 8, 8, 8, 6]);
        let z = ae.encode_batch(&x).unwrap();
        assert_eq!(z.shape(), (10, 2));
        assert_eq!(ae.decode_batch(&z).unwrap().shape(), (10, 6));
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let x = toy(64, 8);
        let cfg = TrainConfig {
            epochs: 60,
            batch_size: 16,
            seed: 5,
            ..Default::default()
        };
        let (a, ha) = train_autoencoder(&x, 1, &AeArch::uniform(16), &cfg, &rule(8)).unwrap();
        let (b, hb) = train_autoencoder(&x, 1, &AeArch::uniform(16), &cfg, &rule(8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
        assert!(ha.last().unwrap() < &(0.5 * ha[0]));
    }

    #[test]
    fn mismatched_parts_are_rejected() {
        let e = Mlp::<f32>::zeros(&[4, 2]).unwrap();
        let d = Mlp::<f32>::zeros(&[3, 4]).unwrap();
        assert!(AutoEncoder::new(e, d, 1.0).is_err());
        assert!(train_autoencoder(&toy(4, 6), 0, &AeArch::uniform(4), &TrainConfig::default(), &rule(6)).is_err());
        assert!(train_autoencoder(&toy(4, 6), 2, &AeArch::uniform(4), &TrainConfig::default(), &rule(5)).is_err());
    }
}
