use serde::{Deserialize, Serialize};

use super::{check_training_set, scale_for, Method, OperatorModel};
use crate::discretization::{ensure_same_grid, Grid1D, QuadratureRule};
use crate::model_reduction::AutoEncoder;
use crate::pde_data::FunctionPairDataset;
use crate::rng::derive_seed;
use crate::tensor_nn::{train, DenseMatrix, LossHistory, Mlp, TrainConfig};
use crate::{Error, Result};

/// Hidden widths of the latent-to-output network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaArch {
    pub hidden: Vec<usize>,
}

impl Default for GammaArch {
    fn default() -> Self {
        Self::uniform(500)
    }
}

impl GammaArch {
    /// Three hidden layers of one width.
    pub fn uniform(width: usize) -> Self {
        Self { hidden: vec![width; 3] }
    }
}

/// `Γ ∘ E`: a frozen encoder followed by a trained latent-to-output map.
#[derive(Debug, Clone, PartialEq)]
pub struct AeNetModel {
    encoder: Mlp<f32>,
    gamma: Mlp<f32>,
    input_scale: f64,
    output_scale: f64,
    grid_in: Grid1D,
    grid_out: Grid1D,
}

impl AeNetModel {
    pub fn new(
        encoder: Mlp<f32>,
        gamma: Mlp<f32>,
        input_scale: f64,
        output_scale: f64,
        grid_in: Grid1D,
        grid_out: Grid1D,
    ) -> Result<Self> {
        if encoder.input_dim() != grid_in.len()
            || gamma.input_dim() != encoder.output_dim()
            || gamma.output_dim() != grid_out.len()
        {
            return Err(Error::Dimension(format!(
                "encoder {:?} and gamma {:?} do not fit grids of {} and {} nodes",
                encoder.dims(),
                gamma.dims(),
                grid_in.len(),
                grid_out.len()
            )));
        }
        Ok(Self {
            encoder,
            gamma,
            input_scale,
            output_scale,
            grid_in,
            grid_out,
        })
    }

    pub fn encoder(&self) -> &Mlp<f32> {
        &self.encoder
    }

    pub fn gamma(&self) -> &Mlp<f32> {
        &self.gamma
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    pub fn input_scale(&self) -> f64 {
        self.input_scale
    }

    pub fn output_scale(&self) -> f64 {
        self.output_scale
    }
}

impl OperatorModel for AeNetModel {
    fn method(&self) -> Method {
        Method::AeNet
    }

    fn grid_in(&self) -> &Grid1D {
        &self.grid_in
    }

    fn grid_out(&self) -> &Grid1D {
        &self.grid_out
    }

    fn predict_rows(&self, inputs: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        let s = self.input_scale;
        let z = self.encoder.forward(&inputs.map(|v| (v * s) as f32))?;
        let inv = 1.0 / self.output_scale;
        Ok(self.gamma.forward(&z)?.map(|v| v as f64 * inv))
    }
}

/// Trains `Γ` on `(E(S_X u_i), S_Y v̂_i)` with the encoder held fixed.
pub fn train_aenet_stage2(
    ae: &AutoEncoder,
    train_set: &FunctionPairDataset,
    arch: &GammaArch,
    cfg: &TrainConfig,
    rule_out: &QuadratureRule,
) -> Result<(AeNetModel, LossHistory)> {
    let (grid_in, grid_out) = check_training_set(train_set)?;
    if ae.input_dim() != grid_in.len() {
        return Err(Error::GridMismatch(format!(
            "encoder takes {} values, inputs have {}",
            ae.input_dim(),
            grid_in.len()
        )));
    }
    ensure_same_grid(rule_out.grid(), &grid_out, "output quadrature")?;
    let latent: DenseMatrix<f32> = ae.encode_batch(&train_set.input_matrix()?)?.cast();
    let out_scale = scale_for(train_set.noisy_output_matrix()?.max_abs());
    let targets = train_set.noisy_output_matrix()?.map(|v| (v * out_scale) as f32);

    let mut dims = vec![ae.latent_dim()];
    dims.extend(&arch.hidden);
    dims.push(grid_out.len());
    let mut gamma = Mlp::<f32>::init(&dims, derive_seed(cfg.seed, &[3]))?;
    let w: Vec<f32> = rule_out.weights().iter().map(|&v| v as f32).collect();
    let history = train(&mut gamma, &latent, &targets, cfg, Some(&w))?;
    let model = AeNetModel::new(ae.encoder().clone(), gamma, ae.input_scale(), out_scale, grid_in, grid_out)?;
    Ok((model, history))
}
