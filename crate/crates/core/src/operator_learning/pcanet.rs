use super::{check_training_set, scale_for, Method, OperatorModel};
use crate::discretization::Grid1D;
use crate::model_reduction::{fit_pca, PcaModel};
use crate::pde_data::FunctionPairDataset;
use crate::rng::derive_seed;
use crate::tensor_nn::{train, DenseMatrix, LossHistory, Mlp, TrainConfig};
use crate::{Error, Result};

/// Dimension of the output-side PCA.
pub const PCANET_OUTPUT_DIM: usize = 40;

/// Input PCA, a network between the two latent spaces, and output PCA.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaNetModel {
    input_pca: PcaModel,
    output_pca: PcaModel,
    core: Mlp<f32>,
    /// Multiplies input codes before the network.
    latent_in_scale: f64,
    /// Multiplies output codes as seen by the network.
    latent_out_scale: f64,
    grid_in: Grid1D,
    grid_out: Grid1D,
}

impl PcaNetModel {
    pub fn new(
        input_pca: PcaModel,
        output_pca: PcaModel,
        core: Mlp<f32>,
        latent_in_scale: f64,
        latent_out_scale: f64,
        grid_in: Grid1D,
        grid_out: Grid1D,
    ) -> Result<Self> {
        if input_pca.input_dim() != grid_in.len()
            || output_pca.input_dim() != grid_out.len()
            || core.input_dim() != input_pca.dim()
            || core.output_dim() != output_pca.dim()
        {
            return Err(Error::Dimension("PCANet parts do not chain".into()));
        }
        Ok(Self {
            input_pca,
            output_pca,
            core,
            latent_in_scale,
            latent_out_scale,
            grid_in,
            grid_out,
        })
    }

    pub fn input_pca(&self) -> &PcaModel {
        &self.input_pca
    }

    pub fn output_pca(&self) -> &PcaModel {
        &self.output_pca
    }

    pub fn core(&self) -> &Mlp<f32> {
        &self.core
    }

    pub fn latent_scales(&self) -> (f64, f64) {
        (self.latent_in_scale, self.latent_out_scale)
    }
}

impl OperatorModel for PcaNetModel {
    fn method(&self) -> Method {
        Method::PcaNet
    }

    fn grid_in(&self) -> &Grid1D {
        &self.grid_in
    }

    fn grid_out(&self) -> &Grid1D {
        &self.grid_out
    }

    fn predict_rows(&self, inputs: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        let s = self.latent_in_scale;
        let z = self.input_pca.encode_batch(inputs)?.map(|v| (v * s) as f32);
        let inv = 1.0 / self.latent_out_scale;
        let y = self.core.forward(&z)?.map(|v| v as f64 * inv);
        self.output_pca.decode_batch(&y)
    }
}

/// Fits PCA to the inputs and to the noisy outputs, then trains a network
/// between the two coefficient spaces. `d_out` is capped by the number of
/// samples and output nodes.
pub fn train_pcanet(
    train_set: &FunctionPairDataset,
    d_in: usize,
    d_out: usize,
    hidden: &[usize],
    cfg: &TrainConfig,
) -> Result<(PcaNetModel, LossHistory)> {
    let (grid_in, grid_out) = check_training_set(train_set)?;
    let u = train_set.input_matrix()?;
    let v = train_set.noisy_output_matrix()?;
    let d_out = d_out.min(v.rows()).min(v.cols());
    let input_pca = fit_pca(&u, d_in)?;
    let output_pca = fit_pca(&v, d_out)?;
    let zin = input_pca.encode_batch(&u)?;
    let zout = output_pca.encode_batch(&v)?;
    let (s_in, s_out) = (scale_for(zin.max_abs()), scale_for(zout.max_abs()));

    let mut dims = vec![d_in];
    dims.extend(hidden);
    dims.push(d_out);
    let mut core = Mlp::<f32>::init(&dims, derive_seed(cfg.seed, &[4]))?;
    let history = train(
        &mut core,
        &zin.map(|x| (x * s_in) as f32),
        &zout.map(|x| (x * s_out) as f32),
        cfg,
        None,
    )?;
    let model = PcaNetModel::new(input_pca, output_pca, core, s_in, s_out, grid_in, grid_out)?;
    Ok((model, history))
}
