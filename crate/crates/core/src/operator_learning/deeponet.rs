use serde::{Deserialize, Serialize};

use super::{check_training_set, scale_for, Method, OperatorModel};
use crate::discretization::Grid1D;
use crate::pde_data::FunctionPairDataset;
use crate::rng::derive_seed;
use crate::tensor_nn::{
    matmul, relu_in_place, train, weighted_squared_loss, DenseMatrix, LossHistory, Mlp, Op, TrainConfig, Trainable,
};
use crate::{Error, Result};

/// Hidden widths of the branch (input samples) and trunk (output coordinate)
/// networks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeepONetArch {
    pub branch_hidden: Vec<usize>,
    pub trunk_hidden: Vec<usize>,
}

impl Default for DeepONetArch {
    fn default() -> Self {
        Self::uniform(500)
    }
}

impl DeepONetArch {
    /// Three hidden layers of one width in both networks.
    pub fn uniform(width: usize) -> Self {
        Self {
            branch_hidden: vec![width; 3],
            trunk_hidden: vec![width; 3],
        }
    }
}

/// `v(y) = Σ_k b_k(u)·t_k(y) + bias`, with a ReLU on the trunk features.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepONetModel {
    branch: Mlp<f32>,
    trunk: Mlp<f32>,
    bias: f32,
    input_scale: f64,
    output_scale: f64,
    grid_in: Grid1D,
    grid_out: Grid1D,
}

/// Output nodes mapped affinely onto `[−1, 1]` (the right end of the domain
/// maps to 1).
pub(crate) fn trunk_coordinates(grid: &Grid1D) -> DenseMatrix<f32> {
    let (lo, len) = (grid.x_lo(), grid.length());
    let xs: Vec<f32> = grid.nodes().iter().map(|x| (2.0 * (x - lo) / len - 1.0) as f32).collect();
    DenseMatrix::from_vec(xs.len(), 1, xs).expect("column vector")
}

impl DeepONetModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        branch: Mlp<f32>,
        trunk: Mlp<f32>,
        bias: f32,
        input_scale: f64,
        output_scale: f64,
        grid_in: Grid1D,
        grid_out: Grid1D,
    ) -> Result<Self> {
        if branch.input_dim() != grid_in.len() || trunk.input_dim() != 1 || branch.output_dim() != trunk.output_dim() {
            return Err(Error::Dimension(format!(
                "branch {:?} and trunk {:?} for {} input nodes",
                branch.dims(),
                trunk.dims(),
                grid_in.len()
            )));
        }
        Ok(Self {
            branch,
            trunk,
            bias,
            input_scale,
            output_scale,
            grid_in,
            grid_out,
        })
    }

    pub fn branch(&self) -> &Mlp<f32> {
        &self.branch
    }

    pub fn trunk(&self) -> &Mlp<f32> {
        &self.trunk
    }

    pub fn bias(&self) -> f32 {
        self.bias
    }

    pub fn reduced_dim(&self) -> usize {
        self.branch.output_dim()
    }

    pub fn scales(&self) -> (f64, f64) {
        (self.input_scale, self.output_scale)
    }

    fn trunk_features(&self, coords: &DenseMatrix<f32>) -> Result<DenseMatrix<f32>> {
        let mut t = self.trunk.forward(coords)?;
        relu_in_place(&mut t);
        Ok(t)
    }
}

impl OperatorModel for DeepONetModel {
    fn method(&self) -> Method {
        Method::DeepONet
    }

    fn grid_in(&self) -> &Grid1D {
        &self.grid_in
    }

    fn grid_out(&self) -> &Grid1D {
        &self.grid_out
    }

    fn predict_rows(&self, inputs: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
        let s = self.input_scale;
        let b = self.branch.forward(&inputs.map(|v| (v * s) as f32))?;
        let t = self.trunk_features(&trunk_coordinates(&self.grid_out))?;
        let inv = 1.0 / self.output_scale;
        let bias = self.bias;
        Ok(matmul(&b, Op::N, &t, Op::T).map(|v| (v + bias) as f64 * inv))
    }
}

struct Fit<'a> {
    model: &'a mut DeepONetModel,
    coords: DenseMatrix<f32>,
}

impl Trainable<f32> for Fit<'_> {
    fn param_blocks(&self) -> Vec<&[f32]> {
        vec![
            self.model.branch.params(),
            self.model.trunk.params(),
            std::slice::from_ref(&self.model.bias),
        ]
    }

    fn param_blocks_mut(&mut self) -> Vec<&mut [f32]> {
        let m = &mut *self.model;
        vec![m.branch.params_mut(), m.trunk.params_mut(), std::slice::from_mut(&mut m.bias)]
    }

    fn batch_loss_and_grad(
        &self,
        inputs: &DenseMatrix<f32>,
        targets: &DenseMatrix<f32>,
        weights: Option<&[f32]>,
        grads: &mut [Vec<f32>],
    ) -> Result<f64> {
        let m = &*self.model;
        let bc = m.branch.forward_cached(inputs)?;
        let tc = m.trunk.forward_cached(&self.coords)?;
        let mut t = tc.output().clone();
        relu_in_place(&mut t);
        let b = bc.output();
        let bias = m.bias;
        let pred = matmul(b, Op::N, &t, Op::T).map(|v| v + bias);
        let (loss, d_pred) = weighted_squared_loss(&pred, targets, weights)?;

        grads[2][0] += d_pred.as_slice().iter().copied().sum::<f32>();
        let d_b = matmul(&d_pred, Op::N, &t, Op::N);
        let mut d_t = matmul(&d_pred, Op::T, b, Op::N);
        for (g, v) in d_t.as_mut_slice().iter_mut().zip(t.as_slice()) {
            if *v <= 0.0 {
                *g = 0.0;
            }
        }
        let (g_branch, rest) = grads.split_at_mut(1);
        m.branch.backward(&bc, &d_b, &mut g_branch[0], false);
        m.trunk.backward(&tc, &d_t, &mut rest[0], false);
        Ok(loss)
    }
}

/// Trains branch and trunk jointly on every (sample, output node) pair.
/// Mini-batches are formed over samples and always contain every node.
pub fn train_deeponet(
    train_set: &FunctionPairDataset,
    p: usize,
    arch: &DeepONetArch,
    cfg: &TrainConfig,
) -> Result<(DeepONetModel, LossHistory)> {
    if p == 0 {
        return Err(Error::Config("DeepONet needs at least one basis function".into()));
    }
    let (grid_in, grid_out) = check_training_set(train_set)?;
    let u = train_set.input_matrix()?;
    let v = train_set.noisy_output_matrix()?;
    let (s_in, s_out) = (scale_for(u.max_abs()), scale_for(v.max_abs()));

    let mut bdims = vec![grid_in.len()];
    bdims.extend(&arch.branch_hidden);
    bdims.push(p);
    let mut tdims = vec![1];
    tdims.extend(&arch.trunk_hidden);
    tdims.push(p);
    let mut model = DeepONetModel::new(
        Mlp::init(&bdims, derive_seed(cfg.seed, &[5]))?,
        Mlp::init(&tdims, derive_seed(cfg.seed, &[6]))?,
        0.0,
        s_in,
        s_out,
        grid_in,
        grid_out,
    )?;
    let mut fit = Fit {
        model: &mut model,
        coords: trunk_coordinates(&grid_out),
    };
    let history = train(
        &mut fit,
        &u.map(|x| (x * s_in) as f32),
        &v.map(|x| (x * s_out) as f32),
        cfg,
        None,
    )?;
    Ok((model, history))
}
