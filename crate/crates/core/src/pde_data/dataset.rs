use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::{kdv_ic, transport_ic, Family, IntrinsicParams};
use super::grf::{burgers_ic, sample_grf_series, GrfSpec, TrigSeries};
use super::spectral::Etdrk4;
use super::transport::{solve_transport, TRANSPORT_TIME};
use crate::discretization::{discretize, stack, DiscreteFunction, Grid1D};
use crate::tensor_nn::DenseMatrix;
use crate::rng::{derive_seed, stream, stream_rng};
use crate::{Error, Result};

/// Time horizons, steps and viscosity of the three solution operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeSettings {
    pub transport_time: f64,
    pub burgers_nu: f64,
    pub burgers_time: f64,
    pub burgers_dt: f64,
    pub kdv_time: f64,
    pub kdv_dt: f64,
}

impl Default for PdeSettings {
    fn default() -> Self {
        Self {
            transport_time: TRANSPORT_TIME,
            burgers_nu: 1e-3,
            burgers_time: 1.0,
            burgers_dt: 1e-3,
            kdv_time: 0.01,
            kdv_dt: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    fn label(self) -> u64 {
        match self {
            Split::Train => stream::TRAIN_SAMPLE,
            Split::Test => stream::TEST_SAMPLE,
        }
    }
}

/// Everything needed to regenerate a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub family: Family,
    pub split: Split,
    pub master_seed: u64,
    pub noise_sigma: f64,
    pub noise_seed: u64,
    /// Seeds of the two random fields behind the Burgers' family.
    pub grf_seeds: Option<[u64; 2]>,
    /// Mode cutoff of those fields.
    pub grf_cutoff: usize,
}

/// Input/output function pairs sharing one grid per side.
///
/// `noisy_outputs` equal `clean_outputs` plus the noise realisation drawn
/// from `meta.noise_seed`; models train on the noisy side and are scored
/// against the clean side.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionPairDataset {
    pub meta: DatasetMeta,
    pub params: Vec<IntrinsicParams>,
    pub sample_seeds: Vec<u64>,
    pub inputs: Vec<DiscreteFunction>,
    pub clean_outputs: Vec<DiscreteFunction>,
    pub noisy_outputs: Vec<DiscreteFunction>,
}

fn max_abs_all(fs: &[DiscreteFunction]) -> f64 {
    fs.iter().fold(0.0, |m, f| m.max(f.max_abs()))
}

impl FunctionPairDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn grid_in(&self) -> Option<&Grid1D> {
        self.inputs.first().map(|f| f.grid())
    }

    pub fn grid_out(&self) -> Option<&Grid1D> {
        self.clean_outputs.first().map(|f| f.grid())
    }

    pub fn input_matrix(&self) -> Result<DenseMatrix<f64>> {
        stack(&self.inputs)
    }

    pub fn clean_output_matrix(&self) -> Result<DenseMatrix<f64>> {
        stack(&self.clean_outputs)
    }

    pub fn noisy_output_matrix(&self) -> Result<DenseMatrix<f64>> {
        stack(&self.noisy_outputs)
    }

    /// Scale factor mapping every input value into `[−1, 1]`.
    pub fn input_scale(&self) -> f64 {
        scale_for(max_abs_all(&self.inputs))
    }

    /// Scale factor mapping every noisy output value into `[−1, 1]`.
    pub fn output_scale(&self) -> f64 {
        scale_for(max_abs_all(&self.noisy_outputs))
    }

    /// The first `n` samples (datasets are prefix-consistent in `n`).
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            meta: self.meta,
            params: self.params[..n].to_vec(),
            sample_seeds: self.sample_seeds[..n].to_vec(),
            inputs: self.inputs[..n].to_vec(),
            clean_outputs: self.clean_outputs[..n].to_vec(),
            noisy_outputs: self.noisy_outputs[..n].to_vec(),
        }
    }

    /// Checks the structural invariants.
    /// The samples at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Dimension(format!("sample {bad} of a {}-sample dataset", self.len())));
        }
        let pick = |fs: &[DiscreteFunction]| idx.iter().map(|&i| fs[i].clone()).collect::<Vec<_>>();
        Ok(Self {
            meta: self.meta,
            params: idx.iter().map(|&i| self.params[i]).collect(),
            sample_seeds: idx.iter().map(|&i| self.sample_seeds[i]).collect(),
            inputs: pick(&self.inputs),
            clean_outputs: pick(&self.clean_outputs),
            noisy_outputs: pick(&self.noisy_outputs),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.inputs.len();
        if [self.params.len(), self.sample_seeds.len(), self.clean_outputs.len(), self.noisy_outputs.len()]
            .iter()
            .any(|&m| m != n)
        {
            return Err(Error::Dimension("dataset columns have different lengths".into()));
        }
        let same = |fs: &[DiscreteFunction]| fs.windows(2).all(|w| w[0].grid() == w[1].grid());
        if !same(&self.inputs) || !same(&self.clean_outputs) || !same(&self.noisy_outputs) {
            return Err(Error::GridMismatch("functions on one side use different grids".into()));
        }
        if let (Some(c), Some(y)) = (self.clean_outputs.first(), self.noisy_outputs.first()) {
            if c.grid() != y.grid() {
                return Err(Error::GridMismatch("clean and noisy outputs on different grids".into()));
            }
        }
        Ok(())
    }
}

fn scale_for(max: f64) -> f64 {
    if max > 0.0 {
        1.0 / max
    } else {
        1.0
    }
}

/// Initial conditions and solution operator of one family.
#[derive(Debug, Clone)]
pub struct DataGenerator {
    family: Family,
    settings: PdeSettings,
    fields: Option<(TrigSeries, TrigSeries)>,
    grf_seeds: Option<[u64; 2]>,
    grf_cutoff: usize,
    master_seed: u64,
}

impl DataGenerator {
    /// `native_n` fixes the mode cutoff of the Burgers' random fields (its
    /// Nyquist mode), so the same fields can be sampled on any grid.
    pub fn new(family: Family, master_seed: u64, native_n: usize, settings: PdeSettings) -> Result<Self> {
        let (fields, grf_seeds, grf_cutoff) = if family == Family::Burgers {
            let spec = GrfSpec::standard(native_n);
            let seeds = [
                derive_seed(master_seed, &[stream::GRF, 0]),
                derive_seed(master_seed, &[stream::GRF, 1]),
            ];
            let w0 = sample_grf_series(&spec, seeds[0])?;
            let w1 = sample_grf_series(&spec, seeds[1])?;
            (Some((w0, w1)), Some(seeds), spec.cutoff)
        } else {
            (None, None, 0)
        };
        Ok(Self {
            family,
            settings,
            fields,
            grf_seeds,
            grf_cutoff,
            master_seed,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn settings(&self) -> &PdeSettings {
        &self.settings
    }

    /// The random fields `(w₀, w₁)` of the Burgers' family.
    pub fn fields(&self) -> Option<&(TrigSeries, TrigSeries)> {
        self.fields.as_ref()
    }

    /// Parameters and seed of sample `i` of a split.
    pub fn sample_params(&self, split: Split, i: usize) -> (IntrinsicParams, u64) {
        let seed = derive_seed(self.master_seed, &[split.label(), i as u64]);
        let p = IntrinsicParams::sample(self.family, &mut stream_rng(seed, &[]));
        (p, seed)
    }

    /// The initial condition with parameters `p` sampled on `grid`.
    pub fn input(&self, p: &IntrinsicParams, grid: &Grid1D) -> Result<DiscreteFunction> {
        self.family.check_grid(grid)?;
        match self.family {
            Family::Transport => discretize(transport_ic(p)?, grid),
            Family::Kdv => discretize(kdv_ic(p)?, grid),
            Family::Burgers => {
                let (w0, w1) = self.fields.as_ref().expect("burgers generator holds its fields");
                burgers_ic(p, w0, w1)?.sample(grid)
            }
        }
    }

    /// Solutions at the final time for each parameter set, on `grid`.
    pub fn outputs(&self, params: &[IntrinsicParams], grid: &Grid1D) -> Result<Vec<DiscreteFunction>> {
        self.family.check_grid(grid)?;
        let s = &self.settings;
        let solver = match self.family {
            Family::Transport => None,
            Family::Burgers => Some(Etdrk4::burgers(grid, s.burgers_nu, s.burgers_dt, s.burgers_time)?),
            Family::Kdv => Some(Etdrk4::kdv(grid, s.kdv_dt, s.kdv_time)?),
        };
        params
            .par_iter()
            .map(|p| match &solver {
                None => solve_transport(transport_ic(p)?, grid, s.transport_time),
                Some(solver) => solver.solve(&self.input(p, grid)?),
            })
            .collect()
    }

    /// `n` clean samples of a split; outputs are copied to the noisy side.
    pub fn split(&self, split: Split, n: usize, grid_in: &Grid1D, grid_out: &Grid1D) -> Result<FunctionPairDataset> {
        let (params, sample_seeds): (Vec<_>, Vec<_>) = (0..n).map(|i| self.sample_params(split, i)).unzip();
        let inputs = params
            .par_iter()
            .map(|p| self.input(p, grid_in))
            .collect::<Result<Vec<_>>>()?;
        let clean_outputs = self.outputs(&params, grid_out)?;
        Ok(FunctionPairDataset {
            meta: DatasetMeta {
                family: self.family,
                split,
                master_seed: self.master_seed,
                noise_sigma: 0.0,
                noise_seed: self.master_seed,
                grf_seeds: self.grf_seeds,
                grf_cutoff: self.grf_cutoff,
            },
            params,
            sample_seeds,
            noisy_outputs: clean_outputs.clone(),
            inputs,
            clean_outputs,
        })
    }
}

/// Replaces the noisy outputs by `clean + σ·ξ` with `ξ` i.i.d. standard
/// normal per node and sample. Sample `i` draws from its own stream, so a
/// prefix of a dataset receives the same noise as the full one.
pub fn add_noise(ds: &FunctionPairDataset, sigma: f64, seed: u64) -> Result<FunctionPairDataset> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Config(format!("noise level must be nonnegative, got {sigma}")));
    }
    let noisy_outputs = if sigma == 0.0 {
        ds.clean_outputs.clone()
    } else {
        ds.clean_outputs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut rng = stream_rng(seed, &[stream::NOISE, i as u64]);
                let values = c
                    .values()
                    .iter()
                    .map(|v| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        v + sigma * z
                    })
                    .collect();
                DiscreteFunction::new(*c.grid(), values)
            })
            .collect::<Result<Vec<_>>>()?
    };
    let mut out = ds.clone();
    out.meta.noise_sigma = sigma;
    out.meta.noise_seed = seed;
    out.noisy_outputs = noisy_outputs;
    Ok(out)
}

/// Training and test splits of one family. Noise of level `sigma` is added
/// to the training outputs only.
pub fn make_dataset(
    family: Family,
    n_train: usize,
    n_test: usize,
    grid_in: &Grid1D,
    grid_out: &Grid1D,
    sigma: f64,
    seed: u64,
) -> Result<(FunctionPairDataset, FunctionPairDataset)> {
    if n_train == 0 || n_test == 0 {
        return Err(Error::Config("sample counts must be positive".into()));
    }
    let gen = DataGenerator::new(family, seed, grid_out.len().max(grid_in.len()), PdeSettings::default())?;
    let train = add_noise(&gen.split(Split::Train, n_train, grid_in, grid_out)?, sigma, seed)?;
    let test = gen.split(Split::Test, n_test, grid_in, grid_out)?;
    Ok((train, test))
}
