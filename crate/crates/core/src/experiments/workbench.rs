use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::discretization::{make_quadrature, QuadratureRule};
use crate::model_reduction::{load_autoencoder, save_autoencoder, train_autoencoder, AeArch, AutoEncoder};
use crate::operator_learning::{
    load_model, save_model, train_aenet_stage2, train_deeponet, train_pcanet, AnyModel, DeepONetArch, GammaArch,
    Method,
};
use crate::pde_data::{
    add_noise, dataset_fingerprint, read_dataset_binary, write_dataset_binary, DataGenerator, FunctionPairDataset,
    PdeSettings, Split,
};
use crate::tensor_nn::{write_loss_history, DenseMatrix, LossHistory};
use crate::{Error, Result};

type Pair = Arc<(FunctionPairDataset, FunctionPairDataset)>;

/// Shared state of the sweeps of one configuration: the generated data and
/// every trained model, memoised in memory and (with `cache`) on disk.
pub struct Workbench {
    cfg: ExperimentConfig,
    generator: OnceLock<DataGenerator>,
    base: Mutex<Option<Pair>>,
    autoencoders: Mutex<HashMap<String, Arc<AutoEncoder>>>,
    models: Mutex<HashMap<String, Arc<AnyModel>>>,
    /// Per-key locks so that concurrent cells train each model once.
    in_flight: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn hash_key(parts: &[String]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().take(10).map(|b| format!("{b:02x}")).collect()
}

fn matrix_fingerprint(m: &DenseMatrix<f64>) -> String {
    let mut h = Sha256::new();
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().take(10).map(|b| format!("{b:02x}")).collect()
}

impl Workbench {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            generator: OnceLock::new(),
            base: Mutex::new(None),
            autoencoders: Mutex::new(HashMap::new()),
            models: Mutex::new(HashMap::new()),
            in_flight: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn dir(&self, sub: &str) -> Result<PathBuf> {
        let d = self.cfg.output_dir.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        Ok(d)
    }

    pub fn generator(&self) -> Result<&DataGenerator> {
        if let Some(g) = self.generator.get() {
            return Ok(g);
        }
        let native = self.cfg.grid_in.max(self.cfg.grid_out);
        let g = DataGenerator::new(self.cfg.family, self.cfg.seed, native, PdeSettings::default())?;
        Ok(self.generator.get_or_init(|| g))
    }

    fn base_n(&self) -> usize {
        self.cfg.n_sweep.iter().copied().chain([self.cfg.n_train]).max().unwrap_or(self.cfg.n_train)
    }

    /// Clean training (largest requested size) and test sets.
    pub fn base(&self) -> Result<Pair> {
        let mut slot = self.base.lock().expect("dataset lock");
        if let Some(p) = slot.as_ref() {
            return Ok(p.clone());
        }
        let c = &self.cfg;
        let n = self.base_n();
        let name = format!(
            "{}-{}-{}-n{}-t{}-s{}",
            c.family, c.grid_in, c.grid_out, n, c.n_test, c.seed
        );
        let paths = if c.cache {
            let d = self.dir("datasets")?;
            Some((d.join(format!("{name}-train.aeds")), d.join(format!("{name}-test.aeds"))))
        } else {
            None
        };
        if let Some((tp, sp)) = &paths {
            if tp.exists() && sp.exists() {
                if let (Ok(tr), Ok(te)) = (read_dataset_binary(tp), read_dataset_binary(sp)) {
                    log::info!("loaded cached dataset {name}");
                    let p = Arc::new((tr, te));
                    *slot = Some(p.clone());
                    return Ok(p);
                }
            }
        }
        let (gin, gout) = c.grids()?;
        let gen = self.generator()?;
        let t = std::time::Instant::now();
        let train = gen.split(Split::Train, n, &gin, &gout)?;
        let test = gen.split(Split::Test, c.n_test, &gin, &gout)?;
        log::info!("generated dataset {name} in {:.1?}", t.elapsed());
        if let Some((tp, sp)) = &paths {
            write_dataset_binary(&train, tp)?;
            write_dataset_binary(&test, sp)?;
        }
        let p = Arc::new((train, test));
        *slot = Some(p.clone());
        Ok(p)
    }

    /// The first `n` training samples with noise of level `sigma` on the
    /// outputs.
    pub fn train_set(&self, n: usize, sigma: f64) -> Result<FunctionPairDataset> {
        let base = self.base()?;
        if n > base.0.len() {
            return Err(Error::Config(format!("{n} training samples requested, {} generated", base.0.len())));
        }
        add_noise(&base.0.prefix(n), sigma, self.cfg.seed)
    }

    pub fn test_set(&self) -> Result<FunctionPairDataset> {
        Ok(self.base()?.1.clone())
    }

    pub fn rule_in(&self) -> Result<QuadratureRule> {
        make_quadrature(&self.cfg.grids()?.0, self.cfg.quadrature)
    }

    pub fn rule_out(&self) -> Result<QuadratureRule> {
        make_quadrature(&self.cfg.grids()?.1, self.cfg.quadrature)
    }

    fn key_lock(&self, key: &str) -> Arc<Mutex<()>> {
        self.in_flight
            .lock()
            .expect("key lock table")
            .entry(key.to_string())
            .or_default()
            .clone()
    }

    fn save_history(&self, key: &str, history: &LossHistory) -> Result<()> {
        if self.cfg.cache {
            write_loss_history(history, &self.dir("models")?.join(format!("{key}.loss.csv")))?;
        }
        Ok(())
    }

    /// Stage I training samples (the first half under `stage_split`).
    fn stage_one_inputs(&self, train: &FunctionPairDataset) -> Result<DenseMatrix<f64>> {
        if self.cfg.stage_split {
            train.prefix(train.len() / 2).input_matrix()
        } else {
            train.input_matrix()
        }
    }

    fn stage_two_set(&self, train: &FunctionPairDataset) -> Result<FunctionPairDataset> {
        if self.cfg.stage_split {
            let idx: Vec<usize> = (train.len() / 2..train.len()).collect();
            train.select(&idx)
        } else {
            Ok(train.clone())
        }
    }

    fn train_json(&self, seed: u64) -> String {
        serde_json::to_string(&self.cfg.train_config(seed)).expect("train config serializes")
    }

    pub fn autoencoder(&self, train: &FunctionPairDataset, d: usize, seed: u64) -> Result<Arc<AutoEncoder>> {
        let inputs = self.stage_one_inputs(train)?;
        let arch = AeArch::uniform(self.cfg.width);
        let key = format!(
            "ae-{}-d{d}-{}",
            self.cfg.family,
            hash_key(&[
                matrix_fingerprint(&inputs),
                format!("{arch:?}"),
                self.train_json(seed),
                format!("{:?}", self.cfg.quadrature),
            ])
        );
        let lock = self.key_lock(&key);
        let _guard = lock.lock().expect("model lock");
        if let Some(ae) = self.autoencoders.lock().expect("ae table").get(&key) {
            return Ok(ae.clone());
        }
        let path = self.dir("models")?.join(format!("{key}.bin"));
        let ae = match (self.cfg.cache && path.exists())
            .then(|| load_autoencoder(&path))
            .and_then(|r| r.ok())
        {
            Some((ae, _)) => ae,
            None => {
                let t = std::time::Instant::now();
                let (ae, history) =
                    train_autoencoder(&inputs, d, &arch, &self.cfg.train_config(seed), &self.rule_in()?)?;
                log::info!("trained {key} in {:.1?}", t.elapsed());
                if self.cfg.cache {
                    save_autoencoder(&ae, &matrix_fingerprint(&inputs), &path)?;
                    self.save_history(&key, &history)?;
                }
                ae
            }
        };
        let ae = Arc::new(ae);
        self.autoencoders.lock().expect("ae table").insert(key, ae.clone());
        Ok(ae)
    }

    /// A trained operator model of `method` with reduced dimension `d`.
    pub fn model(&self, method: Method, train: &FunctionPairDataset, d: usize, seed: u64) -> Result<Arc<AnyModel>> {
        let fp = dataset_fingerprint(train)?;
        let c = &self.cfg;
        let arch = match method {
            Method::AeNet => format!("{:?}{:?}", AeArch::uniform(c.width), GammaArch::uniform(c.width)),
            Method::PcaNet => format!("core{}x3-out{}", c.width, c.pcanet_output_dim),
            Method::DeepONet => format!("{:?}", DeepONetArch::uniform(c.deeponet_width)),
        };
        let key = format!(
            "{method}-{}-d{d}-{}",
            c.family,
            hash_key(&[
                fp.clone(),
                arch,
                self.train_json(seed),
                format!("{:?}{}", c.quadrature, c.stage_split),
            ])
        );
        let lock = self.key_lock(&key);
        let _guard = lock.lock().expect("model lock");
        if let Some(m) = self.models.lock().expect("model table").get(&key) {
            return Ok(m.clone());
        }
        let path = self.dir("models")?.join(format!("{key}.bin"));
        let cached = (c.cache && path.exists())
            .then(|| load_model(&path))
            .and_then(|r| r.ok())
            .filter(|(_, f)| *f == fp)
            .map(|(m, _)| m);
        let model = match cached {
            Some(m) => m,
            None => {
                let t = std::time::Instant::now();
                let cfg = c.train_config(seed);
                let (model, history): (AnyModel, LossHistory) = match method {
                    Method::AeNet => {
                        let ae = self.autoencoder(train, d, seed)?;
                        let stage2 = self.stage_two_set(train)?;
                        let (m, h) =
                            train_aenet_stage2(&ae, &stage2, &GammaArch::uniform(c.width), &cfg, &self.rule_out()?)?;
                        (m.into(), h)
                    }
                    Method::PcaNet => {
                        let (m, h) = train_pcanet(train, d, c.pcanet_output_dim, &[c.width; 3], &cfg)?;
                        (m.into(), h)
                    }
                    Method::DeepONet => {
                        let (m, h) = train_deeponet(train, d, &DeepONetArch::uniform(c.deeponet_width), &cfg)?;
                        (m.into(), h)
                    }
                };
                log::info!("trained {key} in {:.1?}", t.elapsed());
                if c.cache {
                    save_model(&model, &fp, &path)?;
                    self.save_history(&key, &history)?;
                }
                model
            }
        };
        let model = Arc::new(model);
        self.models.lock().expect("model table").insert(key, model.clone());
        Ok(model)
    }
}
