//! Versioned TOML experiment configuration.
//!
//! Every key is optional except `version`; missing keys take the defaults of
//! the selected scale. Command-line overrides use the same keys
//! (`key=value`, with TOML value syntax).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::discretization::{Grid1D, QuadratureKind};
use crate::operator_learning::{Method, PCANET_OUTPUT_DIM};
use crate::pde_data::Family;
use crate::tensor_nn::TrainConfig;
use crate::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Small widths, epochs and sample counts; runs in minutes.
    Desk,
    /// 512-node grids, 2000 samples, width 500, 500 epochs.
    Full,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        }
    }
}

/// A configuration file or a set of overrides, before defaults are applied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: Option<u32>,
    pub family: Option<Family>,
    pub desk_scale: Option<bool>,
    pub grid_in: Option<usize>,
    pub grid_out: Option<usize>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub reduced_dims: Option<Vec<usize>>,
    pub latent_dim: Option<usize>,
    pub methods: Option<Vec<Method>>,
    pub n_sweep: Option<Vec<usize>>,
    pub sigma: Option<f64>,
    pub sigmas: Option<Vec<f64>>,
    pub test_grids: Option<Vec<usize>>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub width: Option<usize>,
    pub deeponet_width: Option<usize>,
    pub pcanet_output_dim: Option<usize>,
    pub quadrature: Option<QuadratureKind>,
    pub stage_split: Option<bool>,
    pub workers: Option<usize>,
    pub cache: Option<bool>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Parses `key=value` overrides; values use TOML syntax, and bare words
    /// are read as strings.
    pub fn from_overrides<S: AsRef<str>>(pairs: &[S]) -> Result<Self> {
        let mut text = String::new();
        for pair in pairs {
            let pair = pair.as_ref();
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{pair}` is not key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed = format!("{key} = {value}\n");
            if toml::from_str::<toml::Table>(&parsed).is_ok() {
                text.push_str(&parsed);
            } else {
                text.push_str(&format!("{key} = {}\n", toml::Value::String(value.to_string())));
            }
        }
        Self::from_toml_str(&text)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merged(mut self, other: &ConfigFile) -> Self {
        merge_fields!(self, other; version, family, desk_scale, grid_in, grid_out, n_train, n_test,
            reduced_dims, latent_dim, methods, n_sweep, sigma, sigmas, test_grids, repeats, seed,
            output_dir, epochs, batch_size, learning_rate, width, deeponet_width, pcanet_output_dim,
            quadrature, stage_split, workers, cache);
        self
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        match self.version {
            Some(CONFIG_VERSION) => {}
            Some(v) => return Err(Error::Config(format!("unsupported config version {v}"))),
            None => return Err(Error::Config("config must declare `version = 1`".into())),
        }
        let scale = if self.desk_scale.unwrap_or(false) {
            Scale::Desk
        } else {
            Scale::Full
        };
        let mut cfg = ExperimentConfig::defaults(self.family.unwrap_or(Family::Transport), scale);
        let grid = self.grid_in.unwrap_or(cfg.grid_in);
        cfg.grid_in = grid;
        cfg.grid_out = self.grid_out.unwrap_or(grid);
        if let Some(n) = self.n_train {
            cfg.n_train = n;
            cfg.n_sweep = default_n_sweep(n);
        }
        if self.grid_in.is_some() {
            cfg.test_grids = default_test_grids(grid);
        }
        let c = self.clone();
        cfg.n_test = c.n_test.unwrap_or(cfg.n_test);
        cfg.reduced_dims = c.reduced_dims.unwrap_or(cfg.reduced_dims);
        cfg.latent_dim = c.latent_dim.unwrap_or(cfg.latent_dim);
        cfg.methods = c.methods.unwrap_or(cfg.methods);
        cfg.n_sweep = c.n_sweep.unwrap_or(cfg.n_sweep);
        cfg.sigma = c.sigma.unwrap_or(cfg.sigma);
        cfg.sigmas = c.sigmas.unwrap_or(cfg.sigmas);
        cfg.test_grids = c.test_grids.unwrap_or(cfg.test_grids);
        cfg.repeats = c.repeats.unwrap_or(cfg.repeats);
        cfg.seed = c.seed.unwrap_or(cfg.seed);
        cfg.output_dir = c.output_dir.unwrap_or(cfg.output_dir);
        cfg.epochs = c.epochs.unwrap_or(cfg.epochs);
        cfg.batch_size = c.batch_size.unwrap_or(cfg.batch_size);
        cfg.learning_rate = c.learning_rate.unwrap_or(cfg.learning_rate);
        cfg.width = c.width.unwrap_or(cfg.width);
        cfg.deeponet_width = c.deeponet_width.unwrap_or(cfg.deeponet_width);
        cfg.pcanet_output_dim = c.pcanet_output_dim.unwrap_or(cfg.pcanet_output_dim);
        cfg.quadrature = c.quadrature.unwrap_or(cfg.quadrature);
        cfg.stage_split = c.stage_split.unwrap_or(cfg.stage_split);
        cfg.workers = c.workers.unwrap_or(cfg.workers);
        cfg.cache = c.cache.unwrap_or(cfg.cache);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_n_sweep(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [16, 8, 4, 2, 1].iter().map(|d| (n / d).max(2)).collect();
    v.dedup();
    v
}

fn default_test_grids(native: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (3..).map(|k| 1usize << k).take_while(|&g| g < native).collect();
    v.push(native);
    v
}

/// A fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub family: Family,
    pub scale: Scale,
    pub grid_in: usize,
    pub grid_out: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Reduced dimensions of the dimension sweep (d_ae, d_in or p).
    pub reduced_dims: Vec<usize>,
    /// Latent dimension used by the n, noise and grid sweeps.
    pub latent_dim: usize,
    pub methods: Vec<Method>,
    pub n_sweep: Vec<usize>,
    /// Output noise level of every sweep except the noise sweep.
    pub sigma: f64,
    pub sigmas: Vec<f64>,
    pub test_grids: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Hidden width of the autoencoder, Γ and the PCANet core.
    pub width: usize,
    pub deeponet_width: usize,
    pub pcanet_output_dim: usize,
    pub quadrature: QuadratureKind,
    /// Train Stage I and Stage II on disjoint halves of the training set.
    pub stage_split: bool,
    pub workers: usize,
    /// Reuse datasets and trained models stored under the output directory.
    pub cache: bool,
}

impl ExperimentConfig {
    pub fn defaults(family: Family, scale: Scale) -> Self {
        let (grid, n_train, epochs, width, don) = match scale {
            Scale::Full => (512, 2000, 500, 500, 500),
            Scale::Desk => (256, 500, 200, 64, 100),
        };
        Self {
            version: CONFIG_VERSION,
            family,
            scale,
            grid_in: grid,
            grid_out: grid,
            n_train,
            n_test: 500,
            reduced_dims: vec![1, 2, 4, 6, 8, 10, 20, 40, 100],
            latent_dim: 2,
            methods: Method::ALL.to_vec(),
            n_sweep: default_n_sweep(n_train),
            sigma: 0.0,
            sigmas: vec![0.0, 0.25, 0.5, 1.0],
            test_grids: default_test_grids(grid),
            repeats: 3,
            seed: 0,
            output_dir: PathBuf::from("aenet-out"),
            epochs,
            batch_size: 64,
            learning_rate: 1e-3,
            width,
            deeponet_width: don,
            pcanet_output_dim: PCANET_OUTPUT_DIM,
            quadrature: QuadratureKind::Midpoint,
            stage_split: false,
            workers: 1,
            cache: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!("unsupported config version {}", self.version));
        }
        for (name, list) in [
            ("reduced_dims", &self.reduced_dims),
            ("n_sweep", &self.n_sweep),
            ("test_grids", &self.test_grids),
        ] {
            if list.is_empty() {
                return bad(format!("`{name}` must not be empty"));
            }
            if list.contains(&0) {
                return bad(format!("`{name}` entries must be positive"));
            }
        }
        if self.methods.is_empty() || self.sigmas.is_empty() {
            return bad("`methods` and `sigmas` must not be empty".into());
        }
        if self.repeats == 0 || self.workers == 0 || self.latent_dim == 0 || self.pcanet_output_dim == 0 {
            return bad("repeats, workers, latent_dim and pcanet_output_dim must be at least 1".into());
        }
        if self.n_train < 2 || self.n_test == 0 {
            return bad("need at least 2 training and 1 test sample".into());
        }
        if self.width == 0 || self.deeponet_width == 0 {
            return bad("network widths must be positive".into());
        }
        if self.sigmas.iter().chain([&self.sigma]).any(|s| !(*s >= 0.0 && s.is_finite())) {
            return bad("noise levels must be finite and nonnegative".into());
        }
        self.train_config(0).validate()?;
        self.grids()?;
        for &g in &self.test_grids {
            self.family.grid(g)?;
        }
        Ok(())
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            seed,
            shuffle: true,
        }
    }

    pub fn grids(&self) -> Result<(Grid1D, Grid1D)> {
        Ok((self.family.grid(self.grid_in)?, self.family.grid(self.grid_out)?))
    }

    /// Training seed of repeat `r`.
    pub fn repeat_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }

    /// Hash of everything that determines the metric values.
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.workers = 1;
        c.cache = true;
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// A configuration file that resolves back to this configuration.
    pub fn to_toml(&self) -> String {
        let c = self.clone();
        let file = ConfigFile {
            version: Some(c.version),
            family: Some(c.family),
            desk_scale: Some(c.scale == Scale::Desk),
            grid_in: Some(c.grid_in),
            grid_out: Some(c.grid_out),
            n_train: Some(c.n_train),
            n_test: Some(c.n_test),
            reduced_dims: Some(c.reduced_dims),
            latent_dim: Some(c.latent_dim),
            methods: Some(c.methods),
            n_sweep: Some(c.n_sweep),
            sigma: Some(c.sigma),
            sigmas: Some(c.sigmas),
            test_grids: Some(c.test_grids),
            repeats: Some(c.repeats),
            seed: Some(c.seed),
            output_dir: Some(c.output_dir),
            epochs: Some(c.epochs),
            batch_size: Some(c.batch_size),
            learning_rate: Some(c.learning_rate),
            width: Some(c.width),
            deeponet_width: Some(c.deeponet_width),
            pcanet_output_dim: Some(c.pcanet_output_dim),
            quadrature: Some(c.quadrature),
            stage_split: Some(c.stage_split),
            workers: Some(c.workers),
            cache: Some(c.cache),
        };
        toml::to_string(&file).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_full_defaults() {
        let cfg = ConfigFile::from_toml_str("version = 1\nfamily = \"kdv\"").unwrap().resolve().unwrap();
        assert_eq!(cfg.family, Family::Kdv);
        assert_eq!((cfg.grid_in, cfg.n_train, cfg.epochs, cfg.width), (512, 2000, 500, 500));
        assert_eq!(cfg.n_sweep, vec![125, 250, 500, 1000, 2000]);
        assert_eq!(cfg.test_grids, vec![8, 16, 32, 64, 128, 256, 512]);
        assert_eq!(cfg.reduced_dims, vec![1, 2, 4, 6, 8, 10, 20, 40, 100]);
    }

    #[test]
    fn desk_scale_and_overrides() {
        let base = ConfigFile::from_toml_str("version = 1\ndesk_scale = true").unwrap();
        let ov = ConfigFile::from_overrides(&["n_train=100", "methods=[\"aenet\"]", "family=burgers"]).unwrap();
        let cfg = base.merged(&ov).resolve().unwrap();
        assert_eq!(cfg.scale, Scale::Desk);
        assert_eq!((cfg.width, cfg.epochs, cfg.grid_in), (64, 200, 256));
        assert_eq!(cfg.n_train, 100);
        assert_eq!(cfg.n_sweep, vec![6, 12, 25, 50, 100]);
        assert_eq!(cfg.methods, vec![Method::AeNet]);
        assert_eq!(cfg.family, Family::Burgers);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ConfigFile::from_toml_str("family = \"kdv\"").unwrap().resolve().is_err());
        assert!(ConfigFile::from_toml_str("version = 2").unwrap().resolve().is_err());
        assert!(ConfigFile::from_toml_str("version = 1\nbogus = 3").is_err());
        assert!(ConfigFile::from_toml_str("version = 1\nrepeats = 0").unwrap().resolve().is_err());
        assert!(ConfigFile::from_toml_str("version = 1\nreduced_dims = []").unwrap().resolve().is_err());
        assert!(ConfigFile::from_overrides(&["nonsense"]).is_err());
    }

    #[test]
    fn fingerprint_ignores_plumbing() {
        let a = ExperimentConfig::defaults(Family::Transport, Scale::Desk);
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        b.workers = 4;
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.seed = 9;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn toml_round_trip() {
        let a = ExperimentConfig::defaults(Family::Kdv, Scale::Desk);
        let back = ConfigFile::from_toml_str(&a.to_toml()).unwrap().resolve().unwrap();
        assert_eq!(a, back);
    }
}
