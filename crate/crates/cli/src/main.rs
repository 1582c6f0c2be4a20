use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use aenet::experiments::{
    emit_outputs, emit_plots, exit_code, run_dim_sweep, run_grid_transfer, run_noise_sweep,
    run_projection_comparison, run_sample_complexity, ConfigFile, ExperimentConfig, Formats, SweepResult, Workbench,
};
use aenet::operator_learning::{evaluate, load_model, save_model, Method, OperatorModel};
use aenet::pde_data::{dataset_fingerprint, write_dataset_csv};

/// Operator learning with autoencoder-based model reduction.
#[derive(Parser)]
#[command(name = "aenet", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Clone)]
struct Common {
    /// Versioned TOML configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Skip SVG charts.
    #[arg(long)]
    no_svg: bool,

    /// Overrides in `key=value` form, using the configuration file keys.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Verb {
    /// Generate (or load cached) training and test data and export them as CSV.
    GenerateData(Common),
    /// Train one model and store it under models/.
    Train(ModelArgs),
    /// Evaluate a stored model (or train one) on the test set.
    Evaluate(EvalArgs),
    /// Relative test error across methods and reduced dimensions.
    SweepDims(Common),
    /// Squared test error versus the number of training samples.
    SweepN(Common),
    /// Squared test error versus output noise variance.
    SweepNoise(Common),
    /// Squared test error versus the grid of the test inputs.
    SweepGrid(Common),
    /// Projection errors of PCA and the autoencoder, singular values and
    /// latent features.
    ProjectCompare(Common),
    /// Re-render every chart from the CSV files in an output directory.
    EmitPlots {
        /// Output directory (defaults to the configured one).
        #[arg(long)]
        dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "aenet")]
    method: String,
    /// Reduced dimension (latent size, input PCA size or DeepONet p).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Repeat index; the training seed is `seed + repeat`.
    #[arg(long, default_value_t = 0)]
    repeat: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EvalArgs {
    /// A model bundle written by `train`.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    args: ModelArgs,
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let base = match &c.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile {
            version: Some(aenet::experiments::CONFIG_VERSION),
            ..Default::default()
        },
    };
    let overrides = ConfigFile::from_overrides(&c.overrides)?;
    Ok(base.merged(&overrides).resolve()?)
}

fn formats(c: &Common) -> Formats {
    Formats {
        svg: !c.no_svg,
        ..Formats::default()
    }
}

fn finish(res: &SweepResult, cfg: &ExperimentConfig, c: &Common) -> Result<u8> {
    for p in emit_outputs(res, cfg, formats(c))? {
        println!("{}", p.display());
    }
    if let Some(f) = res.fit {
        println!("fit: slope {:.4} intercept {:.4} R² {:.4} ({} points)", f.slope, f.intercept, f.r_squared, f.points);
    }
    for f in &res.failures {
        eprintln!("cell {} failed: {}", f.cell, f.error);
    }
    Ok(exit_code(&[res]) as u8)
}

fn sweep(c: &Common, run: fn(&Workbench) -> aenet::Result<SweepResult>) -> Result<u8> {
    let cfg = load_config(c)?;
    let wb = Workbench::new(cfg.clone())?;
    let res = run(&wb)?;
    finish(&res, &cfg, c)
}

fn model_path(cfg: &ExperimentConfig, method: Method, dim: usize, repeat: usize) -> PathBuf {
    cfg.output_dir
        .join("models")
        .join(format!("{method}_{}_d{dim}_r{repeat}.bin", cfg.family))
}

fn train(a: &ModelArgs) -> Result<(ExperimentConfig, Workbench, aenet::operator_learning::AnyModel)> {
    let cfg = load_config(&a.common)?;
    let method = Method::from_name(&a.method)?;
    let wb = Workbench::new(cfg.clone())?;
    let train = wb.train_set(cfg.n_train, cfg.sigma)?;
    let model = wb.model(method, &train, a.dim, cfg.repeat_seed(a.repeat))?;
    let path = model_path(&cfg, method, a.dim, a.repeat);
    std::fs::create_dir_all(path.parent().expect("models dir"))?;
    save_model(&model, &dataset_fingerprint(&train)?, &path)?;
    println!("{}", path.display());
    Ok((cfg, wb, (*model).clone()))
}

fn generate(c: &Common) -> Result<u8> {
    let mut cfg = load_config(c)?;
    cfg.cache = true;
    let wb = Workbench::new(cfg.clone())?;
    let train = wb.train_set(cfg.n_train, cfg.sigma)?;
    let test = wb.test_set()?;
    let dir = cfg.output_dir.join("datasets");
    for (name, ds) in [("train", &train), ("test", &test)] {
        let p = dir.join(format!("{}_{name}.csv", cfg.family));
        write_dataset_csv(ds, &p)?;
        println!("{}  {}", p.display(), &dataset_fingerprint(ds)?[..16]);
    }
    Ok(0)
}

fn eval(e: &EvalArgs) -> Result<u8> {
    let (cfg, wb, model) = match &e.model {
        Some(p) => {
            let cfg = load_config(&e.args.common)?;
            let (m, _) = load_model(p).with_context(|| format!("loading {}", p.display()))?;
            (cfg.clone(), Workbench::new(cfg)?, m)
        }
        None => train(&e.args)?,
    };
    let metrics = evaluate(&model, &wb.test_set()?, &wb.rule_out()?)?;
    let report = serde_json::json!({
        "method": model.method().name(),
        "family": cfg.family.name(),
        "config_fingerprint": cfg.fingerprint(),
        "seed": cfg.seed,
        "metrics": metrics,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}

fn plots(dir: &Option<PathBuf>, c: &Common) -> Result<u8> {
    let out: PathBuf = match dir {
        Some(d) => d.clone(),
        None => load_config(c)?.output_dir,
    };
    for p in emit_plots(Path::new(&out))? {
        println!("{}", p.display());
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.verb {
        Verb::GenerateData(c) => generate(c),
        Verb::Train(a) => train(a).map(|_| 0),
        Verb::Evaluate(e) => eval(e),
        Verb::SweepDims(c) => sweep(c, run_dim_sweep),
        Verb::SweepN(c) => sweep(c, run_sample_complexity),
        Verb::SweepNoise(c) => sweep(c, run_noise_sweep),
        Verb::SweepGrid(c) => sweep(c, run_grid_transfer),
        Verb::ProjectCompare(c) => sweep(c, run_projection_comparison),
        Verb::EmitPlots { dir, common } => plots(dir, common),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
