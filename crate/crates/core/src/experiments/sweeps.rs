use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;

use super::results::{linear_fit, loglog_fit, CellFailure, ResultRow, SweepKind, SweepResult};
use super::workbench::Workbench;
use crate::discretization::{interpolate, stack, InterpMethod};
use crate::model_reduction::{fit_pca, latent_features, projection_error, radial_histogram};
use crate::operator_learning::{evaluate, metrics_from, Method, OperatorModel};
use crate::pde_data::{dataset_fingerprint, FunctionPairDataset};
use crate::{Error, Result};

/// Runs every cell on a pool of `workers` threads. A failing or panicking
/// cell is recorded and the others continue.
fn run_cells<C, F>(wb: &Workbench, kind: SweepKind, cells: &[C], label: impl Fn(&C) -> String + Sync, f: F) -> SweepResult
where
    C: Sync,
    F: Fn(&C) -> Result<Vec<ResultRow>> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(wb.config().workers)
        .build()
        .expect("worker pool");
    let outcomes: Vec<(String, Result<Vec<ResultRow>>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| {
                let name = label(c);
                let out = catch_unwind(AssertUnwindSafe(|| f(c)))
                    .unwrap_or_else(|_| Err(Error::Config(format!("cell `{name}` panicked"))));
                (name, out)
            })
            .collect()
    });
    let mut result = SweepResult::new(kind);
    for (cell, out) in outcomes {
        match out {
            Ok(rows) => result.rows.extend(rows),
            Err(e) => {
                log::warn!("{} cell {cell} failed: {e}", kind.name());
                result.failures.push(CellFailure {
                    cell,
                    error: e.to_string(),
                });
            }
        }
    }
    result.sort();
    result
}

struct RowTemplate<'a> {
    wb: &'a Workbench,
    kind: SweepKind,
    data_fingerprint: String,
}

impl RowTemplate<'_> {
    fn new<'a>(wb: &'a Workbench, kind: SweepKind, train: &FunctionPairDataset) -> Result<RowTemplate<'a>> {
        Ok(RowTemplate {
            wb,
            kind,
            data_fingerprint: dataset_fingerprint(train)?[..16].to_string(),
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn row(
        &self,
        method: &str,
        metric: &str,
        d: usize,
        n: usize,
        sigma: f64,
        test_grid: usize,
        values: &[f64],
        wall: f64,
    ) -> ResultRow {
        let c = self.wb.config();
        ResultRow {
            experiment: self.kind.name().into(),
            family: c.family.name().into(),
            method: method.into(),
            metric: metric.into(),
            reduced_dim: d,
            n_train: n,
            n_test: c.n_test,
            sigma,
            grid_in: c.grid_in,
            grid_out: c.grid_out,
            test_grid,
            repeats: values.len(),
            seed: c.seed,
            scale: c.scale.name().into(),
            value: 0.0,
            std: 0.0,
            wallclock_s: wall,
            data_fingerprint: self.data_fingerprint.clone(),
            config_fingerprint: c.fingerprint(),
        }
        .aggregate(values)
    }
}

/// Per-repeat test metrics of one (method, d, n, σ) cell.
struct Repeats {
    rel: Vec<f64>,
    pooled: Vec<f64>,
    sq: Vec<f64>,
}

fn train_and_test(wb: &Workbench, method: Method, train: &FunctionPairDataset, d: usize) -> Result<Repeats> {
    let test = wb.test_set()?;
    let rule = wb.rule_out()?;
    let mut r = Repeats {
        rel: vec![],
        pooled: vec![],
        sq: vec![],
    };
    for k in 0..wb.config().repeats {
        let model = wb.model(method, train, d, wb.config().repeat_seed(k))?;
        let m = evaluate(model.as_ref(), &test, &rule)?;
        r.rel.push(m.relative_pct.mean);
        r.pooled.push(m.pooled_relative_pct);
        r.sq.push(m.squared_error);
    }
    Ok(r)
}

fn metric_rows(t: &RowTemplate, method: Method, d: usize, n: usize, sigma: f64, r: &Repeats, wall: f64) -> Vec<ResultRow> {
    let g = t.wb.config().grid_in;
    vec![
        t.row(method.name(), "rel_err_pct", d, n, sigma, g, &r.rel, wall),
        t.row(method.name(), "pooled_rel_err_pct", d, n, sigma, g, &r.pooled, wall),
        t.row(method.name(), "sq_err", d, n, sigma, g, &r.sq, wall),
    ]
}

/// Relative test error of every method at every reduced dimension.
pub fn run_dim_sweep(wb: &Workbench) -> Result<SweepResult> {
    let c = wb.config();
    let train = wb.train_set(c.n_train, c.sigma)?;
    let t = RowTemplate::new(wb, SweepKind::Dims, &train)?;
    let cells: Vec<(Method, usize)> = c
        .methods
        .iter()
        .flat_map(|&m| c.reduced_dims.iter().map(move |&d| (m, d)))
        .collect();
    Ok(run_cells(
        wb,
        SweepKind::Dims,
        &cells,
        |(m, d)| format!("{m} d={d}"),
        |&(m, d)| {
            let start = Instant::now();
            let r = train_and_test(wb, m, &train, d)?;
            Ok(metric_rows(&t, m, d, c.n_train, c.sigma, &r, start.elapsed().as_secs_f64()))
        },
    ))
}

/// Squared test error of AENet against the number of training samples,
/// with a least-squares fit in log-log coordinates.
pub fn run_sample_complexity(wb: &Workbench) -> Result<SweepResult> {
    let c = wb.config();
    let full = wb.train_set(c.n_train, c.sigma)?;
    let t = RowTemplate::new(wb, SweepKind::SampleComplexity, &full)?;
    let d = c.latent_dim;
    let mut res = run_cells(
        wb,
        SweepKind::SampleComplexity,
        &c.n_sweep,
        |n| format!("n={n}"),
        |&n| {
            let start = Instant::now();
            let train = wb.train_set(n, c.sigma)?;
            let r = train_and_test(wb, Method::AeNet, &train, d)?;
            Ok(metric_rows(&t, Method::AeNet, d, n, c.sigma, &r, start.elapsed().as_secs_f64()))
        },
    );
    let (xs, ys): (Vec<f64>, Vec<f64>) = res.metric("sq_err", None).map(|r| (r.n_train as f64, r.value)).unzip();
    res.fit = loglog_fit(&xs, &ys);
    if res.fit.is_none() {
        log::warn!("sample-complexity series has fewer than two points; slope undefined");
    }
    Ok(res)
}

/// Squared test error (against clean outputs) of AENet trained on outputs
/// with noise level σ, with a linear fit against σ².
pub fn run_noise_sweep(wb: &Workbench) -> Result<SweepResult> {
    let c = wb.config();
    if !c.sigmas.contains(&0.0) {
        return Err(Error::Config("the noise sweep needs σ = 0 in `sigmas`".into()));
    }
    let clean = wb.train_set(c.n_train, 0.0)?;
    let t = RowTemplate::new(wb, SweepKind::Noise, &clean)?;
    let d = c.latent_dim;
    let mut res = run_cells(
        wb,
        SweepKind::Noise,
        &c.sigmas,
        |s| format!("sigma={s}"),
        |&s| {
            let start = Instant::now();
            let train = wb.train_set(c.n_train, s)?;
            let r = train_and_test(wb, Method::AeNet, &train, d)?;
            Ok(metric_rows(&t, Method::AeNet, d, c.n_train, s, &r, start.elapsed().as_secs_f64()))
        },
    );
    let (xs, ys): (Vec<f64>, Vec<f64>) = res.metric("sq_err", None).map(|r| (r.sigma * r.sigma, r.value)).unzip();
    res.fit = linear_fit(&xs, &ys);
    Ok(res)
}

/// Relative projection errors of PCA and the autoencoder across reduced
/// dimensions, the singular values of the inputs, and the latent features of
/// the `latent_dim` autoencoder.
pub fn run_projection_comparison(wb: &Workbench) -> Result<SweepResult> {
    let c = wb.config();
    let train = wb.train_set(c.n_train, c.sigma)?;
    let test = wb.test_set()?;
    let (u_train, u_test) = (train.input_matrix()?, test.input_matrix()?);
    let rule = wb.rule_in()?;
    let t = RowTemplate::new(wb, SweepKind::Projection, &train)?;
    let g = c.grid_in;
    let cells: Vec<(&str, usize)> = ["pca", "ae"]
        .iter()
        .flat_map(|&m| c.reduced_dims.iter().map(move |&d| (m, d)))
        .collect();
    let mut res = run_cells(
        wb,
        SweepKind::Projection,
        &cells,
        |(m, d)| format!("{m} d={d}"),
        |&(m, d)| {
            let start = Instant::now();
            let (mut on_train, mut on_test) = (vec![], vec![]);
            if m == "pca" {
                let pca = fit_pca(&u_train, d)?;
                on_train.push(projection_error(&pca, &u_train, &rule)?.mean);
                on_test.push(projection_error(&pca, &u_test, &rule)?.mean);
            } else {
                for k in 0..c.repeats {
                    let ae = wb.autoencoder(&train, d, c.repeat_seed(k))?;
                    on_train.push(projection_error(ae.as_ref(), &u_train, &rule)?.mean);
                    on_test.push(projection_error(ae.as_ref(), &u_test, &rule)?.mean);
                }
            }
            let wall = start.elapsed().as_secs_f64();
            Ok(vec![
                t.row(m, "proj_err", d, c.n_train, c.sigma, g, &on_train, wall),
                t.row(m, "proj_err_test", d, c.n_train, c.sigma, g, &on_test, wall),
            ])
        },
    );

    let start = Instant::now();
    let full = fit_pca(&u_train, 1)?;
    let wall = start.elapsed().as_secs_f64();
    for (k, s) in full.singular_values().iter().enumerate() {
        res.rows.push(t.row("pca", "singular_value", k + 1, c.n_train, c.sigma, g, &[*s], wall));
    }
    match wb.autoencoder(&train, c.latent_dim, c.repeat_seed(0)) {
        Ok(ae) => {
            let table = latent_features(&ae, &u_train, &train.params)?;
            if table.latent_dim() == 2 {
                res.radial = Some(radial_histogram(&table.latent, 20)?);
            }
            res.latent = Some(table);
        }
        Err(e) => res.failures.push(CellFailure {
            cell: format!("latent d={}", c.latent_dim),
            error: e.to_string(),
        }),
    }
    res.sort();
    Ok(res)
}

/// Squared test error of AENet when the test inputs are sampled on other
/// grids and interpolated (cubic) onto the training grid.
pub fn run_grid_transfer(wb: &Workbench) -> Result<SweepResult> {
    let c = wb.config();
    let train = wb.train_set(c.n_train, c.sigma)?;
    let test = wb.test_set()?;
    let truth = stack(&test.clean_outputs)?;
    let rule = wb.rule_out()?;
    let gen = wb.generator()?;
    let t = RowTemplate::new(wb, SweepKind::GridTransfer, &train)?;
    let d = c.latent_dim;
    Ok(run_cells(
        wb,
        SweepKind::GridTransfer,
        &c.test_grids,
        |g| format!("grid={g}"),
        |&g| {
            let start = Instant::now();
            let grid = c.family.grid(g)?;
            let (gin, _) = c.grids()?;
            let inputs = test
                .params
                .iter()
                .map(|p| interpolate(&gen.input(p, &grid)?, &gin, InterpMethod::Cubic))
                .collect::<Result<Vec<_>>>()?;
            let x = stack(&inputs)?;
            let (mut rel, mut sq) = (vec![], vec![]);
            for k in 0..c.repeats {
                let model = wb.model(Method::AeNet, &train, d, c.repeat_seed(k))?;
                let m = metrics_from(&model.predict_batch(&x)?, &truth, &rule)?;
                rel.push(m.relative_pct.mean);
                sq.push(m.squared_error);
            }
            let wall = start.elapsed().as_secs_f64();
            Ok(vec![
                t.row("aenet", "rel_err_pct", d, c.n_train, c.sigma, g, &rel, wall),
                t.row("aenet", "sq_err", d, c.n_train, c.sigma, g, &sq, wall),
            ])
        },
    ))
}
