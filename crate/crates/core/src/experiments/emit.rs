use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::plots::{line_chart, scatter_chart, with_comment, Axes, Series};
use super::results::{read_rows_csv, write_rows_csv, CellFailure, LinearFit, ResultRow, SweepKind, SweepResult};
use crate::model_reduction::{LatentTable, RadialHistogram};
use crate::{Error, Result};

/// Which artifacts to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

#[derive(Serialize)]
struct Document<'a> {
    experiment: &'a str,
    config_fingerprint: String,
    seed: u64,
    scale: &'a str,
    config: &'a ExperimentConfig,
    rows: &'a [ResultRow],
    failures: &'a [CellFailure],
    fit: Option<LinearFit>,
    radial_histogram: Option<&'a RadialHistogram>,
}

fn subdir(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::Dims | SweepKind::Projection => "tables",
        _ => "series",
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `method | d₁ | d₂ | …` with `mean (std)` cells of the relative test error.
pub fn table1_markdown(rows: &[ResultRow]) -> String {
    let rel: Vec<&ResultRow> = rows.iter().filter(|r| r.metric == "rel_err_pct").collect();
    let mut dims: Vec<usize> = rel.iter().map(|r| r.reduced_dim).collect();
    dims.sort_unstable();
    dims.dedup();
    let mut by_method: BTreeMap<&str, BTreeMap<usize, &ResultRow>> = BTreeMap::new();
    for r in &rel {
        by_method.entry(r.method.as_str()).or_default().insert(r.reduced_dim, r);
    }
    let mut out = String::from("| method |");
    for d in &dims {
        out.push_str(&format!(" {d} |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(dims.len()));
    out.push('\n');
    for (m, cells) in by_method {
        out.push_str(&format!("| {m} |"));
        for d in &dims {
            match cells.get(d) {
                Some(r) => out.push_str(&format!(" {:.1} ({:.1}) |", r.value, r.std)),
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}

fn series_of(rows: &[ResultRow], metric: &str, x: impl Fn(&ResultRow) -> f64) -> Vec<Series> {
    let mut by: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metric == metric) {
        by.entry(r.method.clone()).or_default().push((x(r), r.value, r.std));
    }
    by.into_iter()
        .map(|(label, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { label, points }
        })
        .collect()
}

fn axes(x: &str, y: &str, log_x: bool, log_y: bool) -> Axes {
    Axes {
        x_label: x.into(),
        y_label: y.into(),
        log_x,
        log_y,
    }
}

/// SVG charts (file stem, document) for the rows of one experiment.
pub fn charts_for_rows(rows: &[ResultRow]) -> Result<Vec<(String, String)>> {
    let Some(first) = rows.first() else {
        return Ok(vec![]);
    };
    let kind = SweepKind::from_name(&first.experiment)?;
    let fam = first.family.as_str();
    let stem = format!("{}_{fam}", kind.name());
    let mut out = vec![];
    match kind {
        SweepKind::Dims => {
            let s = series_of(rows, "rel_err_pct", |r| r.reduced_dim as f64);
            let title = format!("Relative test error ({fam})");
            out.push((stem, line_chart(&title, &axes("reduced dimension", "relative error %", true, true), &s)?));
        }
        SweepKind::SampleComplexity => {
            let s = series_of(rows, "sq_err", |r| r.n_train as f64);
            let title = format!("Squared test error versus n ({fam})");
            out.push((stem, line_chart(&title, &axes("n", "squared test error", true, true), &s)?));
        }
        SweepKind::Noise => {
            let s = series_of(rows, "sq_err", |r| r.sigma * r.sigma);
            let title = format!("Robustness to noise ({fam})");
            out.push((stem, line_chart(&title, &axes("noise variance", "squared test error", false, false), &s)?));
        }
        SweepKind::GridTransfer => {
            let s = series_of(rows, "sq_err", |r| r.test_grid as f64);
            let title = format!("Squared test error versus test grid size ({fam})");
            out.push((stem, line_chart(&title, &axes("grid size", "squared test error", true, true), &s)?));
        }
        SweepKind::Projection => {
            let s = series_of(rows, "proj_err", |r| r.reduced_dim as f64);
            let title = format!("Relative projection error ({fam})");
            out.push((stem.clone(), line_chart(&title, &axes("reduced dimension", "relative projection error", true, true), &s)?));
            let s = series_of(rows, "singular_value", |r| r.reduced_dim as f64);
            let title = format!("Singular values ({fam})");
            out.push((format!("scree_{fam}"), line_chart(&title, &axes("index", "singular value", false, true), &s)?));
        }
    }
    Ok(out)
}

/// Two scatter charts of 2-D latent codes, colored by `a` and by `h`.
pub fn latent_charts(rows: &[Vec<f64>], family: &str) -> Result<Vec<(String, String)>> {
    if rows.first().is_none_or(|r| r.len() != 4) {
        return Ok(vec![]);
    }
    let mut out = vec![];
    for (name, col) in [("a", 2), ("h", 3)] {
        let pts: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r[0], r[1], r[col])).collect();
        let title = format!("Latent features colored by {name} ({family})");
        out.push((format!("latent_{family}_{name}"), scatter_chart(&title, "z1", "z2", &pts)?));
    }
    Ok(out)
}

fn latent_rows(t: &LatentTable) -> Vec<Vec<f64>> {
    (0..t.len()).map(|i| t.row(i)).collect()
}

/// Writes the rows (CSV, JSON), summary tables and charts of a sweep under
/// `output_dir/{tables,series}`. Returns the written paths.
pub fn emit_outputs(res: &SweepResult, cfg: &ExperimentConfig, formats: Formats) -> Result<Vec<PathBuf>> {
    let dir = cfg.output_dir.join(subdir(res.kind));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let fam = cfg.family.name();
    let stem = format!("{}_{fam}", res.kind.name());
    let meta = format!(
        "config {} seed {} scale {} family {fam}",
        cfg.fingerprint(),
        cfg.seed,
        cfg.scale.name()
    );
    let mut written = vec![];
    if formats.csv {
        let p = dir.join(format!("{stem}.csv"));
        write_rows_csv(&res.rows, &p)?;
        written.push(p);
        if res.kind == SweepKind::Dims {
            let p = dir.join(format!("table1_{fam}.md"));
            write(&p, &format!("<!-- {meta} -->\n{}", table1_markdown(&res.rows)))?;
            written.push(p);
        }
        if let Some(t) = &res.latent {
            let p = cfg.output_dir.join("series").join(format!("latent_{fam}.csv"));
            std::fs::create_dir_all(p.parent().expect("has parent")).map_err(|e| Error::io(&p, e))?;
            write(&p, &t.to_csv())?;
            written.push(p);
        }
    }
    if formats.json {
        let doc = Document {
            experiment: res.kind.name(),
            config_fingerprint: cfg.fingerprint(),
            seed: cfg.seed,
            scale: cfg.scale.name(),
            config: cfg,
            rows: &res.rows,
            failures: &res.failures,
            fit: res.fit,
            radial_histogram: res.radial.as_ref(),
        };
        let p = dir.join(format!("{stem}.json"));
        write(&p, &serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))?)?;
        written.push(p);
    }
    if formats.svg {
        let mut charts: Vec<(PathBuf, String)> = charts_for_rows(&res.rows)?
            .into_iter()
            .map(|(name, svg)| (dir.join(format!("{name}.svg")), svg))
            .collect();
        if let Some(t) = &res.latent {
            let series = cfg.output_dir.join("series");
            std::fs::create_dir_all(&series).map_err(|e| Error::io(&series, e))?;
            charts.extend(
                latent_charts(&latent_rows(t), fam)?
                    .into_iter()
                    .map(|(name, svg)| (series.join(format!("{name}.svg")), svg)),
            );
        }
        for (p, svg) in charts {
            write(&p, &with_comment(svg, &meta))?;
            written.push(p);
        }
    }
    Ok(written)
}

fn read_latent_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let fmt = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(fmt)?;
    r.records()
        .map(|rec| {
            rec.map_err(fmt)?
                .iter()
                .map(|v| v.parse::<f64>().map_err(|e| Error::Format(format!("{}: {e}", path.display()))))
                .collect()
        })
        .collect()
}

/// Regenerates every chart from the CSV files under `output_dir/tables` and
/// `output_dir/series`.
pub fn emit_plots(output_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = vec![];
    for sub in ["tables", "series"] {
        let dir = output_dir.join(sub);
        let Ok(entries) = std::fs::read_dir(&dir) else {
            continue;
        };
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        for f in files {
            let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let (charts, meta) = if let Some(fam) = stem.strip_prefix("latent_") {
                (latent_charts(&read_latent_csv(&f)?, fam)?, format!("source {}", f.display()))
            } else {
                let rows = read_rows_csv(&f)?;
                let meta = rows
                    .first()
                    .map(|r| format!("config {} seed {} scale {} family {}", r.config_fingerprint, r.seed, r.scale, r.family))
                    .unwrap_or_default();
                (charts_for_rows(&rows)?, meta)
            };
            for (name, svg) in charts {
                let p = dir.join(format!("{name}.svg"));
                write(&p, &with_comment(svg, &meta))?;
                written.push(p);
            }
        }
    }
    Ok(written)
}
