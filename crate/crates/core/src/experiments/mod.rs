//! Experiment harness: configuration, the dimension, sample-size, noise,
//! projection and grid-transfer sweeps, and their CSV/JSON/SVG artifacts.

mod config;
mod emit;
pub mod plots;
mod results;
mod sweeps;
mod workbench;

pub use config::{ConfigFile, ExperimentConfig, Scale, CONFIG_VERSION};
pub use emit::{charts_for_rows, emit_outputs, emit_plots, latent_charts, table1_markdown, Formats};
pub use results::{
    linear_fit, loglog_fit, read_rows_csv, write_rows_csv, CellFailure, LinearFit, ResultRow, SweepKind, SweepResult,
    HEADER,
};
pub use sweeps::{run_dim_sweep, run_grid_transfer, run_noise_sweep, run_projection_comparison, run_sample_complexity};
pub use workbench::Workbench;

/// Exit status of a sweep: 0 when every cell succeeded, 2 otherwise.
pub fn exit_code(results: &[&SweepResult]) -> i32 {
    if results.iter().any(|r| r.is_partial()) {
        2
    } else {
        0
    }
}
