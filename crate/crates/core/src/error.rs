use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value {value} at node {index} (x = {x})")]
    Evaluation { index: usize, x: f64, value: f64 },

    #[error("node x = {x} lies outside the source domain [{lo}, {hi}] by more than one spacing")]
    Range { x: f64, lo: f64, hi: f64 },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("training diverged at epoch {epoch}, batch {batch} (loss = {loss})")]
    Divergence { epoch: usize, batch: usize, loss: f64 },

    #[error("spectral solver produced non-finite modes at step {step}")]
    SolverBlowUp { step: usize },

    #[error("input grid does not match the training grid ({0}); use predict_on_foreign_grid")]
    GridMismatch(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
