//! Dense matrices, ReLU networks, Adam and mini-batch training.

mod adam;
mod checkpoint;
mod matrix;
mod mlp;
mod stats;
mod train;

pub use adam::{adam_step, AdamState};
pub(crate) use checkpoint::{read_mlp, write_mlp};
pub use checkpoint::{load_mlp, read_loss_history, save_mlp, write_loss_history};
pub use matrix::{gemm, gemm_view, matmul, DenseMatrix, Op, Real, View};
pub(crate) use mlp::relu_in_place;
pub use mlp::{mse_and_grad, weighted_squared_loss, ForwardCache, Mlp};
pub use stats::{network_class_stats, NetworkClassStats};
pub use train::{train, LossHistory, TrainConfig, Trainable};
