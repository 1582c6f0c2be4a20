//! Auto-encoder based operator learning (AENet) for PDE solution operators.
//!
//! The crate is organised bottom-up:
//!
//! - [`discretization`]: grids, quadrature-weighted inner products, interpolation
//!   and dimension diagnostics.
//! - [`tensor_nn`]: dense matrices, ReLU feedforward networks, reverse-mode
//!   gradients, Adam and the mini-batch trainer.
//! - [`pde_data`]: initial-condition families, Gaussian random fields, the
//!   transport / Burgers' / KdV solvers and dataset assembly.
//! - [`model_reduction`]: PCA and autoencoder input reduction.
//! - [`operator_learning`]: AENet, PCANet and DeepONet estimators and their
//!   error metrics.
//! - [`experiments`]: configuration, sweeps and result emission used by the
//!   `aenet` command line tool.

mod binio;
pub mod discretization;
pub mod error;
pub mod experiments;
pub mod model_reduction;
pub mod operator_learning;
pub mod pde_data;
pub mod rng;
pub mod tensor_nn;

pub use error::{Error, Result};
