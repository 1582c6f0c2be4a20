use serde::{Deserialize, Serialize};

use super::matrix::{DenseMatrix, Real};
use super::mlp::Mlp;
use crate::{Error, Result};

/// Measured class parameters of a network: depth `L`, width `p`, nonzero
/// count `K`, parameter bound `κ` and output bound `M` over a probe set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkClassStats {
    pub depth: usize,
    pub width: usize,
    pub nonzeros: usize,
    pub kappa: f64,
    pub sup_bound: f64,
}

pub fn network_class_stats<T: Real>(net: &Mlp<T>, probes: &DenseMatrix<T>) -> Result<NetworkClassStats> {
    if probes.rows() == 0 {
        return Err(Error::Empty("probe set is empty".into()));
    }
    let params = net.params();
    let nonzeros = params.iter().filter(|v| **v != T::zero()).count();
    let kappa = params.iter().fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
    let out = net.forward(probes)?;
    Ok(NetworkClassStats {
        depth: net.num_layers(),
        width: net.dims().iter().copied().max().unwrap_or(0),
        nonzeros,
        kappa,
        sup_bound: out.max_abs().as_f64(),
    })
}
