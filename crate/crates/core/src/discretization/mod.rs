//! Uniform 1-D grids, discretization operators and quadrature-weighted norms.
//!
//! A [`DiscreteFunction`] is a function sampled at the nodes of a [`Grid1D`].
//! Norms and inner products on sampled functions are always taken with
//! respect to a [`QuadratureRule`] so that they approximate the continuum
//! `L²` quantities.

mod diagnostics;
mod interp;
pub(crate) mod io;
mod quadrature;

pub use diagnostics::{
    box_counting_dimension, geometric_scales, verify_norm_equivalence, FourierFamily,
    FourierSeries, NormEquivalenceReport,
};
pub use interp::{interpolate, InterpMethod};
pub use io::{read_function_binary, read_function_csv, write_function_binary, write_function_csv};
pub use quadrature::{make_quadrature, weighted_inner, weighted_norm, QuadratureKind, QuadratureRule};

use serde::{Deserialize, Serialize};

use crate::tensor_nn::DenseMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Both endpoints are nodes.
    Closed,
    /// Half-open `[x_lo, x_hi)`; the right endpoint is identified with the left.
    Periodic,
}

impl Topology {
    pub fn tag(self) -> &'static str {
        match self {
            Topology::Closed => "closed",
            Topology::Periodic => "periodic",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "closed" => Ok(Topology::Closed),
            "periodic" => Ok(Topology::Periodic),
            other => Err(Error::Format(format!("unknown topology tag `{other}`"))),
        }
    }
}

/// Uniform grid on `[x_lo, x_hi]` (closed) or `[x_lo, x_hi)` (periodic).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_lo: f64,
    x_hi: f64,
    n: usize,
    topology: Topology,
}

impl Grid1D {
    pub fn new(x_lo: f64, x_hi: f64, n: usize, topology: Topology) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("grid needs at least 2 nodes, got {n}")));
        }
        if !(x_lo.is_finite() && x_hi.is_finite() && x_hi > x_lo) {
            return Err(Error::Config(format!(
                "grid requires finite x_hi > x_lo, got [{x_lo}, {x_hi}]"
            )));
        }
        Ok(Self {
            x_lo,
            x_hi,
            n,
            topology,
        })
    }

    pub fn closed(x_lo: f64, x_hi: f64, n: usize) -> Result<Self> {
        Self::new(x_lo, x_hi, n, Topology::Closed)
    }

    pub fn periodic(x_lo: f64, x_hi: f64, n: usize) -> Result<Self> {
        Self::new(x_lo, x_hi, n, Topology::Periodic)
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    /// Distance between neighbouring nodes.
    pub fn spacing(&self) -> f64 {
        match self.topology {
            Topology::Closed => self.length() / (self.n - 1) as f64,
            Topology::Periodic => self.length() / self.n as f64,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        let denom = match self.topology {
            Topology::Closed => (self.n - 1) as f64,
            Topology::Periodic => self.n as f64,
        };
        self.x_lo + self.length() * (i as f64) / denom
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Same domain and topology with a different node count.
    pub fn with_len(&self, n: usize) -> Result<Self> {
        Self::new(self.x_lo, self.x_hi, n, self.topology)
    }
}

/// A function sampled on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    grid: Grid1D,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                index,
                x: grid.node(index),
                value: values[index],
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Samples `f` at every node of `grid`.
pub fn discretize<F: Fn(f64) -> f64>(f: F, grid: &Grid1D) -> Result<DiscreteFunction> {
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let x = grid.node(i);
        let value = f(x);
        if !value.is_finite() {
            return Err(Error::Evaluation { index: i, x, value });
        }
        values.push(value);
    }
    Ok(DiscreteFunction {
        grid: *grid,
        values,
    })
}

/// Stacks functions sharing one grid into a `samples × nodes` matrix.
pub fn stack(fs: &[DiscreteFunction]) -> Result<DenseMatrix<f64>> {
    let Some(first) = fs.first() else {
        return Err(Error::Empty("nothing to stack".into()));
    };
    let mut data = Vec::with_capacity(fs.len() * first.len());
    for f in fs {
        ensure_same_grid(first.grid(), f.grid(), "stack")?;
        data.extend_from_slice(f.values());
    }
    DenseMatrix::from_vec(fs.len(), first.len(), data)
}

/// Splits a `samples × nodes` matrix back into functions on `grid`.
pub fn unstack(m: &DenseMatrix<f64>, grid: &Grid1D) -> Result<Vec<DiscreteFunction>> {
    m.iter_rows().map(|r| DiscreteFunction::new(*grid, r.to_vec())).collect()
}

pub(crate) fn ensure_same_grid(a: &Grid1D, b: &Grid1D, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!(
            "{what}: grid {a:?} does not match {b:?}"
        )));
    }
    Ok(())
}
