use crate::discretization::{DiscreteFunction, Grid1D, Topology};
use crate::{Error, Result};

/// Final time of the transport experiments.
pub const TRANSPORT_TIME: f64 = 0.3;

/// Exact solution `u(x, t) = g(x − t)` of `u_t = −u_x` with zero inflow at
/// the left boundary, sampled on a closed grid.
pub fn solve_transport<F: Fn(f64) -> f64>(g: F, grid: &Grid1D, t: f64) -> Result<DiscreteFunction> {
    if grid.topology() != Topology::Closed {
        return Err(Error::GridMismatch("transport needs a closed grid".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Config(format!("time must be nonnegative, got {t}")));
    }
    let lo = grid.x_lo();
    crate::discretization::discretize(|x| if x - t >= lo { g(x - t) } else { 0.0 }, grid)
}

/// The same map applied to samples: when `t` is a whole number of grid
/// spacings the solution is the samples shifted right, with zeros flowing in.
pub fn shift_samples(u: &DiscreteFunction, t: f64) -> Result<DiscreteFunction> {
    let grid = u.grid();
    if grid.topology() != Topology::Closed {
        return Err(Error::GridMismatch("transport needs a closed grid".into()));
    }
    let steps = t / grid.spacing();
    let s = steps.round();
    if !(s >= 0.0) || (steps - s).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "shift {t} is not a whole number of spacings {}",
            grid.spacing()
        )));
    }
    let s = s as usize;
    let values = (0..u.len())
        .map(|i| if i >= s { u.values()[i - s] } else { 0.0 })
        .collect();
    DiscreteFunction::new(*grid, values)
}
