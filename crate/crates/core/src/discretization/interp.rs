use serde::{Deserialize, Serialize};

use super::{DiscreteFunction, Grid1D, Topology};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpMethod {
    /// Value of the nearest source node.
    PiecewiseConstant,
    Linear,
    /// Cubic spline: not-a-knot end conditions on closed grids, periodic on
    /// periodic grids. Reproduces cubics exactly on closed grids with at
    /// least four nodes.
    Cubic,
}

/// Resamples `u` at the nodes of `target`.
///
/// Periodic sources wrap target coordinates into the fundamental domain.
/// Closed sources clamp coordinates that overshoot an endpoint by at most one
/// spacing and reject anything further out.
pub fn interpolate(u: &DiscreteFunction, target: &Grid1D, method: InterpMethod) -> Result<DiscreteFunction> {
    let src = *u.grid();
    if src == *target {
        return Ok(u.clone());
    }
    let y = u.values();
    let second = match method {
        InterpMethod::Cubic => Some(match src.topology() {
            Topology::Closed => not_a_knot_second_derivatives(y, src.spacing()),
            Topology::Periodic => periodic_second_derivatives(y, src.spacing()),
        }),
        _ => None,
    };

    let n = src.len();
    let h = src.spacing();
    let mut out = Vec::with_capacity(target.len());
    for i in 0..target.len() {
        let x = target.node(i);
        let (j, t) = locate(&src, x)?;
        let jn = if j + 1 < n { j + 1 } else { 0 };
        let value = match method {
            InterpMethod::PiecewiseConstant => {
                if t < 0.5 {
                    y[j]
                } else {
                    y[jn]
                }
            }
            InterpMethod::Linear => {
                if t == 0.0 {
                    y[j]
                } else {
                    (1.0 - t) * y[j] + t * y[jn]
                }
            }
            InterpMethod::Cubic => {
                if t == 0.0 {
                    y[j]
                } else {
                    let m = second.as_ref().expect("spline coefficients");
                    let s = 1.0 - t;
                    s * y[j] + t * y[jn] + h * h / 6.0 * ((s * s * s - s) * m[j] + (t * t * t - t) * m[jn])
                }
            }
        };
        out.push(value);
    }
    DiscreteFunction::new(*target, out)
}

/// Cell index and fractional offset of `x` within the source grid.
fn locate(src: &Grid1D, x: f64) -> Result<(usize, f64)> {
    let n = src.len();
    let h = src.spacing();
    let snap = 1e-9;
    match src.topology() {
        Topology::Closed => {
            if x < src.x_lo() - h || x > src.x_hi() + h {
                return Err(Error::Range {
                    x,
                    lo: src.x_lo(),
                    hi: src.x_hi(),
                });
            }
            let s = ((x - src.x_lo()) / h).clamp(0.0, (n - 1) as f64);
            let mut j = s.floor() as usize;
            let mut t = s - j as f64;
            if t > 1.0 - snap {
                j += 1;
                t = 0.0;
            } else if t < snap {
                t = 0.0;
            }
            if j >= n - 1 {
                return Ok((n - 1, 0.0));
            }
            Ok((j, t))
        }
        Topology::Periodic => {
            let s = ((x - src.x_lo()) / h).rem_euclid(n as f64);
            let mut j = s.floor() as usize;
            let mut t = s - j as f64;
            if t > 1.0 - snap {
                j += 1;
                t = 0.0;
            } else if t < snap {
                t = 0.0;
            }
            Ok((j % n, t))
        }
    }
}

/// Second derivatives of the not-a-knot cubic spline through uniformly
/// spaced samples.
///
/// The not-a-knot conditions `M0 - 2 M1 + M2 = 0` and its mirror at the right
/// end turn the first and last interior equations into `6 M_1 = r_1` and
/// `6 M_{n-2} = r_{n-2}`, so the reduced system stays tridiagonal.
fn not_a_knot_second_derivatives(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let k = n - 2; // unknowns M_1..M_{n-2}
    let rhs: Vec<f64> = (1..n - 1)
        .map(|i| 6.0 / (h * h) * (y[i - 1] - 2.0 * y[i] + y[i + 1]))
        .collect();
    let mut lower = vec![1.0; k];
    let mut diag = vec![4.0; k];
    let mut upper = vec![1.0; k];
    diag[0] = 6.0;
    upper[0] = 0.0;
    diag[k - 1] = 6.0;
    lower[k - 1] = 0.0;
    let interior = thomas(&lower, &diag, &upper, &rhs);
    m[1..n - 1].copy_from_slice(&interior);
    if n == 3 {
        m[0] = m[1];
        m[2] = m[1];
    } else {
        m[0] = 2.0 * m[1] - m[2];
        m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
    }
    m
}

/// Second derivatives of the periodic cubic spline (cyclic tridiagonal system
/// solved with the Sherman–Morrison correction).
fn periodic_second_derivatives(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let rhs: Vec<f64> = (0..n)
        .map(|i| {
            let prev = y[(i + n - 1) % n];
            let next = y[(i + 1) % n];
            6.0 / (h * h) * (prev - 2.0 * y[i] + next)
        })
        .collect();
    // A = T + u v^T with corner entries folded into u, v.
    let gamma = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;
    let lower = vec![1.0; n];
    let upper = vec![1.0; n];
    let x = thomas(&lower, &diag, &upper, &rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = 1.0;
    let z = thomas(&lower, &diag, &upper, &u);
    let v_dot_x = x[0] + x[n - 1] / gamma;
    let v_dot_z = z[0] + z[n - 1] / gamma;
    let factor = v_dot_x / (1.0 + v_dot_z);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}

/// Tridiagonal solve; `lower[0]` and `upper[n-1]` are ignored.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::discretize;
    use std::f64::consts::PI;

    const METHODS: [InterpMethod; 3] = [
        InterpMethod::PiecewiseConstant,
        InterpMethod::Linear,
        InterpMethod::Cubic,
    ];

    fn max_err(a: &DiscreteFunction, b: &DiscreteFunction) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn identity_grid_leaves_values_unchanged() {
        let g = Grid1D::closed(0.0, 1.0, 33).unwrap();
        let u = discretize(|x| (5.0 * x).cos(), &g).unwrap();
        for m in METHODS {
            assert_eq!(interpolate(&u, &g, m).unwrap(), u);
        }
    }

    #[test]
    fn linear_reproduces_linears() {
        let src = Grid1D::closed(0.0, 1.0, 9).unwrap();
        let dst = Grid1D::closed(0.0, 1.0, 17).unwrap();
        let u = discretize(|x| x, &src).unwrap();
        let out = interpolate(&u, &dst, InterpMethod::Linear).unwrap();
        assert!(max_err(&out, &discretize(|x| x, &dst).unwrap()) < 1e-15);
    }

    #[test]
    fn cubic_reproduces_cubics_on_closed_grids() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x * x * x;
        for n in [4, 5, 11] {
            let src = Grid1D::closed(-1.0, 1.0, n).unwrap();
            let dst = Grid1D::closed(-1.0, 1.0, 57).unwrap();
            let out = interpolate(&discretize(f, &src).unwrap(), &dst, InterpMethod::Cubic).unwrap();
            assert!(max_err(&out, &discretize(f, &dst).unwrap()) < 1e-12, "n = {n}");
        }
        // three nodes: the spline is the interpolating parabola
        let q = |x: f64| 2.0 * x * x - x + 0.25;
        let src = Grid1D::closed(0.0, 1.0, 3).unwrap();
        let dst = Grid1D::closed(0.0, 1.0, 11).unwrap();
        let out = interpolate(&discretize(q, &src).unwrap(), &dst, InterpMethod::Cubic).unwrap();
        assert!(max_err(&out, &discretize(q, &dst).unwrap()) < 1e-13);
    }

    #[test]
    fn cubic_sine_upsampling_is_accurate() {
        let f = |x: f64| (2.0 * PI * x).sin();
        let src = Grid1D::closed(0.0, 1.0, 64).unwrap();
        let dst = Grid1D::closed(0.0, 1.0, 512).unwrap();
        let out = interpolate(&discretize(f, &src).unwrap(), &dst, InterpMethod::Cubic).unwrap();
        assert!(max_err(&out, &discretize(f, &dst).unwrap()) < 1e-4);

        let psrc = Grid1D::periodic(0.0, 1.0, 64).unwrap();
        let pdst = Grid1D::periodic(0.0, 1.0, 512).unwrap();
        let out = interpolate(&discretize(f, &psrc).unwrap(), &pdst, InterpMethod::Cubic).unwrap();
        assert!(max_err(&out, &discretize(f, &pdst).unwrap()) < 1e-5);
    }

    #[test]
    fn restriction_to_shared_nodes_is_exact() {
        let src = Grid1D::closed(0.0, 2.0, 17).unwrap();
        let dst = Grid1D::closed(0.0, 2.0, 9).unwrap();
        let u = discretize(|x| (3.0 * x).exp().sin(), &src).unwrap();
        for m in METHODS {
            let out = interpolate(&u, &dst, m).unwrap();
            for (i, v) in out.values().iter().enumerate() {
                assert_eq!(*v, u.values()[2 * i], "{m:?} node {i}");
            }
        }
        let psrc = Grid1D::periodic(0.0, 6.0, 24).unwrap();
        let pdst = Grid1D::periodic(0.0, 6.0, 8).unwrap();
        let pu = discretize(|x| x.sin() + 0.1 * x, &psrc).unwrap();
        let out = interpolate(&pu, &pdst, InterpMethod::Cubic).unwrap();
        for (i, v) in out.values().iter().enumerate() {
            assert_eq!(*v, pu.values()[3 * i]);
        }
    }

    #[test]
    fn periodic_sources_wrap_and_closed_sources_clamp() {
        let src = Grid1D::periodic(0.0, 1.0, 8).unwrap();
        let u = discretize(|x| (2.0 * PI * x).cos(), &src).unwrap();
        let shifted = Grid1D::closed(0.5, 1.5, 9).unwrap();
        let out = interpolate(&u, &shifted, InterpMethod::Linear).unwrap();
        assert!((out.values()[8] - u.values()[4]).abs() < 1e-15);

        let closed = Grid1D::closed(0.0, 1.0, 11).unwrap();
        let c = discretize(|x| x * x, &closed).unwrap();
        let near = Grid1D::closed(-0.05, 1.05, 5).unwrap();
        let out = interpolate(&c, &near, InterpMethod::Cubic).unwrap();
        assert_eq!(out.values()[0], 0.0);
        assert_eq!(out.values()[4], 1.0);

        let far = Grid1D::closed(-0.5, 1.0, 5).unwrap();
        assert!(matches!(
            interpolate(&c, &far, InterpMethod::Linear),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn periodic_spline_matches_dense_solve() {
        let y = [0.3, -1.0, 2.0, 0.5, 0.0, 1.5, -0.7];
        let n = y.len();
        let h = 0.4;
        let m = periodic_second_derivatives(&y, h);
        for i in 0..n {
            let lhs = m[(i + n - 1) % n] + 4.0 * m[i] + m[(i + 1) % n];
            let rhs = 6.0 / (h * h) * (y[(i + n - 1) % n] - 2.0 * y[i] + y[(i + 1) % n]);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
