use serde::{Deserialize, Serialize};

use super::{ensure_same_grid, DiscreteFunction, Grid1D, Topology};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureKind {
    Midpoint,
    Trapezoid,
    Simpson,
}

/// Positive weights `w_i` defining `<u, v> = Σ w_i u_i v_i` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: QuadratureKind,
    grid: Grid1D,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ w_i f_i` for raw node values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Weighted inner product of raw value slices laid out on this rule's grid.
    pub fn inner_values(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.weights.len());
        debug_assert_eq!(v.len(), self.weights.len());
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Squared weighted norm of `u - v` for raw value slices.
    pub fn dist_sq_values(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * (a - b) * (a - b))
            .sum()
    }

    pub fn norm_values(&self, u: &[f64]) -> f64 {
        self.inner_values(u, u).sqrt()
    }
}

/// Builds the named Newton–Cotes rule on `grid`.
///
/// On a uniform grid the midpoint rule assigns every node the cell
/// `(x_hi - x_lo) / n`, whatever the topology, so that the weighted squared
/// error is a constant multiple of the plain mean squared error.
pub fn make_quadrature(grid: &Grid1D, kind: QuadratureKind) -> Result<QuadratureRule> {
    let n = grid.len();
    let weights = match (kind, grid.topology()) {
        (QuadratureKind::Midpoint, _) => vec![grid.length() / n as f64; n],
        (QuadratureKind::Trapezoid, Topology::Periodic) => vec![grid.spacing(); n],
        (QuadratureKind::Trapezoid, Topology::Closed) => {
            let h = grid.spacing();
            let mut w = vec![h; n];
            w[0] = 0.5 * h;
            w[n - 1] = 0.5 * h;
            w
        }
        (QuadratureKind::Simpson, Topology::Periodic) => {
            return Err(Error::Config(
                "Simpson's rule requires a closed grid".to_string(),
            ))
        }
        (QuadratureKind::Simpson, Topology::Closed) => {
            if n.is_multiple_of(2) {
                return Err(Error::Config(format!(
                    "Simpson's rule requires an odd node count, got {n}"
                )));
            }
            let h = grid.spacing();
            (0..n)
                .map(|i| {
                    let c = if i == 0 || i == n - 1 {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    c * h / 3.0
                })
                .collect()
        }
    };
    Ok(QuadratureRule {
        kind,
        grid: *grid,
        weights,
    })
}

pub fn weighted_inner(u: &DiscreteFunction, v: &DiscreteFunction, rule: &QuadratureRule) -> Result<f64> {
    ensure_same_grid(u.grid(), v.grid(), "weighted_inner")?;
    ensure_same_grid(u.grid(), rule.grid(), "weighted_inner rule")?;
    Ok(rule.inner_values(u.values(), v.values()))
}

pub fn weighted_norm(u: &DiscreteFunction, rule: &QuadratureRule) -> Result<f64> {
    Ok(weighted_inner(u, u, rule)?.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::discretize;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn rule_weights() {
        let p = Grid1D::periodic(0.0, 1.0, 512).unwrap();
        let mid = make_quadrature(&p, QuadratureKind::Midpoint).unwrap();
        assert!(mid.weights().iter().all(|&w| w == 1.0 / 512.0));

        let c3 = Grid1D::closed(0.0, 1.0, 3).unwrap();
        let trap = make_quadrature(&c3, QuadratureKind::Trapezoid).unwrap();
        assert_eq!(trap.weights(), &[0.25, 0.5, 0.25]);

        let c5 = Grid1D::closed(0.0, 1.0, 5).unwrap();
        let simp = make_quadrature(&c5, QuadratureKind::Simpson).unwrap();
        let expected = [1.0, 4.0, 2.0, 4.0, 1.0].map(|c| c / 12.0);
        for (w, e) in simp.weights().iter().zip(expected) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn simpson_rejects_even_and_periodic() {
        let even = Grid1D::closed(0.0, 1.0, 4).unwrap();
        assert!(matches!(
            make_quadrature(&even, QuadratureKind::Simpson),
            Err(Error::Config(_))
        ));
        let per = Grid1D::periodic(0.0, 1.0, 5).unwrap();
        assert!(make_quadrature(&per, QuadratureKind::Simpson).is_err());
    }

    #[test]
    fn weights_sum_to_domain_length() {
        for (lo, hi, n) in [(0.0, 1.0, 9), (-2.0, 4.0, 513), (0.0, 6.0, 101)] {
            for kind in [QuadratureKind::Midpoint, QuadratureKind::Trapezoid, QuadratureKind::Simpson] {
                let g = Grid1D::closed(lo, hi, n).unwrap();
                let rule = make_quadrature(&g, kind).unwrap();
                let sum: f64 = rule.weights().iter().sum();
                assert!(close(sum, hi - lo, 1e-12), "{kind:?} sum {sum}");
                assert!(rule.weights().iter().all(|&w| w > 0.0));
            }
        }
    }

    #[test]
    fn inner_product_examples() {
        let p = Grid1D::periodic(0.0, 1.0, 64).unwrap();
        let mid = make_quadrature(&p, QuadratureKind::Midpoint).unwrap();
        let one = discretize(|_| 1.0, &p).unwrap();
        assert!((weighted_inner(&one, &one, &mid).unwrap() - 1.0).abs() < 1e-15);
        let two = discretize(|_| 2.0, &p).unwrap();
        assert!((weighted_norm(&two, &mid).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(weighted_norm(&DiscreteFunction::zeros(p), &mid).unwrap(), 0.0);

        let g = Grid1D::closed(0.0, 1.0, 513).unwrap();
        let simp = make_quadrature(&g, QuadratureKind::Simpson).unwrap();
        let x = discretize(|x| x, &g).unwrap();
        let one = discretize(|_| 1.0, &g).unwrap();
        assert!((weighted_inner(&x, &one, &simp).unwrap() - 0.5).abs() < 1e-12);
        assert!((weighted_inner(&x, &x, &simp).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_a_dimension_error() {
        let a = Grid1D::closed(0.0, 1.0, 5).unwrap();
        let b = Grid1D::closed(0.0, 1.0, 7).unwrap();
        let rule = make_quadrature(&a, QuadratureKind::Trapezoid).unwrap();
        let u = DiscreteFunction::zeros(a);
        let v = DiscreteFunction::zeros(b);
        assert!(matches!(weighted_inner(&u, &v, &rule), Err(Error::Dimension(_))));
        assert!(matches!(weighted_norm(&v, &rule), Err(Error::Dimension(_))));
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let g = Grid1D::closed(-1.0, 2.0, 33).unwrap();
        let rule = make_quadrature(&g, QuadratureKind::Simpson).unwrap();
        // antiderivative of c0 + c1 x + c2 x^2 + c3 x^3
        let cs = [0.3, -1.2, 2.5, 0.75];
        let f = discretize(|x| cs[0] + cs[1] * x + cs[2] * x * x + cs[3] * x * x * x, &g).unwrap();
        let prim = |x: f64| cs[0] * x + cs[1] * x * x / 2.0 + cs[2] * x.powi(3) / 3.0 + cs[3] * x.powi(4) / 4.0;
        let exact = prim(2.0) - prim(-1.0);
        assert!(close(rule.integrate(f.values()), exact, 1e-12));
    }

    fn vec_pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        )
    }

    proptest! {
        #[test]
        fn norm_axioms((u, v) in vec_pair(17), lambda in -5.0f64..5.0) {
            let g = Grid1D::closed(0.0, 2.0, 17).unwrap();
            for kind in [QuadratureKind::Midpoint, QuadratureKind::Trapezoid, QuadratureKind::Simpson] {
                let rule = make_quadrature(&g, kind).unwrap();
                let nu = rule.norm_values(&u);
                let nv = rule.norm_values(&v);
                prop_assert!(nu >= 0.0);
                let scaled: Vec<f64> = u.iter().map(|x| lambda * x).collect();
                prop_assert!((rule.norm_values(&scaled) - lambda.abs() * nu).abs() <= 1e-12 * (1.0 + nu));
                let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
                prop_assert!(rule.norm_values(&sum) <= nu + nv + 1e-12);
                prop_assert!(rule.inner_values(&u, &v).abs() <= nu * nv + 1e-12);
                prop_assert!((rule.inner_values(&u, &v) - rule.inner_values(&v, &u)).abs() <= 1e-12);
            }
        }
    }
}
