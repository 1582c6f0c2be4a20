use std::collections::HashSet;
use std::f64::consts::PI;

use rand::Rng;

use super::{discretize, Grid1D, QuadratureRule};
use crate::{Error, Result};

/// Random real trigonometric polynomials `Σ_{|k|≤N} a_k e^{2πikx}` on `[0, 1)`
/// with Hermitian coefficients (`a_{-k} = conj(a_k)`) and `a ≤ |a_k| ≤ A`.
#[derive(Debug, Clone, Copy)]
pub struct FourierFamily {
    pub max_mode: usize,
    pub min_modulus: f64,
    pub max_modulus: f64,
}

impl FourierFamily {
    /// Largest grid spacing for which every member satisfies the two-sided
    /// norm equivalence `0.5‖u‖ ≤ ‖S(u)‖ ≤ 2‖u‖` under the midpoint rule.
    pub fn spacing_bound(&self) -> f64 {
        let n = self.max_mode as f64;
        self.min_modulus * (2.0 * n + 1.0).sqrt() / (2.0 * PI * self.max_modulus * n * (n + 1.0))
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> FourierSeries {
        let modulus = |rng: &mut R| {
            if self.max_modulus > self.min_modulus {
                rng.random_range(self.min_modulus..=self.max_modulus)
            } else {
                self.min_modulus
            }
        };
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let a0 = sign * modulus(rng);
        let modes = (1..=self.max_mode)
            .map(|_| {
                let r = modulus(rng);
                let phase = rng.random_range(0.0..2.0 * PI);
                (r * phase.cos(), r * phase.sin())
            })
            .collect();
        FourierSeries { a0, modes }
    }
}

/// A real trigonometric polynomial on `[0, 1)` stored by its non-negative
/// frequency coefficients.
#[derive(Debug, Clone)]
pub struct FourierSeries {
    pub a0: f64,
    /// `(Re a_k, Im a_k)` for `k = 1..=N`.
    pub modes: Vec<(f64, f64)>,
}

impl FourierSeries {
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.a0;
        for (k, (re, im)) in self.modes.iter().enumerate() {
            let (s, c) = (2.0 * PI * (k + 1) as f64 * x).sin_cos();
            acc += 2.0 * (re * c - im * s);
        }
        acc
    }

    /// Continuum `L²([0,1])` norm, `sqrt(Σ_k |a_k|²)`.
    pub fn l2_norm(&self) -> f64 {
        let modes: f64 = self.modes.iter().map(|(re, im)| re * re + im * im).sum();
        (self.a0 * self.a0 + 2.0 * modes).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEquivalenceReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest observed `‖S(u)‖ / ‖u‖`.
    pub min_ratio: f64,
    /// Largest observed `‖S(u)‖ / ‖u‖`.
    pub max_ratio: f64,
}

impl NormEquivalenceReport {
    /// The observed ratio furthest (multiplicatively) from 1.
    pub fn worst_ratio(&self) -> f64 {
        if self.trials == 0 {
            return 1.0;
        }
        if (1.0 / self.min_ratio) > self.max_ratio {
            self.min_ratio
        } else {
            self.max_ratio
        }
    }
}

/// Checks `0.5‖u‖ ≤ ‖S(u)‖_S ≤ 2‖u‖` on `trials` members produced by `sampler`,
/// which returns a function together with its exact continuum norm.
pub fn verify_norm_equivalence<S, F>(
    mut sampler: S,
    grid: &Grid1D,
    rule: &QuadratureRule,
    trials: usize,
) -> Result<NormEquivalenceReport>
where
    S: FnMut() -> (F, f64),
    F: Fn(f64) -> f64,
{
    let mut report = NormEquivalenceReport {
        trials,
        violations: 0,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
    };
    for _ in 0..trials {
        let (f, exact) = sampler();
        let sampled = discretize(f, grid)?;
        let discrete = super::weighted_norm(&sampled, rule)?;
        let ratio = discrete / exact;
        report.min_ratio = report.min_ratio.min(ratio);
        report.max_ratio = report.max_ratio.max(ratio);
        if !(0.5 * exact <= discrete && discrete <= 2.0 * exact) {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// `count` box sizes spaced geometrically from `lo` to `hi`.
pub fn geometric_scales(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (ratio * i as f64).exp()).collect()
}

/// Box-counting (Minkowski) dimension estimate.
///
/// For each scale `ε` the points are binned into axis-aligned boxes of side
/// `ε` (sup-norm balls) and the occupied boxes counted; the estimate is the
/// least-squares slope of `log N(ε)` against `log(1/ε)`.
pub fn box_counting_dimension(points: &[Vec<f64>], scales: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("box counting needs at least one point".into()));
    }
    if scales.len() < 2 {
        return Err(Error::Config("box counting needs at least two scales".into()));
    }
    if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::Config("box sizes must be positive and finite".into()));
    }
    let lo = scales.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scales.iter().cloned().fold(0.0, f64::max);
    if hi == lo {
        return Err(Error::Config("box sizes are all equal".into()));
    }
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "box sizes must span at least one decade, got [{lo}, {hi}]"
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Dimension("points have differing dimensions".into()));
    }

    let mut xs = Vec::with_capacity(scales.len());
    let mut ys = Vec::with_capacity(scales.len());
    for &eps in scales {
        let boxes: HashSet<Vec<i64>> = points
            .iter()
            .map(|p| p.iter().map(|v| (v / eps).floor() as i64).collect())
            .collect();
        xs.push((1.0 / eps).ln());
        ys.push((boxes.len() as f64).ln());
    }
    Ok(least_squares_slope(&xs, &ys))
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{make_quadrature, QuadratureKind};
    use crate::rng::stream_rng;

    #[test]
    fn fourier_family_meets_the_sampling_bound() {
        let family = FourierFamily {
            max_mode: 4,
            min_modulus: 1.0,
            max_modulus: 1.0,
        };
        let n = (1.0 / family.spacing_bound()).ceil() as usize;
        let grid = Grid1D::periodic(0.0, 1.0, n).unwrap();
        assert!(grid.spacing() <= family.spacing_bound());
        let rule = make_quadrature(&grid, QuadratureKind::Midpoint).unwrap();
        let mut rng = stream_rng(3, &[]);
        let report = verify_norm_equivalence(
            || {
                let s = family.draw(&mut rng);
                let norm = s.l2_norm();
                (move |x| s.eval(x), norm)
            },
            &grid,
            &rule,
            1000,
        )
        .unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.min_ratio >= 0.5 && report.max_ratio <= 2.0);
    }

    #[test]
    fn single_mode_has_unit_discrete_norm() {
        let grid = Grid1D::periodic(0.0, 1.0, 512).unwrap();
        let rule = make_quadrature(&grid, QuadratureKind::Midpoint).unwrap();
        let re = discretize(|x| (2.0 * PI * x).cos(), &grid).unwrap();
        let im = discretize(|x| (2.0 * PI * x).sin(), &grid).unwrap();
        let norm = (super::super::weighted_inner(&re, &re, &rule).unwrap()
            + super::super::weighted_inner(&im, &im, &rule).unwrap())
        .sqrt();
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_function_ratio_is_one() {
        let grid = Grid1D::closed(0.0, 1.0, 33).unwrap();
        let rule = make_quadrature(&grid, QuadratureKind::Trapezoid).unwrap();
        let report = verify_norm_equivalence(|| (|_x: f64| 3.0, 3.0), &grid, &rule, 5).unwrap();
        assert_eq!(report.violations, 0);
        assert!((report.worst_ratio() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn segment_in_r3_is_one_dimensional() {
        let mut rng = stream_rng(11, &[]);
        let points: Vec<Vec<f64>> = (0..10_000)
            .map(|_| {
                let t: f64 = rng.random();
                vec![0.1 + 0.8 * t, 0.3 + 0.5 * t, 0.9 - 0.6 * t]
            })
            .collect();
        let d = box_counting_dimension(&points, &geometric_scales(0.005, 0.05, 6)).unwrap();
        assert!((0.8..=1.2).contains(&d), "estimate {d}");
    }

    #[test]
    fn square_in_r3_is_two_dimensional() {
        let mut rng = stream_rng(12, &[]);
        let points: Vec<Vec<f64>> = (0..10_000)
            .map(|_| vec![rng.random(), rng.random(), 0.5])
            .collect();
        let d = box_counting_dimension(&points, &geometric_scales(0.02, 0.2, 6)).unwrap();
        assert!((1.7..=2.2).contains(&d), "estimate {d}");
    }

    #[test]
    fn repeated_point_is_zero_dimensional() {
        let points = vec![vec![0.3, 0.7]; 100];
        let d = box_counting_dimension(&points, &geometric_scales(0.01, 0.1, 4)).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn degenerate_scales_are_rejected() {
        let points = vec![vec![0.0]];
        assert!(matches!(
            box_counting_dimension(&points, &[0.1, 0.1, 0.1]),
            Err(Error::Config(_))
        ));
        assert!(box_counting_dimension(&points, &[0.1, 0.2]).is_err());
        assert!(box_counting_dimension(&[], &[0.01, 0.1]).is_err());
    }
}
