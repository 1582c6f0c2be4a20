use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::families::{Family, IntrinsicParams};
use crate::discretization::{DiscreteFunction, Grid1D, Topology};
use crate::rng::{stream, stream_rng};
use crate::{Error, Result};

/// Covariance `amplitude·(−d²/dx² + κ²I)^{−exponent}` on the periodic unit
/// interval, truncated after `cutoff` modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrfSpec {
    pub amplitude: f64,
    pub kappa: f64,
    pub exponent: f64,
    pub cutoff: usize,
}

impl GrfSpec {
    /// `7⁴(−d²/dx² + 7²)^{−2.5}` resolved up to the Nyquist mode of `n` nodes.
    pub fn standard(n: usize) -> Self {
        Self {
            amplitude: 7f64.powi(4),
            kappa: 7.0,
            exponent: 2.5,
            cutoff: n / 2,
        }
    }

    /// Eigenvalue `λ_k` attached to `cos(2πkx)` and `sin(2πkx)`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let w = 2.0 * PI * k as f64;
        self.amplitude * (w * w + self.kappa * self.kappa).powf(-self.exponent)
    }

    /// Pointwise variance of a draw, `Σ_k 2λ_k`.
    pub fn pointwise_variance(&self) -> f64 {
        (1..=self.cutoff).map(|k| 2.0 * self.eigenvalue(k)).sum()
    }

    fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.kappa > 0.0 && self.exponent > 0.0) || self.cutoff == 0 {
            return Err(Error::Config(format!("invalid random field parameters {self:?}")));
        }
        Ok(())
    }
}

/// Real trigonometric polynomial `Σ_{k≥1} A_k cos(2πkx) + B_k sin(2πkx)` on
/// the periodic unit interval, with zero mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    /// `(A_k, B_k)` for `k = 1..=len`.
    pub modes: Vec<(f64, f64)>,
}

impl TrigSeries {
    pub fn eval(&self, x: f64) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let (s, c) = (2.0 * PI * (i + 1) as f64 * x).sin_cos();
                a * c + b * s
            })
            .sum()
    }

    /// Exact values at the nodes of a periodic grid on `[0, 1)`.
    ///
    /// Modes above the grid's Nyquist frequency are folded onto the bins they
    /// alias to, so the result is still the pointwise evaluation.
    pub fn sample(&self, grid: &Grid1D) -> Result<DiscreteFunction> {
        check_unit_periodic(grid)?;
        let m = grid.len();
        let mut spec = vec![Complex64::new(0.0, 0.0); m];
        for (i, &(a, b)) in self.modes.iter().enumerate() {
            let k = i + 1;
            let c = Complex64::new(a, -b) * 0.5;
            spec[k % m] += c;
            spec[(m - k % m) % m] += c.conj();
        }
        FftPlanner::new().plan_fft_inverse(m).process(&mut spec);
        DiscreteFunction::new(*grid, spec.iter().map(|z| z.re).collect())
    }

    /// Trigonometric interpolant of samples on a periodic unit grid.
    pub fn from_samples(u: &DiscreteFunction) -> Result<Self> {
        check_unit_periodic(u.grid())?;
        let m = u.len();
        let mut buf: Vec<Complex64> = u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let scale = 2.0 / m as f64;
        let modes = (1..=m / 2)
            .map(|k| {
                let z = buf[k] * scale;
                if 2 * k == m {
                    (z.re / 2.0, 0.0)
                } else {
                    (z.re, -z.im)
                }
            })
            .collect();
        Ok(Self { modes })
    }

    /// `x ↦ self(x − h)`, realised by rotating each mode's phase.
    pub fn shifted(&self, h: f64) -> Self {
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let (s, c) = (2.0 * PI * (i + 1) as f64 * h).sin_cos();
                (a * c - b * s, a * s + b * c)
            })
            .collect();
        Self { modes }
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let n = self.modes.len().max(other.modes.len());
        let get = |s: &Self, i: usize| s.modes.get(i).copied().unwrap_or((0.0, 0.0));
        let modes = (0..n)
            .map(|i| {
                let (a0, b0) = get(self, i);
                let (a1, b1) = get(other, i);
                (alpha * a0 + beta * a1, alpha * b0 + beta * b1)
            })
            .collect();
        Self { modes }
    }

    /// Continuum `L²([0, 1))` norm.
    pub fn l2_norm(&self) -> f64 {
        (self.modes.iter().map(|(a, b)| a * a + b * b).sum::<f64>() / 2.0).sqrt()
    }
}

fn check_unit_periodic(grid: &Grid1D) -> Result<()> {
    if grid.topology() != Topology::Periodic || grid.x_lo() != 0.0 || grid.x_hi() != 1.0 {
        return Err(Error::GridMismatch(format!(
            "random fields live on the periodic grid [0, 1), got {grid:?}"
        )));
    }
    Ok(())
}

/// Karhunen–Loève draw `Σ_k √λ_k (ξ_k √2 cos 2πkx + η_k √2 sin 2πkx)`.
pub fn sample_grf_series(spec: &GrfSpec, seed: u64) -> Result<TrigSeries> {
    spec.validate()?;
    let mut rng = stream_rng(seed, &[stream::GRF]);
    let modes = (1..=spec.cutoff)
        .map(|k| {
            let s = (2.0 * spec.eigenvalue(k)).sqrt();
            let xi: f64 = StandardNormal.sample(&mut rng);
            let eta: f64 = StandardNormal.sample(&mut rng);
            (s * xi, s * eta)
        })
        .collect();
    Ok(TrigSeries { modes })
}

/// A draw sampled on `grid`, which must be periodic on `[0, 1)` and resolve
/// the cutoff.
pub fn sample_grf(spec: &GrfSpec, grid: &Grid1D, seed: u64) -> Result<DiscreteFunction> {
    check_unit_periodic(grid)?;
    if spec.cutoff > grid.len() / 2 {
        return Err(Error::Config(format!(
            "cutoff {} exceeds the Nyquist mode of a {}-node grid",
            spec.cutoff,
            grid.len()
        )));
    }
    sample_grf_series(spec, seed)?.sample(grid)
}

/// `a·w₀(x − h) + √(1 − a²)·w₁(x − h)`.
pub fn burgers_ic(p: &IntrinsicParams, w0: &TrigSeries, w1: &TrigSeries) -> Result<TrigSeries> {
    if p.family != Family::Burgers {
        return Err(Error::Parameter(format!("expected burgers parameters, got {}", p.family)));
    }
    p.validate()?;
    let b = (1.0 - p.a * p.a).sqrt();
    Ok(w0.combine(p.a, w1, b).shifted(p.h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid1D {
        Grid1D::periodic(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn eigenvalues_decay() {
        let s = GrfSpec::standard(512);
        assert_eq!(s.cutoff, 256);
        let l1 = 2401.0 * ((2.0 * PI).powi(2) + 49.0).powf(-2.5);
        assert!((s.eigenvalue(1) - l1).abs() < 1e-15);
        assert!(s.eigenvalue(2) < s.eigenvalue(1));
    }

    #[test]
    fn sampling_matches_direct_evaluation() {
        let w = sample_grf_series(&GrfSpec::standard(64), 5).unwrap();
        for n in [64, 100, 17] {
            let u = w.sample(&grid(n)).unwrap();
            for (i, v) in u.values().iter().enumerate() {
                assert!((v - w.eval(i as f64 / n as f64)).abs() < 1e-12, "n={n}, i={i}");
            }
        }
    }

    #[test]
    fn interpolant_round_trip() {
        let spec = GrfSpec::standard(32);
        let g = grid(32);
        let u = sample_grf(&spec, &g, 2).unwrap();
        let w = TrigSeries::from_samples(&u).unwrap();
        let back = w.sample(&g).unwrap();
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        let direct = sample_grf_series(&spec, 2).unwrap();
        for (p, q) in direct.modes.iter().zip(&w.modes).take(15) {
            assert!((p.0 - q.0).abs() < 1e-13 && (p.1 - q.1).abs() < 1e-13);
        }
    }

    #[test]
    fn shift_is_exact() {
        let w = sample_grf_series(&GrfSpec::standard(64), 9).unwrap();
        let s = w.shifted(0.3);
        for x in [0.0, 0.17, 0.5, 0.93] {
            assert!((s.eval(x) - w.eval(x - 0.3)).abs() < 1e-12);
        }
        assert!((s.l2_norm() - w.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_grid_checked() {
        let s = GrfSpec::standard(64);
        assert_eq!(sample_grf(&s, &grid(64), 1).unwrap(), sample_grf(&s, &grid(64), 1).unwrap());
        assert_ne!(sample_grf(&s, &grid(64), 1).unwrap(), sample_grf(&s, &grid(64), 2).unwrap());
        assert!(sample_grf(&s, &Grid1D::closed(0.0, 1.0, 64).unwrap(), 1).is_err());
        assert!(sample_grf(&s, &grid(32), 1).is_err());
    }

    #[test]
    fn burgers_combination() {
        let spec = GrfSpec::standard(64);
        let w0 = sample_grf_series(&spec, 1).unwrap();
        let w1 = sample_grf_series(&spec, 2).unwrap();
        let g = burgers_ic(&IntrinsicParams::new(Family::Burgers, 0.0, 0.0).unwrap(), &w0, &w1).unwrap();
        assert_eq!(g, w1);
        let p = IntrinsicParams::new(Family::Burgers, 0.9, 0.4).unwrap();
        let g = burgers_ic(&p, &w0, &w1).unwrap();
        let x = 0.77;
        let expect = 0.9 * w0.eval(x - 0.4) + 0.19f64.sqrt() * w1.eval(x - 0.4);
        assert!((g.eval(x) - expect).abs() < 1e-12);
        assert!(burgers_ic(&IntrinsicParams { family: Family::Burgers, a: 0.95, h: 0.0 }, &w0, &w1).is_err());
    }

    #[test]
    fn orthogonal_pair_norms() {
        // w0 uses only cosines, w1 only sines of different modes: orthogonal
        let w0 = TrigSeries { modes: vec![(1.0, 0.0), (0.0, 0.0), (0.5, 0.0)] };
        let w1 = TrigSeries { modes: vec![(0.0, 0.0), (0.0, 2.0), (0.0, 0.0)] };
        for (a, h) in [(0.3, 0.1), (-0.9, 0.77), (0.0, 0.5)] {
            let g = burgers_ic(&IntrinsicParams::new(Family::Burgers, a, h).unwrap(), &w0, &w1).unwrap();
            let expect = a * a * w0.l2_norm().powi(2) + (1.0 - a * a) * w1.l2_norm().powi(2);
            assert!((g.l2_norm().powi(2) - expect).abs() < 1e-12);
        }
    }
}
