//! Fourier pseudo-spectral ETDRK4 for `u_t = L u − ½(u²)_x` on periodic grids.

use std::f64::consts::PI;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;

use crate::discretization::{DiscreteFunction, Grid1D, Topology};
use crate::{Error, Result};

/// Contour points for the ETD coefficient integrals.
const CONTOUR_POINTS: usize = 64;

/// Precomputed exponential integrator for a diagonal linear symbol `L(k)`
/// and the conservative quadratic term, with 2/3-rule dealiasing.
///
/// State is kept as the half spectrum of a real field (modes `0..=n/2`).
pub struct Etdrk4 {
    grid: Grid1D,
    dt: f64,
    steps: usize,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    /// `−½ik` on retained modes, zero on the upper third.
    nl: Vec<Complex64>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

impl std::fmt::Debug for Etdrk4 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Etdrk4")
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .field("steps", &self.steps)
            .finish()
    }
}

struct Workspace {
    real: Vec<f64>,
    spec: Vec<Complex64>,
    scratch_fwd: Vec<Complex64>,
    scratch_inv: Vec<Complex64>,
}

impl Etdrk4 {
    /// Integrator reaching `t_final` in steps of (at most) `dt`. The symbol
    /// must satisfy `L(−k) = conj(L(k))`.
    pub fn new<S: Fn(f64) -> Complex64>(grid: &Grid1D, symbol: S, dt: f64, t_final: f64) -> Result<Self> {
        if grid.topology() != Topology::Periodic {
            return Err(Error::GridMismatch("spectral solvers need a periodic grid".into()));
        }
        if !(dt > 0.0) || !(t_final >= 0.0) {
            return Err(Error::Config(format!("invalid time step {dt} or horizon {t_final}")));
        }
        let ratio = t_final / dt;
        let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
            ratio.round() as usize
        } else {
            ratio.ceil() as usize
        };
        let dt = if steps > 0 { t_final / steps as f64 } else { dt };
        let n = grid.len();
        let half = n / 2 + 1;
        let base = 2.0 * PI / grid.length();
        let cut = n / 3;

        let mut lin = Vec::with_capacity(half);
        let mut nl = Vec::with_capacity(half);
        for m in 0..half {
            let k = base * m as f64;
            let l = symbol(k);
            let nyquist = n % 2 == 0 && m == n / 2;
            lin.push(if nyquist { Complex64::new(l.re, 0.0) } else { l });
            if m <= cut && !nyquist {
                nl.push(Complex64::new(0.0, -0.5 * k));
            } else {
                nl.push(Complex64::new(0.0, 0.0));
            }
        }

        let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64))
            .collect();
        let mut e = Vec::with_capacity(half);
        let mut e2 = Vec::with_capacity(half);
        let mut q = Vec::with_capacity(half);
        let mut f1 = Vec::with_capacity(half);
        let mut f2 = Vec::with_capacity(half);
        let mut f3 = Vec::with_capacity(half);
        let inv = dt / CONTOUR_POINTS as f64;
        for &l in &lin {
            let hl = l * dt;
            e.push(hl.exp());
            e2.push((hl * 0.5).exp());
            let zero = Complex64::new(0.0, 0.0);
            let (mut sq, mut s1, mut s2, mut s3) = (zero, zero, zero, zero);
            for &r in &roots {
                let z = hl + r;
                let ez = z.exp();
                let z3 = z * z * z;
                sq += ((z * 0.5).exp() - 1.0) / z;
                s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                s2 += (2.0 + z + ez * (z - 2.0)) / z3;
                s3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            q.push(sq * inv);
            f1.push(s1 * inv);
            f2.push(s2 * inv);
            f3.push(s3 * inv);
        }

        let mut planner = RealFftPlanner::new();
        Ok(Self {
            grid: *grid,
            dt,
            steps,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            nl,
            r2c: planner.plan_fft_forward(n),
            c2r: planner.plan_fft_inverse(n),
        })
    }

    /// Viscous Burgers' `u_t = ν u_xx − u u_x`.
    pub fn burgers(grid: &Grid1D, nu: f64, dt: f64, t_final: f64) -> Result<Self> {
        if !(nu >= 0.0) {
            return Err(Error::Config(format!("viscosity must be nonnegative, got {nu}")));
        }
        Self::new(grid, |k| Complex64::new(-nu * k * k, 0.0), dt, t_final)
    }

    /// KdV `u_t = −u_xxx − u u_x`.
    pub fn kdv(grid: &Grid1D, dt: f64, t_final: f64) -> Result<Self> {
        Self::new(grid, |k| Complex64::new(0.0, k * k * k), dt, t_final)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Effective step (the horizon divided by the step count).
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn workspace(&self) -> Workspace {
        let n = self.grid.len();
        Workspace {
            real: vec![0.0; n],
            spec: vec![Complex64::new(0.0, 0.0); n / 2 + 1],
            scratch_fwd: self.r2c.make_scratch_vec(),
            scratch_inv: self.c2r.make_scratch_vec(),
        }
    }

    fn to_real(&self, v: &[Complex64], ws: &mut Workspace) {
        ws.spec.copy_from_slice(v);
        ws.spec[0].im = 0.0;
        if self.grid.len() % 2 == 0 {
            let last = ws.spec.len() - 1;
            ws.spec[last].im = 0.0;
        }
        self.c2r
            .process_with_scratch(&mut ws.spec, &mut ws.real, &mut ws.scratch_inv)
            .expect("buffer sizes match the plan");
    }

    fn nonlinear(&self, v: &[Complex64], ws: &mut Workspace, out: &mut [Complex64]) {
        // both transforms are unnormalised, so u = real / n
        self.to_real(v, ws);
        let scale = 1.0 / self.grid.len() as f64;
        for x in ws.real.iter_mut() {
            let u = *x * scale;
            *x = u * u;
        }
        self.r2c
            .process_with_scratch(&mut ws.real, out, &mut ws.scratch_fwd)
            .expect("buffer sizes match the plan");
        for (o, g) in out.iter_mut().zip(&self.nl) {
            *o *= *g;
        }
    }

    /// Advances `g` to the final time.
    pub fn solve(&self, g: &DiscreteFunction) -> Result<DiscreteFunction> {
        if g.grid() != &self.grid {
            return Err(Error::GridMismatch(format!(
                "solver built for {:?}, data on {:?}",
                self.grid,
                g.grid()
            )));
        }
        let half = g.len() / 2 + 1;
        let zero = Complex64::new(0.0, 0.0);
        let mut ws = self.workspace();
        let mut v = vec![zero; half];
        ws.real.copy_from_slice(g.values());
        self.r2c
            .process_with_scratch(&mut ws.real, &mut v, &mut ws.scratch_fwd)
            .expect("buffer sizes match the plan");
        let (mut nv, mut na, mut nb, mut nc) = (vec![zero; half], vec![zero; half], vec![zero; half], vec![zero; half]);
        let (mut a, mut b, mut c) = (vec![zero; half], vec![zero; half], vec![zero; half]);
        for step in 0..self.steps {
            self.nonlinear(&v, &mut ws, &mut nv);
            for j in 0..half {
                a[j] = self.e2[j] * v[j] + self.q[j] * nv[j];
            }
            self.nonlinear(&a, &mut ws, &mut na);
            for j in 0..half {
                b[j] = self.e2[j] * v[j] + self.q[j] * na[j];
            }
            self.nonlinear(&b, &mut ws, &mut nb);
            for j in 0..half {
                c[j] = self.e2[j] * a[j] + self.q[j] * (nb[j] * 2.0 - nv[j]);
            }
            self.nonlinear(&c, &mut ws, &mut nc);
            let mut finite = true;
            for j in 0..half {
                v[j] = self.e[j] * v[j] + nv[j] * self.f1[j] + (na[j] + nb[j]) * self.f2[j] * 2.0 + nc[j] * self.f3[j];
                finite &= v[j].re.is_finite() && v[j].im.is_finite();
            }
            if !finite {
                return Err(Error::SolverBlowUp { step });
            }
        }
        self.to_real(&v, &mut ws);
        let scale = 1.0 / g.len() as f64;
        DiscreteFunction::new(self.grid, ws.real.iter().map(|x| x * scale).collect())
    }
}

/// Burgers' solution at `t_final` from samples of the initial condition.
pub fn solve_burgers(g: &DiscreteFunction, nu: f64, t_final: f64, dt: f64) -> Result<DiscreteFunction> {
    Etdrk4::burgers(g.grid(), nu, dt, t_final)?.solve(g)
}

/// KdV solution at `t_final` from samples of the initial condition.
pub fn solve_kdv(g: &DiscreteFunction, t_final: f64, dt: f64) -> Result<DiscreteFunction> {
    Etdrk4::kdv(g.grid(), dt, t_final)?.solve(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Grid1D {
        Grid1D::periodic(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let g = DiscreteFunction::zeros(unit(32));
        assert!(solve_burgers(&g, 1e-3, 0.1, 1e-3).unwrap().values().iter().all(|v| *v == 0.0));
        let g = DiscreteFunction::zeros(Grid1D::periodic(0.0, 6.0, 32).unwrap());
        assert!(solve_kdv(&g, 1e-3, 1e-5).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn heat_equation_limit_is_exact() {
        // with a small single mode the quadratic term is negligible
        let grid = unit(64);
        let amp = 1e-9;
        let g = crate::discretization::discretize(|x| amp * (2.0 * PI * 3.0 * x).sin(), &grid).unwrap();
        let nu = 0.01;
        let t = 0.5;
        let u = solve_burgers(&g, nu, t, 1e-2).unwrap();
        let decay = (-nu * (6.0 * PI).powi(2) * t).exp();
        for (i, v) in u.values().iter().enumerate() {
            let exact = amp * decay * (6.0 * PI * grid.node(i)).sin();
            assert!((v - exact).abs() < 1e-9 * amp, "{v} vs {exact}");
        }
    }

    #[test]
    fn linear_kdv_mode_rotates() {
        // u_t = −u_xxx on sin(kx) gives sin(kx + k³t)
        let grid = Grid1D::periodic(0.0, 2.0 * PI, 32).unwrap();
        let amp = 1e-10;
        let g = crate::discretization::discretize(|x| amp * (2.0 * x).sin(), &grid).unwrap();
        let t = 0.3;
        let u = solve_kdv(&g, t, 1e-3).unwrap();
        for (i, v) in u.values().iter().enumerate() {
            let exact = amp * (2.0 * grid.node(i) + 8.0 * t).sin();
            assert!((v - exact).abs() < 1e-9 * amp);
        }
    }

    #[test]
    fn inviscid_burgers_before_shock() {
        // u0 = sin(2πx)/(4π) stays smooth until t = 2; compare against the
        // implicit characteristic solution u = u0(x − u t)
        let grid = unit(256);
        let u0 = |x: f64| (2.0 * PI * x).sin() / (4.0 * PI);
        let g = crate::discretization::discretize(u0, &grid).unwrap();
        let t = 0.5;
        let u = solve_burgers(&g, 0.0, t, 1e-3).unwrap();
        for (i, v) in u.values().iter().enumerate() {
            let x = grid.node(i);
            let mut w = u0(x);
            for _ in 0..100 {
                w = u0(x - w * t);
            }
            assert!((v - w).abs() < 1e-9, "x={x}: {v} vs {w}");
        }
    }

    #[test]
    fn rejects_closed_grids() {
        let g = DiscreteFunction::zeros(Grid1D::closed(0.0, 1.0, 16).unwrap());
        assert!(solve_burgers(&g, 1e-3, 1.0, 1e-3).is_err());
    }
}
