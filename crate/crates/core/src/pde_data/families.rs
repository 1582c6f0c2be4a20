use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discretization::Grid1D;
use crate::{Error, Result};

/// Width of the hat functions.
pub const HAT_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Transport,
    Burgers,
    Kdv,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Transport, Family::Burgers, Family::Kdv];

    pub fn name(self) -> &'static str {
        match self {
            Family::Transport => "transport",
            Family::Burgers => "burgers",
            Family::Kdv => "kdv",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "transport" => Ok(Family::Transport),
            "burgers" => Ok(Family::Burgers),
            "kdv" => Ok(Family::Kdv),
            other => Err(Error::Config(format!(
                "unknown family `{other}` (expected transport, burgers or kdv)"
            ))),
        }
    }

    /// Box for the amplitude parameter `a`.
    pub fn a_range(self) -> (f64, f64) {
        match self {
            Family::Transport => (1.0, 4.0),
            Family::Burgers => (-0.9, 0.9),
            Family::Kdv => (6.0, 18.0),
        }
    }

    /// Box for the shift parameter `h`.
    pub fn h_range(self) -> (f64, f64) {
        match self {
            Family::Transport | Family::Burgers => (0.0, 1.0),
            Family::Kdv => (0.0, 3.0),
        }
    }

    /// The family's spatial domain discretized with `n` nodes: closed `[0, 1]`
    /// for transport, periodic `[0, 1)` for Burgers' and periodic `[0, 6)` for
    /// KdV.
    pub fn grid(self, n: usize) -> Result<Grid1D> {
        match self {
            Family::Transport => Grid1D::closed(0.0, 1.0, n),
            Family::Burgers => Grid1D::periodic(0.0, 1.0, n),
            Family::Kdv => Grid1D::periodic(0.0, 6.0, n),
        }
    }

    /// Checks that `grid` covers this family's domain with the right topology.
    pub fn check_grid(self, grid: &Grid1D) -> Result<()> {
        let expected = self.grid(grid.len())?;
        if *grid != expected {
            return Err(Error::GridMismatch(format!(
                "{} data lives on {:?}, got {:?}",
                self.name(),
                expected,
                grid
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Latent parameters `(a, h)` of one initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicParams {
    pub family: Family,
    pub a: f64,
    pub h: f64,
}

impl IntrinsicParams {
    pub fn new(family: Family, a: f64, h: f64) -> Result<Self> {
        let p = Self { family, a, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (a_lo, a_hi) = self.family.a_range();
        let (h_lo, h_hi) = self.family.h_range();
        if !(a_lo..=a_hi).contains(&self.a) || !(h_lo..=h_hi).contains(&self.h) {
            return Err(Error::Parameter(format!(
                "{}: (a, h) = ({}, {}) outside [{a_lo}, {a_hi}] × [{h_lo}, {h_hi}]",
                self.family, self.a, self.h
            )));
        }
        Ok(())
    }

    /// Uniform draw from the family's parameter box.
    pub fn sample<R: Rng + ?Sized>(family: Family, rng: &mut R) -> Self {
        let (a_lo, a_hi) = family.a_range();
        let (h_lo, h_hi) = family.h_range();
        Self {
            family,
            a: rng.random_range(a_lo..=a_hi),
            h: rng.random_range(h_lo..=h_hi),
        }
    }

    fn expect(&self, family: Family) -> Result<()> {
        if self.family != family {
            return Err(Error::Parameter(format!(
                "expected {family} parameters, got {}",
                self.family
            )));
        }
        self.validate()
    }
}

/// Hat of height `alpha` supported on `[t, t + ε]`, peaking at `t + ε/2`:
/// `(2α/ε)(σ(x−t) − 2σ(x−t−ε/2) + σ(x−t−ε))` with `σ = max(·, 0)`.
///
/// Evaluated in the equivalent form `α·max(1 − |x − t − ε/2|/(ε/2), 0)`,
/// which keeps the value exactly zero off the support.
pub fn hat(alpha: f64, t: f64) -> impl Fn(f64) -> f64 {
    let half = HAT_WIDTH / 2.0;
    move |x| alpha * (1.0 - (x - t - half).abs() / half).max(0.0)
}

/// Two-hat initial condition `H_{a,0.1} + H_{2.5, 0.2+0.1h}`.
pub fn transport_ic(p: &IntrinsicParams) -> Result<impl Fn(f64) -> f64> {
    p.expect(Family::Transport)?;
    let first = hat(p.a, 0.1);
    let second = hat(2.5, 0.2 + 0.1 * p.h);
    Ok(move |x| first(x) + second(x))
}

fn sech2(x: f64) -> f64 {
    let c = x.cosh();
    if c.is_finite() {
        1.0 / (c * c)
    } else {
        0.0
    }
}

/// Two-pulse profile `(a²/2)·sech²((a/2)(x−1)) + 18·sech²(18(x−2−h))`.
pub fn kdv_ic(p: &IntrinsicParams) -> Result<impl Fn(f64) -> f64> {
    p.expect(Family::Kdv)?;
    let (a, h) = (p.a, p.h);
    let c = 36.0 / 2.0;
    Ok(move |x| a * a / 2.0 * sech2(a / 2.0 * (x - 1.0)) + c * sech2(c * (x - 2.0 - h)))
}
