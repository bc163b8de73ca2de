//! The space of admissible controls.
//!
//! Controls are real fields sampled at the midpoints of a uniform time grid
//! on [0, t_f]. The geometry of control space is set by a shape function
//! s(t) = sin^p(π t / t_f) through the weighted inner product
//!
//! ```text
//! ⟨f, g⟩ = ∫ f(t) g(t) / s(t) dt,
//! ```
//!
//! which pushes controls with nonzero endpoints or steep boundary slew out
//! to infinity. All quadrature in this crate is the midpoint rule on the
//! same grid, so objective, constraint, and gradient integrals stay mutually
//! consistent.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform grid of `n` cells on [0, t_f]. Samples live at cell midpoints
/// t_k = (k + 1/2)·dt with dt = t_f/n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<S: Real> {
    n: usize,
    t_f: S,
}

impl<S: Real> TimeGrid<S> {
    pub fn new(n: usize, t_f: S) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("time grid needs at least one cell"));
        }
        if !(t_f.is_finite() && t_f > S::zero()) {
            return Err(Error::invalid(format!("final time must be positive, got {t_f}")));
        }
        Ok(Self { n, t_f })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_f(&self) -> S {
        self.t_f
    }

    pub fn dt(&self) -> S {
        self.t_f / S::of_usize(self.n)
    }

    /// Midpoint time of cell `k`.
    pub fn midpoint(&self, k: usize) -> S {
        debug_assert!(k < self.n);
        (S::of_usize(k) + S::of(0.5)) * self.dt()
    }

    /// All midpoint times, in order.
    pub fn midpoints(&self) -> Vec<S> {
        (0..self.n).map(|k| self.midpoint(k)).collect()
    }
}

/// The shape function s(t) = sin^p(π t / t_f), p ≥ 0 (p = 0 gives s ≡ 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeFunction<S: Real> {
    p: S,
}

impl<S: Real> ShapeFunction<S> {
    pub fn new(p: S) -> Result<Self> {
        if !(p.is_finite() && p >= S::zero()) {
            return Err(Error::invalid(format!("shape exponent must be ≥ 0, got {p}")));
        }
        Ok(Self { p })
    }

    /// Flat shape, s ≡ 1.
    pub fn flat() -> Self {
        Self { p: S::zero() }
    }

    pub fn p(&self) -> S {
        self.p
    }

    /// Evaluate s(t) on [0, t_f].
    pub fn eval(&self, t: S, t_f: S) -> Result<S> {
        if !(t >= S::zero() && t <= t_f) {
            return Err(Error::invalid(format!("shape argument {t} outside [0, {t_f}]")));
        }
        Ok(self.eval_unchecked(t, t_f))
    }

    fn eval_unchecked(&self, t: S, t_f: S) -> S {
        if self.p == S::zero() {
            return S::one();
        }
        let s = (S::PI() * t / t_f).sin();
        if self.p == S::one() {
            s
        } else if self.p == S::of(2.0) {
            s * s
        } else {
            s.powf(self.p)
        }
    }

    /// s sampled at every grid midpoint. Strictly positive there for any
    /// finite exponent that does not underflow.
    pub fn sample_midpoints(&self, grid: &TimeGrid<S>) -> Vec<S> {
        (0..grid.n())
            .map(|k| self.eval_unchecked(grid.midpoint(k), grid.t_f()))
            .collect()
    }
}

/// Accumulated z-rotation angle θ(t) = ∫₀ᵗ C, evaluated at the grid
/// midpoints, plus the full-interval angle θ(t_f).
#[derive(Debug, Clone)]
pub struct RotationProfile<S: Real> {
    /// θ at each midpoint: θ_k = dt·(Σ_{j<k} C_j + C_k/2).
    pub midpoints: Vec<S>,
    /// θ(t_f) = dt·Σ C_k (the exact midpoint-rule integral).
    pub final_angle: S,
}

/// A sampled control field together with its grid and shape metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField<S: Real> {
    grid: TimeGrid<S>,
    shape: ShapeFunction<S>,
    samples: Vec<S>,
}

impl<S: Real> ControlField<S> {
    pub fn new(grid: TimeGrid<S>, shape: ShapeFunction<S>, samples: Vec<S>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::invalid(format!(
                "sample count {} does not match grid cells {}",
                samples.len(),
                grid.n()
            )));
        }
        if samples.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("control samples must be finite"));
        }
        // The weighted inner product needs s > 0 at every midpoint; the
        // minimum over the grid sits at the first midpoint.
        if shape.eval_unchecked(grid.midpoint(0), grid.t_f()) <= S::zero() {
            return Err(Error::invalid(
                "shape function underflows to zero at the first grid midpoint",
            ));
        }
        Ok(Self { grid, shape, samples })
    }

    /// The zero field.
    pub fn zeros(grid: TimeGrid<S>, shape: ShapeFunction<S>) -> Result<Self> {
        let n = grid.n();
        Self::new(grid, shape, vec![S::zero(); n])
    }

    /// Sample a continuous field at the grid midpoints.
    pub fn from_fn(
        grid: TimeGrid<S>,
        shape: ShapeFunction<S>,
        f: impl Fn(S) -> S,
    ) -> Result<Self> {
        let samples = (0..grid.n()).map(|k| f(grid.midpoint(k))).collect();
        Self::new(grid, shape, samples)
    }

    pub fn grid(&self) -> &TimeGrid<S> {
        &self.grid
    }

    pub fn shape(&self) -> &ShapeFunction<S> {
        &self.shape
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn t_f(&self) -> S {
        self.grid.t_f()
    }

    pub fn max_abs(&self) -> S {
        self.samples.iter().fold(S::zero(), |m, c| m.max(c.abs()))
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::invalid("control fields live on different grids"));
        }
        if self.shape != other.shape {
            return Err(Error::invalid("control fields carry different shape functions"));
        }
        Ok(())
    }

    /// `self + a·dir`, sample-wise. Panics if the grids differ (internal
    /// optimizer arithmetic on already-validated fields).
    pub fn add_scaled(&self, a: S, dir: &Self) -> Self {
        assert_eq!(self.grid, dir.grid, "grid mismatch in field arithmetic");
        let samples = self
            .samples
            .iter()
            .zip(&dir.samples)
            .map(|(&c, &d)| c + a * d)
            .collect();
        Self { grid: self.grid, shape: self.shape, samples }
    }

    /// Weighted inner product ⟨f, g⟩ = ∫ f g / s dt by the midpoint rule.
    pub fn inner_product(&self, other: &Self) -> Result<S> {
        self.check_compatible(other)?;
        let s_mid = self.shape.sample_midpoints(&self.grid);
        Ok(weighted_dot(&self.samples, &other.samples, &s_mid, self.grid.dt()))
    }

    /// Weighted norm √⟨C, C⟩.
    pub fn weighted_norm(&self) -> S {
        let s_mid = self.shape.sample_midpoints(&self.grid);
        weighted_dot(&self.samples, &self.samples, &s_mid, self.grid.dt()).sqrt()
    }

    /// Accumulated rotation angle θ(t) at each midpoint and at t_f.
    ///
    /// The running sum is compensated so θ(t_f) carries no accumulation
    /// error beyond a single rounding; pulse-synthesis tolerances sit close
    /// enough to machine precision to care.
    pub fn rotation_profile(&self) -> RotationProfile<S> {
        let dt = self.grid.dt();
        let half = S::of(0.5);
        let mut running = S::zero();
        let mut comp = S::zero();
        let mut midpoints = Vec::with_capacity(self.n());
        for &c in &self.samples {
            midpoints.push(dt * (running + (half * c - comp)));
            let y = c - comp;
            let t = running + y;
            comp = (t - running) - y;
            running = t;
        }
        RotationProfile { midpoints, final_angle: dt * (running - comp) }
    }

    /// Fluence Φ = ∫ C² dt (unweighted midpoint quadrature).
    pub fn fluence(&self) -> S {
        let sum = self.samples.iter().fold(S::zero(), |acc, &c| acc + c * c);
        sum * self.grid.dt()
    }
}

/// Midpoint-rule weighted dot product with precomputed shape samples.
pub(crate) fn weighted_dot<S: Real>(f: &[S], g: &[S], s_mid: &[S], dt: S) -> S {
    debug_assert_eq!(f.len(), g.len());
    debug_assert_eq!(f.len(), s_mid.len());
    let mut acc = S::zero();
    for i in 0..f.len() {
        acc = acc + f[i] * g[i] / s_mid[i];
    }
    acc * dt
}

/// Smoothed rectangular pulse whose midpoint-rule time integral equals
/// `area`: raised-cosine ramps over the first and last 10% of [0, t_f],
/// flat in between, amplitude rescaled to hit the requested area.
pub fn initial_square_pulse<S: Real>(
    area: S,
    grid: &TimeGrid<S>,
    shape: &ShapeFunction<S>,
) -> Result<ControlField<S>> {
    if !area.is_finite() {
        return Err(Error::invalid("pulse area must be finite"));
    }
    let t_f = grid.t_f();
    let ramp = S::of(0.1) * t_f;
    let half = S::of(0.5);
    let profile = |t: S| -> S {
        if t < ramp {
            half * (S::one() - (S::PI() * t / ramp).cos())
        } else if t > t_f - ramp {
            half * (S::one() - (S::PI() * (t_f - t) / ramp).cos())
        } else {
            S::one()
        }
    };
    let raw: Vec<S> = (0..grid.n()).map(|k| profile(grid.midpoint(k))).collect();
    let raw_area = raw.iter().fold(S::zero(), |a, &v| a + v) * grid.dt();
    let scale = if raw_area > S::zero() { area / raw_area } else { S::zero() };
    let samples = raw.into_iter().map(|v| v * scale).collect();
    ControlField::new(*grid, *shape, samples)
}
