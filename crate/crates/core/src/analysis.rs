//! Robustness characterization of control fields.
//!
//! A finished control is judged by how its gate distance responds when the
//! drift rate ε moves away from the value it was optimized for: dense
//! Δ(ε) sweeps, the integrated robustness ℛ = ∫ Δ dε over an interval
//! around the nominal drift, and state-level statistics (Uhlmann fidelity,
//! Bloch vectors) over an ensemble of drift rates.
//!
//! Sweep and ensemble points are independent and evaluated in parallel;
//! results are collected by index, so outputs are bit-deterministic
//! regardless of thread count.

use num_complex::Complex;
use rayon::prelude::*;

use crate::control::ControlField;
use crate::error::{Error, Result};
use crate::objective::{gate_distance, GateTarget};
use crate::scalar::Real;
use crate::su2::{propagate, HamiltonianParams};

/// Gate distance tabulated over a uniform drift grid.
#[derive(Debug, Clone)]
pub struct SweepResult<S: Real> {
    /// Strictly increasing drift values.
    pub epsilon: Vec<S>,
    /// Δ at each drift value; in [0, 1].
    pub delta: Vec<S>,
    /// Label of the target gate.
    pub target_label: String,
    /// Identifier of the swept control (file name or workflow), if any.
    pub source: Option<String>,
    /// ∫ Δ dε over the swept interval, midpoint rule at the sweep
    /// resolution.
    pub robustness: S,
}

/// Δ(ε) for a fixed control over [eps_min, eps_max] at the given
/// resolution (both endpoints included).
pub fn epsilon_sweep<S: Real>(
    c: &ControlField<S>,
    target: &GateTarget<S>,
    eps_min: S,
    eps_max: S,
    resolution: S,
) -> Result<SweepResult<S>> {
    if !(eps_min.is_finite() && eps_max.is_finite() && eps_min < eps_max) {
        return Err(Error::invalid("sweep interval must satisfy eps_min < eps_max"));
    }
    if !(resolution.is_finite() && resolution > S::zero()) {
        return Err(Error::invalid("sweep resolution must be positive"));
    }
    let steps = ((eps_max - eps_min) / resolution).round().as_f64() as usize;
    let steps = steps.max(1);
    let epsilon: Vec<S> = (0..=steps).map(|i| eps_min + S::of_usize(i) * resolution).collect();
    let delta: Vec<S> = epsilon
        .par_iter()
        .map(|&eps| {
            let params = HamiltonianParams::new(eps).expect("finite sweep point");
            gate_distance(target.unitary(), &propagate(c, &params))
        })
        .collect();
    let center = S::of(0.5) * (eps_min + eps_max);
    let half_width = S::of(0.5) * (eps_max - eps_min);
    let robustness = robustness_integral(c, target, center, half_width, resolution)?;
    Ok(SweepResult {
        epsilon,
        delta,
        target_label: target.label(),
        source: None,
        robustness,
    })
}

/// ℛ[C, ε₀, δε] = ∫ Δ dε over [ε₀ − δε, ε₀ + δε], midpoint quadrature at
/// the given resolution.
pub fn robustness_integral<S: Real>(
    c: &ControlField<S>,
    target: &GateTarget<S>,
    eps0: S,
    delta_eps: S,
    resolution: S,
) -> Result<S> {
    if !(delta_eps.is_finite() && delta_eps > S::zero()) {
        return Err(Error::invalid("robustness half-width must be positive"));
    }
    if !(resolution.is_finite() && resolution > S::zero()) {
        return Err(Error::invalid("robustness resolution must be positive"));
    }
    if !eps0.is_finite() {
        return Err(Error::invalid("robustness center must be finite"));
    }
    let width = S::of(2.0) * delta_eps;
    let cells = (width / resolution).round().as_f64() as usize;
    let cells = cells.max(1);
    let h = width / S::of_usize(cells);
    let lo = eps0 - delta_eps;
    let sum: S = (0..cells)
        .into_par_iter()
        .map(|i| {
            let eps = lo + (S::of_usize(i) + S::of(0.5)) * h;
            let params = HamiltonianParams::new(eps).expect("finite quadrature node");
            gate_distance(target.unitary(), &propagate(c, &params))
        })
        .reduce(S::zero, |a, b| a + b);
    Ok(sum * h)
}

/// A normalized pure state of the two-level system, stored in the S_z
/// eigenbasis (|0⟩ = spin up).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector<S: Real> {
    amps: [Complex<S>; 2],
}

impl<S: Real> StateVector<S> {
    /// Validates normalization.
    pub fn new(amps: [Complex<S>; 2]) -> Result<Self> {
        let norm = (amps[0].norm_sqr() + amps[1].norm_sqr()).sqrt();
        if (norm - S::one()).abs() > S::validation_tol() {
            return Err(Error::invalid(format!("state vector has norm {norm}, expected 1")));
        }
        Ok(Self { amps })
    }

    /// +1 eigenstate of σ_z.
    pub fn sigma_z_plus() -> Self {
        Self { amps: [Complex::new(S::one(), S::zero()), Complex::new(S::zero(), S::zero())] }
    }

    /// −1 eigenstate of σ_z.
    pub fn sigma_z_minus() -> Self {
        Self { amps: [Complex::new(S::zero(), S::zero()), Complex::new(S::one(), S::zero())] }
    }

    /// ±1 eigenstates of σ_x: (|0⟩ ± |1⟩)/√2.
    pub fn sigma_x(sign: bool) -> Self {
        let r = S::of(0.5).sqrt();
        let s = if sign { r } else { -r };
        Self { amps: [Complex::new(r, S::zero()), Complex::new(s, S::zero())] }
    }

    pub fn sigma_x_plus() -> Self {
        Self::sigma_x(true)
    }

    pub fn sigma_x_minus() -> Self {
        Self::sigma_x(false)
    }

    /// ±1 eigenstates of σ_y: (|0⟩ ± i|1⟩)/√2.
    pub fn sigma_y(sign: bool) -> Self {
        let r = S::of(0.5).sqrt();
        let s = if sign { r } else { -r };
        Self { amps: [Complex::new(r, S::zero()), Complex::new(S::zero(), s)] }
    }

    pub fn amplitudes(&self) -> [Complex<S>; 2] {
        self.amps
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex<S> {
        self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]
    }

    pub(crate) fn from_amplitudes_unchecked(amps: [Complex<S>; 2]) -> Self {
        Self { amps }
    }
}

/// Uhlmann fidelity for pure states, |⟨ψ₁|ψ₂⟩| ∈ [0, 1].
pub fn state_fidelity<S: Real>(a: &StateVector<S>, b: &StateVector<S>) -> S {
    a.inner(b).norm().min(S::one())
}

/// Bloch vector (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩); unit norm for pure states.
pub fn bloch_vector<S: Real>(state: &StateVector<S>) -> [S; 3] {
    let [a, b] = state.amplitudes();
    let cross = a.conj() * b;
    let two = S::of(2.0);
    [two * cross.re, two * cross.im, a.norm_sqr() - b.norm_sqr()]
}

/// One ensemble member: drift value, achieved fidelity, final Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleMember<S: Real> {
    pub epsilon: S,
    pub fidelity: S,
    pub bloch: [S; 3],
}

/// Fidelity statistics over a drift ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleStats<S: Real> {
    pub min: S,
    pub max: S,
    pub mean: S,
    /// Population standard deviation of the member fidelities.
    pub std: S,
    pub members: Vec<EnsembleMember<S>>,
}

/// Propagate `initial` under the control for every drift value, comparing
/// against `target_state`.
pub fn ensemble_state_fidelity<S: Real>(
    c: &ControlField<S>,
    initial: &StateVector<S>,
    target_state: &StateVector<S>,
    eps_list: &[S],
) -> Result<EnsembleStats<S>> {
    if eps_list.is_empty() {
        return Err(Error::invalid("ensemble needs at least one drift value"));
    }
    if eps_list.iter().any(|e| !e.is_finite()) {
        return Err(Error::invalid("ensemble drift values must be finite"));
    }
    let members: Vec<EnsembleMember<S>> = eps_list
        .par_iter()
        .map(|&eps| {
            let params = HamiltonianParams::new(eps).expect("finite drift");
            let u = propagate(c, &params);
            let final_state = StateVector::from_amplitudes_unchecked(u.apply(initial.amplitudes()));
            EnsembleMember {
                epsilon: eps,
                fidelity: state_fidelity(target_state, &final_state),
                bloch: bloch_vector(&final_state),
            }
        })
        .collect();
    let n = S::of_usize(members.len());
    let mut min = S::infinity();
    let mut max = S::neg_infinity();
    let mut sum = S::zero();
    for m in &members {
        min = min.min(m.fidelity);
        max = max.max(m.fidelity);
        sum = sum + m.fidelity;
    }
    let mean = sum / n;
    let var = members
        .iter()
        .fold(S::zero(), |acc, m| acc + (m.fidelity - mean) * (m.fidelity - mean))
        / n;
    Ok(EnsembleStats { min, max, mean, std: var.sqrt(), members })
}

/// Inclusive uniform grid of `count` drift values over [min, max].
pub fn linspace<S: Real>(min: S, max: S, count: usize) -> Result<Vec<S>> {
    if count < 2 {
        return Err(Error::invalid("linspace needs at least two points"));
    }
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(Error::invalid("linspace interval must satisfy min < max"));
    }
    let step = (max - min) / S::of_usize(count - 1);
    Ok((0..count).map(|i| min + S::of_usize(i) * step).collect())
}
