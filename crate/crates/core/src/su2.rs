//! Exact SU(2) linear algebra and piecewise-constant time propagation.
//!
//! The system Hamiltonian is H(t) = ε S_x + C(t) S_z with S_λ = σ_λ/2, so a
//! single grid cell evolves under the closed-form exponential of −i(a·S)
//! with a = dt·(ε, 0, C_k):
//!
//! ```text
//! exp(−i a·S) = cos(|a|/2)·I − i sin(|a|/2)·(â·σ)
//! ```
//!
//! Exponentials are never series-expanded or diagonalized; the closed form
//! keeps every step exactly unitary up to rounding.

use num_complex::Complex;

use crate::control::ControlField;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A 2×2 complex unitary, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2<S: Real> {
    m: [Complex<S>; 4],
}

impl<S: Real> Unitary2<S> {
    /// Build from row-major entries, validating unitarity.
    pub fn new(entries: [Complex<S>; 4]) -> Result<Self> {
        let u = Self { m: entries };
        let tol = S::validation_tol();
        if u.unitarity_defect() > tol {
            return Err(Error::invalid("matrix is not unitary"));
        }
        if (u.det().norm() - S::one()).abs() > tol {
            return Err(Error::invalid("matrix determinant does not have unit modulus"));
        }
        Ok(u)
    }

    pub(crate) fn from_entries_unchecked(entries: [Complex<S>; 4]) -> Self {
        Self { m: entries }
    }

    pub fn identity() -> Self {
        let one = Complex::new(S::one(), S::zero());
        let zero = Complex::new(S::zero(), S::zero());
        Self { m: [one, zero, zero, one] }
    }

    /// Z_φ = diag(e^{−iφ/2}, e^{iφ/2}), the rotation by φ about the z-axis.
    pub fn z_rotation(phi: S) -> Self {
        rotation_unchecked(S::zero(), S::zero(), phi)
    }

    /// Row-major entries [u00, u01, u10, u11].
    pub fn entries(&self) -> [Complex<S>; 4] {
        self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex<S> {
        self.m[2 * row + col]
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        Self {
            m: [
                a[0] * b[0] + a[1] * b[2],
                a[0] * b[1] + a[1] * b[3],
                a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3],
            ],
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            m: [self.m[0].conj(), self.m[2].conj(), self.m[1].conj(), self.m[3].conj()],
        }
    }

    pub fn trace(&self) -> Complex<S> {
        self.m[0] + self.m[3]
    }

    pub fn det(&self) -> Complex<S> {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    /// Multiply every entry by the unit phase e^{iφ}.
    pub fn mul_phase(&self, phi: S) -> Self {
        let (s, c) = phi.sin_cos();
        let ph = Complex::new(c, s);
        Self { m: [self.m[0] * ph, self.m[1] * ph, self.m[2] * ph, self.m[3] * ph] }
    }

    /// Max-entry deviation of U†U from the identity.
    pub fn unitarity_defect(&self) -> S {
        let g = self.dagger().mul(self);
        let one = Complex::new(S::one(), S::zero());
        let d0 = (g.m[0] - one).norm();
        let d1 = g.m[1].norm();
        let d2 = g.m[2].norm();
        let d3 = (g.m[3] - one).norm();
        d0.max(d1).max(d2).max(d3)
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> S {
        (0..4).fold(S::zero(), |m, i| m.max((self.m[i] - other.m[i]).norm()))
    }

    /// Apply to a state vector.
    pub fn apply(&self, psi: [Complex<S>; 2]) -> [Complex<S>; 2] {
        [
            self.m[0] * psi[0] + self.m[1] * psi[1],
            self.m[2] * psi[0] + self.m[3] * psi[1],
        ]
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj_entries(&self) -> Self {
        Self { m: [self.m[0].conj(), self.m[1].conj(), self.m[2].conj(), self.m[3].conj()] }
    }
}

/// Drift parameters: the uncontrolled term ε S_x. The control couples
/// through S_z; both axes are fixed by the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams<S: Real> {
    epsilon: S,
}

impl<S: Real> HamiltonianParams<S> {
    /// Any finite drift rate is accepted, including ε < 0.
    pub fn new(epsilon: S) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::invalid("drift rate must be finite"));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> S {
        self.epsilon
    }
}

/// exp(−i a·S) for a = (a_x, a_y, a_z): rotation by |a| about â.
///
/// Returns the identity at a = 0 (the well-defined limit).
pub fn rotation<S: Real>(a_x: S, a_y: S, a_z: S) -> Result<Unitary2<S>> {
    if !(a_x.is_finite() && a_y.is_finite() && a_z.is_finite()) {
        return Err(Error::invalid("rotation vector components must be finite"));
    }
    Ok(rotation_unchecked(a_x, a_y, a_z))
}

fn rotation_unchecked<S: Real>(a_x: S, a_y: S, a_z: S) -> Unitary2<S> {
    let r = (a_x * a_x + a_y * a_y + a_z * a_z).sqrt();
    if r == S::zero() {
        return Unitary2::identity();
    }
    let (sin_half, cos_half) = (S::of(0.5) * r).sin_cos();
    let f = sin_half / r; // sin(|a|/2)/|a|
    // cos(|a|/2)·I − i sin(|a|/2)·(â·σ)
    Unitary2::from_entries_unchecked([
        Complex::new(cos_half, -f * a_z),
        Complex::new(-f * a_y, -f * a_x),
        Complex::new(f * a_y, -f * a_x),
        Complex::new(cos_half, f * a_z),
    ])
}

/// In-plane step exponential exp(−i dt (ε S_x + c S_z)), used per grid cell.
#[inline]
fn step<S: Real>(dt: S, epsilon: S, c: S) -> Unitary2<S> {
    rotation_unchecked(dt * epsilon, S::zero(), dt * c)
}

/// Final-time propagator: the ordered product of per-cell exponentials,
/// later steps multiplying on the left.
pub fn propagate<S: Real>(c: &ControlField<S>, params: &HamiltonianParams<S>) -> Unitary2<S> {
    let dt = c.grid().dt();
    let eps = params.epsilon();
    let mut u = Unitary2::identity();
    for &ck in c.samples() {
        u = step(dt, eps, ck).mul(&u);
    }
    u
}

/// Propagator evaluated at every grid midpoint: the product of completed
/// steps times a half-step of the current cell. The full propagator equals
/// one further half-step applied to the last element.
pub fn trajectory<S: Real>(c: &ControlField<S>, params: &HamiltonianParams<S>) -> Vec<Unitary2<S>> {
    let dt_half = S::of(0.5) * c.grid().dt();
    let eps = params.epsilon();
    let mut acc = Unitary2::identity();
    let mut out = Vec::with_capacity(c.n());
    for &ck in c.samples() {
        let half = step(dt_half, eps, ck);
        let mid = half.mul(&acc);
        acc = half.mul(&mid);
        out.push(mid);
    }
    out
}
