//! Decoupling-pulse constraints.
//!
//! A control whose rotation-angle profile θ(t) zeroes the integrals
//!
//! ```text
//! ζ₁ = ∫ sin θ,   ζ₂ = ∫ cos θ,
//! ζ₃ = ∫∫ sin[θ(t₁) − θ(t₂)]·sgn(t₁ − t₂),
//! ζ₄ = ∫ t sin θ,   ζ₅ = ∫ t cos θ
//! ```
//!
//! cancels the first- and second-order errors a drift term induces in the
//! final-time gate. The composed functional `η[C] = ζ∘θ` is what optimization
//! constrains; the closed-system problem uses the reduced vector
//! η^r = (η₁, η₂, η₃), with η₄, η₅ still computed and reported.
//!
//! All quadrature is the midpoint rule of [`crate::control`]. The double
//! integral ζ₃ and its gradient are evaluated in O(N) through the angle
//! addition identities with prefix/suffix sums; no O(N²) loops are hit
//! outside test oracles.

use crate::control::{ControlField, TimeGrid};
use crate::scalar::Real;

/// The five constraint values `η[C]`, with the reduced view (η₁, η₂, η₃).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintVector<S: Real> {
    values: [S; 5],
}

impl<S: Real> ConstraintVector<S> {
    pub fn new(values: [S; 5]) -> Self {
        Self { values }
    }

    pub fn values(&self) -> [S; 5] {
        self.values
    }

    /// The reduced vector (η₁, η₂, η₃) relevant to a pure drift term.
    pub fn reduced(&self) -> [S; 3] {
        [self.values[0], self.values[1], self.values[2]]
    }

    /// ‖η^r‖₂.
    pub fn reduced_norm(&self) -> S {
        let [a, b, c] = self.reduced();
        (a * a + b * b + c * c).sqrt()
    }

    /// ‖η‖₂ over all five components.
    pub fn full_norm(&self) -> S {
        self.values.iter().fold(S::zero(), |acc, &v| acc + v * v).sqrt()
    }
}

/// `ζ[θ]` for a rotation-angle profile sampled at the grid midpoints.
///
/// `theta` must hold exactly one value per grid cell. The diagonal of ζ₃
/// contributes nothing (sgn(0) = 0 and the integrand vanishes there).
pub fn constraint_integrals<S: Real>(theta: &[S], grid: &TimeGrid<S>) -> [S; 5] {
    assert_eq!(theta.len(), grid.n(), "theta must be sampled at the grid midpoints");
    let dt = grid.dt();
    let mut z1 = S::zero();
    let mut z2 = S::zero();
    let mut z3 = S::zero();
    let mut z4 = S::zero();
    let mut z5 = S::zero();
    let mut prefix_sin = S::zero();
    let mut prefix_cos = S::zero();
    for (k, &th) in theta.iter().enumerate() {
        let (sin_k, cos_k) = th.sin_cos();
        let t_k = grid.midpoint(k);
        z1 = z1 + sin_k;
        z2 = z2 + cos_k;
        z4 = z4 + t_k * sin_k;
        z5 = z5 + t_k * cos_k;
        // sin(θ_k − θ_b) summed over b < k via the addition identity.
        z3 = z3 + sin_k * prefix_cos - cos_k * prefix_sin;
        prefix_sin = prefix_sin + sin_k;
        prefix_cos = prefix_cos + cos_k;
    }
    let two = S::of(2.0);
    [z1 * dt, z2 * dt, two * dt * dt * z3, z4 * dt, z5 * dt]
}

/// `η[C] = ζ[θ(·; C)]`.
pub fn constraint_vector<S: Real>(c: &ControlField<S>) -> ConstraintVector<S> {
    let profile = c.rotation_profile();
    ConstraintVector::new(constraint_integrals(&profile.midpoints, c.grid()))
}

/// Convention for turning the constraint derivative profiles into gradient
/// representatives on control space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientWeighting {
    /// Multiply the functional-derivative profiles by s(t), producing the
    /// Riesz representatives under the weighted inner product. This keeps
    /// the projection algebra (Gramian, overlaps) consistent with the
    /// objective gradient and is the default.
    #[default]
    ShapeWeighted,
    /// Use the raw tail-integral profiles as fields.
    Raw,
}

/// Gradients of the five constraint values as shape-weighted Riesz
/// representatives (the default convention).
pub fn constraint_gradients<S: Real>(c: &ControlField<S>) -> [ControlField<S>; 5] {
    constraint_gradients_with(c, GradientWeighting::ShapeWeighted)
}

/// Gradients of the five constraint values under a chosen convention.
///
/// The underlying profiles are the exact adjoints of the midpoint-rule
/// constraint values — tail sums with a half-weight diagonal term,
///
/// ```text
/// dη₁/dC_j = dt²·(½ cos θ_j + Σ_{k>j} cos θ_k),
/// dη₂/dC_j = −dt²·(½ sin θ_j + Σ_{k>j} sin θ_k),   ...
/// ```
///
/// which are at the same time the midpoint-consistent quadratures of the
/// tail integrals ∫_t^{t_f} cos θ, −∫_t^{t_f} sin θ, the double-integral
/// form for η₃, ∫_t^{t_f} τ cos θ and −∫_t^{t_f} τ sin θ.
pub fn constraint_gradients_with<S: Real>(
    c: &ControlField<S>,
    weighting: GradientWeighting,
) -> [ControlField<S>; 5] {
    let profile = c.rotation_profile();
    let mut p = gradient_profiles(&profile.midpoints, c.grid());
    if weighting == GradientWeighting::ShapeWeighted {
        let s_mid = c.shape().sample_midpoints(c.grid());
        for prof in &mut p {
            for (v, &s) in prof.iter_mut().zip(&s_mid) {
                *v = *v * s;
            }
        }
    }
    p.map(|samples| {
        ControlField::new(*c.grid(), *c.shape(), samples)
            .expect("gradient profiles inherit a valid grid")
    })
}

/// Functional-derivative profiles (dη_i/dC_j)/dt at every midpoint.
fn gradient_profiles<S: Real>(theta: &[S], grid: &TimeGrid<S>) -> [Vec<S>; 5] {
    let n = theta.len();
    let dt = grid.dt();
    let half = S::of(0.5);
    let two = S::of(2.0);

    let mut sin_v = vec![S::zero(); n];
    let mut cos_v = vec![S::zero(); n];
    for (k, &th) in theta.iter().enumerate() {
        let (s, c) = th.sin_cos();
        sin_v[k] = s;
        cos_v[k] = c;
    }

    // Suffix sums over k > j and prefix sums over k < j.
    let mut suf_cos = vec![S::zero(); n];
    let mut suf_sin = vec![S::zero(); n];
    let mut suf_tcos = vec![S::zero(); n];
    let mut suf_tsin = vec![S::zero(); n];
    let mut acc_c = S::zero();
    let mut acc_s = S::zero();
    let mut acc_tc = S::zero();
    let mut acc_ts = S::zero();
    for j in (0..n).rev() {
        suf_cos[j] = acc_c;
        suf_sin[j] = acc_s;
        suf_tcos[j] = acc_tc;
        suf_tsin[j] = acc_ts;
        let t_j = grid.midpoint(j);
        acc_c = acc_c + cos_v[j];
        acc_s = acc_s + sin_v[j];
        acc_tc = acc_tc + t_j * cos_v[j];
        acc_ts = acc_ts + t_j * sin_v[j];
    }

    let mut p1 = vec![S::zero(); n];
    let mut p2 = vec![S::zero(); n];
    let mut p3 = vec![S::zero(); n];
    let mut p4 = vec![S::zero(); n];
    let mut p5 = vec![S::zero(); n];
    let mut pre_c = S::zero();
    let mut pre_s = S::zero();
    for j in 0..n {
        let t_j = grid.midpoint(j);
        p1[j] = dt * (half * cos_v[j] + suf_cos[j]);
        p2[j] = -dt * (half * sin_v[j] + suf_sin[j]);
        p4[j] = dt * (half * t_j * cos_v[j] + suf_tcos[j]);
        p5[j] = -dt * (half * t_j * sin_v[j] + suf_tsin[j]);
        // Σ_{a>j} Σ_{b<j} cos(θ_a − θ_b) plus the half-weight boundary rows.
        let cross = suf_cos[j] * pre_c + suf_sin[j] * pre_s;
        let upper = suf_cos[j] * cos_v[j] + suf_sin[j] * sin_v[j];
        let lower = cos_v[j] * pre_c + sin_v[j] * pre_s;
        p3[j] = two * dt * dt * (cross + half * (upper + lower));
        pre_c = pre_c + cos_v[j];
        pre_s = pre_s + sin_v[j];
    }
    [p1, p2, p3, p4, p5]
}
