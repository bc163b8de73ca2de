//! Orthogonal projection onto the tangent space of a constraint level set.
//!
//! Given the constraint gradients {g_i} and an objective gradient gJ, the
//! projected gradient is
//!
//! ```text
//! gK = gJ − Σ_i g_i · [G⁻¹ q]_i,    G_ij = ⟨g_i, g_j⟩,  q_i = ⟨gJ, g_i⟩,
//! ```
//!
//! all inner products taken in the weighted control-space metric. The
//! Gramian G is symmetric positive semidefinite and singular exactly at
//! critical points of the constraint map, where the gradients become
//! linearly dependent; such points are reported as errors rather than
//! regularized away.
//!
//! The m ≤ 5 systems are solved through a cyclic Jacobi eigendecomposition,
//! which directly exposes the eigenvalue ratio used for the critical-point
//! test.

use crate::control::ControlField;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative eigenvalue threshold below which the Gramian counts as singular.
const CRITICAL_RATIO: f64 = 1e-12;

/// Gramian of a set of gradient fields under the weighted inner product.
#[derive(Debug, Clone)]
pub struct Gramian<S: Real> {
    dim: usize,
    entries: Vec<S>, // row-major, symmetric
}

/// Assemble the Gramian G_ij = ⟨g_i, g_j⟩. The upper triangle is computed
/// and mirrored, so symmetry is exact.
pub fn gramian<S: Real>(grads: &[ControlField<S>]) -> Result<Gramian<S>> {
    let m = grads.len();
    if m == 0 {
        return Err(Error::invalid("Gramian of an empty gradient set"));
    }
    for g in &grads[1..] {
        grads[0].check_compatible(g)?;
    }
    let mut entries = vec![S::zero(); m * m];
    for i in 0..m {
        for j in i..m {
            let v = grads[i].inner_product(&grads[j])?;
            entries[i * m + j] = v;
            entries[j * m + i] = v;
        }
    }
    Ok(Gramian { dim: m, entries })
}

impl<S: Real> Gramian<S> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> S {
        self.entries[i * self.dim + j]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<S> {
        let (mut vals, _) = jacobi_eigen(&self.entries, self.dim);
        vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        vals
    }

    /// Solve G x = rhs through the eigendecomposition, failing with a
    /// critical-point error when the eigenvalue ratio collapses.
    pub fn solve(&self, rhs: &[S]) -> Result<Vec<S>> {
        assert_eq!(rhs.len(), self.dim);
        let m = self.dim;
        let (vals, vecs) = jacobi_eigen(&self.entries, m);
        let lam_max = vals.iter().fold(S::zero(), |a, &v| a.max(v));
        let lam_min = vals.iter().fold(S::infinity(), |a, &v| a.min(v));
        let ratio = if lam_max > S::zero() { lam_min / lam_max } else { S::zero() };
        // NaN ratios count as singular too.
        let well_conditioned = ratio > S::of(CRITICAL_RATIO);
        if !well_conditioned {
            return Err(Error::CriticalPoint { eigenvalue_ratio: ratio.as_f64() });
        }
        // x = V Λ⁻¹ Vᵀ rhs (columns of `vecs` are eigenvectors).
        let mut y = vec![S::zero(); m];
        for k in 0..m {
            let mut acc = S::zero();
            for i in 0..m {
                acc = acc + vecs[i * m + k] * rhs[i];
            }
            y[k] = acc / vals[k];
        }
        let mut x = vec![S::zero(); m];
        for i in 0..m {
            let mut acc = S::zero();
            for k in 0..m {
                acc = acc + vecs[i * m + k] * y[k];
            }
            x[i] = acc;
        }
        Ok(x)
    }
}

/// Remove from `gj` its components along the span of `grads`.
///
/// The result is orthogonal (in the weighted metric) to every member of
/// `grads`; applied to something already in their span it returns zero, and
/// applied to something already orthogonal it acts as the identity.
pub fn project_gradient<S: Real>(
    gj: &ControlField<S>,
    grads: &[ControlField<S>],
) -> Result<ControlField<S>> {
    let g = gramian(grads)?;
    gj.check_compatible(&grads[0])?;
    let mut q = vec![S::zero(); grads.len()];
    for (i, gi) in grads.iter().enumerate() {
        q[i] = gj.inner_product(gi)?;
    }
    let x = g.solve(&q)?;
    let mut out = gj.clone();
    for (xi, gi) in x.iter().zip(grads) {
        out = out.add_scaled(-*xi, gi);
    }
    Ok(out)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major).
/// Returns (eigenvalues, eigenvector matrix V with eigenvectors as columns),
/// A = V diag(λ) Vᵀ. Sizes here are ≤ 5, so a handful of sweeps suffices.
fn jacobi_eigen<S: Real>(a_in: &[S], n: usize) -> (Vec<S>, Vec<S>) {
    let mut a = a_in.to_vec();
    let mut v = vec![S::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = S::one();
    }
    if n == 1 {
        return (vec![a[0]], v);
    }
    let eps = S::epsilon();
    for _sweep in 0..64 {
        let mut off = S::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p * n + q] * a[p * n + q];
            }
        }
        let scale = (0..n).fold(S::zero(), |m, i| m.max(a[i * n + i].abs()));
        if off.sqrt() <= eps * scale.max(S::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == S::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (S::of(2.0) * apq);
                // Smaller-angle root for stability.
                let t = {
                    let denom = theta.abs() + (theta * theta + S::one()).sqrt();
                    if theta >= S::zero() { S::one() / denom } else { -S::one() / denom }
                };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                // Rotate rows/columns p and q of A.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                // Accumulate the rotation into V.
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i * n + i]).collect();
    (vals, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{ShapeFunction, TimeGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(n: usize) -> TimeGrid<f64> {
        TimeGrid::new(n, 1.0).unwrap()
    }

    fn shape() -> ShapeFunction<f64> {
        ShapeFunction::new(1.0).unwrap()
    }

    fn smooth(n: usize, coeffs: &[f64]) -> ControlField<f64> {
        ControlField::from_fn(grid(n), shape(), |t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(m, a)| a * ((m + 1) as f64 * PI * t).sin())
                .sum()
        })
        .unwrap()
    }

    fn random_smooth(n: usize, rng: &mut ChaCha8Rng) -> ControlField<f64> {
        let coeffs: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        smooth(n, &coeffs)
    }

    /// Orthonormal (under the weighted metric) fields with disjoint support.
    fn disjoint_orthonormal(n: usize, count: usize) -> Vec<ControlField<f64>> {
        let g = grid(n);
        let sh = shape();
        let s_mid = sh.sample_midpoints(&g);
        let dt = g.dt();
        (0..count)
            .map(|i| {
                let mut samples = vec![0.0; n];
                let idx = (i + 1) * n / (count + 1);
                // ⟨e, e⟩ = dt·v²/s = 1  ⇒  v = √(s/dt).
                samples[idx] = (s_mid[idx] / dt).sqrt();
                ControlField::new(g, sh, samples).unwrap()
            })
            .collect()
    }

    #[test]
    fn gramian_of_orthonormal_inputs_is_identity() {
        let grads = disjoint_orthonormal(64, 3);
        let g = gramian(&grads).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g.entry(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gramian_of_dependent_inputs_is_singular() {
        let g1 = smooth(128, &[1.0, 0.4]);
        let g2 = g1.add_scaled(1.0, &g1); // 2·g1
        let g = gramian(&[g1, g2]).unwrap();
        let det = g.entry(0, 0) * g.entry(1, 1) - g.entry(0, 1) * g.entry(1, 0);
        let scale = g.entry(0, 0).abs().max(g.entry(1, 1).abs());
        assert!(det.abs() <= 1e-12 * scale * scale);
        let eigs = g.eigenvalues();
        assert!(eigs[0].abs() <= 1e-12 * eigs[1]);
    }

    #[test]
    fn gramian_is_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let grads: Vec<_> = (0..4).map(|_| random_smooth(128, &mut rng)).collect();
            let g = gramian(&grads).unwrap();
            let eigs = g.eigenvalues();
            let trace: f64 = (0..4).map(|i| g.entry(i, i)).sum();
            assert!(eigs[0] >= -1e-12 * trace, "eigs {eigs:?}");
        }
    }

    #[test]
    fn projection_leaves_orthogonal_input_unchanged() {
        let grads = disjoint_orthonormal(64, 3);
        // A field supported away from all three spikes is orthogonal to them.
        let g = grid(64);
        let mut samples = vec![0.0; 64];
        samples[1] = 2.0;
        samples[2] = -1.0;
        let xi = ControlField::new(g, shape(), samples).unwrap();
        let out = project_gradient(&xi, &grads).unwrap();
        let norm = xi.weighted_norm();
        let mut max_rel = 0.0f64;
        for (a, b) in out.samples().iter().zip(xi.samples()) {
            max_rel = max_rel.max((a - b).abs() / norm);
        }
        assert!(max_rel <= 1e-12);
    }

    #[test]
    fn projection_annihilates_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grads: Vec<_> = (0..3).map(|_| random_smooth(256, &mut rng)).collect();
        let xi = grads[0]
            .add_scaled(-2.5, &grads[1])
            .add_scaled(0.75, &grads[2]);
        let out = project_gradient(&xi, &grads).unwrap();
        assert!(out.weighted_norm() <= 1e-10 * xi.weighted_norm());
    }

    #[test]
    fn projection_properties_on_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..25 {
            let grads: Vec<_> = (0..3).map(|_| random_smooth(128, &mut rng)).collect();
            let gj = random_smooth(128, &mut rng);
            let out = project_gradient(&gj, &grads).unwrap();
            let out_norm = out.weighted_norm();
            for gi in &grads {
                let overlap = out.inner_product(gi).unwrap().abs();
                assert!(overlap <= 1e-10 * out_norm * gi.weighted_norm());
            }
            // Idempotence.
            let twice = project_gradient(&out, &grads).unwrap();
            let diff = twice.add_scaled(-1.0, &out).weighted_norm();
            assert!(diff <= 1e-12 * out_norm.max(1e-300));
            // Projection never increases the norm.
            assert!(out_norm <= gj.weighted_norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn dependent_gradients_raise_critical_point() {
        let g1 = smooth(128, &[1.0, -0.3]);
        let g2 = g1.add_scaled(0.0, &g1); // identical
        let gj = smooth(128, &[0.2, 0.9]);
        let err = project_gradient(&gj, &[g1, g2]).unwrap_err();
        assert!(matches!(err, Error::CriticalPoint { .. }));
    }

    #[test]
    fn solve_residual_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let grads: Vec<_> = (0..5).map(|_| random_smooth(128, &mut rng)).collect();
            let g = gramian(&grads).unwrap();
            let rhs: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = g.solve(&rhs).unwrap();
            let mut res = 0.0f64;
            let mut rhs_norm = 0.0f64;
            for (i, &r) in rhs.iter().enumerate() {
                let gx: f64 = x.iter().enumerate().map(|(j, xj)| g.entry(i, j) * xj).sum();
                res += (gx - r).powi(2);
                rhs_norm += r.powi(2);
            }
            assert!(res.sqrt() <= 1e-10 * rhs_norm.sqrt());
        }
    }
}
