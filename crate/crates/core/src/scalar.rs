//! Scalar abstraction for the numeric kernel.
//!
//! All core math is generic over a floating-point scalar so the same code
//! instantiates at `f64` (the working precision; every stated tolerance in
//! this crate assumes it) and `f32` (useful only for quick, low-accuracy
//! experiments). Concrete `f64` aliases live at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
///
/// Automatically implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lift an `f64` constant into this scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    /// Lift a count or index into this scalar type.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }

    /// Lower to `f64` (exact for `f32` and `f64`).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }

    /// Validation tolerance for "exact to 1e-12" invariants, widened so the
    /// generic API remains usable at reduced precision.
    #[inline]
    fn validation_tol() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(16.0))
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}
