//! Gradient-based pulse shaping for a driven two-level system whose drift
//! term is uncertain.
//!
//! The model Hamiltonian is H(t) = ε S_x + C(t) S_z (ħ = 1): a persistent
//! x-axis rotation at an imperfectly known rate ε, driven by a shaped
//! z-axis control C(t). The crate provides
//!
//! * exact SU(2) propagation of piecewise-constant controls ([`su2`]),
//! * the weighted control space, shape function, and rotation-angle
//!   bookkeeping ([`control`]),
//! * the phase-invariant gate distance, the regularized objective and its
//!   gradient ([`objective`]),
//! * decoupling-pulse constraints `η[C]` that cancel drift-induced errors to
//!   third order, with their control-space gradients ([`constraints`]),
//! * orthogonal projection onto constraint level sets ([`projection`]),
//! * steepest-descent gate optimization, decoupling-pulse synthesis, and
//!   the hybrid projected-gradient flow ([`optimizer`]),
//! * drift sweeps, robustness integrals, and ensemble state-fidelity
//!   statistics ([`analysis`]),
//! * the `t,C` CSV interchange format ([`io`]) and scaled-unit conversions
//!   ([`units`]).
//!
//! Everything is generic over the floating-point scalar through
//! [`scalar::Real`]; the `*64` aliases below fix the `f64` working
//! precision used for production runs and all stated tolerances.

pub mod analysis;
pub mod constraints;
pub mod control;
pub mod error;
pub mod io;
pub mod objective;
pub mod optimizer;
pub mod projection;
pub mod scalar;
pub mod su2;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` instantiations of the domain types.
pub type TimeGrid64 = control::TimeGrid<f64>;
pub type ShapeFunction64 = control::ShapeFunction<f64>;
pub type ControlField64 = control::ControlField<f64>;
pub type RotationProfile64 = control::RotationProfile<f64>;
pub type Unitary64 = su2::Unitary2<f64>;
pub type HamiltonianParams64 = su2::HamiltonianParams<f64>;
pub type GateTarget64 = objective::GateTarget<f64>;
pub type ObjectiveConfig64 = objective::ObjectiveConfig<f64>;
pub type ConstraintVector64 = constraints::ConstraintVector<f64>;
pub type Gramian64 = projection::Gramian<f64>;
pub type OptimizerConfig64 = optimizer::OptimizerConfig<f64>;
pub type OptResult64 = optimizer::OptResult<f64>;
pub type SweepResult64 = analysis::SweepResult<f64>;
pub type EnsembleStats64 = analysis::EnsembleStats<f64>;
pub type StateVector64 = analysis::StateVector<f64>;
