//! Simulation and verification toolkit for relativistic ideal-clock rotators.
//!
//! A rotator is described by a position `x`, momentum `p`, a null "pointer"
//! vector `k` and its conjugate momentum `pi`, bound by four first-class
//! constraints that fix the two Poincaré Casimirs (mass and spin) and make
//! `k` a projectively defined null direction. Two singular branches of the
//! inverse Legendre map give the ideal clocks: worldlines that wind around
//! a fixed cylinder at the speed of light with frequency `2/ell`.
//!
//! Module map:
//!
//! * [`minkowski`] four-vectors, Lorentz transforms, the Mathisson
//!   pseudovector and the stereographic map of null directions.
//! * [`state`] phase-space points, constraint residuals and CM-gauge seeding.
//! * [`dynamics`] Dirac Hamiltonian, Poisson brackets, equations of motion,
//!   exact free-clock propagator and a projected RK4 integrator.
//! * [`chronometry`] the Lorentz-invariant clocking phase, frequency and
//!   curvature diagnostics.
//! * [`legendre`] scalar velocity map, Jacobian rank regimes and the
//!   Lagrangian evaluators.
//! * [`export`] CSV/JSON writers for trajectories, phase series and rank maps.

pub mod chronometry;
pub mod dynamics;
mod error;
pub mod export;
pub mod legendre;
pub mod minkowski;
pub mod state;

pub use chronometry::{FrenetReport, LambdaAngle, PhaseSample};
pub use dynamics::{FieldTensor, MultiplierPolicy, Multipliers, Projection, Tangent, Trajectory, TrajectorySample};
pub use error::{Error, Result};
pub use legendre::{MomentumScalars, Regime, RegimeClass, ScalarVelocities, ShapeFunction};
pub use minkowski::{FourVector, LorentzTransform, ProjectivePoint};
pub use state::{ClockParams, ConstraintReport, PhaseSpacePoint, Sigma};
