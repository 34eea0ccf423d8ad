//! Dirac Hamiltonian dynamics of the rotator.
//!
//! The Hamiltonian is a combination of the four first-class constraints
//! with arbitrary multipliers:
//!
//! ```text
//! H = u1/(2m) (<p,p> - m^2)
//!   + u2/(2m) (<p,p> + 4/(ell^2 m^2) <k,p>^2 <pi,pi>)
//!   + u3 <k,pi> + u4 <k,k>
//! ```

mod bracket;
mod exact;
mod integrator;

pub use bracket::{
    numeric_gradient, poisson, poisson_numeric, Constraint, Coordinate, FnObservable, HamiltonianObservable,
    Observable, PhaseGradient, Slot,
};
pub use exact::{exact_trajectory, propagate_exact, FreeClock};
pub use integrator::{integrate, project_onto_shell, Projection, Trajectory, TrajectorySample, PROJECTION_TOLERANCE};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::minkowski::{dot, FourVector};
use crate::state::{ClockParams, PhaseSpacePoint};
use crate::{Error, Result};

/// Values of the four arbitrary multipliers at an instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
}

impl Multipliers {
    pub const fn new(u1: f64, u2: f64, u3: f64, u4: f64) -> Self {
        Multipliers { u1, u2, u3, u4 }
    }
}

/// How multipliers are chosen along a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MultiplierPolicy {
    Constant(Multipliers),
    /// The CM-gauge values of the clock selected by `ClockParams::sigma`.
    CmGauge,
}

impl MultiplierPolicy {
    pub fn multipliers(&self, params: &ClockParams) -> Multipliers {
        match self {
            MultiplierPolicy::Constant(u) => *u,
            MultiplierPolicy::CmGauge => cm_gauge_multipliers(params),
        }
    }

    pub fn name(&self) -> String {
        match self {
            MultiplierPolicy::Constant(u) => {
                format!("constant({}, {}, {}, {})", u.u1, u.u2, u.u3, u.u4)
            }
            MultiplierPolicy::CmGauge => "cm-gauge".to_string(),
        }
    }
}

/// Multipliers that keep the clock in the CM gauge
/// (`<p,pi> = 0`, `<k,p> = m`, `<p,xdot> = m`): `(1, sigma, 0, sigma m / 2)`.
pub fn cm_gauge_multipliers(params: &ClockParams) -> Multipliers {
    let s = params.sigma.value();
    Multipliers::new(1.0, s, 0.0, s * params.mass / 2.0)
}

/// Phase-space velocity `(xdot, pdot, kdot, pidot)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tangent {
    pub xdot: FourVector,
    pub pdot: FourVector,
    pub kdot: FourVector,
    pub pidot: FourVector,
}

impl Tangent {
    pub fn scaled(&self, s: f64) -> Tangent {
        Tangent { xdot: self.xdot * s, pdot: self.pdot * s, kdot: self.kdot * s, pidot: self.pidot * s }
    }

    pub fn max_abs_diff(&self, other: &Tangent) -> f64 {
        [self.xdot - other.xdot, self.pdot - other.pdot, self.kdot - other.kdot, self.pidot - other.pidot]
            .iter()
            .map(|v| v.max_abs())
            .fold(0.0, f64::max)
    }
}

impl PhaseSpacePoint {
    /// `self + h * t`.
    pub fn advanced(&self, t: &Tangent, h: f64) -> PhaseSpacePoint {
        PhaseSpacePoint {
            x: self.x + t.xdot * h,
            p: self.p + t.pdot * h,
            k: self.k + t.kdot * h,
            pi: self.pi + t.pidot * h,
        }
    }
}

pub fn hamiltonian(pt: &PhaseSpacePoint, u: &Multipliers, params: &ClockParams) -> f64 {
    let m = params.mass;
    let l = params.length;
    let pp = dot(pt.p, pt.p);
    let kp = pt.kp();
    u.u1 / (2.0 * m) * (pp - m * m)
        + u.u2 / (2.0 * m) * (pp + 4.0 / (l * l * m * m) * kp * kp * dot(pt.pi, pt.pi))
        + u.u3 * dot(pt.k, pt.pi)
        + u.u4 * dot(pt.k, pt.k)
}

/// Closed-form Hamiltonian vector field.
///
/// ```text
/// xdot  = (u1+u2) p/m + u2 4<k,p><pi,pi>/(ell^2 m^3) k
/// pdot  = 0
/// kdot  = u2 4<k,p>^2/(ell^2 m^3) pi + u3 k
/// pidot = -u2 4<k,p><pi,pi>/(ell^2 m^3) p - u3 pi - 2 u4 k
/// ```
pub fn eom(pt: &PhaseSpacePoint, u: &Multipliers, params: &ClockParams) -> Tangent {
    let m = params.mass;
    let l = params.length;
    let kp = pt.kp();
    let pipi = dot(pt.pi, pt.pi);
    let c = 4.0 / (l * l * m * m * m);
    Tangent {
        xdot: pt.p * ((u.u1 + u.u2) / m) + pt.k * (u.u2 * c * kp * pipi),
        pdot: FourVector::ZERO,
        kdot: pt.pi * (u.u2 * c * kp * kp) + pt.k * u.u3,
        pidot: -(pt.p * (u.u2 * c * kp * pipi)) - pt.pi * u.u3 - pt.k * (2.0 * u.u4),
    }
}

/// Covariant electromagnetic field tensor `F_{mu nu}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldTensor(Matrix4<f64>);

impl FieldTensor {
    /// Validates exact antisymmetry.
    pub fn new(f: Matrix4<f64>) -> Result<Self> {
        if f != -f.transpose() {
            return Err(Error::InvalidArgument("field tensor must be antisymmetric".into()));
        }
        Ok(FieldTensor(f))
    }

    /// Builds `F` from the six independent entries above the diagonal,
    /// ordered `F01, F02, F03, F12, F13, F23`.
    pub fn from_upper(entries: [f64; 6]) -> Self {
        let mut f = Matrix4::zeros();
        let idx = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        for ((i, j), v) in idx.into_iter().zip(entries) {
            f[(i, j)] = v;
            f[(j, i)] = -v;
        }
        FieldTensor(f)
    }

    pub fn zero() -> Self {
        FieldTensor(Matrix4::zeros())
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.0[(mu, nu)]
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

/// `F_{mu nu} p^mu k^nu`, the secondary constraint that minimal coupling
/// would add.
pub fn em_secondary_constraint(pt: &PhaseSpacePoint, f: &FieldTensor) -> f64 {
    (pt.p.to_nalgebra().transpose() * f.0 * pt.k.to_nalgebra())[(0, 0)]
}
