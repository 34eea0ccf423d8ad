//! Inverse Legendre analysis of the rotator Hamiltonian.
//!
//! The velocity map restricted to Lorentz scalars sends
//! `(u1, u2, u3, <k,p>, <p,pi>)` to `(<xdot,xdot>, <k,xdot>, <kdot,xdot>,
//! <kdot,kdot>, <k,kdot>)`. Its rank separates a generic regime from the two
//! clocks, and each branch has its own Lagrangian.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Multipliers, Tangent};
use crate::minkowski::{dot, FourVector};
use crate::state::{ClockParams, PhaseSpacePoint};
use crate::{Error, Result};

/// The five velocity scalars.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarVelocities {
    pub xx: f64,
    pub kx: f64,
    pub kdx: f64,
    pub kdkd: f64,
    pub kkd: f64,
}

impl ScalarVelocities {
    pub fn as_array(&self) -> [f64; 5] {
        [self.xx, self.kx, self.kdx, self.kdkd, self.kkd]
    }
}

/// Scalar products of `xdot`, `k` and `kdot`.
pub fn scalar_velocities_of(xdot: FourVector, k: FourVector, kdot: FourVector) -> ScalarVelocities {
    ScalarVelocities {
        xx: dot(xdot, xdot),
        kx: dot(k, xdot),
        kdx: dot(kdot, xdot),
        kdkd: dot(kdot, kdot),
        kkd: dot(k, kdot),
    }
}

/// Momentum-side scalars of the map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumScalars {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub kp: f64,
    pub p_pi: f64,
}

impl MomentumScalars {
    pub fn of(pt: &PhaseSpacePoint, u: &Multipliers) -> Self {
        MomentumScalars { u1: u.u1, u2: u.u2, u3: u.u3, kp: pt.kp(), p_pi: dot(pt.p, pt.pi) }
    }
}

fn require_kp(kp: f64) -> Result<()> {
    if kp == 0.0 || !kp.is_finite() {
        return Err(Error::InvalidArgument(format!("<k,p> must be nonzero and finite, got {kp}")));
    }
    Ok(())
}

/// The scalar velocity map on the constraint surface.
pub fn scalar_map(ms: &MomentumScalars, params: &ClockParams) -> Result<ScalarVelocities> {
    require_kp(ms.kp)?;
    let m = params.mass;
    let l = params.length;
    let (u1, u2, u3, kp) = (ms.u1, ms.u2, ms.u3, ms.kp);
    Ok(ScalarVelocities {
        xx: u1 * u1 - u2 * u2,
        kx: kp / m * (u1 + u2),
        kdx: kp / m * (4.0 * kp * ms.p_pi * u2 / (m.powi(3) * l * l) + u3) * (u1 + u2),
        kdkd: -4.0 * kp * kp * u2 * u2 / (l * l * m * m),
        kkd: 0.0,
    })
}

/// `xi = -ell^2 <kdot,kdot> / <k,xdot>^2`.
pub fn xi(sv: &ScalarVelocities, params: &ClockParams) -> Result<f64> {
    if sv.kx == 0.0 {
        return Err(Error::ThirdKindDegenerate);
    }
    let l = params.length;
    Ok(-l * l * sv.kdkd / (sv.kx * sv.kx))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `u1^2 != u2^2`, `u2 != 0`: full rank, first-kind Lagrangians.
    I,
    /// `u1 = u2 != 0`: the second-kind clock.
    II,
    /// `u1 = -u2 != 0`: the third-kind clock.
    III,
    /// `u2 = 0`, `u1 != 0`: no rotation.
    IIPrime,
}

impl Regime {
    pub fn rank(self) -> usize {
        match self {
            Regime::I => 4,
            Regime::II | Regime::IIPrime => 3,
            Regime::III => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::I => "i",
            Regime::II => "ii",
            Regime::III => "iii",
            Regime::IIPrime => "ii'",
        }
    }

    pub fn velocity_constraints(self) -> Vec<VelocityConstraint> {
        use VelocityConstraint::*;
        match self {
            Regime::I => vec![PointerRateOrthogonal],
            Regime::II => vec![PointerRateOrthogonal, NullVelocity, FrequencyLock],
            Regime::III => vec![PointerRateOrthogonal, VelocityAlongPointer],
            Regime::IIPrime => vec![PointerRateOrthogonal, PointerRateNull],
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Velocity constraints attached to each regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VelocityConstraint {
    /// `<k,kdot> = 0`
    PointerRateOrthogonal,
    /// `<xdot,xdot> = 0`
    NullVelocity,
    /// `ell^2 <kdot,kdot> + <k,xdot>^2 = 0`
    FrequencyLock,
    /// `xdot ∝ k`, hence `<xdot,xdot> = 0`
    VelocityAlongPointer,
    /// `<kdot,kdot> = 0`
    PointerRateNull,
}

impl VelocityConstraint {
    pub fn expression(self) -> &'static str {
        match self {
            VelocityConstraint::PointerRateOrthogonal => "<k,kdot> = 0",
            VelocityConstraint::NullVelocity => "<xdot,xdot> = 0",
            VelocityConstraint::FrequencyLock => "ell^2 <kdot,kdot> + <k,xdot>^2 = 0",
            VelocityConstraint::VelocityAlongPointer => "xdot ∝ k",
            VelocityConstraint::PointerRateNull => "<kdot,kdot> = 0",
        }
    }

    /// Residual of the constraint on given velocities; for
    /// `VelocityAlongPointer` the largest 2x2 minor of `(xdot, k)`.
    pub fn residual(self, xdot: FourVector, k: FourVector, kdot: FourVector, params: &ClockParams) -> f64 {
        let l = params.length;
        match self {
            VelocityConstraint::PointerRateOrthogonal => dot(k, kdot),
            VelocityConstraint::NullVelocity => dot(xdot, xdot),
            VelocityConstraint::FrequencyLock => l * l * dot(kdot, kdot) + dot(k, xdot).powi(2),
            VelocityConstraint::VelocityAlongPointer => parallel_defect(xdot, k),
            VelocityConstraint::PointerRateNull => dot(kdot, kdot),
        }
    }
}

/// Largest `|a^i b^j - a^j b^i|`.
pub fn parallel_defect(a: FourVector, b: FourVector) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in i + 1..4 {
            worst = worst.max((a[i] * b[j] - a[j] * b[i]).abs());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeClass {
    pub regime: Regime,
    pub rank: usize,
    pub constraints: Vec<VelocityConstraint>,
    pub j1: f64,
    pub j2: f64,
}

/// Default relative threshold for the regime equalities.
pub const RANK_EPSILON: f64 = 1e-10;

/// The two maximal minors `(j1, j2)` of the scalar map's Jacobian.
pub fn minors(ms: &MomentumScalars, params: &ClockParams) -> (f64, f64) {
    let m = params.mass;
    let l = params.length;
    let (u1, u2, kp) = (ms.u1, ms.u2, ms.kp);
    let j1 = 16.0 * kp.powi(3) / (l * l * m.powi(4)) * u2 * (u1 + u2) * (u2 * u2 - u1 * u1);
    let j2 = 4.0 * kp / (l * l * m.powi(3)) * u2 * j1;
    (j1, j2)
}

/// Assigns the rank regime of `(u1, u2)`.
pub fn classify(ms: &MomentumScalars, params: &ClockParams, eps_rank: f64) -> Result<RegimeClass> {
    require_kp(ms.kp)?;
    let (u1, u2) = (ms.u1, ms.u2);
    let scale = u1.abs() + u2.abs();
    if scale == 0.0 {
        return Err(Error::NullMultiplier);
    }
    let tol = eps_rank * scale;
    let regime = if u2.abs() <= tol {
        Regime::IIPrime
    } else if (u1 - u2).abs() <= tol {
        Regime::II
    } else if (u1 + u2).abs() <= tol {
        Regime::III
    } else {
        Regime::I
    };
    let (j1, j2) = minors(ms, params);
    Ok(RegimeClass { regime, rank: regime.rank(), constraints: regime.velocity_constraints(), j1, j2 })
}

/// Momenta reconstructed from velocities in the full-rank regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstKindMomenta {
    pub p: FourVector,
    pub pi: FourVector,
    /// Coefficient `ell^2 m (u1+u2)^2 / (4 <k,xdot>^2 u2)`, which diverges
    /// like `1/u2` towards regime ii'.
    pub pi_coefficient: f64,
}

impl FirstKindMomenta {
    /// Threshold on `|u2 / (|u1| + |u2|)|` below which the reconstruction is
    /// reported as near-divergent.
    pub const DIVERGENCE_RATIO: f64 = 1e-6;

    pub fn is_near_divergent(&self, u: &Multipliers) -> bool {
        u.u2.abs() <= Self::DIVERGENCE_RATIO * (u.u1.abs() + u.u2.abs())
    }
}

/// Inverts the velocity equations for `p` and `pi` when `u2 (u1+u2) != 0`
/// and the map has full rank.
pub fn momenta_first_kind(
    xdot: FourVector,
    kdot: FourVector,
    k: FourVector,
    u: &Multipliers,
    params: &ClockParams,
) -> Result<FirstKindMomenta> {
    let scale = u.u1.abs() + u.u2.abs();
    if scale == 0.0 {
        return Err(Error::NullMultiplier);
    }
    let tol = RANK_EPSILON * scale;
    if u.u2.abs() <= tol || (u.u1 + u.u2).abs() <= tol || (u.u1 - u.u2).abs() <= tol {
        return Err(Error::SingularTransformation(format!(
            "(u1, u2) = ({}, {}) is outside the full-rank regime",
            u.u1, u.u2
        )));
    }
    let kx = dot(k, xdot);
    if kx == 0.0 {
        return Err(Error::ThirdKindDegenerate);
    }
    let m = params.mass;
    let l = params.length;
    let s = u.u1 + u.u2;
    let c = l * l * m * s * s / (4.0 * kx * kx * u.u2);
    let p = xdot * (m / s) - k * (c * (dot(kdot, kdot) - 2.0 * dot(k, kdot) * u.u3) / kx);
    let pi = (kdot - k * u.u3) * c;
    Ok(FirstKindMomenta { p, pi, pi_coefficient: c })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn value(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    SubLuminal,
    Null,
    SuperLuminal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstKindValue {
    pub value: f64,
    pub xi: f64,
    pub sector: Sector,
    /// The canonical momenta are `0/0` on a null velocity.
    pub momenta_indeterminate: bool,
}

fn check_sign(eta: f64) -> Result<()> {
    if eta != 1.0 && eta != -1.0 {
        return Err(Error::InvalidArgument(format!("eta must be +1 or -1, got {eta}")));
    }
    Ok(())
}

/// `L+- = eta m sqrt(<xdot,xdot>(1 +- sqrt(xi))) + lambda <k,k>`.
///
/// The same expression with `<xdot,xdot> < 0` and the minus branch is the
/// super-luminal Lagrangian `eta m sqrt(-<xdot,xdot>) sqrt(sqrt(xi) - 1)`.
pub fn lagrangian_first_kind(
    xdot: FourVector,
    k: FourVector,
    kdot: FourVector,
    branch: Branch,
    eta: f64,
    lambda: f64,
    params: &ClockParams,
) -> Result<FirstKindValue> {
    check_sign(eta)?;
    let sv = scalar_velocities_of(xdot, k, kdot);
    let xi = xi(&sv, params)?;
    if xi < 0.0 {
        return Err(Error::Domain(format!("xi = {xi} is negative (spacelike-free pointer rate)")));
    }
    let factor = 1.0 + branch.value() * xi.sqrt();
    let radicand = sv.xx * factor;
    let null_tol = 1e-12 * xdot.max_abs().powi(2);
    let sector = if sv.xx.abs() <= null_tol {
        Sector::Null
    } else if sv.xx > 0.0 {
        Sector::SubLuminal
    } else {
        Sector::SuperLuminal
    };
    if radicand < 0.0 {
        let boundary = match (sector, branch) {
            (Sector::SuperLuminal, Branch::Plus) => "the plus branch has no super-luminal sector",
            (Sector::SuperLuminal, Branch::Minus) => "super-luminal sector needs xi >= 1",
            _ => "sub-luminal minus branch needs xi <= 1",
        };
        return Err(Error::Domain(format!("negative radicand {radicand:e}: {boundary}")));
    }
    Ok(FirstKindValue {
        value: eta * params.mass * radicand.sqrt() + lambda * dot(k, k),
        xi,
        sector,
        momenta_indeterminate: sector == Sector::Null,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondKindValue {
    pub value: f64,
    /// `dL/dkappa`.
    pub d_kappa: f64,
    /// `<xdot,xdot>/<k,xdot>` and `ell^2 <kdot,kdot>/<k,xdot> + <k,xdot>`.
    pub residuals: [f64; 2],
}

/// `L = (m kappa/2) <xdot,xdot>/<k,xdot> + (m/(4 kappa)) (ell^2 <kdot,kdot>/<k,xdot> + <k,xdot>) + lambda <k,k>`.
pub fn lagrangian_second_kind(
    xdot: FourVector,
    k: FourVector,
    kdot: FourVector,
    kappa: f64,
    lambda: f64,
    params: &ClockParams,
) -> Result<SecondKindValue> {
    let sv = scalar_velocities_of(xdot, k, kdot);
    if sv.kx == 0.0 {
        return Err(Error::InvalidArgument("second-kind Lagrangian needs <k,xdot> != 0".into()));
    }
    if kappa == 0.0 {
        return Err(Error::InvalidArgument("kappa must be nonzero".into()));
    }
    let m = params.mass;
    let l = params.length;
    let r1 = sv.xx / sv.kx;
    let r2 = l * l * sv.kdkd / sv.kx + sv.kx;
    Ok(SecondKindValue {
        value: m * kappa / 2.0 * r1 + m / (4.0 * kappa) * r2 + lambda * dot(k, k),
        d_kappa: m / 2.0 * r1 - m / (4.0 * kappa * kappa) * r2,
        residuals: [r1, r2],
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThirdKindValue {
    pub value: f64,
    /// Largest change of `L` over `e -> alpha (e + beta k)` for
    /// `alpha in {0.5, 2}`, `beta in {-1, 1}`.
    pub e_defect: f64,
}

fn third_kind_value(
    xdot: FourVector,
    k: FourVector,
    kdot: FourVector,
    e: FourVector,
    eta: f64,
    lambda: f64,
    params: &ClockParams,
) -> Result<f64> {
    let ek = dot(e, k);
    if ek == 0.0 {
        return Err(Error::InvalidGaugeVector);
    }
    let l = params.length;
    let radicand = -4.0 * l * l * dot(xdot, e).powi(2) * dot(kdot, kdot) / (ek * ek);
    if radicand < 0.0 {
        return Err(Error::Domain(format!("third-kind radicand {radicand:e} is negative (timelike kdot)")));
    }
    Ok(params.mass * eta * radicand.powf(0.25) + lambda * dot(k, k))
}

/// `L = m eta (-4 ell^2 <xdot,e>^2 <kdot,kdot> / <e,k>^2)^(1/4) + lambda <k,k>`.
pub fn lagrangian_third_kind(
    xdot: FourVector,
    k: FourVector,
    kdot: FourVector,
    e: FourVector,
    eta: f64,
    lambda: f64,
    params: &ClockParams,
) -> Result<ThirdKindValue> {
    check_sign(eta)?;
    let value = third_kind_value(xdot, k, kdot, e, eta, lambda, params)?;
    let mut e_defect = 0.0f64;
    for alpha in [0.5, 2.0] {
        for beta in [-1.0, 1.0] {
            let e2 = (e + k * beta) * alpha;
            let v = third_kind_value(xdot, k, kdot, e2, eta, lambda, params)?;
            e_defect = e_defect.max((v - value).abs());
        }
    }
    Ok(ThirdKindValue { value, e_defect })
}

/// Precursor form with `p` kept: `<xdot,p> +- (ell m^2/2) sqrt(-<kdot,kdot>)/<k,p> + lambda <k,k>`,
/// with the sign of `<p,xdot>/<k,p>`.
pub fn lagrangian_third_kind_with_momentum(
    xdot: FourVector,
    p: FourVector,
    k: FourVector,
    kdot: FourVector,
    lambda: f64,
    params: &ClockParams,
) -> Result<f64> {
    let kp = dot(k, p);
    require_kp(kp)?;
    let kdkd = dot(kdot, kdot);
    if kdkd > 0.0 {
        return Err(Error::Domain("timelike kdot".into()));
    }
    let m = params.mass;
    let pxd = dot(p, xdot);
    let sign = (pxd / kp).signum();
    Ok(pxd + sign * params.length * m * m / 2.0 * (-kdkd).sqrt() / kp + lambda * dot(k, k))
}

/// `m^2 sqrt(-<kdot,kdot>) / |<xdot,p><k,p>|`, which the third-kind
/// dynamics sets to `2/ell`.
pub fn frequency_relation(
    xdot: FourVector,
    p: FourVector,
    k: FourVector,
    kdot: FourVector,
    params: &ClockParams,
) -> Result<f64> {
    let denom = (dot(xdot, p) * dot(k, p)).abs();
    if denom == 0.0 {
        return Err(Error::InvalidTangent("<xdot,p><k,p> vanishes".into()));
    }
    let m = params.mass;
    Ok(m * m * (-dot(kdot, kdot)).max(0.0).sqrt() / denom)
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function of `xi` with its first two derivatives, either supplied
/// in closed form or taken by 5-point central stencils.
#[derive(Clone)]
pub struct ShapeFunction {
    f: RealFn,
    d1: Option<RealFn>,
    d2: Option<RealFn>,
}

impl fmt::Debug for ShapeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShapeFunction")
            .field("closed_form_d1", &self.d1.is_some())
            .field("closed_form_d2", &self.d2.is_some())
            .finish()
    }
}

/// Relative stencil step for first derivatives.
pub const STENCIL_STEP_D1: f64 = 1e-5;
/// Relative stencil step for second derivatives; a smaller step loses the
/// result to cancellation.
pub const STENCIL_STEP_D2: f64 = 1e-3;

impl ShapeFunction {
    /// Derivatives by stencils.
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ShapeFunction { f: Arc::new(f), d1: None, d2: None }
    }

    pub fn with_derivatives(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ShapeFunction { f: Arc::new(f), d1: Some(Arc::new(d1)), d2: Some(Arc::new(d2)) }
    }

    /// `1 +- sqrt(xi)`, the rotator shape of the first-kind Lagrangians.
    pub fn fundamental_rotator(branch: Branch) -> Self {
        let s = branch.value();
        ShapeFunction::with_derivatives(
            move |x| 1.0 + s * x.sqrt(),
            move |x| s * 0.5 / x.sqrt(),
            move |x| -s * 0.25 / (x * x.sqrt()),
        )
    }

    /// `(1 - xi)/2`, the linearization at `xi = 1`.
    pub fn clock_linearization() -> Self {
        ShapeFunction::with_derivatives(|x| (1.0 - x) / 2.0, |_| -0.5, |_| 0.0)
    }

    /// `sqrt(1 +- sqrt(xi))`, derivatives by stencil.
    pub fn hessian_solution(branch: Branch) -> Self {
        let s = branch.value();
        ShapeFunction::new(move |x| (1.0 + s * x.sqrt()).sqrt())
    }

    pub fn has_closed_form(&self) -> bool {
        self.d1.is_some() && self.d2.is_some()
    }

    pub fn value(&self, xi: f64) -> f64 {
        (self.f)(xi)
    }

    pub fn d1(&self, xi: f64) -> f64 {
        match &self.d1 {
            Some(d) => d(xi),
            None => {
                let h = STENCIL_STEP_D1 * xi.abs().max(1.0);
                let f = &self.f;
                (f(xi - 2.0 * h) - f(xi + 2.0 * h) + 8.0 * (f(xi + h) - f(xi - h))) / (12.0 * h)
            }
        }
    }

    pub fn d2(&self, xi: f64) -> f64 {
        match &self.d2 {
            Some(d) => d(xi),
            None => {
                let h = STENCIL_STEP_D2 * xi.abs().max(1.0);
                let f = &self.f;
                (16.0 * (f(xi + h) + f(xi - h)) - (f(xi + 2.0 * h) + f(xi - 2.0 * h)) - 30.0 * f(xi)) / (12.0 * h * h)
            }
        }
    }
}

/// Principal-constraint residuals `(F - 2 xi F' - 1, 4 xi F'^2 - 1)`.
pub fn rotator_family(shape: &ShapeFunction, xi: f64) -> (f64, f64) {
    let f = shape.value(xi);
    let d = shape.d1(xi);
    (f - 2.0 * xi * d - 1.0, 4.0 * xi * d * d - 1.0)
}

/// `L_F = (m kappa/2)<xdot,xdot>/<k,xdot> + (m/(2 kappa))<k,xdot> F(xi) + lambda <k,k>`.
pub fn lagrangian_rotator_family(
    xdot: FourVector,
    k: FourVector,
    kdot: FourVector,
    kappa: f64,
    shape: &ShapeFunction,
    lambda: f64,
    params: &ClockParams,
) -> Result<f64> {
    let sv = scalar_velocities_of(xdot, k, kdot);
    let x = xi(&sv, params)?;
    if kappa == 0.0 {
        return Err(Error::InvalidArgument("kappa must be nonzero".into()));
    }
    let m = params.mass;
    Ok(m * kappa / 2.0 * sv.xx / sv.kx + m / (2.0 * kappa) * sv.kx * shape.value(x) + lambda * dot(k, k))
}

/// Residual of `f' f + 2 xi (f'^2 + f'' f) = 0`.
pub fn hessian_ode_residual(f: &ShapeFunction, xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::Domain(format!("xi must be positive, got {xi}")));
    }
    let v = f.value(xi);
    let d1 = f.d1(xi);
    let d2 = f.d2(xi);
    Ok(d1 * v + 2.0 * xi * (d1 * d1 + d2 * v))
}

/// Velocity scalars of a phase-space velocity.
pub fn scalar_velocities_of_flow(pt: &PhaseSpacePoint, t: &Tangent) -> ScalarVelocities {
    scalar_velocities_of(t.xdot, pt.k, t.kdot)
}
