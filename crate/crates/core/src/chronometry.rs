//! Clock readings: the invariant null directions `k+-`, the phase of the
//! pointer image about them, the frequency scalar and the Frenet-type
//! diagnostics of the worldline.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::dynamics::{FreeClock, Tangent, Trajectory};
use crate::minkowski::{cross_ratio, dot, mathisson, stereographic, FourVector, ProjectivePoint};
use crate::state::{ClockParams, PhaseSpacePoint, Sigma};
use crate::{Error, Result};

/// Allowed deviation of `|log|cr||` from zero before the phase is declared
/// complex.
pub const PHASE_MODULUS_TOLERANCE: f64 = 1e-9;

/// `k+- = p/sqrt(<p,p>) +- w/sqrt(-<w,w>)`.
pub fn null_directions(pt: &PhaseSpacePoint) -> Result<(FourVector, FourVector)> {
    let pp = dot(pt.p, pt.p);
    if !(pp > 0.0) {
        return Err(Error::ConstraintViolation { what: "null directions need timelike p", residual: pp });
    }
    let w = pt.spin();
    let ww = dot(w, w);
    let scale = pp * pp * pt.k.max_abs().powi(2) * pt.pi.max_abs().powi(2);
    if !(ww < -1e-24 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::SpinDegenerate(ww));
    }
    let u = pt.p / pp.sqrt();
    let s = w / (-ww).sqrt();
    Ok((u + s, u - s))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    pub tau: f64,
    /// Unwrapped phase accumulated from the first sample.
    pub phi: f64,
    pub kappa: ProjectivePoint,
}

/// Phase increment between two pointer images about fixed `kappa+-`.
fn phase_step(
    kappa: &ProjectivePoint,
    kappa0: &ProjectivePoint,
    plus: &ProjectivePoint,
    minus: &ProjectivePoint,
) -> Result<f64> {
    let cr = cross_ratio(kappa, kappa0, plus, minus)?;
    let lnr = cr.norm().ln();
    if lnr.abs() > PHASE_MODULUS_TOLERANCE {
        return Err(Error::ConstraintViolation { what: "cross-ratio off the unit circle", residual: lnr });
    }
    // i Ln z = i ln|z| - arg z, real by the check above
    Ok(-cr.arg())
}

/// Unwrapped phase of `k` along the points, with `k+-` taken from the first
/// one. Every per-sample increment must stay below `pi/2` in magnitude.
pub fn phase_of_points(points: &[PhaseSpacePoint]) -> Result<Vec<(f64, ProjectivePoint)>> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    let (kp, km) = null_directions(first)?;
    let plus = stereographic(kp)?;
    let minus = stereographic(km)?;
    let mut out = Vec::with_capacity(points.len());
    let mut prev = stereographic(first.k)?;
    // checks the first image against kappa+- as well
    phase_step(&prev, &prev, &plus, &minus)?;
    let mut phi = 0.0;
    out.push((phi, prev));
    for (i, pt) in points.iter().enumerate().skip(1) {
        let kappa = stereographic(pt.k)?;
        let d = phase_step(&kappa, &prev, &plus, &minus)?;
        if d.abs() >= FRAC_PI_2 {
            return Err(Error::UnwrapAmbiguity { index: i, increment: d });
        }
        phi += d;
        out.push((phi, kappa));
        prev = kappa;
    }
    Ok(out)
}

/// Phase series along the whole trajectory, starting at its first sample.
pub fn phase_series(traj: &Trajectory) -> Result<Vec<PhaseSample>> {
    let pts = traj.points();
    let phases = phase_of_points(&pts)?;
    Ok(traj.samples.iter().zip(phases).map(|(s, (phi, kappa))| PhaseSample { tau: s.tau, phi, kappa }).collect())
}

fn sample_index(traj: &Trajectory, tau: f64) -> Result<usize> {
    let tol = 1e-9 * tau.abs().max(1.0);
    traj.samples
        .iter()
        .position(|s| (s.tau - tau).abs() <= tol)
        .ok_or_else(|| Error::InvalidArgument(format!("no sample at parameter {tau}")))
}

/// Phase between samples `i0` and `i1`; negative orientation when `i1 < i0`.
pub fn phase_between(traj: &Trajectory, i0: usize, i1: usize) -> Result<f64> {
    let n = traj.len();
    if i0 >= n || i1 >= n {
        return Err(Error::InvalidArgument(format!("sample index out of range ({i0}, {i1}) for {n} samples")));
    }
    let (lo, hi, sign) = if i0 <= i1 { (i0, i1, 1.0) } else { (i1, i0, -1.0) };
    let pts: Vec<PhaseSpacePoint> = traj.samples[lo..=hi].iter().map(|s| s.point).collect();
    let phases = phase_of_points(&pts)?;
    Ok(sign * phases.last().map_or(0.0, |p| p.0))
}

/// Phase accumulated between the samples at parameters `tau0` and `tau`.
pub fn phase(traj: &Trajectory, tau0: f64, tau: f64) -> Result<f64> {
    phase_between(traj, sample_index(traj, tau0)?, sample_index(traj, tau)?)
}

/// Least-squares line through `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("linear fit needs two or more paired values".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateConfiguration("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).abs()).fold(0.0, f64::max);
    Ok(LinearFit { slope, intercept, max_residual })
}

/// `n = p/sqrt(<p,p>) - sqrt(<p,p>) k/<k,p>` and its rate along `t`.
fn pointer_rate(pt: &PhaseSpacePoint, t: &Tangent) -> FourVector {
    let pp = dot(pt.p, pt.p);
    let s = pp.sqrt();
    let kp = pt.kp();
    let sdot = dot(pt.p, t.pdot) / s;
    let kpdot = dot(t.kdot, pt.p) + dot(pt.k, t.pdot);
    t.pdot / s - pt.p * (sdot / pp) - (pt.k * sdot + t.kdot * s) / kp + pt.k * (s * kpdot / (kp * kp))
}

fn p_dot_xdot(pt: &PhaseSpacePoint, t: &Tangent) -> Result<f64> {
    let pxd = dot(pt.p, t.xdot);
    let scale = pt.p.max_abs() * t.xdot.max_abs();
    if pxd.abs() <= 1e-14 * scale || pxd == 0.0 {
        return Err(Error::InvalidTangent(format!("<p, xdot> = {pxd:e} vanishes")));
    }
    Ok(pxd)
}

/// Frequency scalar `Omega^2 = -<ndot,ndot><p,p>/<p,xdot>^2`.
pub fn omega(pt: &PhaseSpacePoint, t: &Tangent) -> Result<f64> {
    let pxd = p_dot_xdot(pt, t)?;
    let nd = pointer_rate(pt, t);
    let o2 = -dot(nd, nd) * dot(pt.p, pt.p) / (pxd * pxd);
    Ok(o2.max(0.0).sqrt())
}

/// `Omega = <p,p> sqrt(-<kdot,kdot>) / |<k,p><p,xdot>|`, valid for `pdot = 0`.
pub fn omega_from_kdot(pt: &PhaseSpacePoint, t: &Tangent) -> Result<f64> {
    if t.pdot.max_abs() > 1e-12 * pt.p.max_abs() {
        return Err(Error::NotApplicable("k-dot form of Omega needs pdot = 0".into()));
    }
    let pxd = p_dot_xdot(pt, t)?;
    let kk = dot(t.kdot, t.kdot);
    Ok(dot(pt.p, pt.p) * (-kk).max(0.0).sqrt() / (pt.kp() * pxd).abs())
}

/// Hyperbolic angle `Lambda` with `Omega = (2/ell) tanh Lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LambdaAngle {
    Finite(f64),
    /// `ell Omega / 2 >= 1`, reached by both clocks.
    Infinite,
}

impl LambdaAngle {
    pub fn value(&self) -> f64 {
        match self {
            LambdaAngle::Finite(v) => *v,
            LambdaAngle::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, LambdaAngle::Infinite)
    }
}

/// Rounding slack on `ell Omega / 2 = 1`.
const LAMBDA_SATURATION: f64 = 1.0 - 8.0 * f64::EPSILON;

pub fn lambda_from_omega(omega: f64, params: &ClockParams) -> LambdaAngle {
    let r = params.length * omega / 2.0;
    if r >= LAMBDA_SATURATION {
        LambdaAngle::Infinite
    } else {
        LambdaAngle::Finite(r.atanh())
    }
}

pub fn lambda_angle(pt: &PhaseSpacePoint, t: &Tangent, params: &ClockParams) -> Result<LambdaAngle> {
    Ok(lambda_from_omega(omega(pt, t)?, params))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrenetReport {
    pub curvature: f64,
    /// Normalized Gram determinant of the first three projective
    /// derivatives; zero when they are coplanar.
    pub torsion_proxy: f64,
    pub omega: f64,
    pub lambda: LambdaAngle,
}

/// Part of `v` orthogonal to `p`.
fn perp(v: FourVector, p: FourVector) -> FourVector {
    v.orthogonal_to(p)
}

fn det3(g: [[f64; 3]; 3]) -> f64 {
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

/// Curvature and torsion proxy from `(xdot, xddot, xdddot)` at constant `p`.
///
/// With constant `p` the recursive projective derivatives reduce to the
/// projections of the ordinary ones.
pub fn curvature_and_torsion(p: FourVector, derivs: [FourVector; 3]) -> (f64, f64) {
    let [a, b, c] = derivs.map(|d| perp(d, p));
    let aa = dot(a, a);
    let (ab, bb) = (dot(a, b), dot(b, b));
    let curvature = -(aa * bb - ab * ab) / aa.powi(3);
    let ac = dot(a, c);
    let bc = dot(b, c);
    let cc = dot(c, c);
    let g = [[aa, ab, ac], [ab, bb, bc], [ac, bc, cc]];
    let norm = (aa * bb * cc).abs();
    let d = det3(g).abs();
    let torsion = if norm > 0.0 { d / norm } else { d };
    (curvature, torsion)
}

/// Frenet report from analytic derivatives of the worldline.
pub fn frenet(
    pt: &PhaseSpacePoint,
    tangent: &Tangent,
    derivs: [FourVector; 3],
    params: &ClockParams,
) -> Result<FrenetReport> {
    if tangent.pdot.max_abs() > 1e-12 * pt.p.max_abs() {
        return Err(Error::NotApplicable("Frenet diagnostics need free motion (pdot = 0)".into()));
    }
    let (curvature, torsion_proxy) = curvature_and_torsion(pt.p, derivs);
    let omega = omega(pt, tangent)?;
    Ok(FrenetReport { curvature, torsion_proxy, omega, lambda: lambda_from_omega(omega, params) })
}

/// Frenet report of the exact free clock at `t`.
pub fn frenet_exact(clock: &FreeClock, t: f64) -> Result<FrenetReport> {
    frenet(&clock.state(t), &clock.tangent(t), clock.derivatives(t), clock.params())
}

fn stencil<T>(f: [T; 5], h: f64) -> [T; 4]
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let [m2, m1, c, p1, p2] = f;
    let d1 = (m2 - p2 + (p1 - m1) * 8.0) * (1.0 / (12.0 * h));
    let d2 = ((m1 + p1) * 16.0 - (m2 + p2) - c * 30.0) * (1.0 / (12.0 * h * h));
    let d3 = (p2 - m2 + (m1 - p1) * 2.0) * (1.0 / (2.0 * h * h * h));
    [c, d1, d2, d3]
}

/// Frenet report at sample `center` from 5-point central stencils over
/// samples `center-2 ..= center+2`, which must be uniformly spaced.
pub fn frenet_sampled(traj: &Trajectory, center: usize) -> Result<FrenetReport> {
    if center < 2 || center + 2 >= traj.len() {
        return Err(Error::InvalidArgument(format!(
            "a 5-point window around sample {center} needs two samples on each side"
        )));
    }
    let w = &traj.samples[center - 2..=center + 2];
    let h = w[1].tau - w[0].tau;
    if w.windows(2).any(|s| ((s[1].tau - s[0].tau) - h).abs() > 1e-9 * h) {
        return Err(Error::InvalidArgument("stencil window must be uniformly spaced".into()));
    }
    let p = w[2].point.p;
    if w.iter().any(|s| (s.point.p - p).max_abs() > 1e-12 * p.max_abs()) {
        return Err(Error::NotApplicable("Frenet diagnostics need free motion (constant p)".into()));
    }
    let xs = std::array::from_fn(|i| w[i].point.x);
    let ks = std::array::from_fn(|i| w[i].point.k);
    let pis = std::array::from_fn(|i| w[i].point.pi);
    let [_, xd, xdd, xddd] = stencil(xs, h);
    let [_, kd, _, _] = stencil(ks, h);
    let [_, pid, _, _] = stencil(pis, h);
    let tangent = Tangent { xdot: xd, pdot: FourVector::ZERO, kdot: kd, pidot: pid };
    frenet(&w[2].point, &tangent, [xd, xdd, xddd], &traj.params)
}

/// `sqrt(-<r_perp, r_perp>)` for `r = x - axis`, `r_perp` orthogonal to `p`.
pub fn transverse_radius(x: FourVector, axis: FourVector, p: FourVector) -> f64 {
    let r = perp(x - axis, p);
    (-dot(r, r)).max(0.0).sqrt()
}

/// Spin orientation of a worldline relative to its CM axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinAlignment {
    /// `c` in `*(p^k^pi) = c *(p^r^xdot)`.
    pub coefficient: f64,
    pub sign: Sigma,
    /// `|w - c *(p^r^xdot)|` relative to `|w|`.
    pub defect: f64,
}

/// Compares the Mathisson vector with the orbital pseudovector
/// `*(p ^ r ^ xdot)` built from the radius vector `r` off the CM axis.
pub fn spin_alignment(pt: &PhaseSpacePoint, radius: FourVector, xdot: FourVector) -> Result<SpinAlignment> {
    let w = pt.spin();
    let v = mathisson(pt.p, radius, xdot);
    let vv = dot(v, v);
    if vv == 0.0 {
        return Err(Error::DegenerateConfiguration("p, r and xdot are linearly dependent".into()));
    }
    let c = dot(w, v) / vv;
    let defect = (w - v * c).max_abs() / w.max_abs().max(f64::MIN_POSITIVE);
    Ok(SpinAlignment { coefficient: c, sign: if c > 0.0 { Sigma::Plus } else { Sigma::Minus }, defect })
}

/// Velocity null direction `m xdot / <p,xdot>` with `m = sqrt(<p,p>)`.
pub fn velocity_direction(p: FourVector, xdot: FourVector) -> FourVector {
    xdot * (dot(p, p).sqrt() / dot(p, xdot))
}

/// Reflection `v -> 2p/m - v` that exchanges the two clocks' velocity
/// directions.
pub fn reflect_direction(p: FourVector, v: FourVector) -> FourVector {
    p * (2.0 / dot(p, p).sqrt()) - v
}
