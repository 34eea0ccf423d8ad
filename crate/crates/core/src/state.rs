//! Constrained phase space of the rotator.
//!
//! A point is the quadruple `(x, p, k, pi)`. On shell it satisfies
//!
//! ```text
//! psi1 = <p,p> - m^2            = 0
//! psi2 = <w,w> + m^4 ell^2 / 4  = 0      w = mathisson(p, k, pi)
//! psi3 = <k,pi>                 = 0
//! psi4 = <k,k>                  = 0
//! ```
//!
//! and `<k,p> != 0`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::minkowski::{dot, mathisson, FourVector, LorentzTransform};
use crate::{Error, Result};

/// Default relative tolerance for the on-shell test.
pub const ON_SHELL_TOLERANCE: f64 = 1e-9;

/// Branch sign selecting the clock: `Plus` is the second-kind clock
/// (`u1 = u2`), `Minus` the third-kind clock (`u1 = -u2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sigma {
    Plus,
    Minus,
}

impl Sigma {
    pub fn value(self) -> f64 {
        match self {
            Sigma::Plus => 1.0,
            Sigma::Minus => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Result<Self> {
        if s == 1.0 {
            Ok(Sigma::Plus)
        } else if s == -1.0 {
            Ok(Sigma::Minus)
        } else {
            Err(Error::InvalidArgument(format!("sigma must be +1 or -1, got {s}")))
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sigma::Plus => Sigma::Minus,
            Sigma::Minus => Sigma::Plus,
        }
    }
}

/// Fixed parameters of a rotator: mass `m`, length `ell` and branch sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockParams {
    pub mass: f64,
    pub length: f64,
    pub sigma: Sigma,
}

impl ClockParams {
    pub fn new(mass: f64, length: f64, sigma: Sigma) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {mass}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidArgument(format!("length must be positive, got {length}")));
        }
        Ok(ClockParams { mass, length, sigma })
    }

    /// `m = ell = 1`, `sigma = +1`.
    pub fn unit() -> Self {
        ClockParams { mass: 1.0, length: 1.0, sigma: Sigma::Plus }
    }

    pub fn with_sigma(self, sigma: Sigma) -> Self {
        ClockParams { sigma, ..self }
    }

    /// Target value of `<w,w>`: `-m^4 ell^2 / 4`.
    pub fn spin_casimir(&self) -> f64 {
        -0.25 * self.mass.powi(4) * self.length * self.length
    }

    /// Parameter length of one clocking cycle, `pi * ell`, in the CM gauge.
    pub fn cycle_period(&self) -> f64 {
        PI * self.length
    }

    /// Clocking frequency `2 / ell`.
    pub fn frequency(&self) -> f64 {
        2.0 / self.length
    }
}

/// Phase-space point `(x, p, k, pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub x: FourVector,
    pub p: FourVector,
    pub k: FourVector,
    pub pi: FourVector,
}

impl PhaseSpacePoint {
    pub fn new(x: FourVector, p: FourVector, k: FourVector, pi: FourVector) -> Self {
        PhaseSpacePoint { x, p, k, pi }
    }

    /// Mathisson pseudovector of the point.
    pub fn spin(&self) -> FourVector {
        mathisson(self.p, self.k, self.pi)
    }

    pub fn kp(&self) -> f64 {
        dot(self.k, self.p)
    }

    /// Local gauge rescaling `k -> alpha k`, `pi -> pi / alpha`.
    pub fn rescale_pointer(&self, alpha: f64) -> Self {
        PhaseSpacePoint { k: self.k * alpha, pi: self.pi / alpha, ..*self }
    }

    /// `(p, k, pi)` flattened in that order; `x` never enters a constraint.
    pub fn momentum_block(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        out[..4].copy_from_slice(&self.p.0);
        out[4..8].copy_from_slice(&self.k.0);
        out[8..].copy_from_slice(&self.pi.0);
        out
    }

    pub fn with_momentum_block(&self, z: &[f64; 12]) -> Self {
        let v = |o: usize| FourVector([z[o], z[o + 1], z[o + 2], z[o + 3]]);
        PhaseSpacePoint { x: self.x, p: v(0), k: v(4), pi: v(8) }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.p.is_finite() && self.k.is_finite() && self.pi.is_finite()
    }

    /// Unit pointer direction orthogonal to `p`,
    /// `n = sqrt(<p,p>) k / <k,p> - p / sqrt(<p,p>)`, so that `k = p/m + n`
    /// in the CM gauge.
    pub fn pointer_direction(&self) -> FourVector {
        let pp = dot(self.p, self.p);
        let s = pp.sqrt();
        self.k * (s / self.kp()) - self.p / s
    }
}

/// Residuals of the four constraints and the two Casimirs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub psi1: f64,
    pub psi2: f64,
    pub psi3: f64,
    pub psi4: f64,
    pub casimir_pp: f64,
    pub casimir_ww: f64,
    /// `<w,w> - <p,k>^2 <pi,pi>`; vanishes when psi3 = psi4 = 0.
    pub weak_discrepancy: f64,
    pub max_relative_violation: f64,
}

impl ConstraintReport {
    pub fn residuals(&self) -> [f64; 4] {
        [self.psi1, self.psi2, self.psi3, self.psi4]
    }

    pub fn is_on_shell(&self, tol: f64) -> bool {
        self.max_relative_violation <= tol
    }
}

/// Natural scales of the four residuals: `m^2`, `m^4 ell^2`, `m ell`,
/// `<k,p>^2 / m^2`. Each is invariant under the corresponding unit change,
/// and the last two are covariant under `k -> alpha k`.
pub fn constraint_scales(pt: &PhaseSpacePoint, params: &ClockParams) -> [f64; 4] {
    let m = params.mass;
    let l = params.length;
    let kp = pt.kp();
    let psi4_scale = if kp != 0.0 { kp * kp / (m * m) } else { pt.k.max_abs().powi(2).max(1.0) };
    [m * m, m.powi(4) * l * l, m * l, psi4_scale]
}

/// Evaluates every constraint residual at `pt`. Never fails.
pub fn constraints(pt: &PhaseSpacePoint, params: &ClockParams) -> ConstraintReport {
    let pp = dot(pt.p, pt.p);
    let w = pt.spin();
    let ww = dot(w, w);
    let kp = pt.kp();
    let weak = kp * kp * dot(pt.pi, pt.pi);
    let psi = [pp - params.mass * params.mass, ww - params.spin_casimir(), dot(pt.k, pt.pi), dot(pt.k, pt.k)];
    let scales = constraint_scales(pt, params);
    let max_rel = psi.iter().zip(scales).map(|(r, s)| r.abs() / s).fold(0.0, f64::max);
    ConstraintReport {
        psi1: psi[0],
        psi2: psi[1],
        psi3: psi[2],
        psi4: psi[3],
        casimir_pp: pp,
        casimir_ww: ww,
        weak_discrepancy: ww - weak,
        max_relative_violation: if max_rel.is_nan() { f64::INFINITY } else { max_rel },
    }
}

/// Canonical CM-gauge state in the rest frame: `x = 0`, `p = (m,0,0,0)`,
/// `k = p/m + n0`, `pi = sigma (m ell / 2) t0`.
///
/// `n0` and `t0` are spatial 3-vectors that must be orthonormal.
pub fn seed_cm_state(params: &ClockParams, n0: [f64; 3], t0: [f64; 3]) -> Result<PhaseSpacePoint> {
    let d3 = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let tol = 1e-12;
    if (d3(n0, n0) - 1.0).abs() > tol || (d3(t0, t0) - 1.0).abs() > tol || d3(n0, t0).abs() > tol {
        return Err(Error::InvalidArgument(format!("seed directions must be orthonormal: n0 = {n0:?}, t0 = {t0:?}")));
    }
    let m = params.mass;
    let p = FourVector::new(m, 0.0, 0.0, 0.0);
    let n = FourVector::spatial(n0);
    Ok(PhaseSpacePoint {
        x: FourVector::ZERO,
        p,
        k: p / m + n,
        pi: FourVector::spatial(t0) * (params.sigma.value() * m * params.length / 2.0),
    })
}

/// Seed with `n0 = x`, `t0 = y`.
pub fn default_seed(params: &ClockParams) -> PhaseSpacePoint {
    seed_cm_state(params, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).expect("canonical axes are orthonormal")
}

/// Poincaré action: `x -> L x + shift`, momenta and pointer by `L`.
pub fn transform_state(pt: &PhaseSpacePoint, lt: &LorentzTransform, shift: FourVector) -> PhaseSpacePoint {
    PhaseSpacePoint { x: lt.apply(pt.x) + shift, p: lt.apply(pt.p), k: lt.apply(pt.k), pi: lt.apply(pt.pi) }
}

/// CM gauge: `<p,pi> = 0` and `<k,p> = m`, each within `tol` relative.
pub fn is_cm_gauge(pt: &PhaseSpacePoint, params: &ClockParams, tol: f64) -> bool {
    let m = params.mass;
    dot(pt.p, pt.pi).abs() <= tol * m * m * params.length && (pt.kp() - m).abs() <= tol * m
}

/// Random proper orthochronous transform: a rotation about a random axis
/// followed by a boost of rapidity up to `max_rapidity` in a random direction.
pub fn random_lorentz<R: Rng + ?Sized>(rng: &mut R, max_rapidity: f64) -> LorentzTransform {
    let rot = LorentzTransform::rotation(rng.random_range(-PI..PI), random_unit(rng)).expect("unit axis");
    let b =
        LorentzTransform::boost(rng.random_range(-max_rapidity..=max_rapidity), random_unit(rng)).expect("unit axis");
    b.compose(&rot)
}

/// Uniformly distributed unit 3-vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Random on-shell point outside any particular gauge: random pointer scale,
/// random `<p,pi>`, random Poincaré frame.
pub fn sample_on_shell<R: Rng + ?Sized>(rng: &mut R, params: &ClockParams) -> PhaseSpacePoint {
    let m = params.mass;
    let l = params.length;
    let n = random_unit(rng);
    // unit vector orthogonal to n
    let a = random_unit(rng);
    let an = a[0] * n[0] + a[1] * n[1] + a[2] * n[2];
    let mut t = [a[0] - an * n[0], a[1] - an * n[1], a[2] - an * n[2]];
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    if tn < 1e-6 {
        t = if n[0].abs() < 0.9 { [0.0, -n[2], n[1]] } else { [-n[1], n[0], 0.0] };
    }
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    let t = t.map(|c| c / tn);

    let scale: f64 = rng.random_range(0.3..3.0);
    let p = FourVector::new(m, 0.0, 0.0, 0.0);
    let k = (FourVector::new(1.0, 0.0, 0.0, 0.0) + FourVector::spatial(n)) * scale;
    let kp = m * scale;
    // |pi_T| fixes <w,w> = <k,p>^2 <pi,pi> = -m^4 ell^2 / 4
    let pi_t = m * m * l / (2.0 * kp);
    let along_k: f64 = rng.random_range(-1.0..1.0) * l / scale;
    let pi = FourVector::spatial(t) * pi_t + k * along_k;

    let x = FourVector::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    ) * l;
    let rest = PhaseSpacePoint { x, p, k, pi };
    transform_state(&rest, &random_lorentz(rng, 1.2), FourVector::ZERO)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seed_matches_reference() {
        let params = ClockParams::unit();
        let s = default_seed(&params);
        assert_eq!(s.p, FourVector::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(s.k, FourVector::new(1.0, 1.0, 0.0, 0.0));
        assert_eq!(s.pi, FourVector::new(0.0, 0.0, 0.5, 0.0));
        let s = default_seed(&params.with_sigma(Sigma::Minus));
        assert_eq!(s.pi, FourVector::new(0.0, 0.0, -0.5, 0.0));
    }

    #[test]
    fn seed_is_exactly_on_shell() {
        let params = ClockParams::unit();
        let r = constraints(&default_seed(&params), &params);
        assert_eq!(r.residuals(), [0.0; 4]);
        assert_eq!((r.casimir_pp, r.casimir_ww), (1.0, -0.25));
        assert!(is_cm_gauge(&default_seed(&params), &params, 1e-15));
    }

    #[test]
    fn seed_rejects_non_orthonormal_axes() {
        let params = ClockParams::unit();
        assert!(seed_cm_state(&params, [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]).is_err());
        assert!(seed_cm_state(&params, [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ClockParams::new(0.0, 1.0, Sigma::Plus).is_err());
        assert!(ClockParams::new(1.0, -1.0, Sigma::Plus).is_err());
        assert!(ClockParams::new(1.0, f64::NAN, Sigma::Plus).is_err());
        assert!(Sigma::from_sign(0.5).is_err());
        assert_eq!(Sigma::from_sign(-1.0).unwrap(), Sigma::Minus);
    }

    #[test]
    fn residual_examples() {
        let params = ClockParams::unit();
        let pt = PhaseSpacePoint::new(
            FourVector::ZERO,
            FourVector::new(1.0, 0.0, 0.0, 0.0),
            FourVector::new(1.0, 0.0, 0.0, 0.0),
            FourVector::ZERO,
        );
        assert_eq!(constraints(&pt, &params).psi4, 1.0);
        let pt = PhaseSpacePoint { p: FourVector::new(2.0, 0.0, 0.0, 0.0), ..pt };
        assert_eq!(constraints(&pt, &params).psi1, 3.0);
    }

    #[test]
    fn boosted_seed_stays_on_shell() {
        let params = ClockParams::unit();
        let lt = LorentzTransform::boost(0.5, [0.0, 0.0, 1.0]).unwrap();
        let pt = transform_state(&default_seed(&params), &lt, FourVector::new(1.0, 2.0, 3.0, 4.0));
        let r = constraints(&pt, &params);
        for psi in r.residuals() {
            assert!(psi.abs() <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn identity_transform_is_noop() {
        let params = ClockParams::unit();
        let s = default_seed(&params);
        assert_eq!(transform_state(&s, &LorentzTransform::identity(), FourVector::ZERO), s);
    }

    #[test]
    fn random_states_are_on_shell_with_spin_magnitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let params = ClockParams::new(rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), Sigma::Plus).unwrap();
            let pt = sample_on_shell(&mut rng, &params);
            let r = constraints(&pt, &params);
            assert!(r.is_on_shell(1e-11), "{r:?}");
            let m = params.mass;
            let l = params.length;
            assert!(r.weak_discrepancy.abs() <= 1e-10 * m.powi(4) * l * l);
            let spin = (-r.casimir_ww).sqrt() / r.casimir_pp.sqrt();
            assert_abs_diff_eq!(spin, m * l / 2.0, epsilon = 1e-10 * m * l);
            assert!(pt.kp() > 0.0);
        }
    }

    #[test]
    fn casimirs_invariant_under_random_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = ClockParams::unit();
        let s = default_seed(&params);
        for _ in 0..100 {
            let lt = random_lorentz(&mut rng, 1.5);
            let r = constraints(&transform_state(&s, &lt, FourVector::ZERO), &params);
            assert_abs_diff_eq!(r.casimir_pp, 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(r.casimir_ww, -0.25, epsilon = 1e-10);
        }
    }

    #[test]
    fn json_field_names() {
        let s = default_seed(&ClockParams::unit());
        let v: serde_json::Value = serde_json::to_value(s).unwrap();
        assert_eq!(v["k"], serde_json::json!([1.0, 1.0, 0.0, 0.0]));
        assert_eq!(v["pi"], serde_json::json!([0.0, 0.0, 0.5, 0.0]));
        let back: PhaseSpacePoint = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
