//! Closed-form motion of a free clock in the CM gauge.
//!
//! With `n = k - p/m` the pointer direction obeys `n'' = -(4/ell^2) n`, so
//! it turns uniformly on a great circle with angle `theta = 2t/ell`, and the
//! position follows from integrating `xdot = p/m - sigma n`.

use super::integrator::{Trajectory, TrajectorySample};
use super::{cm_gauge_multipliers, eom, MultiplierPolicy, Tangent};
use crate::minkowski::{dot, FourVector};
use crate::state::{constraints, is_cm_gauge, ClockParams, PhaseSpacePoint, ON_SHELL_TOLERANCE};
use crate::{Error, Result};

/// A free clock fixed by its CM-gauge initial state.
#[derive(Clone, Copy, Debug)]
pub struct FreeClock {
    params: ClockParams,
    x0: FourVector,
    p: FourVector,
    n0: FourVector,
    ndot0: FourVector,
}

impl FreeClock {
    /// Requires `pt0` on shell and in the CM gauge (in any inertial frame).
    pub fn new(pt0: &PhaseSpacePoint, params: &ClockParams) -> Result<Self> {
        let report = constraints(pt0, params);
        if !report.is_on_shell(ON_SHELL_TOLERANCE) {
            return Err(Error::InvalidArgument(format!(
                "exact propagation needs an on-shell state (max relative violation {:e})",
                report.max_relative_violation
            )));
        }
        if !is_cm_gauge(pt0, params, ON_SHELL_TOLERANCE) {
            return Err(Error::InvalidArgument(format!(
                "exact propagation needs the CM gauge: <p,pi> = {:e}, <k,p> = {}",
                dot(pt0.p, pt0.pi),
                pt0.kp()
            )));
        }
        let m = params.mass;
        let l = params.length;
        let s = params.sigma.value();
        Ok(FreeClock {
            params: *params,
            x0: pt0.x,
            p: pt0.p,
            n0: pt0.k - pt0.p / m,
            ndot0: pt0.pi * (s * 4.0 / (m * l * l)),
        })
    }

    pub fn params(&self) -> &ClockParams {
        &self.params
    }

    fn theta(&self, t: f64) -> f64 {
        2.0 * t / self.params.length
    }

    /// `n(t)` and `ndot(t)`.
    fn pointer(&self, t: f64) -> (FourVector, FourVector) {
        let half = self.params.length / 2.0;
        let (s, c) = self.theta(t).sin_cos();
        let n = self.n0 * c + self.ndot0 * (half * s);
        let ndot = self.n0 * (-s / half) + self.ndot0 * c;
        (n, ndot)
    }

    pub fn state(&self, t: f64) -> PhaseSpacePoint {
        let m = self.params.mass;
        let l = self.params.length;
        let sg = self.params.sigma.value();
        let half = l / 2.0;
        let s = self.theta(t).sin();
        let (n, ndot) = self.pointer(t);
        // 1 - cos(theta) = 2 sin^2(theta/2) avoids cancellation near theta = 0
        let one_minus_cos = 2.0 * (self.theta(t) / 2.0).sin().powi(2);
        let x = self.x0 + self.p * (t / m) - (self.n0 * (half * s) + self.ndot0 * (half * half * one_minus_cos)) * sg;
        PhaseSpacePoint { x, p: self.p, k: self.p / m + n, pi: ndot * (sg * m * l * l / 4.0) }
    }

    /// `(xdot, xddot, xdddot)` at `t`.
    pub fn derivatives(&self, t: f64) -> [FourVector; 3] {
        let m = self.params.mass;
        let l = self.params.length;
        let sg = self.params.sigma.value();
        let (n, ndot) = self.pointer(t);
        [self.p / m - n * sg, -ndot * sg, n * (sg * 4.0 / (l * l))]
    }

    /// Phase-space velocity at `t` in the CM gauge.
    pub fn tangent(&self, t: f64) -> Tangent {
        eom(&self.state(t), &cm_gauge_multipliers(&self.params), &self.params)
    }

    /// Point on the CM axis at parameter `t`: `x0 - pi0/m + (p/m) t`.
    pub fn axis_point(&self, t: f64) -> FourVector {
        let m = self.params.mass;
        let l = self.params.length;
        let pi0 = self.ndot0 * (self.params.sigma.value() * m * l * l / 4.0);
        self.x0 - pi0 / m + self.p * (t / m)
    }

    /// Invariant distance of `x(t)` from the CM axis, measured orthogonally
    /// to `p`.
    pub fn transverse_radius(&self, t: f64) -> f64 {
        crate::chronometry::transverse_radius(self.state(t).x, self.axis_point(t), self.p)
    }
}

/// Exact state at parameter `t` of the free clock launched from `pt0`.
pub fn propagate_exact(pt0: &PhaseSpacePoint, t: f64, params: &ClockParams) -> Result<PhaseSpacePoint> {
    Ok(FreeClock::new(pt0, params)?.state(t))
}

/// Samples the exact propagator at `tau = i dt`, `i = 0..=steps`.
pub fn exact_trajectory(pt0: &PhaseSpacePoint, params: &ClockParams, dt: f64, steps: usize) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let clock = FreeClock::new(pt0, params)?;
    let samples = (0..=steps)
        .map(|i| {
            let tau = i as f64 * dt;
            let point = if i == 0 { *pt0 } else { clock.state(tau) };
            TrajectorySample { tau, point, report: constraints(&point, params) }
        })
        .collect();
    Ok(Trajectory { params: *params, policy: MultiplierPolicy::CmGauge, integrator: "exact".to_string(), dt, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::LorentzTransform;
    use crate::state::{default_seed, seed_cm_state, transform_state, Sigma};
    use std::f64::consts::PI;

    #[test]
    fn identity_at_zero() {
        let params = ClockParams::unit();
        let seed = default_seed(&params);
        assert_eq!(propagate_exact(&seed, 0.0, &params).unwrap(), seed);
    }

    #[test]
    fn full_cycle_returns_pointer() {
        for sigma in [Sigma::Plus, Sigma::Minus] {
            let params = ClockParams::new(1.3, 0.7, sigma).unwrap();
            let seed = seed_cm_state(&params, [0.0, 0.6, 0.8], [1.0, 0.0, 0.0]).unwrap();
            let t = PI * params.length;
            let end = propagate_exact(&seed, t, &params).unwrap();
            assert!((end.k - seed.k).max_abs() < 1e-14);
            assert!((end.pi - seed.pi).max_abs() < 1e-14);
            let shift = seed.p * (t / params.mass);
            assert!((end.x - seed.x - shift).max_abs() < 1e-13);
        }
    }

    #[test]
    fn radius_and_constraints() {
        let params = ClockParams::unit();
        let clock = FreeClock::new(&default_seed(&params), &params).unwrap();
        for i in 0..200 {
            let t = i as f64 * 0.037;
            assert!((clock.transverse_radius(t) - 0.5).abs() < 1e-14);
            let r = constraints(&clock.state(t), &params);
            assert!(r.max_relative_violation < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_flow() {
        for sigma in [Sigma::Plus, Sigma::Minus] {
            let params = ClockParams::new(0.9, 1.6, sigma).unwrap();
            let boost = LorentzTransform::boost(0.8, [0.0, 0.6, 0.8]).unwrap();
            let seed = transform_state(&default_seed(&params), &boost, FourVector::new(0.1, 0.2, 0.3, 0.4));
            let clock = FreeClock::new(&seed, &params).unwrap();
            for t in [0.0, 0.3, 2.1] {
                let [v, a, j] = clock.derivatives(t);
                assert!((v - clock.tangent(t).xdot).max_abs() < 1e-13);
                let h = 1e-4;
                let fd = (clock.state(t + h).x - clock.state(t - h).x) / (2.0 * h);
                assert!((fd - v).max_abs() < 1e-7);
                let fd = (clock.derivatives(t + h)[0] - clock.derivatives(t - h)[0]) / (2.0 * h);
                assert!((fd - a).max_abs() < 1e-7);
                let fd = (clock.derivatives(t + h)[1] - clock.derivatives(t - h)[1]) / (2.0 * h);
                assert!((fd - j).max_abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_non_cm_state() {
        let params = ClockParams::unit();
        let seed = default_seed(&params).rescale_pointer(2.0);
        assert!(matches!(propagate_exact(&seed, 1.0, &params), Err(Error::InvalidArgument(_))));
    }
}
