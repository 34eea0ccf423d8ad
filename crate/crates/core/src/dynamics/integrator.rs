//! Classic RK4 on the Hamiltonian vector field, with optional Newton
//! projection back onto the constraint surface after each step.

use nalgebra::{Matrix4, SMatrix, SVector, Vector4};
use serde::{Deserialize, Serialize};

use super::bracket::{Constraint, Observable};
use super::{eom, MultiplierPolicy, Multipliers};
use crate::minkowski::{FourVector, LorentzTransform};
use crate::state::{constraints, transform_state, ClockParams, ConstraintReport, PhaseSpacePoint};
use crate::{Error, Result};

/// Relative residual the projection restores.
pub const PROJECTION_TOLERANCE: f64 = 1e-12;

/// Newton iterations allowed per step.
const MAX_NEWTON: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    On,
    Off,
}

impl Projection {
    pub fn is_on(self) -> bool {
        self == Projection::On
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub tau: f64,
    pub point: PhaseSpacePoint,
    pub report: ConstraintReport,
}

/// Sampled worldline with the settings that produced it.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub params: ClockParams,
    pub policy: MultiplierPolicy,
    pub integrator: String,
    pub dt: f64,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    /// Builds a trajectory from raw points, evaluating every report.
    /// Parameter values must be strictly increasing.
    pub fn from_points(
        params: ClockParams,
        policy: MultiplierPolicy,
        integrator: impl Into<String>,
        points: impl IntoIterator<Item = (f64, PhaseSpacePoint)>,
    ) -> Result<Self> {
        let samples: Vec<TrajectorySample> = points
            .into_iter()
            .map(|(tau, point)| TrajectorySample { tau, point, report: constraints(&point, &params) })
            .collect();
        if let Some(w) = samples.windows(2).find(|w| !(w[1].tau > w[0].tau)) {
            return Err(Error::InvalidArgument(format!(
                "parameter values must increase strictly ({} then {})",
                w[0].tau, w[1].tau
            )));
        }
        let dt = if samples.len() > 1 { samples[1].tau - samples[0].tau } else { 0.0 };
        Ok(Trajectory { params, policy, integrator: integrator.into(), dt, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&TrajectorySample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    pub fn taus(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.tau).collect()
    }

    pub fn points(&self) -> Vec<PhaseSpacePoint> {
        self.samples.iter().map(|s| s.point).collect()
    }

    /// Maximum relative constraint violation at each sample.
    pub fn drift_curve(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.report.max_relative_violation).collect()
    }

    /// Running maximum of [`Trajectory::drift_curve`].
    pub fn drift_envelope(&self) -> Vec<f64> {
        let mut acc = 0.0f64;
        self.drift_curve()
            .into_iter()
            .map(|d| {
                acc = acc.max(d);
                acc
            })
            .collect()
    }

    pub fn max_violation(&self) -> f64 {
        self.drift_curve().into_iter().fold(0.0, f64::max)
    }

    /// The same worldline seen from another inertial frame.
    pub fn transformed(&self, lt: &LorentzTransform, shift: FourVector) -> Trajectory {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.point = transform_state(&s.point, lt, shift);
            s.report = constraints(&s.point, &self.params);
        }
        out
    }

    /// Samples `start..=end` as a new trajectory.
    pub fn window(&self, start: usize, end: usize) -> Trajectory {
        Trajectory { samples: self.samples[start..=end].to_vec(), ..self.clone() }
    }
}

fn rk4_step(pt: &PhaseSpacePoint, u: &Multipliers, params: &ClockParams, h: f64) -> PhaseSpacePoint {
    let k1 = eom(pt, u, params);
    let k2 = eom(&pt.advanced(&k1, h / 2.0), u, params);
    let k3 = eom(&pt.advanced(&k2, h / 2.0), u, params);
    let k4 = eom(&pt.advanced(&k3, h), u, params);
    let mut next = *pt;
    for (t, w) in [(k1, 1.0), (k2, 2.0), (k3, 2.0), (k4, 1.0)] {
        next = next.advanced(&t, h * w / 6.0);
    }
    next
}

/// Minimal-norm Newton restoration of `psi_1..psi_4`, moving only
/// `(p, k, pi)`. Returns the projected point and the iteration count.
pub fn project_onto_shell(pt: &PhaseSpacePoint, params: &ClockParams) -> Result<(PhaseSpacePoint, usize)> {
    project_at_step(pt, params, 0)
}

fn project_at_step(pt: &PhaseSpacePoint, params: &ClockParams, step: usize) -> Result<(PhaseSpacePoint, usize)> {
    let cs = Constraint::all(*params);
    let mut cur = *pt;
    let mut report = constraints(&cur, params);
    for iter in 0..=MAX_NEWTON {
        if report.max_relative_violation <= PROJECTION_TOLERANCE {
            return Ok((cur, iter));
        }
        if iter == MAX_NEWTON {
            break;
        }
        let mut jac = SMatrix::<f64, 4, 12>::zeros();
        for (row, c) in cs.iter().enumerate() {
            let g = c.gradient(&cur).expect("constraints have closed-form gradients");
            let parts = [g.p.lowered(), g.k.lowered(), g.pi.lowered()];
            for (blk, d) in parts.iter().enumerate() {
                for mu in 0..4 {
                    jac[(row, 4 * blk + mu)] = d[mu];
                }
            }
        }
        let psi = Vector4::from(report.residuals());
        let gram: Matrix4<f64> = jac * jac.transpose();
        let Some(lambda) = gram.lu().solve(&psi) else {
            return Err(Error::ProjectionFailure { step, residual: report.max_relative_violation });
        };
        let dz: SVector<f64, 12> = jac.transpose() * lambda;
        let mut z = cur.momentum_block();
        for (zi, d) in z.iter_mut().zip(dz.iter()) {
            *zi -= d;
        }
        cur = cur.with_momentum_block(&z);
        report = constraints(&cur, params);
    }
    Err(Error::ProjectionFailure { step, residual: report.max_relative_violation })
}

/// Integrates `steps` RK4 steps of size `dt` from `pt0`.
pub fn integrate(
    pt0: &PhaseSpacePoint,
    params: &ClockParams,
    policy: MultiplierPolicy,
    dt: f64,
    steps: usize,
    projection: Projection,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let u = policy.multipliers(params);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut cur = *pt0;
    samples.push(TrajectorySample { tau: 0.0, point: cur, report: constraints(&cur, params) });
    for i in 1..=steps {
        cur = rk4_step(&cur, &u, params, dt);
        if projection.is_on() {
            cur = project_at_step(&cur, params, i)?.0;
        }
        if !cur.is_finite() {
            return Err(Error::InvalidArgument(format!("state became non-finite at step {i}")));
        }
        samples.push(TrajectorySample { tau: i as f64 * dt, point: cur, report: constraints(&cur, params) });
    }
    let name = if projection.is_on() { "rk4+projection" } else { "rk4" };
    Ok(Trajectory { params: *params, policy, integrator: name.to_string(), dt, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::propagate_exact;
    use crate::state::{default_seed, sample_on_shell, Sigma};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_steps() {
        let params = ClockParams::unit();
        let seed = default_seed(&params);
        let tr = integrate(&seed, &params, MultiplierPolicy::CmGauge, 1e-3, 0, Projection::On).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.samples[0].point, seed);
    }

    #[test]
    fn rk4_matches_exact_propagator() {
        for sigma in [Sigma::Plus, Sigma::Minus] {
            let params = ClockParams::unit().with_sigma(sigma);
            let seed = default_seed(&params);
            let tr = integrate(&seed, &params, MultiplierPolicy::CmGauge, 1e-3, 1000, Projection::Off).unwrap();
            let exact = propagate_exact(&seed, 1.0, &params).unwrap();
            let end = tr.last().unwrap().point;
            let err = [end.x - exact.x, end.p - exact.p, end.k - exact.k, end.pi - exact.pi]
                .iter()
                .map(|v| v.max_abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-9, "sigma {sigma:?}: {err:e}");
        }
    }

    #[test]
    fn projection_restores_perturbed_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let params = ClockParams::new(1.2, 0.8, Sigma::Plus).unwrap();
        for _ in 0..50 {
            let mut pt = sample_on_shell(&mut rng, &params);
            pt.k[1] += 1e-6;
            pt.pi[2] -= 1e-6;
            pt.p[0] += 1e-6;
            let (proj, iters) = project_onto_shell(&pt, &params).unwrap();
            assert!(iters >= 1);
            assert!(constraints(&proj, &params).max_relative_violation <= PROJECTION_TOLERANCE);
            assert_eq!(proj.x, pt.x);
        }
    }

    #[test]
    fn projection_keeps_constraints_tight() {
        let params = ClockParams::unit();
        let seed = default_seed(&params);
        let u = Multipliers::new(2.0, 1.0, 0.3, 0.1);
        let on = integrate(&seed, &params, MultiplierPolicy::Constant(u), 1e-2, 2000, Projection::On).unwrap();
        assert!(on.max_violation() <= 1e-11);
        let off = integrate(&seed, &params, MultiplierPolicy::Constant(u), 1e-2, 2000, Projection::Off).unwrap();
        assert!(off.max_violation() > on.max_violation());
        let env = off.drift_envelope();
        assert!(env.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rejects_bad_step() {
        let params = ClockParams::unit();
        let seed = default_seed(&params);
        assert!(integrate(&seed, &params, MultiplierPolicy::CmGauge, 0.0, 10, Projection::On).is_err());
    }
}
