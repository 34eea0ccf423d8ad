//! Shared fixtures for the benchmarks.

use ideal_clock::dynamics::exact_trajectory;
use ideal_clock::state::{default_seed, seed_cm_state, transform_state};
use ideal_clock::{ClockParams, FourVector, LorentzTransform, PhaseSpacePoint, Sigma, Trajectory};

pub fn params(sigma: Sigma) -> ClockParams {
    ClockParams::unit().with_sigma(sigma)
}

/// The canonical rest-frame seed.
pub fn rest_seed(sigma: Sigma) -> PhaseSpacePoint {
    default_seed(&params(sigma))
}

/// A tilted seed seen from a moving frame, so no component is trivially zero.
pub fn boosted_seed(sigma: Sigma) -> PhaseSpacePoint {
    let s = 0.5f64.sqrt();
    let pt = seed_cm_state(&params(sigma), [s, 0.0, s], [0.0, 1.0, 0.0]).expect("orthonormal");
    let lt = LorentzTransform::boost(0.8, [1.0, 2.0, -0.5]).expect("axis");
    transform_state(&pt, &lt, FourVector::new(0.3, -1.0, 2.0, 0.5))
}

/// `cycles` clocking cycles from the exact propagator at dt = ell/1000.
pub fn exact_cycles(sigma: Sigma, cycles: f64) -> Trajectory {
    let p = params(sigma);
    let dt = p.length / 1000.0;
    let steps = (cycles * p.cycle_period() / dt).ceil() as usize;
    exact_trajectory(&boosted_seed(sigma), &p, dt, steps).expect("on-shell CM seed")
}
