//! Poisson bracket on `(x, p, k, pi)`:
//!
//! ```text
//! {U,V} = <dU/dx, dV/dp> - <dU/dp, dV/dx> + <dU/dk, dV/dpi> - <dU/dpi, dV/dk>
//! ```
//!
//! Gradients are stored index-raised ("Minkowski gradients"), so that
//! `{x^mu, p^nu} = eta^{mu nu}` and the closed-form velocities are the
//! gradients of `H` themselves.

use nalgebra::Matrix3;

use super::{Multipliers, Tangent};
use crate::minkowski::{dot, FourVector, METRIC};
use crate::state::{ClockParams, PhaseSpacePoint};

/// One of the four vector slots of a phase-space point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    X,
    P,
    K,
    Pi,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::X, Slot::P, Slot::K, Slot::Pi];

    fn get(self, pt: &PhaseSpacePoint) -> FourVector {
        match self {
            Slot::X => pt.x,
            Slot::P => pt.p,
            Slot::K => pt.k,
            Slot::Pi => pt.pi,
        }
    }

    fn get_mut(self, pt: &mut PhaseSpacePoint) -> &mut FourVector {
        match self {
            Slot::X => &mut pt.x,
            Slot::P => &mut pt.p,
            Slot::K => &mut pt.k,
            Slot::Pi => &mut pt.pi,
        }
    }
}

/// Index-raised gradient of a scalar function on phase space.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseGradient {
    pub x: FourVector,
    pub p: FourVector,
    pub k: FourVector,
    pub pi: FourVector,
}

impl PhaseGradient {
    pub fn slot(&self, s: Slot) -> FourVector {
        match s {
            Slot::X => self.x,
            Slot::P => self.p,
            Slot::K => self.k,
            Slot::Pi => self.pi,
        }
    }

    fn slot_mut(&mut self, s: Slot) -> &mut FourVector {
        match s {
            Slot::X => &mut self.x,
            Slot::P => &mut self.p,
            Slot::K => &mut self.k,
            Slot::Pi => &mut self.pi,
        }
    }

    /// Plain partial derivatives `dU/dz^mu` of one slot (index lowered).
    pub fn partials(&self, s: Slot) -> [f64; 4] {
        self.slot(s).lowered()
    }

    /// Hamiltonian vector field generated by this function.
    pub fn flow(&self) -> Tangent {
        Tangent { xdot: self.p, pdot: -self.x, kdot: self.pi, pidot: -self.k }
    }

    pub fn max_abs_diff(&self, other: &PhaseGradient) -> f64 {
        Slot::ALL.iter().map(|&s| (self.slot(s) - other.slot(s)).max_abs()).fold(0.0, f64::max)
    }
}

/// Scalar function on phase space.
///
/// Implementors without a closed-form gradient return `None` and are
/// differentiated numerically by [`poisson`].
pub trait Observable {
    fn value(&self, pt: &PhaseSpacePoint) -> f64;

    fn gradient(&self, _pt: &PhaseSpacePoint) -> Option<PhaseGradient> {
        None
    }
}

/// Closure observable, always differentiated numerically.
pub struct FnObservable<F>(pub F);

impl<F: Fn(&PhaseSpacePoint) -> f64> Observable for FnObservable<F> {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        (self.0)(pt)
    }
}

/// A single component `z^mu` of one slot.
#[derive(Clone, Copy, Debug)]
pub struct Coordinate {
    pub slot: Slot,
    pub index: usize,
}

impl Coordinate {
    pub fn new(slot: Slot, index: usize) -> Self {
        assert!(index < 4, "four-vector index out of range: {index}");
        Coordinate { slot, index }
    }
}

impl Observable for Coordinate {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        self.slot.get(pt)[self.index]
    }

    fn gradient(&self, _pt: &PhaseSpacePoint) -> Option<PhaseGradient> {
        let mut g = PhaseGradient::default();
        g.slot_mut(self.slot)[self.index] = METRIC[self.index];
        Some(g)
    }
}

/// Constraint function `psi_i`, `i` in `1..=4`.
#[derive(Clone, Copy, Debug)]
pub struct Constraint {
    pub index: usize,
    pub params: ClockParams,
}

impl Constraint {
    pub fn new(index: usize, params: ClockParams) -> Self {
        assert!((1..=4).contains(&index), "constraint index must be 1..=4, got {index}");
        Constraint { index, params }
    }

    pub fn all(params: ClockParams) -> [Constraint; 4] {
        std::array::from_fn(|i| Constraint::new(i + 1, params))
    }
}

/// Gradient of `<w,w> = -det Gram(p, k, pi)`: for each vector `a_i` of the
/// triple, `-2 sum_j C_ij a_j` with `C` the cofactor matrix of the Gram matrix.
fn spin_casimir_gradient(pt: &PhaseSpacePoint) -> [FourVector; 3] {
    let a = [pt.p, pt.k, pt.pi];
    let g = Matrix3::from_fn(|i, j| dot(a[i], a[j]));
    let cof = |i: usize, j: usize| {
        let r: Vec<usize> = (0..3).filter(|&r| r != i).collect();
        let c: Vec<usize> = (0..3).filter(|&c| c != j).collect();
        let minor = g[(r[0], c[0])] * g[(r[1], c[1])] - g[(r[0], c[1])] * g[(r[1], c[0])];
        if (i + j) % 2 == 0 {
            minor
        } else {
            -minor
        }
    };
    std::array::from_fn(|i| (0..3).fold(FourVector::ZERO, |acc, j| acc + a[j] * (-2.0 * cof(i, j))))
}

impl Observable for Constraint {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        let r = crate::state::constraints(pt, &self.params);
        r.residuals()[self.index - 1]
    }

    fn gradient(&self, pt: &PhaseSpacePoint) -> Option<PhaseGradient> {
        let mut g = PhaseGradient::default();
        match self.index {
            1 => g.p = pt.p * 2.0,
            2 => {
                let [gp, gk, gpi] = spin_casimir_gradient(pt);
                g.p = gp;
                g.k = gk;
                g.pi = gpi;
            }
            3 => {
                g.k = pt.pi;
                g.pi = pt.k;
            }
            _ => g.k = pt.k * 2.0,
        }
        Some(g)
    }
}

/// The Hamiltonian for fixed multipliers, with its closed-form gradient.
#[derive(Clone, Copy, Debug)]
pub struct HamiltonianObservable {
    pub u: Multipliers,
    pub params: ClockParams,
}

impl Observable for HamiltonianObservable {
    fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        super::hamiltonian(pt, &self.u, &self.params)
    }

    fn gradient(&self, pt: &PhaseSpacePoint) -> Option<PhaseGradient> {
        let m = self.params.mass;
        let l = self.params.length;
        let u = self.u;
        let a = 4.0 / (l * l * m * m);
        let kp = pt.kp();
        let pipi = dot(pt.pi, pt.pi);
        Some(PhaseGradient {
            x: FourVector::ZERO,
            p: pt.p * ((u.u1 + u.u2) / m) + pt.k * (u.u2 / m * a * kp * pipi),
            k: pt.p * (u.u2 / m * a * kp * pipi) + pt.pi * u.u3 + pt.k * (2.0 * u.u4),
            pi: pt.pi * (u.u2 / m * a * kp * kp) + pt.k * u.u3,
        })
    }
}

/// Relative step of the central differences in [`numeric_gradient`].
pub const GRADIENT_STEP: f64 = 1e-6;

/// Central-difference gradient with one Richardson extrapolation,
/// `(4 D(h/2) - D(h)) / 3` with `h = 1e-6 * scale` per slot.
pub fn numeric_gradient<O: Observable + ?Sized>(obs: &O, pt: &PhaseSpacePoint) -> PhaseGradient {
    let mut g = PhaseGradient::default();
    for slot in Slot::ALL {
        let scale = slot.get(pt).max_abs().max(1.0);
        let h = GRADIENT_STEP * scale;
        for mu in 0..4 {
            let central = |h: f64| {
                let mut plus = *pt;
                slot.get_mut(&mut plus)[mu] += h;
                let mut minus = *pt;
                slot.get_mut(&mut minus)[mu] -= h;
                (obs.value(&plus) - obs.value(&minus)) / (2.0 * h)
            };
            let d = (4.0 * central(h / 2.0) - central(h)) / 3.0;
            g.slot_mut(slot)[mu] = METRIC[mu] * d;
        }
    }
    g
}

fn bracket_of(gu: &PhaseGradient, gv: &PhaseGradient) -> f64 {
    dot(gu.x, gv.p) - dot(gu.p, gv.x) + dot(gu.k, gv.pi) - dot(gu.pi, gv.k)
}

/// `{U, V}` at `pt`, using closed-form gradients where available.
pub fn poisson<U, V>(u: &U, v: &V, pt: &PhaseSpacePoint) -> f64
where
    U: Observable + ?Sized,
    V: Observable + ?Sized,
{
    let gu = u.gradient(pt).unwrap_or_else(|| numeric_gradient(u, pt));
    let gv = v.gradient(pt).unwrap_or_else(|| numeric_gradient(v, pt));
    bracket_of(&gu, &gv)
}

/// `{U, V}` with both gradients taken numerically.
pub fn poisson_numeric<U, V>(u: &U, v: &V, pt: &PhaseSpacePoint) -> f64
where
    U: Observable + ?Sized,
    V: Observable + ?Sized,
{
    bracket_of(&numeric_gradient(u, pt), &numeric_gradient(v, pt))
}
