//! Flat-spacetime vector algebra with signature (+,-,-,-), geometric units.
//!
//! Components are contravariant. The Levi-Civita symbol is fixed by
//! `eps^{0123} = +1`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Minkowski metric diagonal.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Relative tolerance of the nullness test in [`stereographic`].
pub const NULL_TOLERANCE: f64 = 1e-9;

/// Contravariant four-vector `(c0, c1, c2, c3)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub const fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        FourVector([c0, c1, c2, c3])
    }

    /// Purely spatial vector `(0, v)`.
    pub const fn spatial(v: [f64; 3]) -> Self {
        FourVector([0.0, v[0], v[1], v[2]])
    }

    /// Basis vector `e_mu`.
    pub fn basis(mu: usize) -> Self {
        let mut c = [0.0; 4];
        c[mu] = 1.0;
        FourVector(c)
    }

    pub fn components(&self) -> [f64; 4] {
        self.0
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn space(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    /// Index-lowered components `eta_{mu nu} c^nu`.
    pub fn lowered(&self) -> [f64; 4] {
        let c = self.0;
        [c[0], -c[1], -c[2], -c[3]]
    }

    /// Minkowski square `<v, v>`.
    pub fn norm_sqr(&self) -> f64 {
        dot(*self, *self)
    }

    /// Largest absolute component, used as a scale for relative tolerances.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Component of `self` orthogonal to the timelike vector `p`:
    /// `v - <p, v>/<p, p> p`.
    pub fn orthogonal_to(&self, p: FourVector) -> FourVector {
        *self - p * (dot(p, *self) / dot(p, p))
    }

    pub fn to_nalgebra(self) -> Vector4<f64> {
        Vector4::from(self.0)
    }
}

impl From<[f64; 4]> for FourVector {
    fn from(c: [f64; 4]) -> Self {
        FourVector(c)
    }
}

impl From<Vector4<f64>> for FourVector {
    fn from(v: Vector4<f64>) -> Self {
        FourVector([v[0], v[1], v[2], v[3]])
    }
}

impl fmt::Display for FourVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.0;
        write!(f, "({}, {}, {}, {})", c[0], c[1], c[2], c[3])
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, mu: usize) -> &f64 {
        &self.0[mu]
    }
}

impl IndexMut<usize> for FourVector {
    fn index_mut(&mut self, mu: usize) -> &mut f64 {
        &mut self.0[mu]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl AddAssign for FourVector {
    fn add_assign(&mut self, o: FourVector) {
        *self = *self + o;
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl SubAssign for FourVector {
    fn sub_assign(&mut self, o: FourVector) {
        *self = *self - o;
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|c| -c))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector(self.0.map(|c| c * s))
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        v * self
    }
}

impl Div<f64> for FourVector {
    type Output = FourVector;
    fn div(self, s: f64) -> FourVector {
        FourVector(self.0.map(|c| c / s))
    }
}

/// Minkowski product `a0 b0 - a1 b1 - a2 b2 - a3 b3`.
pub fn dot(a: FourVector, b: FourVector) -> f64 {
    a.0[0] * b.0[0] - a.0[1] * b.0[1] - a.0[2] * b.0[2] - a.0[3] * b.0[3]
}

/// Mathisson (Pauli-Lubanski) pseudovector
/// `w^mu = eps^{mu nu rho sigma} p_nu k_rho pi_sigma`.
///
/// Expanding along the free index gives `w^mu = (-1)^mu det(M_mu)` where
/// `M_mu` is the 3x3 matrix of lowered components with column `mu` removed.
pub fn mathisson(p: FourVector, k: FourVector, pi: FourVector) -> FourVector {
    let rows = [p.lowered(), k.lowered(), pi.lowered()];
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        Matrix3::from_fn(|r, c| rows[r][cols[c]]).determinant()
    };
    FourVector([minor(0), -minor(1), minor(2), -minor(3)])
}

/// Totally antisymmetric contraction `eps_{mu nu rho sigma} a^mu b^nu c^rho d^sigma`
/// with lowered `eps_{0123} = -1`.
///
/// Equals `-<mathisson(a, b, c), d>`.
pub fn levi_civita(a: FourVector, b: FourVector, c: FourVector, d: FourVector) -> f64 {
    -Matrix4::from_columns(&[a.to_nalgebra(), b.to_nalgebra(), c.to_nalgebra(), d.to_nalgebra()]).determinant()
}

/// A 4x4 real matrix acting on contravariant components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzTransform(pub Matrix4<f64>);

impl LorentzTransform {
    pub fn identity() -> Self {
        LorentzTransform(Matrix4::identity())
    }

    /// Pure boost with the given rapidity along `axis` (normalized internally).
    pub fn boost(rapidity: f64, axis: [f64; 3]) -> Result<Self> {
        let n = unit_axis(axis)?;
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        let mut m = Matrix4::identity();
        m[(0, 0)] = ch;
        for i in 0..3 {
            m[(0, i + 1)] = sh * n[i];
            m[(i + 1, 0)] = sh * n[i];
            for j in 0..3 {
                m[(i + 1, j + 1)] += (ch - 1.0) * n[i] * n[j];
            }
        }
        Ok(LorentzTransform(m))
    }

    /// Right-handed spatial rotation by `angle` about `axis`.
    pub fn rotation(angle: f64, axis: [f64; 3]) -> Result<Self> {
        let n = unit_axis(axis)?;
        let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(n), angle);
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(1, 1).copy_from(r.matrix());
        Ok(LorentzTransform(m))
    }

    pub fn apply(&self, v: FourVector) -> FourVector {
        (self.0 * v.to_nalgebra()).into()
    }

    /// `self * other`: apply `other` first.
    pub fn compose(&self, other: &LorentzTransform) -> LorentzTransform {
        LorentzTransform(self.0 * other.0)
    }

    pub fn inverse(&self) -> LorentzTransform {
        // eta L^T eta is the exact inverse of a Lorentz matrix.
        let eta = Matrix4::from_diagonal(&Vector4::from(METRIC));
        LorentzTransform(eta * self.0.transpose() * eta)
    }

    /// Largest entry of `L^T eta L - eta`.
    pub fn metric_defect(&self) -> f64 {
        let eta = Matrix4::from_diagonal(&Vector4::from(METRIC));
        (self.0.transpose() * eta * self.0 - eta).amax()
    }
}

impl Mul for LorentzTransform {
    type Output = LorentzTransform;
    fn mul(self, o: LorentzTransform) -> LorentzTransform {
        self.compose(&o)
    }
}

/// Free-function forms kept for symmetry with the rest of the API.
pub fn boost(rapidity: f64, axis: [f64; 3]) -> Result<LorentzTransform> {
    LorentzTransform::boost(rapidity, axis)
}

pub fn rotate(angle: f64, axis: [f64; 3]) -> Result<LorentzTransform> {
    LorentzTransform::rotation(angle, axis)
}

pub fn apply(lt: &LorentzTransform, v: FourVector) -> FourVector {
    lt.apply(v)
}

fn unit_axis(axis: [f64; 3]) -> Result<Vector3<f64>> {
    let v = Vector3::from(axis);
    let n = v.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument(format!("axis {axis:?} must be a nonzero finite 3-vector")));
    }
    Ok(v / n)
}

/// Homogeneous point `(alpha : beta)` of the extended complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl ProjectivePoint {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        if alpha.norm_sqr() == 0.0 && beta.norm_sqr() == 0.0 {
            return Err(Error::InvalidArgument("projective point needs a nonzero coordinate".into()));
        }
        Ok(ProjectivePoint { alpha, beta })
    }

    /// The finite point `z`, i.e. `(z : 1)`.
    pub fn finite(z: Complex64) -> Self {
        ProjectivePoint { alpha: z, beta: Complex64::new(1.0, 0.0) }
    }

    pub fn infinity() -> Self {
        ProjectivePoint { alpha: Complex64::new(1.0, 0.0), beta: Complex64::new(0.0, 0.0) }
    }

    pub fn norm(&self) -> f64 {
        (self.alpha.norm_sqr() + self.beta.norm_sqr()).sqrt()
    }

    /// `alpha / beta`, or `None` at infinity.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.beta.norm() <= 1e-300 * self.alpha.norm() || self.beta.norm_sqr() == 0.0 {
            None
        } else {
            Some(self.alpha / self.beta)
        }
    }

    /// Projective equality within a relative tolerance.
    pub fn approx_eq(&self, other: &ProjectivePoint, tol: f64) -> bool {
        bracket(self, other).norm() <= tol * self.norm() * other.norm()
    }
}

/// Homogeneous determinant `alpha_a beta_b - beta_a alpha_b`.
fn bracket(a: &ProjectivePoint, b: &ProjectivePoint) -> Complex64 {
    a.alpha * b.beta - a.beta * b.alpha
}

/// Stereographic image of a future-pointing null direction, projecting the
/// celestial sphere from its north pole: `kappa = (k1 + i k2) / (k0 - k3)`.
///
/// Both homogeneous charts `(k1 + i k2 : k0 - k3)` and `(k0 + k3 : k1 - i k2)`
/// are formed and the one with the larger norm is returned.
pub fn stereographic(k: FourVector) -> Result<ProjectivePoint> {
    let scale = k.max_abs().max(f64::MIN_POSITIVE);
    let kk = k.norm_sqr();
    if !k.is_finite() || kk.abs() > NULL_TOLERANCE * k[0] * k[0] || k[0] <= 0.0 {
        return Err(Error::ConstraintViolation {
            what: "stereographic map needs a future-pointing null vector",
            residual: kk / (scale * scale),
        });
    }
    let south = ProjectivePoint { alpha: Complex64::new(k[1], k[2]), beta: Complex64::new(k[0] - k[3], 0.0) };
    let north = ProjectivePoint { alpha: Complex64::new(k[0] + k[3], 0.0), beta: Complex64::new(k[1], -k[2]) };
    Ok(if south.norm() >= north.norm() { south } else { north })
}

/// Relative tolerance below which two points count as coincident in
/// [`cross_ratio`].
pub const COINCIDENCE_TOLERANCE: f64 = 1e-12;

/// Cross-ratio `((a - c)/(a - d)) * ((b - d)/(b - c))` in homogeneous form.
///
/// Sends `a -> 0` at `c`, `a -> inf` at `d` and `a -> 1` at `b`.
pub fn cross_ratio(
    a: &ProjectivePoint,
    b: &ProjectivePoint,
    c: &ProjectivePoint,
    d: &ProjectivePoint,
) -> Result<Complex64> {
    let pairs = [(a, c, "a,c"), (a, d, "a,d"), (b, c, "b,c"), (b, d, "b,d")];
    for (x, y, name) in pairs {
        if x.approx_eq(y, COINCIDENCE_TOLERANCE) {
            return Err(Error::DegenerateConfiguration(format!("points {name} coincide")));
        }
    }
    Ok(bracket(a, c) * bracket(b, d) / (bracket(a, d) * bracket(b, c)))
}
