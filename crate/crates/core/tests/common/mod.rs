//! Reference implementations used as oracles by the integration tests.
//! Each one is written from the defining formula, without going through the
//! library routine it checks.
#![allow(dead_code)]

use std::f64::consts::PI;

use ideal_clock::FourVector;
use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

pub fn mdot(a: FourVector, b: FourVector) -> f64 {
    (0..4).map(|i| ETA[i] * a[i] * b[i]).sum()
}

/// Sign of the permutation `(a, b, c, d)` of `(0, 1, 2, 3)`, zero on repeats.
pub fn epsilon(idx: [usize; 4]) -> f64 {
    let mut v = idx;
    for i in 0..4 {
        for j in i + 1..4 {
            if v[i] == v[j] {
                return 0.0;
            }
        }
    }
    let mut sign = 1.0;
    for i in 0..4 {
        for j in 0..3 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    sign
}

/// `w^mu = eps^{mu nu rho sigma} a_nu b_rho c_sigma`, `eps^{0123} = +1`,
/// as an explicit sum over all index quadruples.
pub fn hodge3(a: FourVector, b: FourVector, c: FourVector) -> FourVector {
    let low = |v: FourVector| [v[0], -v[1], -v[2], -v[3]];
    let (a, b, c) = (low(a), low(b), low(c));
    let mut w = [0.0; 4];
    for (mu, wm) in w.iter_mut().enumerate() {
        for nu in 0..4 {
            for rho in 0..4 {
                for sg in 0..4 {
                    let e = epsilon([mu, nu, rho, sg]);
                    if e != 0.0 {
                        *wm += e * a[nu] * b[rho] * c[sg];
                    }
                }
            }
        }
    }
    FourVector(w)
}

/// `<w,w>` as minus the Gram determinant of `(p, k, pi)`.
pub fn gram_casimir(p: FourVector, k: FourVector, pi: FourVector) -> f64 {
    let v = [p, k, pi];
    -Matrix3::from_fn(|i, j| mdot(v[i], v[j])).determinant()
}

/// North-pole stereographic coordinate, `None` at the pole.
pub fn stereo(k: FourVector) -> Option<Complex64> {
    let d = k[0] - k[3];
    if d.abs() < 1e-300 {
        None
    } else {
        Some(Complex64::new(k[1], k[2]) / d)
    }
}

/// Phase by the literal logarithmic formula against the initial image,
/// unwrapped by removing `2 pi` jumps.
pub fn phase_oracle(ks: &[FourVector], kplus: FourVector, kminus: FourVector) -> Vec<f64> {
    // a fixed point at infinity drops its two factors from the cross-ratio
    let zp = stereo(kplus);
    let zm = stereo(kminus);
    let z0 = stereo(ks[0]).expect("finite kappa0");
    let mut out = Vec::with_capacity(ks.len());
    let mut prev_raw = 0.0;
    let mut offset = 0.0;
    for (i, k) in ks.iter().enumerate() {
        let z = stereo(*k).expect("finite kappa");
        let one = Complex64::new(1.0, 0.0);
        let (np, dp) = zp.map_or((one, one), |zp| (z - zp, z0 - zp));
        let (nm, dm) = zm.map_or((one, one), |zm| (z - zm, z0 - zm));
        let cr = np / nm * (dm / dp);
        let raw = (Complex64::i() * cr.ln()).re;
        if i > 0 {
            let jump = raw - prev_raw;
            if jump > PI {
                offset -= 2.0 * PI;
            } else if jump < -PI {
                offset += 2.0 * PI;
            }
        }
        prev_raw = raw;
        out.push(raw + offset);
    }
    out
}

/// Central-difference Jacobian of `f: R^n -> R^m`.
pub fn numeric_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> DMatrix<f64> {
    let m = f(x).len();
    let n = x.len();
    let mut j = DMatrix::zeros(m, n);
    for c in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[c] += h;
        xm[c] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        for r in 0..m {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    j
}

/// Number of singular values above `rel_tol` times the largest.
pub fn numeric_rank(j: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = j.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// The velocity scalars `(xx, kx, kdx, kdkd)` written out term by term from
/// the map in momentum variables `(u1, u2, u3, kp, p_pi)`.
pub fn scalar_map_oracle(z: &[f64], m: f64, l: f64) -> Vec<f64> {
    let (u1, u2, u3, kp, ppi) = (z[0], z[1], z[2], z[3], z[4]);
    vec![
        u1 * u1 - u2 * u2,
        kp * (u1 + u2) / m,
        kp * (u1 + u2) / m * (4.0 * kp * ppi * u2 / (m * m * m * l * l) + u3),
        -4.0 * kp * kp * u2 * u2 / (l * l * m * m),
    ]
}

pub fn max_abs(v: FourVector) -> f64 {
    v.0.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}
