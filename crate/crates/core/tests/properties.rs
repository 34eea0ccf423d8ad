mod common;

use common::{gram_casimir, hodge3, max_abs, mdot, stereo};
use ideal_clock::chronometry::{frenet_exact, phase_of_points};
use ideal_clock::dynamics::{project_onto_shell, FreeClock};
use ideal_clock::minkowski::{cross_ratio, dot, levi_civita, mathisson, stereographic};
use ideal_clock::state::{constraints, random_lorentz, random_unit, sample_on_shell, seed_cm_state, transform_state};
use ideal_clock::{ClockParams, FourVector, LorentzTransform, Sigma};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vec4(r: &mut ChaCha8Rng, s: f64) -> FourVector {
    FourVector::new(r.random_range(-s..s), r.random_range(-s..s), r.random_range(-s..s), r.random_range(-s..s))
}

fn null_dir(r: &mut ChaCha8Rng) -> FourVector {
    let n = random_unit(r);
    let e = r.random_range(0.2..5.0);
    FourVector::new(e, e * n[0], e * n[1], e * n[2])
}

fn params(r: &mut ChaCha8Rng) -> ClockParams {
    let sigma = if r.random_bool(0.5) { Sigma::Plus } else { Sigma::Minus };
    ClockParams::new(r.random_range(0.3..3.0), r.random_range(0.3..3.0), sigma).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dot_is_lorentz_invariant(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let lt = random_lorentz(&mut r, 2.0);
        let (a, b) = (vec4(&mut r, 3.0), vec4(&mut r, 3.0));
        let scale = max_abs(lt.apply(a)) * max_abs(lt.apply(b));
        prop_assert!((dot(lt.apply(a), lt.apply(b)) - mdot(a, b)).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn composed_transforms_stay_in_the_group(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut lt = LorentzTransform::identity();
        for _ in 0..100 {
            lt = lt.compose(&random_lorentz(&mut r, 0.3));
        }
        let scale = lt.0.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        prop_assert!(lt.metric_defect() <= 1e-10 * scale * scale, "defect {}", lt.metric_defect());
    }

    #[test]
    fn stereographic_matches_chart(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let k = null_dir(&mut r);
        let got = stereographic(k).unwrap().to_complex();
        match (got, stereo(k)) {
            (Some(a), Some(b)) => prop_assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0)),
            (a, b) => prop_assert!(false, "chart mismatch {a:?} vs {b:?}"),
        }
        // scaling k does not move its image
        let again = stereographic(k * 3.7).unwrap();
        prop_assert!(again.approx_eq(&stereographic(k).unwrap(), 1e-12));
    }

    #[test]
    fn cross_ratio_is_lorentz_invariant(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let ks: Vec<FourVector> = (0..4).map(|_| null_dir(&mut r)).collect();
        let lt = random_lorentz(&mut r, 1.5);
        let img = |k: FourVector| stereographic(k).unwrap();
        let cr = |f: &dyn Fn(FourVector) -> FourVector| {
            cross_ratio(&img(f(ks[0])), &img(f(ks[1])), &img(f(ks[2])), &img(f(ks[3])))
        };
        let (Ok(a), Ok(b)) = (cr(&|k| k), cr(&|k| lt.apply(k))) else {
            return Err(TestCaseError::reject("coincident directions"));
        };
        prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn cross_ratio_matches_affine_formula(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<num_complex::Complex64> =
            (0..4).map(|_| num_complex::Complex64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0))).collect();
        let pts: Vec<_> = z.iter().map(|&z| ideal_clock::ProjectivePoint::finite(z)).collect();
        let got = cross_ratio(&pts[0], &pts[1], &pts[2], &pts[3]).unwrap();
        let want = (z[0] - z[2]) / (z[0] - z[3]) * ((z[1] - z[3]) / (z[1] - z[2]));
        prop_assert!((got - want).norm() <= 1e-9 * want.norm().max(1.0));
    }

    #[test]
    fn mathisson_matches_levi_civita_sum(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c, d) = (vec4(&mut r, 2.0), vec4(&mut r, 2.0), vec4(&mut r, 2.0), vec4(&mut r, 2.0));
        let w = mathisson(a, b, c);
        prop_assert!(max_abs(w - hodge3(a, b, c)) <= 1e-12 * max_abs(w).max(1.0));
        for v in [a, b, c] {
            prop_assert!(dot(w, v).abs() <= 1e-12 * (max_abs(w) * max_abs(v)).max(1.0));
        }
        prop_assert!((levi_civita(a, b, c, d) + mdot(hodge3(a, b, c), d)).abs() <= 1e-11);
        prop_assert!((dot(w, w) - gram_casimir(a, b, c)).abs() <= 1e-10 * dot(w, w).abs().max(1.0));
    }

    #[test]
    fn sampled_states_are_on_shell(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = params(&mut r);
        let pt = sample_on_shell(&mut r, &p);
        prop_assert!(constraints(&pt, &p).max_relative_violation <= 1e-10);
        let w = pt.spin();
        prop_assert!((mdot(w, w) - gram_casimir(pt.p, pt.k, pt.pi)).abs() <= 1e-10 * mdot(w, w).abs());
    }

    #[test]
    fn projection_restores_shell_and_keeps_x(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = params(&mut r);
        let mut pt = sample_on_shell(&mut r, &p);
        let x = pt.x;
        pt.p = pt.p + vec4(&mut r, 1e-6 * p.mass);
        pt.k = pt.k + vec4(&mut r, 1e-6);
        pt.pi = pt.pi + vec4(&mut r, 1e-6 * p.mass * p.length);
        let (back, _) = project_onto_shell(&pt, &p).unwrap();
        prop_assert!(constraints(&back, &p).max_relative_violation <= 1e-12);
        prop_assert_eq!(back.x, x);
    }

    #[test]
    fn curvature_is_four_over_ell_squared(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = params(&mut r);
        let n = random_unit(&mut r);
        let a = random_unit(&mut r);
        let an: f64 = (0..3).map(|i| a[i] * n[i]).sum();
        let t = [a[0] - an * n[0], a[1] - an * n[1], a[2] - an * n[2]];
        let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        prop_assume!(tn > 1e-3);
        let t = t.map(|c| c / tn);
        let seed_pt = transform_state(&seed_cm_state(&p, n, t).unwrap(), &random_lorentz(&mut r, 1.0), vec4(&mut r, 1.0));
        let clock = FreeClock::new(&seed_pt, &p).unwrap();
        let tau = r.random_range(0.0..10.0);
        let f = frenet_exact(&clock, tau).unwrap();
        prop_assert!((f.curvature * p.length * p.length / 4.0 - 1.0).abs() <= 1e-9, "{}", f.curvature);
        prop_assert!(f.torsion_proxy <= 1e-8);
        prop_assert!((clock.transverse_radius(tau) - p.length / 2.0).abs() <= 1e-10 * p.length);
    }

    #[test]
    fn phase_does_not_depend_on_sampling(seed in any::<u64>()) {
        // the same arc sampled at two densities ends on the same phase
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = params(&mut r);
        let seed_pt = transform_state(&seed_cm_state(&p, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).unwrap(), &random_lorentz(&mut r, 1.0), FourVector::ZERO);
        let clock = FreeClock::new(&seed_pt, &p).unwrap();
        let end = r.random_range(0.5..3.0) * p.cycle_period();
        let sample = |n: usize| -> Vec<_> { (0..=n).map(|i| clock.state(end * i as f64 / n as f64)).collect() };
        let coarse = phase_of_points(&sample(200)).unwrap();
        let fine = phase_of_points(&sample(1000)).unwrap();
        let expected = -p.sigma.value() * 2.0 * end / p.length;
        prop_assert!((coarse.last().unwrap().0 - fine.last().unwrap().0).abs() <= 1e-9);
        prop_assert!((fine.last().unwrap().0 - expected).abs() <= 1e-9);
    }
}
