use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gaitlink::agents::{GaitPattern, Teacher, TeacherSource, TeacherSpec};
use gaitlink::analysis::{normalize, GRID};
use gaitlink::exo::kinematics::{foot_clearance, foot_clearance_on};
use gaitlink::exo::plant::kinetic_energy;
use gaitlink::exo::{gravity_compensation, step_plant, ExoParams, FrictionModel, PlantParams, PlantState, StanceState};
use gaitlink::impedance::{discretize, effective_stiffness, frequency_response, ImpedanceProfile, TrackingError};
use gaitlink::numeric::pearson;
use gaitlink::safety::RateLimiter;
use gaitlink::JointVector;

const RATE: f64 = 100.0;

fn profiles() -> impl Strategy<Value = ImpedanceProfile> {
    (10.0f64..300.0, 10.0f64..300.0, 0.5f64..5.0).prop_map(|(k_low_f, k_high_f, f_cut)| ImpedanceProfile {
        k_low_f,
        k_high_f,
        f_cut,
    })
}

fn joints(range: std::ops::Range<f64>) -> impl Strategy<Value = JointVector> {
    prop::array::uniform6(range).prop_map(JointVector)
}

fn poses() -> impl Strategy<Value = JointVector> {
    (prop::array::uniform2(-0.4f64..1.2), prop::array::uniform2(0.0f64..1.4), prop::array::uniform2(-0.4f64..0.4))
        .prop_map(|(h, k, a)| JointVector([h[0], k[0], a[0], h[1], k[1], a[1]]))
}

/// |H(e^{j w T})| of the first-order section, evaluated directly.
fn discrete_magnitude(b0: f64, b1: f64, a1: f64, f: f64) -> f64 {
    let z1 = Complex64::from_polar(1.0, -2.0 * PI * f / RATE);
    ((b0 + b1 * z1) / (1.0 + a1 * z1)).norm()
}

fn filter(profile: &ImpedanceProfile, input: &[f64]) -> Vec<f64> {
    let mut d = discretize(profile, RATE).unwrap();
    input
        .iter()
        .map(|&x| d.compute_torque(&TrackingError::new(JointVector::splat(x), JointVector::ZERO, 0.0)).unwrap()[0])
        .collect()
}

proptest! {
    #[test]
    fn magnitude_meets_both_asymptotes(p in profiles()) {
        let (dc, _) = frequency_response(&p, 1e-4 * p.f_cut);
        let (hf, _) = frequency_response(&p, 1e3 * p.f_cut);
        prop_assert!((dc - p.k_low_f).abs() <= 0.01 * p.k_low_f);
        prop_assert!((hf - p.k_high_f).abs() <= 0.01 * p.k_high_f);
    }

    #[test]
    fn magnitude_moves_monotonically_between_asymptotes(p in profiles()) {
        let mags: Vec<f64> = (0..200).map(|k| frequency_response(&p, 0.01 * 1.05f64.powi(k)).0).collect();
        let falling = p.k_high_f <= p.k_low_f;
        let monotone = mags.windows(2).all(|w| if falling { w[1] <= w[0] + 1e-9 } else { w[1] >= w[0] - 1e-9 });
        prop_assert!(monotone);
    }

    #[test]
    fn tustin_tracks_the_continuous_response(p in profiles(), f in 0.01f64..5.0) {
        let d = discretize(&p, RATE).unwrap();
        let continuous = p.transfer(Complex64::new(0.0, 2.0 * PI * f)).norm();
        let discrete = discrete_magnitude(d.b0, d.b1, d.a1, f);
        prop_assert!((discrete - continuous).abs() <= 0.02 * continuous, "{discrete} vs {continuous}");
    }

    #[test]
    fn filter_is_linear(
        p in profiles(),
        x in prop::collection::vec(-0.5f64..0.5, 50),
        y in prop::collection::vec(-0.5f64..0.5, 50),
        a in -3.0f64..3.0,
    ) {
        let mixed: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + v).collect();
        let (fx, fy, fm) = (filter(&p, &x), filter(&p, &y), filter(&p, &mixed));
        for k in 0..50 {
            prop_assert!((fm[k] - (a * fx[k] + fy[k])).abs() <= 1e-9 * (1.0 + fm[k].abs()));
        }
    }

    #[test]
    fn equal_stiffnesses_give_a_pure_gain(k in 0.0f64..300.0, f_cut in 0.1f64..10.0, x in prop::collection::vec(-1.0f64..1.0, 30)) {
        let p = ImpedanceProfile { k_low_f: k, k_high_f: k, f_cut };
        for (out, inp) in filter(&p, &x).iter().zip(&x) {
            prop_assert!((out - k * inp).abs() <= 1e-9 * (1.0 + k));
        }
    }

    #[test]
    fn rate_limiter_does_not_expand_state_differences(a in joints(-50.0..50.0), b in joints(-50.0..50.0), req in joints(-80.0..80.0)) {
        let mut la = RateLimiter::new(200.0, RATE).unwrap();
        let mut lb = la.clone();
        la.rate_limit(&a);
        lb.rate_limit(&b);
        let gap = (la.rate_limit(&req) - lb.rate_limit(&req)).max_abs();
        prop_assert!(gap <= (a - b).max_abs() + 1e-12);
    }

    #[test]
    fn double_stance_blends_affinely(q in poses(), alpha in 0.0f64..1.0) {
        let exo = ExoParams::default();
        let at = |a: f64| gravity_compensation(&q, &StanceState::DoubleStance { alpha: a }, &exo);
        let expected = at(0.0) + (at(1.0) - at(0.0)) * alpha;
        prop_assert!((at(alpha) - expected).max_abs() <= 1e-9);
    }

    #[test]
    fn pearson_is_bounded_and_affine_invariant(
        x in prop::collection::vec(-10.0f64..10.0, 3..60),
        noise in prop::collection::vec(-10.0f64..10.0, 60),
        scale in 0.1f64..10.0,
        shift in -100.0f64..100.0,
    ) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(a, n)| a + n).collect();
        if let Some(r) = pearson(&x, &y) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            let moved: Vec<f64> = y.iter().map(|v| scale * v + shift).collect();
            let r2 = pearson(&x, &moved).unwrap();
            prop_assert!((r - r2).abs() <= 1e-9);
            let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
            prop_assert!((r + pearson(&x, &flipped).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn renormalizing_a_cycle_changes_nothing(ys in prop::collection::vec(-2.0f64..2.0, 5..80), end in 0.5f64..2.0) {
        let times: Vec<f64> = (0..ys.len()).map(|k| end * k as f64 / (ys.len() - 1) as f64).collect();
        let once = normalize(&times, &ys, 0.0, end);
        let grid: Vec<f64> = (0..GRID).map(|k| k as f64 / (GRID - 1) as f64).collect();
        let twice = normalize(&grid, &once, 0.0, 1.0);
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn stiffness_of_a_pure_spring_is_its_constant(
        k in 1.0f64..400.0,
        offset in -5.0f64..5.0,
        errors in prop::collection::vec(-0.3f64..0.3, 10..200),
    ) {
        prop_assume!(errors.iter().any(|e| (e - errors[0]).abs() > 1e-3));
        let torques: Vec<f64> = errors.iter().map(|e| k * e + offset).collect();
        let fit = effective_stiffness(&errors, &torques).unwrap();
        prop_assert!((fit.slope - k).abs() <= 1e-9 * k);
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }

    #[test]
    fn unpowered_plant_never_gains_energy(
        omega in joints(-6.0..6.0),
        q in poses(),
        viscous in 0.0f64..2.0,
        coulomb in 0.0f64..5.0,
    ) {
        let plant = PlantParams { friction: FrictionModel::uniform(viscous, coulomb), ..PlantParams::default() };
        let exo = ExoParams { gravity: 0.0, ..ExoParams::default() };
        let mut s = PlantState { omega, ..PlantState::at_rest(q) };
        let mut e = kinetic_energy(&s, &plant);
        for _ in 0..500 {
            s = step_plant(&s, &JointVector::ZERO, &JointVector::ZERO, 1e-3, &plant, &exo).unwrap();
            let next = kinetic_energy(&s, &plant);
            prop_assert!(next <= e + 1e-12);
            e = next;
        }
    }

    #[test]
    fn teacher_repeats_every_stride(
        phase in -3.0f64..3.0,
        speed in 0.3f64..2.0,
        asym in prop::array::uniform3(-10.0f64..10.0),
    ) {
        let spec = TeacherSpec { asymmetry_deg: asym, initial_phase: Some(0.0), ..TeacherSpec::default() };
        let pattern = GaitPattern::for_speed(speed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let teacher = Teacher::new(spec, TeacherSource::Live(pattern), ExoParams::default(), &mut rng).unwrap();
        let d = teacher.angles_at_phase(phase + 1.0) - teacher.angles_at_phase(phase);
        prop_assert!(d.max_abs() <= 1e-9);
    }

    #[test]
    fn loaded_feet_never_sit_below_ground(q in poses(), contact in prop::array::uniform2(any::<bool>())) {
        let exo = ExoParams::default();
        for c in foot_clearance(&q, &exo) {
            prop_assert!(c >= -1e-12);
        }
        let on = foot_clearance_on(&q, &exo, contact);
        for (leg, loaded) in contact.iter().enumerate() {
            if *loaded {
                prop_assert!(on[leg] >= -1e-12);
            }
        }
    }
}
