//! Property tests for the structural invariants of exponents, functions,
//! norms, window norms, shift tests, compositions and convolutions.

use std::f64::consts::{PI, SQRT_2, TAU};

use proptest::prelude::*;
use varlex::almost_auto::{asymptotic_decompose, bochner_shift_test, pell_shifts};
use varlex::composition::{empirical_lipschitz, TwoParameterFunction};
use varlex::convolution::{line_convolution, solve_dfp};
use varlex::corpus::TrigSum;
use varlex::exponent::{composition_exponent, ExponentFunction};
use varlex::fractional::{FamilyKind, ResolventFamily};
use varlex::function_model::VectorFunction;
use varlex::interval::Interval;
use varlex::modular_norm::{luxemburg_norm, modular};
use varlex::report::Verdict;
use varlex::stepanov::{stepanov_norm, window_norm};

const UNIT: Interval = Interval::UNIT;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

/// Constant, affine or sinusoidal exponents on [0, 1] with values in [lo, hi].
fn exponent(lo: f64, hi: f64) -> impl Strategy<Value = ExponentFunction> {
    let constant = (lo..hi).prop_map(|c| ExponentFunction::constant(c).unwrap());
    let affine = (lo..hi, lo..hi).prop_map(|(a, b)| ExponentFunction::affine(a, b - a, UNIT).unwrap());
    let wave = (0.0..1.0f64, 0.0..1.0f64, 0.5..3.0f64, 0.0..TAU).prop_map(move |(m, a, w, ph)| {
        let amp = a * (hi - lo) / 2.0;
        let mean = lo + amp + m * (hi - lo - 2.0 * amp);
        ExponentFunction::sinusoidal(mean, amp, w, ph, UNIT).unwrap()
    });
    prop_oneof![constant, affine, wave]
}

fn trig_sum() -> impl Strategy<Value = TrigSum> {
    let term = (-2.0..2.0f64, 0.5..12.0f64, 0.0..TAU);
    (-1.0..1.0f64, term.clone(), term.clone(), term).prop_map(|(offset, a, b, c)| TrigSum {
        offset,
        terms: [a, b, c],
    })
}

fn on_unit(f: &TrigSum) -> VectorFunction {
    f.function().restrict(UNIT).unwrap()
}

fn grid(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn conjugate_is_an_involution(p in exponent(1.05, 8.0)) {
        let back = p.conjugate().conjugate();
        for x in grid(200) {
            let (a, b) = (p.value(x), back.value(x));
            prop_assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b} at {x}");
        }
    }

    #[test]
    fn composition_exponent_lies_in_one_to_p(p in exponent(1.0, 6.0), excess in 1.0..3.0f64) {
        let (lo, hi) = p.essential_bounds();
        let need = if lo > 1.0 { hi.max(lo / (lo - 1.0)) } else { f64::INFINITY };
        let r = if need.is_finite() {
            ExponentFunction::constant(need * excess).unwrap()
        } else {
            ExponentFunction::infinite()
        };
        let q = composition_exponent(&p, &r).unwrap();
        for x in grid(200) {
            let (qv, pv) = (q.value(x), p.value(x));
            prop_assert!(qv >= 1.0 - 1e-12 && qv <= pv * (1.0 + 1e-12), "q = {qv}, p = {pv}");
            if need.is_finite() {
                prop_assert!(qv < pv);
            }
        }
    }

    #[test]
    fn essential_bounds_are_monotone(a in 1.0..4.0f64, b in 1.0..4.0f64, lift in 0.0..3.0f64) {
        let p = ExponentFunction::affine(a, b - a, UNIT).unwrap();
        let higher = ExponentFunction::affine(a + lift, b - a, UNIT).unwrap();
        let (lo, hi) = p.essential_bounds();
        let (lo2, hi2) = higher.essential_bounds();
        prop_assert!(lo <= lo2 && hi <= hi2);
    }

    #[test]
    fn translations_compose(a in -50.0..50.0f64, b in -50.0..50.0f64, t in -20.0..20.0f64) {
        for f in [VectorFunction::sin(), VectorFunction::two_sine(), VectorFunction::rational_decay()] {
            let twice = f.translate(a).translate(b).scalar(t);
            let once = f.translate(a + b).scalar(t);
            prop_assert_eq!(twice, once);
        }
    }

    #[test]
    fn reflection_is_an_involution(t in -100.0..100.0f64) {
        for f in [VectorFunction::two_sine(), VectorFunction::rational_decay(), VectorFunction::sign_of_two_sine()] {
            prop_assert_eq!(f.reflect().unwrap().reflect().unwrap().scalar(t), f.scalar(t));
        }
    }

    #[test]
    fn sign_takes_three_values(t in -1000.0..1000.0f64, f in trig_sum()) {
        for s in [VectorFunction::sign_of_two_sine(), f.function().sign_of().unwrap()] {
            let v = s.scalar(t);
            prop_assert!(v == -1.0 || v == 0.0 || v == 1.0, "{v}");
        }
    }

    #[test]
    fn translated_windows_match(tau in -5.0..5.0f64, f in trig_sum()) {
        let f = f.function();
        let p = ExponentFunction::constant(2.0).unwrap();
        let base: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let shifted: Vec<f64> = base.iter().map(|t| t + tau).collect();
        let a = stepanov_norm(&f.translate(tau), &p, &base).unwrap();
        let b = stepanov_norm(&f, &p, &shifted).unwrap();
        prop_assert!((a.sup_estimate - b.sup_estimate).abs() <= 1e-8 * b.sup_estimate.max(1.0));
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn modular_decreases_in_the_scale(f in trig_sum(), p in exponent(1.0, 6.0), l1 in 0.2..5.0f64, ratio in 1.01..3.0f64) {
        let f = on_unit(&f);
        let small = modular(&f.scale(1.0 / l1), &p, UNIT).unwrap().value;
        let large = modular(&f.scale(1.0 / (l1 * ratio)), &p, UNIT).unwrap().value;
        prop_assert!(small >= large * (1.0 - 1e-10), "{small} < {large}");
    }

    #[test]
    fn norm_is_homogeneous(f in trig_sum(), p in exponent(1.0, 6.0), c in 0.1..10.0f64) {
        let f = on_unit(&f);
        let n = luxemburg_norm(&f, &p, UNIT).unwrap().value;
        let nc = luxemburg_norm(&f.scale(c), &p, UNIT).unwrap().value;
        prop_assert!((nc - c * n).abs() <= 1e-8 * c * n, "{nc} vs {}", c * n);
    }

    #[test]
    fn norm_characterizes_the_unit_ball(f in trig_sum(), p in exponent(1.0, 6.0)) {
        let f = on_unit(&f);
        let n = luxemburg_norm(&f, &p, UNIT).unwrap().value;
        prop_assume!(n > 0.0 && n.is_finite());
        let at = modular(&f.scale(1.0 / n), &p, UNIT).unwrap().value;
        let inside = modular(&f.scale(1.0 / (0.99 * n)), &p, UNIT).unwrap().value;
        prop_assert!(at <= 1.0 + 1e-8, "rho(f/|f|) = {at}");
        prop_assert!(inside >= 1.0 - 1e-6, "rho(f/0.99|f|) = {inside}");
    }

    #[test]
    fn windows_compare_across_exponents(f in trig_sum(), p in exponent(1.1, 5.0), t in -3.0..3.0f64) {
        let f = f.function();
        let (lo, hi) = p.essential_bounds();
        let low = window_norm(&f, &ExponentFunction::constant(lo).unwrap(), t).unwrap();
        let mid = window_norm(&f, &p, t).unwrap();
        let high = window_norm(&f, &ExponentFunction::constant(hi).unwrap(), t).unwrap();
        let one = window_norm(&f, &ExponentFunction::constant(1.0).unwrap(), t).unwrap();
        let slack = 1.0 + 1e-8;
        prop_assert!(low <= 2.0 * mid * slack && mid <= 2.0 * high * slack, "{low} {mid} {high}");
        prop_assert!(one <= 2.0 * mid * slack, "{one} {mid}");
    }

    #[test]
    fn empirical_lipschitz_respects_declared(ys in prop::collection::vec(-1.0..1.0f64, 2..30), t in -10.0..10.0f64) {
        let samples: Vec<Vec<f64>> = ys.iter().map(|y| vec![*y]).collect();
        prop_assume!(ys.iter().any(|y| (y - ys[0]).abs() >= 1e-6));
        for f in [
            TwoParameterFunction::modulated_tanh(VectorFunction::sin()),
            TwoParameterFunction::square(),
            TwoParameterFunction::scaled_by(VectorFunction::two_sine(), 1),
        ] {
            let l = empirical_lipschitz(&f, &samples).unwrap().scalar(t);
            let declared = f.declared_lipschitz(t).unwrap();
            prop_assert!(l <= declared + 1e-8, "{}: {l} > {declared}", f.name());
        }
    }

    #[test]
    fn line_convolution_commutes_with_translation(tau in -10.0..10.0f64, f in trig_sum()) {
        let rf = ResolventFamily::scalar(1.0, 1.0, FamilyKind::Exponential).unwrap();
        let p = ExponentFunction::constant(2.0).unwrap();
        let g = f.function();
        let t: Vec<f64> = (0..=8).map(|i| i as f64 * 0.5).collect();
        let shifted: Vec<f64> = t.iter().map(|x| x + tau).collect();
        let a = line_convolution(&rf, &g.translate(tau), &p, &t, None).unwrap();
        let b = line_convolution(&rf, &g, &p, &shifted, None).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            prop_assert!((u[0] - v[0]).abs() <= 1e-8, "{} vs {}", u[0], v[0]);
        }
    }

    #[test]
    fn tail_bound_covers_longer_sums(k in 2usize..12, extra in 1usize..20, f in trig_sum()) {
        let rf = ResolventFamily::scalar(1.0, 1.0, FamilyKind::Exponential).unwrap();
        let p = ExponentFunction::constant(2.0).unwrap();
        let g = f.function();
        let t = [0.0, 1.3, 4.0];
        let short = line_convolution(&rf, &g, &p, &t, Some(k)).unwrap();
        let long = line_convolution(&rf, &g, &p, &t, Some(k + extra)).unwrap();
        for i in 0..t.len() {
            let d = (short.values[i][0] - long.values[i][0]).abs();
            prop_assert!(d <= short.tail_bound_series[i] * (1.0 + 1e-8), "{d} > {}", short.tail_bound_series[i]);
        }
    }

    #[test]
    fn classical_semigroup_is_the_exponential(a in 0.1..5.0f64, t in 0.0..20.0f64) {
        let s = ResolventFamily::scalar(a, 1.0, FamilyKind::Relaxation).unwrap();
        let v = s.eval(t).unwrap()[0];
        let e = (-a * t).exp();
        prop_assert!((v - e).abs() <= 1e-12 * e, "{v} vs {e}");
    }
}

#[test]
fn shift_verdicts_survive_translation() {
    let shifts: Vec<f64> = (1..=8).map(|n| 2.0 * PI * n as f64).collect();
    let grid = [0.0, 0.5, 1.0, 2.5];
    let p = ExponentFunction::constant(2.0).unwrap();
    for f in [VectorFunction::sin(), VectorFunction::identity()] {
        let base = bochner_shift_test(&f, &p, &shifts, &grid).unwrap().verdict;
        for tau in [1.0, SQRT_2] {
            let moved: Vec<f64> = grid.iter().map(|t| t - tau).collect();
            let v = bochner_shift_test(&f.translate(tau), &p, &shifts, &moved).unwrap().verdict;
            assert_eq!(v, base, "{} translated by {tau}", f.describe());
        }
    }
}

#[test]
fn passing_at_p_implies_passing_at_one() {
    let shifts = pell_shifts(4, 6);
    let grid = [0.0, 1.0, 2.0];
    let f = VectorFunction::two_sine();
    let at_p = bochner_shift_test(&f, &ExponentFunction::constant(3.0).unwrap(), &shifts, &grid).unwrap();
    let at_one = bochner_shift_test(&f, &ExponentFunction::constant(1.0).unwrap(), &shifts, &grid).unwrap();
    assert_eq!(at_p.verdict, Verdict::True);
    assert_eq!(at_one.verdict, Verdict::True);
    assert!(at_one.tail_residual <= 2.0 * at_p.tail_residual * (1.0 + 1e-8));
}

#[test]
fn classical_solution_splits_into_aa_part_and_decay() {
    // Linear resampling leaves a window-norm floor near step²/8, far below
    // the e^{-t}/2 transient over the horizon.
    let step = 0.005;
    let t: Vec<f64> = (0..=2400).map(|i| i as f64 * step).collect();
    let rf = ResolventFamily::scalar(1.0, 1.0, FamilyKind::Resolvent).unwrap();
    let u = solve_dfp(&rf, &[0.0], &VectorFunction::sin(), &t).unwrap();
    let samples: Vec<f64> = u.values.iter().map(|v| v[0]).collect();
    let u = VectorFunction::grid(0.0, step, 1, samples).unwrap();
    let aa = VectorFunction::linear(vec![(0.5, VectorFunction::sin()), (-0.5, VectorFunction::cos())]).unwrap();
    let shifts: Vec<f64> = (1..=8).map(|n| 2.0 * PI * n as f64).collect();
    let p = ExponentFunction::constant(2.0).unwrap();
    let r = asymptotic_decompose(&u, &p, &aa, &shifts, &[0.0, 1.0], 10.0).unwrap();
    assert_eq!(r.verdict, Verdict::True, "{r:?}");
}
