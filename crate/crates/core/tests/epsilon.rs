mod common;

use common::trace_from;
use kr_core::dynamics::{simulate, CouplingSpec, HiddenBehaviorSpec, Policy};
use kr_core::epsilon::*;
use kr_core::harness::{kaleidoscope_game, lorenz_hidden};
use kr_core::verbalization::{WordEntry, WordSequence};
use kr_core::Error;
use proptest::prelude::*;

fn oscillator_game() -> kr_core::dynamics::GameDefinition {
    kaleidoscope_game(HiddenBehaviorSpec::Oscillator {
        target: 0,
        frequencies: vec![0.5, 0.9],
        amplitude: 0.05,
    })
}

fn drum_policy() -> Policy {
    Policy::from_id("coplayer-drum", 2, 2, 0.4).unwrap()
}

fn sup(a: &EpsilonTrace, b: &EpsilonTrace) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn recovered_eps_matches_ground_truth() {
    let game = kaleidoscope_game(lorenz_hidden());
    let traj = simulate(&game, 50.0, 0.01, &drum_policy(), 3).unwrap();
    let recovered = recover_epsilon(&traj, &game.couplings).unwrap();
    assert!(sup(&recovered, &EpsilonTrace::from_ground_truth(&traj).unwrap()) < 1e-9);
    assert_eq!(recovered.provenance, Provenance::Recovered);
}

#[test]
fn affine_gain_recovery() {
    let mut game = kaleidoscope_game(lorenz_hidden());
    game.couplings[0] = CouplingSpec::affine_gain();
    let policy = Policy::from_id("drum-all", 2, 2, 0.4).unwrap();
    let traj = simulate(&game, 50.0, 0.01, &policy, 3).unwrap();
    let recovered = recover_epsilon(&traj, &game.couplings).unwrap();
    assert!(sup(&recovered, &EpsilonTrace::from_ground_truth(&traj).unwrap()) < 1e-6);
}

#[test]
fn affine_gain_with_flat_control_is_rejected() {
    let mut game = kaleidoscope_game(lorenz_hidden());
    game.couplings[0] = CouplingSpec::affine_gain();
    let traj = simulate(&game, 1.0, 0.01, &drum_policy(), 3).unwrap();
    assert!(matches!(
        recover_epsilon(&traj, &game.couplings),
        Err(Error::NonInvertibleCoupling { player: 0, sample: 0 })
    ));
}

#[test]
fn recovered_eps_reproduces_coupled_controls() {
    let mut game = kaleidoscope_game(lorenz_hidden());
    game.couplings[0] = CouplingSpec::affine_gain();
    let policy = Policy::from_id("drum-all", 2, 2, 0.4).unwrap();
    let traj = simulate(&game, 20.0, 0.01, &policy, 9).unwrap();
    let recovered = recover_epsilon(&traj, &game.couplings).unwrap();
    let mut out = [0.0; 2];
    for (k, s) in traj.samples.iter().enumerate() {
        for (p, spec) in game.couplings.iter().enumerate() {
            spec.apply(&s.u_pure[p], recovered.player(k, p), &mut out);
            for c in 0..2 {
                assert!((out[c] - s.u_coupled[p][c]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn trace_csv_round_trip() {
    let game = oscillator_game();
    let traj = simulate(&game, 5.0, 0.01, &drum_policy(), 1).unwrap();
    let trace = recover_epsilon(&traj, &game.couplings).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let back = EpsilonTrace::read_csv(&buf[..]).unwrap();
    assert_eq!(back.values, trace.values);
    assert_eq!(back.dims, trace.dims);
}

#[test]
fn doubled_representation_is_an_integral() {
    let game = oscillator_game();
    let traj = simulate(&game, 20.0, 0.01, &drum_policy(), 1).unwrap();
    let eps = recover_epsilon(&traj, &game.couplings).unwrap();
    let mut doubled = eps.clone();
    doubled.values.iter_mut().flatten().for_each(|x| *x *= 2.0);
    let checks = check_correlation_integrals(
        &[eps, doubled],
        &[CorrelationFunctional::LinearRelation {
            lhs: 1,
            rhs: 0,
            factor: 2.0,
        }],
        EXACT_RELATION_TOL,
    )
    .unwrap();
    assert_eq!(checks[0].max_deviation, 0.0);
    assert!(checks[0].integral);
}

#[test]
fn independent_oscillators_are_not_integrals() {
    let a = simulate(&oscillator_game(), 50.0, 0.01, &drum_policy(), 1).unwrap();
    let other = kaleidoscope_game(HiddenBehaviorSpec::Oscillator {
        target: 0,
        frequencies: vec![1.7, 0.3],
        amplitude: 0.3,
    });
    let b = simulate(&other, 50.0, 0.01, &drum_policy(), 2).unwrap();
    let traces = [
        EpsilonTrace::from_ground_truth(&a).unwrap(),
        EpsilonTrace::from_ground_truth(&b).unwrap(),
    ];
    let checks = check_correlation_integrals(
        &traces,
        &[CorrelationFunctional::LinearRelation {
            lhs: 1,
            rhs: 0,
            factor: 2.0,
        }],
        EXACT_RELATION_TOL,
    )
    .unwrap();
    assert!(checks[0].max_deviation > 0.1, "{}", checks[0].max_deviation);
    assert!(!checks[0].integral);
}

#[test]
fn zero_functional_on_single_trace() {
    let trace = trace_from((0..50).map(|k| vec![k as f64]).collect(), 0.1);
    let checks = check_correlation_integrals(&[trace], &[CorrelationFunctional::Zero], EXACT_RELATION_TOL).unwrap();
    assert_eq!(checks[0].max_deviation, 0.0);
    assert!(checks[0].integral);
}

#[test]
fn unequal_traces_are_rejected() {
    let a = trace_from(vec![vec![0.0]; 10], 0.1);
    let b = trace_from(vec![vec![0.0]; 11], 0.1);
    assert!(matches!(
        check_correlation_integrals(&[a, b], &[CorrelationFunctional::Zero], 1e-6),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn oscillator_forecast_beats_persistence() {
    let game = oscillator_game();
    let traj = simulate(&game, 80.0, 0.01, &drum_policy(), 4).unwrap();
    let trace = recover_epsilon(&traj, &game.couplings).unwrap();
    let horizon = 100;
    let (mut model_se, mut persist_se, mut count) = (0.0, 0.0, 0usize);
    for origin in (2000..trace.len() - horizon).step_by(250) {
        let forecast = predict_epsilon(&trace.head(origin), horizon as f64 * trace.dt, 4, 400).unwrap();
        for (k, predicted) in forecast.path.iter().enumerate() {
            let truth = &trace.values[origin + k];
            for c in 0..2 {
                model_se += (predicted[c] - truth[c]).powi(2);
                persist_se += (forecast.last_observed[c] - truth[c]).powi(2);
                count += 1;
            }
        }
    }
    let (model, persist) = ((model_se / count as f64).sqrt(), (persist_se / count as f64).sqrt());
    assert!(model < 0.5 * persist, "model {model:.3e} vs persistence {persist:.3e}");
}

#[test]
fn zero_horizon_returns_last_value() {
    let trace = trace_from((0..500).map(|k| vec![(k as f64 * 0.1).sin()]).collect(), 0.01);
    let forecast = predict_epsilon(&trace, 0.0, 3, 200).unwrap();
    assert!(forecast.path.is_empty());
    assert_eq!(forecast.end(), trace.values.last().unwrap().as_slice());
}

fn words_of(durations: &[f64]) -> WordSequence {
    let mut t = 0.0;
    let entries = durations
        .iter()
        .enumerate()
        .map(|(n, d)| {
            let w = WordEntry {
                n: n + 1,
                t_start: t,
                t_end: t + d,
                omega_symbol: 0,
                omega_value: vec![0.0],
                v_symbol: 0,
                v_value: vec![0.0],
                phi_summary: 0.0,
                phi_end: vec![0.0],
            };
            t += d;
            w
        })
        .collect();
    WordSequence {
        alphabet_size: 4,
        entries,
        warnings: vec![],
    }
}

#[test]
fn constant_eps_has_zero_ratio() {
    let trace = trace_from(vec![vec![0.3, -0.1]; 1000], 0.01);
    assert_eq!(timescale_ratio(&trace, &words_of(&[1.0; 5])).unwrap(), 0.0);
    assert!(variation_timescale(&trace).is_infinite());
}

#[test]
fn fast_eps_against_long_sets_is_not_applicable() {
    let dt = 0.01;
    let xs: Vec<f64> = (0..10_000).map(|k| (std::f64::consts::PI * k as f64 * dt).sin()).collect();
    // direct biased autocorrelation
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let r0: f64 = d.iter().map(|x| x * x).sum();
    let lag = (0..n)
        .find(|&k| (0..n - k).map(|t| d[t] * d[t + k]).sum::<f64>() / r0 < (-1.0f64).exp())
        .unwrap();
    let expected = 20.0 / (lag as f64 * dt);
    let trace = trace_from(xs.iter().map(|&x| vec![x]).collect(), dt);
    let ratio = timescale_ratio(&trace, &words_of(&[20.0; 5])).unwrap();
    assert!((ratio - expected).abs() < 1e-9, "{ratio} vs {expected}");
    assert!(ratio > 1.0);
}

#[test]
fn ratio_needs_three_sets() {
    let trace = trace_from(vec![vec![0.0]; 10], 0.01);
    assert!(matches!(
        timescale_ratio(&trace, &words_of(&[1.0, 1.0])),
        Err(Error::InsufficientData(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn additive_inversion_round_trips(pure in proptest::collection::vec(-3.0f64..3.0, 2), eps in proptest::collection::vec(-1.0f64..1.0, 2)) {
        let spec = CouplingSpec::additive(2);
        let mut u = [0.0; 2];
        spec.apply(&pure, &eps, &mut u);
        let back = spec.invert(&pure, &u).unwrap();
        for c in 0..2 {
            prop_assert!((back[c] - eps[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_inversion_round_trips(pure in proptest::collection::vec(-3.0f64..3.0, 2..5), gain in -0.9f64..2.0, bias in -1.0f64..1.0) {
        let spread = pure.iter().cloned().fold(f64::MIN, f64::max) - pure.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(spread > 1e-3);
        let spec = CouplingSpec::affine_gain();
        let mut u = vec![0.0; pure.len()];
        spec.apply(&pure, &[gain, bias], &mut u);
        let back = spec.invert(&pure, &u).unwrap();
        prop_assert!((back[0] - gain).abs() < 1e-9);
        prop_assert!((back[1] - bias).abs() < 1e-9);
    }

    #[test]
    fn forecast_of_constant_is_constant(c in -5.0f64..5.0, steps in 0usize..50) {
        let trace = trace_from(vec![vec![c]; 300], 0.01);
        let forecast = predict_epsilon(&trace, steps as f64 * 0.01, 3, 200).unwrap();
        for x in &forecast.path {
            prop_assert!((x[0] - c).abs() < 1e-12);
        }
    }
}
