mod common;

use common::{brute_force_transitions, random_walk, trace_from};
use kr_core::dynamics::simulate;
use kr_core::epsilon::recover_epsilon;
use kr_core::harness::{Scenario, ScenarioConfig};
use kr_core::verbalization::*;
use proptest::prelude::*;

fn sign() -> CellPartition {
    CellPartition::sign(2)
}

fn kr1_words(horizon: f64) -> WordSequence {
    let scenario = Scenario::resolve(&ScenarioConfig::new("KR-1", 5)).unwrap();
    let traj = simulate(&scenario.game, horizon, 0.01, &scenario.policy, 5).unwrap();
    let trace = recover_epsilon(&traj, &scenario.game.couplings).unwrap();
    scenario.verbalizer.emit_words(&trace, &traj).unwrap()
}

#[test]
fn quadrant_and_tie_break() {
    assert_eq!(assign_cell(&[0.5, -0.3], &sign(), None), vec![1, 0]);
    assert_eq!(assign_cell(&[0.0, 0.0], &sign(), None), vec![0, 0]);
}

#[test]
fn hysteresis_keeps_previous_cell() {
    let p = CellPartition::grid(vec![vec![0.0], vec![0.0]], 0.01).unwrap();
    assert_eq!(assign_cell(&[0.001, 1.0], &p, Some(&[0, 1])), vec![0, 1]);
    assert_eq!(assign_cell(&[0.02, 1.0], &p, Some(&[0, 1])), vec![1, 1]);
}

#[test]
fn constant_trace_has_only_the_initial_entry() {
    let trace = trace_from(vec![vec![0.2, -0.4]; 100], 0.01);
    let tr = detect_transitions(&trace, &sign()).unwrap();
    assert_eq!(tr.len(), 1);
    assert_eq!(tr[0].index, 0);
}

#[test]
fn circle_crosses_axes_at_quarter_turns() {
    let dt = 0.001;
    let values: Vec<Vec<f64>> = (0..=20_000)
        .map(|k| {
            let t = (k as f64 + 0.5) * dt;
            vec![t.sin(), t.cos()]
        })
        .collect();
    let tr = detect_transitions(&trace_from(values.clone(), dt), &sign()).unwrap();
    let cuts = vec![vec![0.0], vec![0.0]];
    let oracle = brute_force_transitions(&values, &cuts, 0.0);
    assert_eq!(tr.iter().map(|t| (t.index, t.cell.clone())).collect::<Vec<_>>(), oracle);
    assert_eq!(tr.len(), 1 + (20.0 / std::f64::consts::FRAC_PI_2) as usize);
    for (k, t) in tr.iter().enumerate().skip(1) {
        let quarter = k as f64 * std::f64::consts::FRAC_PI_2;
        let crossed = t.t + 0.5 * dt;
        assert!((crossed - quarter).abs() <= dt, "transition {k} at {crossed}");
    }
}

#[test]
fn transitions_match_brute_force_scan() {
    for seed in 0..50u64 {
        let dims = 1 + (seed % 3) as usize;
        let cuts: Vec<Vec<f64>> = (0..dims).map(|d| vec![-0.5 + 0.1 * d as f64, 0.0, 0.35]).collect();
        let h = [0.0, 0.02, 0.1][(seed % 3) as usize];
        let values = random_walk(seed, 1500, dims, 0.05);
        let p = CellPartition::grid(cuts.clone(), h).unwrap();
        let got: Vec<_> = detect_transitions(&trace_from(values.clone(), 0.01), &p)
            .unwrap()
            .into_iter()
            .map(|t| (t.index, t.cell))
            .collect();
        assert_eq!(got, brute_force_transitions(&values, &cuts, h), "seed {seed}");
    }
}

#[test]
fn hysteresis_suppresses_chattering() {
    let values: Vec<Vec<f64>> = random_walk(3, 3000, 1, 0.02)
        .into_iter()
        .enumerate()
        .map(|(k, x)| vec![0.03 * (k as f64 * 1.7).sin() + 0.001 * x[0]])
        .collect();
    let trace = trace_from(values, 0.01);
    let bare = detect_transitions(&trace, &CellPartition::grid(vec![vec![0.0]], 0.0).unwrap()).unwrap();
    let damped = detect_transitions(&trace, &CellPartition::grid(vec![vec![0.0]], 0.05).unwrap()).unwrap();
    assert!(damped.len() < bare.len());
    assert_eq!(damped.len(), 1);
}

#[test]
fn kr1_emits_enough_words() {
    let words = kr1_words(200.0);
    assert!(words.len() >= 50, "{} words", words.len());
    assert!(words.entries.iter().all(|w| w.omega_symbol < 4 && w.v_symbol < 4));
}

#[test]
fn words_tile_the_run() {
    let words = kr1_words(20.0);
    assert_eq!(words.entries[0].t_start, 0.0);
    for pair in words.entries.windows(2) {
        assert_eq!(pair[0].t_end, pair[1].t_start);
        assert!(pair[0].t_end > pair[0].t_start);
    }
    assert!((words.entries.last().unwrap().t_end - 20.0).abs() < 1e-9);
}

#[test]
fn constant_interval_mean_is_exact() {
    let scenario = Scenario::resolve(&ScenarioConfig::new("KR-1", 5)).unwrap();
    let mut game = scenario.game.clone();
    game.hidden = kr_core::dynamics::HiddenBehaviorSpec::Silent;
    let traj = simulate(&game, 1.0, 0.01, &kr_core::dynamics::Policy::zero(2), 0).unwrap();
    let trace = recover_epsilon(&traj, &game.couplings).unwrap();
    let words = scenario.verbalizer.words_for_boundaries(&trace, &traj, &[0, 100]).unwrap();
    assert_eq!(words.entries[0].omega_value, vec![0.0; 4]);
}

#[test]
fn empty_interval_is_skipped_with_warning() {
    let scenario = Scenario::resolve(&ScenarioConfig::new("KR-1", 5)).unwrap();
    let traj = simulate(&scenario.game, 1.0, 0.01, &scenario.policy, 0).unwrap();
    let trace = recover_epsilon(&traj, &scenario.game.couplings).unwrap();
    let words = scenario.verbalizer.words_for_boundaries(&trace, &traj, &[0, 40, 40, 100]).unwrap();
    assert_eq!(words.len(), 2);
    assert_eq!(words.warnings.len(), 1);
}

#[test]
fn words_csv_round_trip() {
    let words = kr1_words(10.0);
    let mut buf = Vec::new();
    words.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("n,t_start,t_end,omega_symbol,v_symbol\n"));
    let rows = WordSequence::read_csv(&buf[..]).unwrap();
    assert_eq!(rows.len(), words.len());
    for (r, w) in rows.iter().zip(&words.entries) {
        assert_eq!((r.n, r.t_start, r.t_end, r.omega_symbol, r.v_symbol), (w.n, w.t_start, w.t_end, w.omega_symbol, w.v_symbol));
    }
}

#[test]
fn every_functional_folds_like_recompute() {
    let xs = random_walk(9, 700, 3, 0.3);
    for id in FUNCTIONAL_IDS {
        let f = IntervalFunctional::from_id(id).unwrap();
        let a = f.fold(3, xs.iter().map(Vec::as_slice));
        let b = f.recompute(3, xs.iter().map(Vec::as_slice));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12, "{id}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_never_loses_transitions(seed in 0u64..1000, extra in proptest::collection::vec(-1.0f64..1.0, 1..4)) {
        let values = random_walk(seed, 600, 2, 0.06);
        let coarse_cuts = vec![vec![-0.2, 0.3], vec![0.0]];
        let mut fine_cuts = coarse_cuts.clone();
        fine_cuts[0].extend(extra.iter().copied());
        fine_cuts[0].sort_by(f64::total_cmp);
        fine_cuts[0].dedup();
        let trace = trace_from(values, 0.01);
        let coarse = detect_transitions(&trace, &CellPartition::grid(coarse_cuts, 0.0).unwrap()).unwrap();
        let fine = detect_transitions(&trace, &CellPartition::grid(fine_cuts, 0.0).unwrap()).unwrap();
        prop_assert!(fine.len() >= coarse.len());
        let fine_idx: Vec<usize> = fine.iter().map(|t| t.index).collect();
        prop_assert!(coarse.iter().all(|t| fine_idx.contains(&t.index)));
    }

    #[test]
    fn every_point_has_one_cell(x in proptest::collection::vec(-3.0f64..3.0, 2)) {
        let p = CellPartition::grid(vec![vec![-1.0, 0.0, 1.0], vec![0.5]], 0.0).unwrap();
        let cell = assign_cell(&x, &p, None);
        prop_assert!(cell[0] < 4 && cell[1] < 2);
        prop_assert!(p.symbol(&cell) < p.alphabet_size());
    }

    #[test]
    fn mean_fold_matches_recompute(xs in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 2), 1..300)) {
        let f = IntervalFunctional::Mean.fold(2, xs.iter().map(Vec::as_slice));
        let r = IntervalFunctional::Mean.recompute(2, xs.iter().map(Vec::as_slice));
        for (a, b) in f.iter().zip(&r) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()) * 100.0);
        }
    }
}
