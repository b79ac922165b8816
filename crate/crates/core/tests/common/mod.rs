#![allow(dead_code)]

use kr_core::dynamics::{CouplingSpec, GameDefinition, HiddenBehaviorSpec, PhiModel, Policy, XiBlock};
use kr_core::epsilon::{EpsilonTrace, Provenance};

/// `φ̇ = −decay·φ + gain·v` in `dim` dimensions with one player.
pub fn linear_game(dim: usize, decay: f64, gain: f64, phi0: Vec<f64>) -> GameDefinition {
    GameDefinition {
        state_dim: dim,
        intention_dim: 1,
        n_players: 1,
        control_dim: dim,
        phi_rhs: PhiModel::Linear { decay, gain },
        xi_rhs: vec![XiBlock::Inert { dim: 1 }],
        couplings: vec![CouplingSpec::additive(dim)],
        hidden: HiddenBehaviorSpec::Silent,
        coalitions: GameDefinition::singleton_coalitions(1),
        xi_feedback: vec![],
        phi0,
        xi0: vec![],
    }
}

/// Sup-norm error at `t = 1` of `φ̇ = −φ`, `φ(0) = 1`.
pub fn decay_error(dt: f64) -> f64 {
    let game = linear_game(1, 1.0, 0.0, vec![1.0]);
    let traj = kr_core::dynamics::simulate(&game, 1.0, dt, &Policy::zero(1), 0).unwrap();
    traj.samples
        .iter()
        .map(|s| (s.phi[0] - (-s.t).exp()).abs())
        .fold(0.0, f64::max)
}

/// Direct fixed-step RK4 of `φ̇ = −decay·φ + gain·feedback·φ(t − lag·dt)`,
/// the delayed value read from a ring buffer and held over each step, with
/// `φ(t ≤ 0) = φ(0)`.
pub fn ring_buffer_reference(decay: f64, gain: f64, feedback: f64, phi0: f64, lag: usize, dt: f64, steps: usize) -> Vec<f64> {
    let mut ring = vec![phi0; lag];
    let mut head = 0;
    let mut phi = phi0;
    let mut out = vec![phi];
    for _ in 0..steps {
        let delayed = ring[head];
        let u = feedback * delayed;
        let f = |x: f64| -decay * x + gain * u;
        let k1 = f(phi);
        let k2 = f(phi + 0.5 * dt * k1);
        let k3 = f(phi + 0.5 * dt * k2);
        let k4 = f(phi + dt * k3);
        ring[head] = phi;
        head = (head + 1) % lag;
        phi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(phi);
    }
    out
}

/// Naive per-sample scan of cell transitions with the hysteresis rule.
pub fn brute_force_transitions(values: &[Vec<f64>], cuts: &[Vec<f64>], h: f64) -> Vec<(usize, Vec<usize>)> {
    let cell = |x: &[f64]| -> Vec<usize> {
        x.iter()
            .zip(cuts)
            .map(|(&v, c)| c.iter().filter(|&&cut| cut < v).count())
            .collect()
    };
    let inside = |x: &[f64], id: &[usize]| -> bool {
        x.iter().zip(cuts).zip(id).all(|((&v, c), &i)| {
            let lo = if i == 0 { f64::NEG_INFINITY } else { c[i - 1] - h };
            let hi = if i == c.len() { f64::INFINITY } else { c[i] + h };
            v > lo && v <= hi
        })
    };
    let mut running = cell(&values[0]);
    let mut out = vec![(0, running.clone())];
    for (k, x) in values.iter().enumerate().skip(1) {
        if h > 0.0 && inside(x, &running) {
            continue;
        }
        let c = cell(x);
        if c != running {
            running = c;
            out.push((k, running.clone()));
        }
    }
    out
}

pub fn trace_from(values: Vec<Vec<f64>>, dt: f64) -> EpsilonTrace {
    let width = values.first().map_or(0, Vec::len);
    EpsilonTrace {
        dt,
        times: (0..values.len()).map(|k| k as f64 * dt).collect(),
        dims: vec![width],
        values,
        provenance: Provenance::Recovered,
    }
}

/// Deterministic pseudo-random walk traces for transition tests.
pub fn random_walk(seed: u64, len: usize, dims: usize, step: f64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; dims];
    (0..len)
        .map(|_| {
            for v in x.iter_mut() {
                *v += rng.random_range(-step..step);
            }
            x.clone()
        })
        .collect()
}
