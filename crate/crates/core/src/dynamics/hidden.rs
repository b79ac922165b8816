//! Ground-truth realization of the hidden `ε` processes.
//!
//! Nothing in this module is reachable from the analysis side: the state
//! lives inside [`SystemState`](super::SystemState) behind `pub(crate)` and
//! the recorded truth is wrapped in [`Hidden`](super::Hidden).

use std::collections::VecDeque;
use std::f64::consts::TAU;

use rand::Rng;

use super::model::HiddenBehaviorSpec;

const LORENZ_BURN_IN_STEPS: usize = 1000;
const LORENZ_BURN_IN_DT: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct HiddenState {
    pub(crate) continuous: Vec<f64>,
    /// Delayed copies of the mirrored control, oldest first.
    pub(crate) echo: VecDeque<Vec<f64>>,
}

fn lorenz_rhs(sigma: f64, rho: f64, beta: f64, s: f64, push: f64, h: &[f64], out: &mut [f64]) {
    out[0] = s * sigma * (h[1] - h[0]);
    out[1] = s * (h[0] * (rho - h[2]) - h[1] + push);
    out[2] = s * (h[0] * h[1] - beta * h[2]);
}

impl HiddenState {
    pub(crate) fn initial<R: Rng>(spec: &HiddenBehaviorSpec, control_dim: usize, rng: &mut R) -> Self {
        let mut state = HiddenState {
            continuous: Vec::new(),
            echo: VecDeque::new(),
        };
        match spec {
            HiddenBehaviorSpec::Silent => {}
            HiddenBehaviorSpec::Oscillator { frequencies, .. } => {
                for _ in frequencies {
                    let phase = rng.random_range(0.0..TAU);
                    state.continuous.push(phase.cos());
                    state.continuous.push(phase.sin());
                }
            }
            HiddenBehaviorSpec::LorenzLike { sigma, rho, beta, .. } => {
                let mut h = [
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                    rng.random_range(10.0..40.0),
                ];
                // settle onto the attractor in native time
                let f = |h: &[f64; 3]| {
                    let mut d = [0.0; 3];
                    lorenz_rhs(*sigma, *rho, *beta, 1.0, 0.0, h, &mut d);
                    d
                };
                let dt = LORENZ_BURN_IN_DT;
                for _ in 0..LORENZ_BURN_IN_STEPS {
                    let k1 = f(&h);
                    let k2 = f(&std::array::from_fn(|i| h[i] + 0.5 * dt * k1[i]));
                    let k3 = f(&std::array::from_fn(|i| h[i] + 0.5 * dt * k2[i]));
                    let k4 = f(&std::array::from_fn(|i| h[i] + dt * k3[i]));
                    for i in 0..3 {
                        h[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                    }
                }
                state.continuous.extend_from_slice(&h);
            }
            HiddenBehaviorSpec::LaggedMirror {
                lag_sets, set_steps, ..
            } => {
                let lag = lag_sets * set_steps;
                state.echo = std::iter::repeat_n(vec![0.0; control_dim], lag).collect();
            }
        }
        state
    }

    pub(crate) fn derivative(spec: &HiddenBehaviorSpec, h: &[f64], phi: &[f64], out: &mut [f64]) {
        match spec {
            HiddenBehaviorSpec::Silent | HiddenBehaviorSpec::LaggedMirror { .. } => {}
            HiddenBehaviorSpec::Oscillator { frequencies, .. } => {
                for (k, &w) in frequencies.iter().enumerate() {
                    out[2 * k] = -w * h[2 * k + 1];
                    out[2 * k + 1] = w * h[2 * k];
                }
            }
            HiddenBehaviorSpec::LorenzLike {
                sigma,
                rho,
                beta,
                time_scale,
                forcing,
                ..
            } => {
                let push = forcing.as_ref().map_or(0.0, |f| f.gain * phi[f.phi_index]);
                lorenz_rhs(*sigma, *rho, *beta, *time_scale, push, h, out);
            }
        }
    }

    /// Writes the current `ε` of every player into `out` (non-target players get zeros).
    pub(crate) fn eps(&self, spec: &HiddenBehaviorSpec, h: &[f64], out: &mut [Vec<f64>]) {
        for e in out.iter_mut() {
            e.iter_mut().for_each(|x| *x = 0.0);
        }
        match spec {
            HiddenBehaviorSpec::Silent => {}
            HiddenBehaviorSpec::Oscillator {
                target,
                frequencies,
                amplitude,
            } => {
                let k_count = frequencies.len();
                for (m, e) in out[*target].iter_mut().enumerate() {
                    let j = m % k_count;
                    let k = (m + 1) % k_count;
                    *e = if (m / k_count) % 2 == 0 {
                        amplitude * (h[2 * j] + h[2 * k + 1])
                    } else {
                        amplitude * (h[2 * j + 1] - h[2 * k])
                    };
                }
            }
            HiddenBehaviorSpec::LorenzLike {
                target,
                scales,
                offsets,
                ..
            } => {
                for (m, e) in out[*target].iter_mut().enumerate() {
                    let offset = offsets.get(m).copied().unwrap_or(0.0);
                    *e = scales[m] * (h[m % 3] - offset);
                }
            }
            HiddenBehaviorSpec::LaggedMirror { target, gain, .. } => {
                if let Some(front) = self.echo.front() {
                    for (e, &x) in out[*target].iter_mut().zip(front) {
                        *e = gain * x;
                    }
                }
            }
        }
    }

    /// Discrete update after a completed step whose held pure controls were `pure`.
    pub(crate) fn after_step(&mut self, spec: &HiddenBehaviorSpec, pure: &[Vec<f64>]) {
        if let HiddenBehaviorSpec::LaggedMirror { source, .. } = spec {
            self.echo.pop_front();
            self.echo.push_back(pure[*source].clone());
        }
    }
}
