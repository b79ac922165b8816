use super::hidden::HiddenState;
use super::model::{GameDefinition, PhiModel, XiBlock};
use super::policy::Policy;
use super::trajectory::{Sample, Trajectory};
use crate::error::{Error, Result};
use crate::seed::{stream_rng, DYNAMICS_INITIAL};

use rand::Rng;

/// Full state of one running game. `hidden` is crate-private.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    pub step: u64,
    pub t: f64,
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
    pub(crate) hidden: HiddenState,
}

/// Scratch buffers for evaluating the joint right-hand side.
struct Workspace {
    eps: Vec<Vec<f64>>,
    coupled: Vec<Vec<f64>>,
    coalition: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(game: &GameDefinition) -> Self {
        Workspace {
            eps: game.couplings.iter().map(|c| vec![0.0; c.eps_dim]).collect(),
            coupled: vec![vec![0.0; game.control_dim]; game.n_players],
            coalition: vec![vec![0.0; game.control_dim]; game.coalitions.len()],
        }
    }
}

fn joint_rhs(
    game: &GameDefinition,
    hidden: &HiddenState,
    pure: &[Vec<f64>],
    y: &[f64],
    out: &mut [f64],
    ws: &mut Workspace,
) {
    let s = game.state_dim;
    let i_dim = game.intention_dim;
    let (phi, rest) = y.split_at(s);
    let (xi, h) = rest.split_at(i_dim);

    hidden.eps(&game.hidden, h, &mut ws.eps);
    for (p, coupling) in game.couplings.iter().enumerate() {
        coupling.apply(&pure[p], &ws.eps[p], &mut ws.coupled[p]);
    }
    assemble_coalitions(game, &ws.coupled, xi, &mut ws.coalition);

    let (d_phi, d_rest) = out.split_at_mut(s);
    let (d_xi, d_h) = d_rest.split_at_mut(i_dim);
    game.phi_rhs.rhs(phi, &ws.coalition, d_phi);

    let mut offset = 0;
    for block in &game.xi_rhs {
        let dim = block.dim();
        let (x, dx) = (&xi[offset..offset + dim], &mut d_xi[offset..offset + dim]);
        match *block {
            XiBlock::Inert { .. } | XiBlock::DelayLine { .. } => dx.iter_mut().for_each(|v| *v = 0.0),
            XiBlock::Leaky { rate, player, .. } => {
                for k in 0..dim {
                    dx[k] = -rate * x[k] + ws.coupled[player][k];
                }
            }
        }
        offset += dim;
    }
    HiddenState::derivative(&game.hidden, h, phi, d_h);
}

/// `v_i = Σ_{j∈I_i} u_j`, plus any intention-field taps.
pub fn assemble_coalitions(game: &GameDefinition, coupled: &[Vec<f64>], xi: &[f64], out: &mut [Vec<f64>]) {
    for (v, members) in out.iter_mut().zip(&game.coalitions) {
        if let [only] = members.as_slice() {
            v.copy_from_slice(&coupled[*only]);
        } else {
            v.iter_mut().for_each(|x| *x = 0.0);
            for &m in members {
                for (a, b) in v.iter_mut().zip(&coupled[m]) {
                    *a += b;
                }
            }
        }
    }
    for tap in &game.xi_feedback {
        for k in 0..tap.dim {
            out[tap.coalition][k] += tap.gain * xi[tap.offset + k];
        }
    }
}

/// Seeded initial state. Drum phases (kaleidoscope state) and the hidden
/// generator's internal state are drawn from the `dynamics.initial` stream.
pub fn initial_state(game: &GameDefinition, seed: u64) -> Result<SystemState> {
    game.validate()?;
    let mut rng = stream_rng(seed, DYNAMICS_INITIAL);
    let mut phi = game.phi0.clone();
    if let PhiModel::Kaleidoscope { .. } = game.phi_rhs {
        for pair in 0..2 {
            let radius = phi[2 * pair].hypot(phi[2 * pair + 1]);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            phi[2 * pair] = radius * angle.cos();
            phi[2 * pair + 1] = radius * angle.sin();
        }
    }
    let mut xi = if game.xi0.is_empty() {
        vec![0.0; game.intention_dim]
    } else {
        game.xi0.clone()
    };
    // delay lines start from a constant history equal to the initial state
    let mut offset = 0;
    for block in &game.xi_rhs {
        if let XiBlock::DelayLine { width, cells, .. } = *block {
            for c in 0..cells {
                xi[offset + c * width..offset + (c + 1) * width].copy_from_slice(&phi);
            }
        }
        offset += block.dim();
    }
    let hidden = HiddenState::initial(&game.hidden, game.control_dim, &mut rng);
    Ok(SystemState {
        step: 0,
        t: 0.0,
        phi,
        xi,
        hidden,
    })
}

/// Observables and ground truth at `state` under held pure controls `pure`.
pub fn observe(game: &GameDefinition, state: &SystemState, pure: &[Vec<f64>]) -> (Sample, Vec<Vec<f64>>) {
    let mut eps: Vec<Vec<f64>> = game.couplings.iter().map(|c| vec![0.0; c.eps_dim]).collect();
    state.hidden.eps(&game.hidden, &state.hidden.continuous, &mut eps);
    let mut coupled = vec![vec![0.0; game.control_dim]; game.n_players];
    for (p, coupling) in game.couplings.iter().enumerate() {
        coupling.apply(&pure[p], &eps[p], &mut coupled[p]);
    }
    let sample = Sample {
        t: state.t,
        phi: state.phi.clone(),
        xi: state.xi.clone(),
        u_pure: pure.to_vec(),
        u_coupled: coupled,
    };
    (sample, eps)
}

fn check_finite(state: &SystemState) -> Result<()> {
    let groups: [(&str, &[f64]); 3] = [
        ("phi", &state.phi),
        ("xi", &state.xi),
        ("hidden", &state.hidden.continuous),
    ];
    for (name, values) in groups {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged {
                component: format!("{name}[{i}]"),
                t: state.t,
            });
        }
    }
    Ok(())
}

/// One classical RK4 step of the joint `(φ, ξ, hidden)` system with `pure`
/// held over the step, followed by the discrete updates (delay-line shifts,
/// mirror buffers) and a finiteness check.
pub fn step(game: &GameDefinition, state: &SystemState, pure: &[Vec<f64>], dt: f64) -> Result<SystemState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation("dt", "must be positive and finite"));
    }
    if pure.len() != game.n_players || pure.iter().any(|u| u.len() != game.control_dim) {
        return Err(Error::validation(
            "pure_controls",
            format!("need {} vectors of length {}", game.n_players, game.control_dim),
        ));
    }
    let s = game.state_dim;
    let i_dim = game.intention_dim;
    let n = s + i_dim + state.hidden.continuous.len();
    let mut y = Vec::with_capacity(n);
    y.extend_from_slice(&state.phi);
    y.extend_from_slice(&state.xi);
    y.extend_from_slice(&state.hidden.continuous);

    let mut ws = Workspace::new(game);
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];

    joint_rhs(game, &state.hidden, pure, &y, &mut k[0], &mut ws);
    for j in 0..n {
        tmp[j] = y[j] + 0.5 * dt * k[0][j];
    }
    joint_rhs(game, &state.hidden, pure, &tmp, &mut k[1], &mut ws);
    for j in 0..n {
        tmp[j] = y[j] + 0.5 * dt * k[1][j];
    }
    joint_rhs(game, &state.hidden, pure, &tmp, &mut k[2], &mut ws);
    for j in 0..n {
        tmp[j] = y[j] + dt * k[2][j];
    }
    joint_rhs(game, &state.hidden, pure, &tmp, &mut k[3], &mut ws);
    for j in 0..n {
        y[j] += dt / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
    }

    let step_index = state.step + 1;
    let mut next = SystemState {
        step: step_index,
        t: step_index as f64 * dt,
        phi: y[..s].to_vec(),
        xi: y[s..s + i_dim].to_vec(),
        hidden: HiddenState {
            continuous: y[s + i_dim..].to_vec(),
            echo: state.hidden.echo.clone(),
        },
    };

    let mut offset = 0;
    for block in &game.xi_rhs {
        if let XiBlock::DelayLine {
            width,
            cells,
            hold_steps,
        } = *block
        {
            if step_index % hold_steps as u64 == 0 {
                let line = &mut next.xi[offset..offset + width * cells];
                line.copy_within(0..width * (cells - 1), width);
                line[..width].copy_from_slice(&state.phi);
            }
        }
        offset += block.dim();
    }
    next.hidden.after_step(&game.hidden, pure);

    check_finite(&next)?;
    Ok(next)
}

/// Stateful driver: evaluates a policy, records the sample, steps.
#[derive(Clone, Debug)]
pub struct Simulator {
    game: GameDefinition,
    dt: f64,
    state: SystemState,
    trajectory: Trajectory,
    pure: Vec<Vec<f64>>,
}

impl Simulator {
    pub fn new(game: GameDefinition, dt: f64, seed: u64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::validation("dt", "must be positive and finite"));
        }
        let state = initial_state(&game, seed)?;
        let pure = vec![vec![0.0; game.control_dim]; game.n_players];
        Ok(Simulator {
            trajectory: Trajectory::new(dt),
            game,
            dt,
            state,
            pure,
        })
    }

    pub fn game(&self) -> &GameDefinition {
        &self.game
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    /// Records the sample at the current time with the controls `policy` picks
    /// there. If that time was already recorded (a closing sample), its
    /// controls are replaced.
    pub fn record(&mut self, policy: &Policy) {
        policy.evaluate(&self.state.phi, &mut self.pure);
        let (sample, eps) = observe(&self.game, &self.state, &self.pure);
        let already = self
            .trajectory
            .samples
            .last()
            .is_some_and(|s| s.t.to_bits() == self.state.t.to_bits());
        if already {
            self.trajectory.replace_last_inputs(sample, eps);
        } else {
            self.trajectory.push(sample, eps);
        }
    }

    /// Records the current sample under `policy` and takes one step with its controls.
    pub fn advance(&mut self, policy: &Policy) -> Result<()> {
        self.record(policy);
        self.state = step(&self.game, &self.state, &self.pure, self.dt)?;
        Ok(())
    }
}

/// Runs `policy` from the seeded initial state for `round(horizon/dt)` steps
/// and records every sample including both endpoints.
pub fn simulate(game: &GameDefinition, horizon: f64, dt: f64, policy: &Policy, seed: u64) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation("dt", "must be positive and finite"));
    }
    if !(horizon.is_finite() && horizon >= dt * (1.0 - 1e-9)) {
        return Err(Error::validation("horizon", "must be finite and >= dt"));
    }
    policy.validate(game)?;
    let steps = (horizon / dt).round() as u64;
    let mut sim = Simulator::new(game.clone(), dt, seed)?;
    for _ in 0..steps {
        sim.advance(policy)?;
    }
    sim.record(policy);
    Ok(sim.trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::model::{CouplingSpec, HiddenBehaviorSpec};

    pub(crate) fn decay_game(phi0: f64) -> GameDefinition {
        GameDefinition {
            state_dim: 1,
            intention_dim: 1,
            n_players: 1,
            control_dim: 1,
            phi_rhs: PhiModel::Linear { decay: 1.0, gain: 1.0 },
            xi_rhs: vec![XiBlock::Inert { dim: 1 }],
            couplings: vec![CouplingSpec::additive(1)],
            hidden: HiddenBehaviorSpec::Silent,
            coalitions: GameDefinition::singleton_coalitions(1),
            xi_feedback: vec![],
            phi0: vec![phi0],
            xi0: vec![],
        }
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let traj = simulate(&decay_game(1.0), 1.0, 0.01, &Policy::zero(1), 0).unwrap();
        assert_eq!(traj.len(), 101);
        let last = traj.samples.last().unwrap();
        assert!((last.phi[0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn horizon_equal_to_dt_gives_two_samples() {
        let traj = simulate(&decay_game(1.0), 0.01, 0.01, &Policy::zero(1), 0).unwrap();
        assert_eq!(traj.len(), 2);
        assert_eq!(traj.samples[0].t, 0.0);
        assert_eq!(traj.samples[1].t, 0.01);
    }

    #[test]
    fn zero_controls_with_silent_hidden_give_zero_interactive_controls() {
        let traj = simulate(&decay_game(2.0), 0.5, 0.01, &Policy::zero(1), 3).unwrap();
        assert!(traj.samples.iter().all(|s| s.u_coupled[0][0] == 0.0));
    }

    #[test]
    fn divergence_names_component_and_time() {
        let mut game = decay_game(1.0);
        game.phi_rhs = PhiModel::Linear { decay: -1e4, gain: 1.0 };
        let err = simulate(&game, 100.0, 0.1, &Policy::zero(1), 0).unwrap_err();
        match err {
            Error::IntegrationDiverged { component, t } => {
                assert_eq!(component, "phi[0]");
                assert!(t > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_dt() {
        let game = decay_game(1.0);
        let state = initial_state(&game, 0).unwrap();
        assert!(step(&game, &state, &[vec![0.0]], 0.0).is_err());
    }
}
