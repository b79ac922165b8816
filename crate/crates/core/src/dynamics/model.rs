use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a player's pure control `u°` and the hidden parameter `ε` combine into
/// the interactive control `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingForm {
    /// `u = u° + ε`, with `ε` of the same dimension as the control.
    Additive,
    /// `u_c = (1 + ε_gain)·u°_c + ε_bias` on every channel `c`, with
    /// `ε = (ε_gain, ε_bias)`.
    AffineGain,
}

/// Channel spread of `u°` below which the affine-gain coupling cannot be inverted.
pub const AFFINE_SPREAD_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub form: CouplingForm,
    pub eps_dim: usize,
}

impl CouplingSpec {
    pub fn additive(control_dim: usize) -> Self {
        CouplingSpec {
            form: CouplingForm::Additive,
            eps_dim: control_dim,
        }
    }

    pub fn affine_gain() -> Self {
        CouplingSpec {
            form: CouplingForm::AffineGain,
            eps_dim: 2,
        }
    }

    pub fn apply(&self, pure: &[f64], eps: &[f64], out: &mut [f64]) {
        match self.form {
            CouplingForm::Additive => {
                for ((o, &p), &e) in out.iter_mut().zip(pure).zip(eps) {
                    *o = p + e;
                }
            }
            CouplingForm::AffineGain => {
                let (gain, bias) = (eps[0], eps[1]);
                for (o, &p) in out.iter_mut().zip(pure) {
                    *o = (1.0 + gain) * p + bias;
                }
            }
        }
    }

    /// Solves `coupled = apply(pure, ε)` for `ε`. Returns `None` where the
    /// map is not injective at this `pure`.
    pub fn invert(&self, pure: &[f64], coupled: &[f64]) -> Option<Vec<f64>> {
        match self.form {
            CouplingForm::Additive => Some(coupled.iter().zip(pure).map(|(u, p)| u - p).collect()),
            CouplingForm::AffineGain => {
                // least squares of u_c = a·u°_c + b over the channels
                let n = pure.len() as f64;
                let mean_p = pure.iter().sum::<f64>() / n;
                let mean_u = coupled.iter().sum::<f64>() / n;
                let mut sxx = 0.0;
                let mut sxy = 0.0;
                for (&p, &u) in pure.iter().zip(coupled) {
                    sxx += (p - mean_p) * (p - mean_p);
                    sxy += (p - mean_p) * (u - mean_u);
                }
                if sxx.sqrt() < AFFINE_SPREAD_FLOOR {
                    return None;
                }
                let slope = sxy / sxx;
                Some(vec![slope - 1.0, mean_u - slope * mean_p])
            }
        }
    }

    fn validate(&self, player: usize, control_dim: usize) -> Result<()> {
        let field = format!("couplings[{player}]");
        match self.form {
            CouplingForm::Additive if self.eps_dim != control_dim => Err(Error::validation(
                field,
                format!("additive coupling needs eps_dim == control_dim ({control_dim})"),
            )),
            CouplingForm::AffineGain if self.eps_dim != 2 => {
                Err(Error::validation(field, "affine-gain coupling needs eps_dim == 2"))
            }
            CouplingForm::AffineGain if control_dim < 2 => Err(Error::validation(
                field,
                "affine-gain coupling is only injective for control_dim >= 2",
            )),
            _ => Ok(()),
        }
    }
}

/// Right-hand side `Φ(φ, v_1..v_m)` of the observable state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum PhiModel {
    /// `φ̇_k = −decay·φ_k + gain·Σ_j v_j[k]` (controls beyond `state_dim` are ignored).
    Linear { decay: f64, gain: f64 },
    /// Two free-running drums, a pointer steered by the first coalition, and a clock.
    ///
    /// Layout: `[drum1_x, drum1_y, drum2_x, drum2_y, pointer_x, pointer_y, clock]`.
    Kaleidoscope {
        drum_frequencies: [f64; 2],
        pointer_decay: f64,
        pointer_gain: f64,
    },
}

pub mod kaleidoscope {
    pub const STATE_DIM: usize = 7;
    pub const POINTER: usize = 4;
    pub const CLOCK: usize = 6;
}

impl PhiModel {
    pub fn id(&self) -> &'static str {
        match self {
            PhiModel::Linear { .. } => "linear",
            PhiModel::Kaleidoscope { .. } => "kaleidoscope",
        }
    }

    pub fn required_state_dim(&self) -> Option<usize> {
        match self {
            PhiModel::Linear { .. } => None,
            PhiModel::Kaleidoscope { .. } => Some(kaleidoscope::STATE_DIM),
        }
    }

    pub(crate) fn rhs(&self, phi: &[f64], coalitions: &[Vec<f64>], out: &mut [f64]) {
        match *self {
            PhiModel::Linear { decay, gain } => {
                for (k, o) in out.iter_mut().enumerate() {
                    let drive: f64 = coalitions.iter().filter_map(|v| v.get(k)).sum();
                    *o = -decay * phi[k] + gain * drive;
                }
            }
            PhiModel::Kaleidoscope {
                drum_frequencies: [w1, w2],
                pointer_decay,
                pointer_gain,
            } => {
                out[0] = -w1 * phi[1];
                out[1] = w1 * phi[0];
                out[2] = -w2 * phi[3];
                out[3] = w2 * phi[2];
                let steer = coalitions.first();
                for k in 0..2 {
                    let drive = steer.and_then(|v| v.get(k)).copied().unwrap_or(0.0);
                    out[kaleidoscope::POINTER + k] =
                        -pointer_decay * phi[kaleidoscope::POINTER + k] + pointer_gain * drive;
                }
                out[kaleidoscope::CLOCK] = 1.0;
            }
        }
    }
}

/// One contiguous block of the intention field `ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum XiBlock {
    /// `ξ̇ = 0`.
    Inert { dim: usize },
    /// `ξ̇ = −rate·ξ + u_player` on the first `dim` channels of the coupled control.
    Leaky { rate: f64, player: usize, dim: usize },
    /// Sampled delay line of `cells` copies of the observable state, shifted every
    /// `hold_steps` integration steps. Cell 0 is the newest sample.
    DelayLine {
        width: usize,
        cells: usize,
        hold_steps: usize,
    },
}

impl XiBlock {
    pub fn dim(&self) -> usize {
        match *self {
            XiBlock::Inert { dim } | XiBlock::Leaky { dim, .. } => dim,
            XiBlock::DelayLine { width, cells, .. } => width * cells,
        }
    }
}

/// Adds `gain·ξ[offset..offset+dim]` to coalition control `coalition`, the
/// `Φ̃(φ, ξ)` route by which history re-enters the dynamics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiFeedback {
    pub coalition: usize,
    pub offset: usize,
    pub dim: usize,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorenzForcing {
    pub phi_index: usize,
    pub gain: f64,
}

fn default_lorenz_sigma() -> f64 {
    10.0
}
fn default_lorenz_rho() -> f64 {
    28.0
}
fn default_lorenz_beta() -> f64 {
    8.0 / 3.0
}
fn default_mirror_gain() -> f64 {
    1.0
}

/// Ground-truth generator of the hidden parameters `ε`. One player (`target`)
/// receives the generated signal, every other player has `ε ≡ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HiddenBehaviorSpec {
    Silent,
    /// Sums of rotating pairs; component `m` of the target's `ε` is
    /// `amplitude·(x_j + y_k)` or `amplitude·(y_j − x_k)` with `j = m mod K`,
    /// `k = (m+1) mod K`, alternating by `m / K`.
    Oscillator {
        target: usize,
        frequencies: Vec<f64>,
        amplitude: f64,
    },
    /// Lorenz flow slowed by `time_scale`; component `m` of `ε` is
    /// `scales[m]·(coord[m mod 3] − offsets[m])`.
    LorenzLike {
        target: usize,
        #[serde(default = "default_lorenz_sigma")]
        sigma: f64,
        #[serde(default = "default_lorenz_rho")]
        rho: f64,
        #[serde(default = "default_lorenz_beta")]
        beta: f64,
        time_scale: f64,
        scales: Vec<f64>,
        #[serde(default)]
        offsets: Vec<f64>,
        #[serde(default)]
        forcing: Option<LorenzForcing>,
    },
    /// `ε_target` echoes `gain·u°_source` delayed by `lag_sets·set_steps` steps.
    LaggedMirror {
        source: usize,
        target: usize,
        lag_sets: usize,
        set_steps: usize,
        #[serde(default = "default_mirror_gain")]
        gain: f64,
    },
}

impl HiddenBehaviorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            HiddenBehaviorSpec::Silent => "silent",
            HiddenBehaviorSpec::Oscillator { .. } => "oscillator",
            HiddenBehaviorSpec::LorenzLike { .. } => "lorenz-like",
            HiddenBehaviorSpec::LaggedMirror { .. } => "lagged-mirror",
        }
    }

    /// Dimension of the continuous part of the hidden state (integrated with `φ`).
    pub fn continuous_dim(&self) -> usize {
        match self {
            HiddenBehaviorSpec::Silent | HiddenBehaviorSpec::LaggedMirror { .. } => 0,
            HiddenBehaviorSpec::Oscillator { frequencies, .. } => 2 * frequencies.len(),
            HiddenBehaviorSpec::LorenzLike { .. } => 3,
        }
    }

    pub fn eps_state_dim(&self, control_dim: usize) -> usize {
        match self {
            HiddenBehaviorSpec::LaggedMirror {
                lag_sets,
                set_steps,
                ..
            } => lag_sets * set_steps * control_dim,
            other => other.continuous_dim(),
        }
    }

    fn validate(&self, game: &GameDefinition) -> Result<()> {
        let players = game.n_players;
        let check_player = |field: &str, p: usize| {
            if p >= players {
                Err(Error::validation(
                    format!("hidden.{field}"),
                    format!("player {p} out of range (n_players = {players})"),
                ))
            } else {
                Ok(())
            }
        };
        match self {
            HiddenBehaviorSpec::Silent => Ok(()),
            HiddenBehaviorSpec::Oscillator {
                target,
                frequencies,
                amplitude,
            } => {
                check_player("target", *target)?;
                if frequencies.is_empty() || frequencies.iter().any(|w| !w.is_finite()) {
                    return Err(Error::validation(
                        "hidden.frequencies",
                        "need at least one finite frequency",
                    ));
                }
                if !amplitude.is_finite() {
                    return Err(Error::validation("hidden.amplitude", "must be finite"));
                }
                Ok(())
            }
            HiddenBehaviorSpec::LorenzLike {
                target,
                time_scale,
                scales,
                offsets,
                forcing,
                ..
            } => {
                check_player("target", *target)?;
                let dim = game.couplings[*target].eps_dim;
                if scales.len() != dim {
                    return Err(Error::validation(
                        "hidden.scales",
                        format!("need one scale per eps component ({dim})"),
                    ));
                }
                if !offsets.is_empty() && offsets.len() != dim {
                    return Err(Error::validation(
                        "hidden.offsets",
                        format!("need zero or {dim} offsets"),
                    ));
                }
                if !(*time_scale > 0.0 && time_scale.is_finite()) {
                    return Err(Error::validation("hidden.time_scale", "must be positive"));
                }
                if let Some(f) = forcing {
                    if f.phi_index >= game.state_dim {
                        return Err(Error::validation(
                            "hidden.forcing.phi_index",
                            "index outside the state vector",
                        ));
                    }
                }
                Ok(())
            }
            HiddenBehaviorSpec::LaggedMirror {
                source,
                target,
                lag_sets,
                set_steps,
                ..
            } => {
                check_player("source", *source)?;
                check_player("target", *target)?;
                if *lag_sets == 0 || *set_steps == 0 {
                    return Err(Error::validation(
                        "hidden.lag_sets",
                        "lag_sets and set_steps must be positive",
                    ));
                }
                if game.couplings[*target].eps_dim != game.control_dim {
                    return Err(Error::validation(
                        "hidden.target",
                        "mirror target needs eps_dim == control_dim",
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Everything that defines one interactive game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameDefinition {
    pub state_dim: usize,
    pub intention_dim: usize,
    pub n_players: usize,
    pub control_dim: usize,
    pub phi_rhs: PhiModel,
    pub xi_rhs: Vec<XiBlock>,
    pub couplings: Vec<CouplingSpec>,
    pub hidden: HiddenBehaviorSpec,
    /// Player-index sets `I_i` (0-based). Coalition `i` acts with `v_i = Σ_{j∈I_i} u_j`.
    pub coalitions: Vec<Vec<usize>>,
    #[serde(default)]
    pub xi_feedback: Vec<XiFeedback>,
    pub phi0: Vec<f64>,
    #[serde(default)]
    pub xi0: Vec<f64>,
}

impl GameDefinition {
    pub fn singleton_coalitions(n_players: usize) -> Vec<Vec<usize>> {
        (0..n_players).map(|i| vec![i]).collect()
    }

    pub fn eps_dims(&self) -> Vec<usize> {
        self.couplings.iter().map(|c| c.eps_dim).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.state_dim == 0 || self.intention_dim == 0 || self.n_players == 0 || self.control_dim == 0 {
            return Err(Error::validation(
                "game",
                "state_dim, intention_dim, n_players and control_dim must all be >= 1",
            ));
        }
        if let Some(d) = self.phi_rhs.required_state_dim() {
            if d != self.state_dim {
                return Err(Error::validation(
                    "phi_rhs",
                    format!("{} needs state_dim {d}", self.phi_rhs.id()),
                ));
            }
        }
        let xi_total: usize = self.xi_rhs.iter().map(XiBlock::dim).sum();
        if xi_total != self.intention_dim {
            return Err(Error::validation(
                "xi_rhs",
                format!("blocks span {xi_total} components, intention_dim is {}", self.intention_dim),
            ));
        }
        for (i, block) in self.xi_rhs.iter().enumerate() {
            match *block {
                XiBlock::Leaky { player, dim, .. } => {
                    if player >= self.n_players || dim > self.control_dim {
                        return Err(Error::validation(
                            format!("xi_rhs[{i}]"),
                            "leaky block references a missing player or channel",
                        ));
                    }
                }
                XiBlock::DelayLine {
                    width,
                    cells,
                    hold_steps,
                } => {
                    if width != self.state_dim || cells == 0 || hold_steps == 0 {
                        return Err(Error::validation(
                            format!("xi_rhs[{i}]"),
                            "delay line needs width == state_dim and positive cells/hold_steps",
                        ));
                    }
                }
                XiBlock::Inert { .. } => {}
            }
        }
        if self.couplings.len() != self.n_players {
            return Err(Error::validation(
                "couplings",
                format!("need one coupling per player ({})", self.n_players),
            ));
        }
        for (p, c) in self.couplings.iter().enumerate() {
            c.validate(p, self.control_dim)?;
        }
        if self.coalitions.is_empty() {
            return Err(Error::validation("coalitions", "need at least one coalition"));
        }
        let mut covered = vec![false; self.n_players];
        for (i, set) in self.coalitions.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::validation(format!("coalitions[{i}]"), "coalition is empty"));
            }
            for &p in set {
                if p >= self.n_players {
                    return Err(Error::validation(
                        format!("coalitions[{i}]"),
                        format!("player {p} out of range"),
                    ));
                }
                covered[p] = true;
            }
        }
        if let Some(p) = covered.iter().position(|c| !c) {
            return Err(Error::validation(
                "coalitions",
                format!("player {p} belongs to no coalition"),
            ));
        }
        for (i, fb) in self.xi_feedback.iter().enumerate() {
            if fb.coalition >= self.coalitions.len()
                || fb.offset + fb.dim > self.intention_dim
                || fb.dim > self.control_dim
            {
                return Err(Error::validation(
                    format!("xi_feedback[{i}]"),
                    "tap outside the intention field or coalition range",
                ));
            }
        }
        if self.phi0.len() != self.state_dim {
            return Err(Error::validation("phi0", format!("need {} components", self.state_dim)));
        }
        if !self.xi0.is_empty() && self.xi0.len() != self.intention_dim {
            return Err(Error::validation(
                "xi0",
                format!("need 0 or {} components", self.intention_dim),
            ));
        }
        self.hidden.validate(self)
    }
}
