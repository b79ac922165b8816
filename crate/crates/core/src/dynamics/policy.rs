use serde::{Deserialize, Serialize};

use super::model::{GameDefinition, PhiModel};
use crate::error::{Error, Result};

/// Pure-control law of a single player. Evaluated once per integration step
/// and held over the step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum PlayerPolicy {
    Zero,
    Constant { values: Vec<f64> },
    /// Reads the two drums of the kaleidoscope state:
    /// `u° = gain·(drum1_x + drum2_y, drum1_y − drum2_x)`.
    DrumFollow { gain: f64 },
}

/// Joint control policy: one law per player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub players: Vec<PlayerPolicy>,
}

pub const POLICY_IDS: [&str; 4] = ["zero", "coplayer-drum", "drum-all", "constant"];

impl Policy {
    pub fn zero(n_players: usize) -> Self {
        Policy {
            players: vec![PlayerPolicy::Zero; n_players],
        }
    }

    /// Builds a registered joint policy. `gain` is used by the drum policies,
    /// `constant` holds `gain` on every channel of every player.
    pub fn from_id(id: &str, n_players: usize, control_dim: usize, gain: f64) -> Result<Self> {
        let players = match id {
            "zero" => vec![PlayerPolicy::Zero; n_players],
            "coplayer-drum" => (0..n_players)
                .map(|p| {
                    if p == 0 {
                        PlayerPolicy::Zero
                    } else {
                        PlayerPolicy::DrumFollow { gain }
                    }
                })
                .collect(),
            "drum-all" => vec![PlayerPolicy::DrumFollow { gain }; n_players],
            "constant" => vec![
                PlayerPolicy::Constant {
                    values: vec![gain; control_dim]
                };
                n_players
            ],
            other => {
                return Err(Error::UnknownId {
                    kind: "policy",
                    id: other.to_string(),
                    known: POLICY_IDS.iter().map(|s| s.to_string()).collect(),
                })
            }
        };
        Ok(Policy { players })
    }

    pub fn with_player(mut self, player: usize, policy: PlayerPolicy) -> Self {
        self.players[player] = policy;
        self
    }

    pub fn validate(&self, game: &GameDefinition) -> Result<()> {
        if self.players.len() != game.n_players {
            return Err(Error::validation(
                "policy",
                format!("need one law per player ({})", game.n_players),
            ));
        }
        for (p, law) in self.players.iter().enumerate() {
            match law {
                PlayerPolicy::Zero => {}
                PlayerPolicy::Constant { values } => {
                    if values.len() != game.control_dim || values.iter().any(|v| !v.is_finite()) {
                        return Err(Error::validation(
                            format!("policy.players[{p}]"),
                            format!("need {} finite values", game.control_dim),
                        ));
                    }
                }
                PlayerPolicy::DrumFollow { .. } => {
                    if !matches!(game.phi_rhs, PhiModel::Kaleidoscope { .. }) || game.control_dim != 2 {
                        return Err(Error::validation(
                            format!("policy.players[{p}]"),
                            "drum-follow needs the kaleidoscope state and 2 control channels",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn evaluate(&self, phi: &[f64], out: &mut [Vec<f64>]) {
        for (law, u) in self.players.iter().zip(out.iter_mut()) {
            match law {
                PlayerPolicy::Zero => u.iter_mut().for_each(|x| *x = 0.0),
                PlayerPolicy::Constant { values } => u.copy_from_slice(values),
                PlayerPolicy::DrumFollow { gain } => {
                    u[0] = gain * (phi[0] + phi[3]);
                    u[1] = gain * (phi[1] - phi[2]);
                }
            }
        }
    }
}
