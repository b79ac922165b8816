use kr_core::harness::{LiveMatch, ResonanceIndicator};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    AwaitingAction,
    Advancing,
    Finished,
}

/// A finished set as the player sees it: symbols only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordView {
    pub n: usize,
    pub omega_symbol: usize,
    pub v_symbol: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlBounds {
    pub control_min: f64,
    pub control_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub set_index: usize,
    pub phase: Phase,
    pub words: Vec<WordView>,
    pub balance: f64,
    pub resonance: ResonanceIndicator,
    pub bounds: ControlBounds,
    pub alphabet_size: usize,
}

impl Snapshot {
    pub fn of(live: &LiveMatch, phase: Phase) -> Self {
        let [control_min, control_max] = live.config().control_bounds;
        Snapshot {
            set_index: live.set_index(),
            phase,
            words: live
                .words()
                .entries
                .iter()
                .map(|w| WordView {
                    n: w.n,
                    omega_symbol: w.omega_symbol,
                    v_symbol: w.v_symbol,
                })
                .collect(),
            balance: live.ledger().balance,
            resonance: live.indicator().clone(),
            bounds: ControlBounds {
                control_min,
                control_max,
            },
            alphabet_size: live.alphabet_size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub snapshot: Snapshot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Accepted {
    pub accepted: bool,
    pub set_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}
