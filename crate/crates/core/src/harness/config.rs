use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{GameDefinition, HiddenBehaviorSpec};
use crate::error::{Error, Result};
use crate::perception::FinishingPredicate;
use crate::roulette::{ControllerConfig, ResonanceConfig};

pub const SCENARIO_IDS: [&str; 3] = ["KR-1", "KR-1R", "custom"];

fn default_dt() -> f64 {
    0.01
}
fn default_n_sets() -> usize {
    200
}
fn default_alphabet() -> usize {
    4
}
fn default_set_period() -> f64 {
    1.0
}
fn default_control_bounds() -> [f64; 2] {
    [-1.0, 1.0]
}
fn default_credit_limit() -> f64 {
    1000.0
}
fn default_stake() -> f64 {
    1.0
}
fn default_serial_lags() -> usize {
    8
}
fn default_cell_width() -> f64 {
    0.005
}
fn default_extent() -> f64 {
    1.5
}
fn default_eps_axes() -> Vec<usize> {
    vec![0, 1]
}
fn default_control_axes() -> Vec<usize> {
    vec![2, 3]
}
fn default_policy_id() -> String {
    "coplayer-drum".into()
}
fn default_policy_gain() -> f64 {
    0.4
}

/// Uniform cuts on selected axes of the flattened `ε` and control vectors,
/// with symbols folded down to the alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default = "default_cell_width")]
    pub cell_width: f64,
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default)]
    pub hysteresis: f64,
    #[serde(default = "default_eps_axes")]
    pub eps_axes: Vec<usize>,
    #[serde(default = "default_control_axes")]
    pub control_axes: Vec<usize>,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            cell_width: default_cell_width(),
            extent: default_extent(),
            hysteresis: 0.0,
            eps_axes: default_eps_axes(),
            control_axes: default_control_axes(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(default = "default_policy_id")]
    pub id: String,
    #[serde(default = "default_policy_gain")]
    pub gain: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            id: default_policy_id(),
            gain: default_policy_gain(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_n_sets")]
    pub n_sets: usize,
    #[serde(default = "default_alphabet")]
    pub alphabet: usize,
    /// Duration of a set under the default clock predicate.
    #[serde(default = "default_set_period")]
    pub set_period: f64,
    /// Safety horizon per set; defaults to ten set periods.
    #[serde(default)]
    pub max_set_duration: Option<f64>,
    #[serde(default)]
    pub partition: PartitionConfig,
    /// Replaces the scenario's hidden behavior.
    #[serde(default)]
    pub hidden: Option<HiddenBehaviorSpec>,
    /// Full game for the `custom` scenario.
    #[serde(default)]
    pub game: Option<GameDefinition>,
    #[serde(default)]
    pub predicate: Option<FinishingPredicate>,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub controller: ControllerConfig,
    #[serde(default)]
    pub resonance: ResonanceConfig,
    #[serde(default = "default_serial_lags")]
    pub serial_lags: usize,
    #[serde(default = "default_control_bounds")]
    pub control_bounds: [f64; 2],
    #[serde(default = "default_credit_limit")]
    pub credit_limit: f64,
    #[serde(default = "default_stake")]
    pub stake: f64,
    #[serde(default)]
    pub out_dir: Option<String>,
}

impl ScenarioConfig {
    /// Defaults for `scenario` with the given seed.
    pub fn new(scenario: &str, seed: u64) -> Self {
        ScenarioConfig {
            scenario: scenario.to_string(),
            seed,
            dt: default_dt(),
            n_sets: default_n_sets(),
            alphabet: default_alphabet(),
            set_period: default_set_period(),
            max_set_duration: None,
            partition: PartitionConfig::default(),
            hidden: None,
            game: None,
            predicate: None,
            policy: PolicyConfig::default(),
            controller: ControllerConfig::default(),
            resonance: ResonanceConfig::default(),
            serial_lags: default_serial_lags(),
            control_bounds: default_control_bounds(),
            credit_limit: default_credit_limit(),
            stake: default_stake(),
            out_dir: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let config: ScenarioConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::validation(
                if path == "." { "config".to_string() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that can be checked without building the game.
    pub fn validate(&self) -> Result<()> {
        if !SCENARIO_IDS.contains(&self.scenario.as_str()) {
            return Err(Error::UnknownId {
                kind: "scenario",
                id: self.scenario.clone(),
                known: SCENARIO_IDS.iter().map(|s| s.to_string()).collect(),
            });
        }
        if self.scenario == "custom" && self.game.is_none() {
            return Err(Error::validation("game", "the custom scenario needs a game definition"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation("dt", "must be positive and finite"));
        }
        if self.n_sets == 0 {
            return Err(Error::validation("n_sets", "must be >= 1"));
        }
        if self.alphabet < 2 {
            return Err(Error::validation("alphabet", "need at least 2 symbols"));
        }
        if !(self.set_period > 0.0 && self.set_period.is_finite()) {
            return Err(Error::validation("set_period", "must be positive and finite"));
        }
        let steps = self.set_period / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::validation("set_period", "must be a multiple of dt"));
        }
        if let Some(m) = self.max_set_duration {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::validation("max_set_duration", "must be positive and finite"));
            }
        }
        let [lo, hi] = self.control_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::validation("control_bounds", "need finite min <= max"));
        }
        if !(self.credit_limit >= 0.0 && self.credit_limit.is_finite()) {
            return Err(Error::validation("credit_limit", "must be finite and >= 0"));
        }
        if !(self.stake > 0.0 && self.stake.is_finite()) {
            return Err(Error::validation("stake", "must be positive and finite"));
        }
        if self.serial_lags == 0 {
            return Err(Error::validation("serial_lags", "must be >= 1"));
        }
        if self.controller.order == 0 || self.controller.fit_window <= self.controller.order {
            return Err(Error::validation("controller.fit_window", "must exceed the order (>= 1)"));
        }
        if self.controller.timescale_window < 2 {
            return Err(Error::validation("controller.timescale_window", "must be >= 2"));
        }
        if self.resonance.window == 0 {
            return Err(Error::validation("resonance.window", "must be >= 1"));
        }
        if self.resonance.n_surrogates < crate::roulette::MIN_SURROGATES {
            return Err(Error::validation(
                "resonance.n_surrogates",
                format!("must be >= {}", crate::roulette::MIN_SURROGATES),
            ));
        }
        Ok(())
    }

    pub fn set_steps(&self) -> usize {
        (self.set_period / self.dt).round() as usize
    }

    pub fn max_duration(&self) -> f64 {
        self.max_set_duration.unwrap_or(10.0 * self.set_period)
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    ScenarioConfig::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ScenarioConfig::from_json_str(r#"{"scenario":"KR-1","seed":1}"#).unwrap();
        assert_eq!(c.dt, 0.01);
        assert_eq!(c.n_sets, 200);
        assert_eq!(c.alphabet, 4);
        assert_eq!(c, ScenarioConfig::new("KR-1", 1));
    }

    #[test]
    fn unknown_scenario_lists_ids() {
        match ScenarioConfig::from_json_str(r#"{"scenario":"KR-9","seed":1}"#) {
            Err(Error::UnknownId { known, .. }) => assert_eq!(known, vec!["KR-1", "KR-1R", "custom"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        match ScenarioConfig::from_json_str("{\n  \"scenario\": \"KR-1\",\n  \"seed\": }") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_error_names_field() {
        match ScenarioConfig::from_json_str(r#"{"scenario":"KR-1","seed":1,"partition":{"cell_width":"wide"}}"#) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "partition.cell_width"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(ScenarioConfig::from_json_str(r#"{"scenario":"KR-1","seed":1,"horizn":3}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let mut c = ScenarioConfig::new("KR-1R", 7);
        c.dt = 0.005;
        c.max_set_duration = Some(3.3);
        let back = ScenarioConfig::from_json_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
