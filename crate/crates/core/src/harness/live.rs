use serde::{Deserialize, Serialize};

use crate::dynamics::PlayerPolicy;
use crate::epsilon::PredictionModel;
use crate::error::{Error, Result};
use crate::perception::{MatchEngine, SetRecord};
use crate::roulette::{detect_resonance, forecast_next_word, BetEntry, BetLedger, WordPrediction, MIN_HISTORY};
use crate::seed::{derive_seed, DYNAMICS_INITIAL};
use crate::verbalization::{WordEntry, WordSequence};

use super::config::ScenarioConfig;
use super::scenarios::Scenario;

/// The human's seat: player 0 steers, and bets are on its `ω`.
pub const HUMAN: usize = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bet {
    pub symbol: usize,
    pub stake: f64,
}

/// What a player commits to for one set: an optional bet on the set's word
/// and a pure control held over the whole set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Action {
    #[serde(default)]
    pub bet: Option<Bet>,
    #[serde(default)]
    pub control: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResonanceIndicator {
    pub mi: f64,
    pub threshold: f64,
    pub detected: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetOutcome {
    pub record: SetRecord,
    pub word: WordEntry,
    pub bet: Option<BetEntry>,
}

/// One kaleidoscope-roulette match in progress.
#[derive(Clone, Debug)]
pub struct LiveMatch {
    scenario: Scenario,
    engine: MatchEngine,
    ledger: BetLedger,
    sets: Vec<SetRecord>,
    indicator: ResonanceIndicator,
    track_indicator: bool,
}

impl LiveMatch {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        let scenario = Scenario::resolve(config)?;
        let engine = MatchEngine::new(
            scenario.game.clone(),
            config.dt,
            derive_seed(config.seed, DYNAMICS_INITIAL),
            scenario.verbalizer.clone(),
            scenario.predicate.clone(),
        )?;
        Ok(LiveMatch {
            ledger: BetLedger::new(scenario.verbalizer.alphabet_size()),
            scenario,
            engine,
            sets: Vec::new(),
            indicator: ResonanceIndicator::default(),
            track_indicator: false,
        })
    }

    /// Refresh the resonance indicator after every set.
    pub fn with_indicator(mut self) -> Self {
        self.track_indicator = true;
        self
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.scenario.config
    }

    pub fn engine(&self) -> &MatchEngine {
        &self.engine
    }

    pub fn words(&self) -> &WordSequence {
        self.engine.words()
    }

    pub fn ledger(&self) -> &BetLedger {
        &self.ledger
    }

    pub fn sets(&self) -> &[SetRecord] {
        &self.sets
    }

    pub fn indicator(&self) -> &ResonanceIndicator {
        &self.indicator
    }

    pub fn set_index(&self) -> usize {
        self.sets.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.ledger.alphabet_size
    }

    pub fn finished(&self) -> bool {
        self.sets.len() >= self.scenario.config.n_sets
    }

    pub fn can_stake(&self, stake: f64) -> bool {
        stake <= self.ledger.balance + self.scenario.config.credit_limit
    }

    pub fn validate_action(&self, action: &Action) -> Result<()> {
        if let Some(bet) = &action.bet {
            if bet.symbol >= self.alphabet_size() {
                return Err(Error::validation(
                    "bet.symbol",
                    format!("must be below the alphabet size {}", self.alphabet_size()),
                ));
            }
            if !(bet.stake > 0.0 && bet.stake.is_finite()) {
                return Err(Error::validation("bet.stake", "must be positive and finite"));
            }
            if !self.can_stake(bet.stake) {
                return Err(Error::validation("bet.stake", "exceeds balance plus credit limit"));
            }
        }
        if let Some(control) = &action.control {
            let dim = self.scenario.game.control_dim;
            if control.len() != dim {
                return Err(Error::validation("control", format!("need {dim} components")));
            }
            let [lo, hi] = self.scenario.config.control_bounds;
            if let Some(k) = control.iter().position(|&c| !(c >= lo && c <= hi)) {
                return Err(Error::validation(format!("control[{k}]"), format!("must lie in [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Bet for the next set from the `ε` forecast, once enough history exists.
    pub fn predict_next(&self) -> Result<Option<(WordPrediction, PredictionModel)>> {
        let trace = self.engine.trace();
        if self.words().len() < MIN_HISTORY || trace.len() < self.scenario.config.controller.fit_window {
            return Ok(None);
        }
        forecast_next_word(
            trace,
            self.words(),
            &self.scenario.verbalizer.omega_partition,
            &self.scenario.config.controller,
        )
        .map(Some)
    }

    /// Plays the next set. A given control replaces the human's policy for
    /// this set; a bet is settled against the set's word.
    pub fn play_set(&mut self, action: &Action) -> Result<SetOutcome> {
        if self.finished() {
            return Err(Error::validation("phase", "the match is finished"));
        }
        self.validate_action(action)?;
        let index = self.sets.len();
        let mut policy = self.scenario.policy.clone();
        if let Some(control) = &action.control {
            policy = policy.with_player(HUMAN, PlayerPolicy::Constant { values: control.clone() });
        }
        let record = self
            .engine
            .run_set(&policy, self.scenario.max_duration)
            .map_err(|e| Error::InSet {
                index,
                source: Box::new(e),
            })?;
        let word = self.words().entries.last().cloned().expect("a set was played");
        let bet = match &action.bet {
            Some(b) => Some(self.ledger.settle(index, b.symbol, word.omega_symbol, b.stake)?.clone()),
            None => None,
        };
        self.sets.push(record.clone());
        if self.track_indicator {
            self.refresh_indicator()?;
        }
        Ok(SetOutcome { record, word, bet })
    }

    fn refresh_indicator(&mut self) -> Result<()> {
        let cfg = &self.scenario.config.resonance;
        let words = self.engine.words();
        if words.len() < cfg.window + cfg.max_lag {
            return Ok(());
        }
        let report = detect_resonance(
            &words.v_symbols(),
            &words.omega_symbols(),
            &words.phi_summaries(),
            words.alphabet_size,
            cfg,
            self.scenario.config.seed,
        )?;
        self.indicator = ResonanceIndicator {
            mi: report.median_mi,
            threshold: report.surrogate_null.p95,
            detected: report.detected,
        };
        Ok(())
    }
}
