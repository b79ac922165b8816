//! Scenario configuration and seeded end-to-end runs.

mod config;
mod live;
mod run;
mod scenarios;

pub use config::{load_config, PartitionConfig, PolicyConfig, ScenarioConfig, SCENARIO_IDS};
pub use live::{Action, Bet, LiveMatch, ResonanceIndicator, SetOutcome, HUMAN};
pub use run::{
    ensemble_resonance, play_backtest, run_experiment, Backtest, BacktestSummary, EnsembleResonance,
    ExperimentOutcome, ExperimentReport, FileHash, Manifest, RunOptions, Stage,
};
pub use scenarios::{kaleidoscope_game, lorenz_hidden, mirror_hidden, Scenario};
