use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::epsilon::{timescale_ratio, PredictionModel};
use crate::error::{Error, Result};
use crate::perception::write_match_log;
use crate::roulette::{
    binomial_p_greater, binomial_p_two_sided, detect_resonance, quasirandomness_suite, BetLedger, QuasirandomReport,
    ResonanceReport, WordPrediction,
};
use crate::verbalization::{WordSequence, WordsDocument};

use super::config::ScenarioConfig;
use super::live::{Action, Bet, LiveMatch};

/// Which artifacts a run writes. Every stage plays the full match.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Simulate,
    Verbalize,
    Resonance,
    Bet,
    Run,
}

impl Stage {
    fn includes(self, other: Stage) -> bool {
        self == Stage::Run || self == other
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub stage: Stage,
    pub out_dir: Option<PathBuf>,
    pub reveal_hidden: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            stage: Stage::Run,
            out_dir: None,
            reveal_hidden: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub seed: u64,
    pub files: Vec<FileHash>,
    /// Hash over the `name:sha256` lines of all files.
    pub run_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktestSummary {
    pub bets: usize,
    pub hits: usize,
    pub hit_rate: f64,
    pub chance: f64,
    /// One-sided binomial test against chance (`hit rate > chance`).
    pub p_greater: f64,
    pub p_two_sided: f64,
}

impl BacktestSummary {
    pub fn from_ledger(ledger: &BetLedger) -> Self {
        let bets = ledger.entries.len();
        let hits = ledger.hits();
        let chance = 1.0 / ledger.alphabet_size as f64;
        BacktestSummary {
            bets,
            hits,
            hit_rate: ledger.hit_rate(),
            chance,
            p_greater: binomial_p_greater(hits, bets, chance),
            p_two_sided: binomial_p_two_sided(hits, bets, chance),
        }
    }
}

/// A match played by the predictive controller: before each set it bets the
/// configured stake on the forecast word, when a forecast is available.
#[derive(Clone, Debug)]
pub struct Backtest {
    pub live: LiveMatch,
    /// Prediction made before each set.
    pub predictions: Vec<Option<WordPrediction>>,
    pub last_model: Option<PredictionModel>,
}

impl Backtest {
    pub fn summary(&self) -> BacktestSummary {
        BacktestSummary::from_ledger(self.live.ledger())
    }
}

pub fn play_backtest(config: &ScenarioConfig) -> Result<Backtest> {
    let mut live = LiveMatch::new(config)?;
    let stake = config.stake;
    let mut predictions = Vec::with_capacity(config.n_sets);
    let mut last_model = None;
    while !live.finished() {
        let prediction = live.predict_next()?;
        let bet = match &prediction {
            Some((p, _)) if live.can_stake(stake) => Some(Bet {
                symbol: p.symbol,
                stake,
            }),
            _ => None,
        };
        live.play_set(&Action { bet, control: None })?;
        if let Some((p, model)) = prediction {
            predictions.push(Some(p));
            last_model = Some(model);
        } else {
            predictions.push(None);
        }
    }
    Ok(Backtest {
        live,
        predictions,
        last_model,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Present when the stage includes the resonance analysis.
    pub quasirandom: Option<QuasirandomReport>,
    pub resonance: Option<ResonanceReport>,
    pub backtest: BacktestSummary,
    /// Present when the stage includes betting.
    pub timescale_ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub manifest: Manifest,
    pub report: ExperimentReport,
    pub words: WordSequence,
    pub ledger: BetLedger,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    code: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
    message: String,
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn resolve_out_dir(config: &ScenarioConfig, opts: &RunOptions) -> Option<PathBuf> {
    opts.out_dir.clone().or_else(|| config.out_dir.as_ref().map(PathBuf::from))
}

/// Plays the configured match with the predictive controller, analyses it and
/// writes the artifacts plus a manifest of their hashes. On failure, writes
/// `error.json` into the output directory (when there is one).
pub fn run_experiment(config: &ScenarioConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    let out_dir = resolve_out_dir(config, opts);
    let result = run_inner(config, opts, out_dir.as_deref());
    if let (Err(e), Some(dir)) = (&result, &out_dir) {
        let report = ErrorReport {
            code: e.code(),
            field: e.field(),
            message: e.to_string(),
        };
        if std::fs::create_dir_all(dir).is_ok() {
            if let Ok(bytes) = to_json(&report) {
                let _ = std::fs::write(dir.join("error.json"), bytes);
            }
        }
    }
    result
}

fn run_inner(config: &ScenarioConfig, opts: &RunOptions, out_dir: Option<&Path>) -> Result<ExperimentOutcome> {
    let backtest = play_backtest(config)?;
    let live = &backtest.live;
    let scenario = live.scenario();
    let words = live.words().clone();
    let trace = live.engine().trace();

    let mut report = ExperimentReport {
        quasirandom: None,
        resonance: None,
        backtest: backtest.summary(),
        timescale_ratio: None,
    };
    if opts.stage.includes(Stage::Resonance) {
        let omega = words.omega_symbols();
        report.quasirandom = Some(quasirandomness_suite(&omega, words.alphabet_size, config.serial_lags)?);
        report.resonance = Some(detect_resonance(
            &words.v_symbols(),
            &omega,
            &words.phi_summaries(),
            words.alphabet_size,
            &config.resonance,
            config.seed,
        )?);
    }
    if opts.stage.includes(Stage::Bet) {
        report.timescale_ratio = Some(timescale_ratio(trace, &words)?);
    }

    let mut artifacts: Vec<(&str, Vec<u8>)> = vec![("config.resolved.json", scenario.config.to_json().into_bytes())];
    let traj = live.engine().trajectory();
    if opts.stage.includes(Stage::Simulate) {
        let mut buf = Vec::new();
        traj.write_csv(&mut buf)?;
        artifacts.push(("trajectory.csv", buf));
        if opts.reveal_hidden {
            let mut buf = Vec::new();
            traj.write_hidden_csv(&mut buf)?;
            artifacts.push(("hidden_eps.csv", buf));
        }
    }
    if opts.stage.includes(Stage::Verbalize) {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        artifacts.push(("eps.csv", buf));
        let mut buf = Vec::new();
        words.write_csv(&mut buf)?;
        artifacts.push(("words.csv", buf));
        artifacts.push((
            "words.json",
            to_json(&WordsDocument {
                verbalizer: scenario.verbalizer.clone(),
                words: words.clone(),
            })?,
        ));
        let mut buf = Vec::new();
        write_match_log(&mut buf, live.sets())?;
        artifacts.push(("match.jsonl", buf));
    }
    if let (Some(q), Some(r)) = (&report.quasirandom, &report.resonance) {
        artifacts.push(("quasirandom.json", to_json(q)?));
        artifacts.push(("resonance.json", to_json(r)?));
    }
    if opts.stage.includes(Stage::Bet) {
        let mut buf = Vec::new();
        live.ledger().write_csv(&mut buf)?;
        artifacts.push(("ledger.csv", buf));
        artifacts.push(("backtest.json", to_json(&report.backtest)?));
        if let Some(model) = &backtest.last_model {
            artifacts.push(("prediction_model.json", to_json(model)?));
        }
    }

    let files: Vec<FileHash> = artifacts
        .iter()
        .map(|(name, bytes)| FileHash {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        })
        .collect();
    let mut run = Sha256::new();
    for f in &files {
        run.update(format!("{}:{}\n", f.name, f.sha256).as_bytes());
    }
    let manifest = Manifest {
        scenario: config.scenario.clone(),
        seed: config.seed,
        files,
        run_hash: hex::encode(run.finalize()),
    };

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &artifacts {
            std::fs::write(dir.join(name), bytes)?;
        }
        std::fs::write(dir.join("manifest.json"), to_json(&manifest)?)?;
    }

    Ok(ExperimentOutcome {
        manifest,
        report,
        words,
        ledger: live.ledger().clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResonance {
    pub seeds: Vec<u64>,
    pub detected: Vec<bool>,
    pub detected_fraction: f64,
}

/// Resonance detection repeated over independent realizations of one scenario.
pub fn ensemble_resonance(config: &ScenarioConfig, seeds: &[u64]) -> Result<EnsembleResonance> {
    let mut detected = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut c = config.clone();
        c.seed = seed;
        let mut live = LiveMatch::new(&c)?;
        while !live.finished() {
            live.play_set(&Action::default())?;
        }
        let w = live.words();
        let r = detect_resonance(
            &w.v_symbols(),
            &w.omega_symbols(),
            &w.phi_summaries(),
            w.alphabet_size,
            &c.resonance,
            seed,
        )?;
        detected.push(r.detected);
    }
    let fraction = detected.iter().filter(|&&d| d).count() as f64 / detected.len().max(1) as f64;
    Ok(EnsembleResonance {
        seeds: seeds.to_vec(),
        detected,
        detected_fraction: fraction,
    })
}
