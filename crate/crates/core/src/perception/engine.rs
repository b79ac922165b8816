use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::predicate::FinishingPredicate;
use crate::dynamics::{GameDefinition, Policy, Simulator, Trajectory};
use crate::epsilon::{recover_sample, EpsilonTrace, Provenance};
use crate::error::{Error, Result};
use crate::verbalization::{Verbalizer, WordEntry, WordSequence};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinishingReason {
    Predicate,
    Horizon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetRecord {
    pub index: usize,
    pub t_begin: f64,
    pub t_end: f64,
    pub start_position: Position,
    pub end_position: Position,
    pub omega_at_start: WordEntry,
    pub finishing_reason: FinishingReason,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchRecord {
    pub sets: Vec<SetRecord>,
    pub words: WordSequence,
}

/// A game advanced set by set. Keeps the observable trajectory, the
/// recovered `ε` and the words of the sets played so far.
#[derive(Clone, Debug)]
pub struct MatchEngine {
    sim: Simulator,
    verbalizer: Verbalizer,
    predicate: FinishingPredicate,
    eps: EpsilonTrace,
    words: WordSequence,
    omega_start: Option<WordEntry>,
    boundaries: Vec<usize>,
}

impl MatchEngine {
    pub fn new(
        game: GameDefinition,
        dt: f64,
        seed: u64,
        verbalizer: Verbalizer,
        predicate: FinishingPredicate,
    ) -> Result<Self> {
        game.validate()?;
        verbalizer.validate()?;
        predicate.validate(game.state_dim)?;
        let eps_width: usize = game.eps_dims().iter().sum();
        if eps_width != verbalizer.omega_partition.dims() {
            return Err(Error::LengthMismatch {
                context: "eps width vs state partition axes",
                left: eps_width,
                right: verbalizer.omega_partition.dims(),
            });
        }
        if game.n_players * game.control_dim != verbalizer.control_partition.dims() {
            return Err(Error::LengthMismatch {
                context: "control width vs control partition axes",
                left: game.n_players * game.control_dim,
                right: verbalizer.control_partition.dims(),
            });
        }
        let eps = EpsilonTrace {
            dt,
            times: Vec::new(),
            dims: game.eps_dims(),
            values: Vec::new(),
            provenance: Provenance::Recovered,
        };
        let words = WordSequence {
            alphabet_size: verbalizer.alphabet_size(),
            entries: Vec::new(),
            warnings: Vec::new(),
        };
        Ok(MatchEngine {
            sim: Simulator::new(game, dt, seed)?,
            verbalizer,
            predicate,
            eps,
            words,
            omega_start: None,
            boundaries: vec![0],
        })
    }

    pub fn game(&self) -> &GameDefinition {
        self.sim.game()
    }

    pub fn dt(&self) -> f64 {
        self.sim.dt()
    }

    pub fn trajectory(&self) -> &Trajectory {
        self.sim.trajectory()
    }

    /// Recovered `ε` up to the end of the last finished set.
    pub fn trace(&self) -> &EpsilonTrace {
        &self.eps
    }

    pub fn words(&self) -> &WordSequence {
        &self.words
    }

    pub fn verbalizer(&self) -> &Verbalizer {
        &self.verbalizer
    }

    pub fn sets_played(&self) -> usize {
        self.words.len()
    }

    /// Sample indices at which sets began, plus the end of the last one.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn position(&self) -> Position {
        let s = self.sim.state();
        Position {
            phi: s.phi.clone(),
            xi: s.xi.clone(),
        }
    }

    fn sync_eps(&mut self, from: usize) -> Result<()> {
        let traj = self.sim.trajectory();
        let couplings = &self.sim.game().couplings;
        self.eps.values.truncate(from);
        self.eps.times.truncate(from);
        for k in from..traj.len() {
            let s = &traj.samples[k];
            self.eps.values.push(recover_sample(s, couplings, k)?);
            self.eps.times.push(s.t);
        }
        Ok(())
    }

    /// Plays one set under `policy` until the predicate fires or
    /// `max_duration` has elapsed.
    pub fn run_set(&mut self, policy: &Policy, max_duration: f64) -> Result<SetRecord> {
        if !(max_duration > 0.0 && max_duration.is_finite()) {
            return Err(Error::validation("max_duration", "must be positive and finite"));
        }
        policy.validate(self.sim.game())?;
        let dt = self.sim.dt();
        let start = self.sim.trajectory().len().saturating_sub(1);
        self.sim.record(policy);
        self.sync_eps(start)?;
        let omega_start = match &self.omega_start {
            Some(w) => w.clone(),
            None => self
                .verbalizer
                .initial_word(&self.eps, self.sim.trajectory(), 0),
        };
        let start_position = self.position();
        let t_begin = self.sim.state().t;
        let max_steps = ((max_duration / dt) * (1.0 + 1e-12)).floor().max(1.0) as u64;

        let mut steps = 0u64;
        let reason = loop {
            self.sim.advance(policy)?;
            steps += 1;
            if self.predicate.finished(&self.sim.state().phi, &omega_start) {
                break FinishingReason::Predicate;
            }
            if steps >= max_steps {
                break FinishingReason::Horizon;
            }
        };
        self.sim.record(policy);
        self.sync_eps(start)?;
        let end = self.sim.trajectory().len() - 1;
        let n = self.words.len() + 1;
        let word = self.verbalizer.word(&self.eps, self.sim.trajectory(), start, end, n);
        let record = SetRecord {
            index: self.words.len(),
            t_begin,
            t_end: self.sim.state().t,
            start_position,
            end_position: self.position(),
            omega_at_start: omega_start,
            finishing_reason: reason,
        };
        self.words.entries.push(word.clone());
        self.omega_start = Some(word);
        self.boundaries.push(end);
        Ok(record)
    }

    /// Chains `n_sets` sets, cycling through `policies` set by set.
    pub fn run_match(&mut self, n_sets: usize, policies: &[Policy], max_duration: f64) -> Result<MatchRecord> {
        if n_sets == 0 {
            return Err(Error::validation("n_sets", "must be >= 1"));
        }
        if policies.is_empty() {
            return Err(Error::validation("policies", "need at least one policy"));
        }
        let first = self.words.len();
        let mut sets = Vec::with_capacity(n_sets);
        for k in 0..n_sets {
            let index = first + k;
            let record = self
                .run_set(&policies[k % policies.len()], max_duration)
                .map_err(|e| Error::InSet {
                    index,
                    source: Box::new(e),
                })?;
            sets.push(record);
        }
        let mut words = self.words.clone();
        words.entries.drain(..first);
        Ok(MatchRecord { sets, words })
    }
}

pub fn write_match_log<W: Write>(mut w: W, sets: &[SetRecord]) -> Result<()> {
    for s in sets {
        let line = serde_json::to_string(s).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_match_log<R: BufRead>(r: R) -> Result<Vec<SetRecord>> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: k + 1,
            column: e.column(),
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
