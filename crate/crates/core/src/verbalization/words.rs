use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::partition::CellPartition;
use super::transitions::detect_transitions;
use crate::dynamics::Trajectory;
use crate::epsilon::EpsilonTrace;
use crate::error::{Error, Result};

/// Functional applied to the samples an interval owns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalFunctional {
    /// Time average under zero-order hold.
    Mean,
    /// Value held over the last step of the interval.
    Terminal,
}

pub const FUNCTIONAL_IDS: [&str; 2] = ["mean", "terminal"];

impl IntervalFunctional {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "mean" => Ok(IntervalFunctional::Mean),
            "terminal" => Ok(IntervalFunctional::Terminal),
            other => Err(Error::UnknownId {
                kind: "functional",
                id: other.to_string(),
                known: FUNCTIONAL_IDS.iter().map(|s| s.to_string()).collect(),
            }),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            IntervalFunctional::Mean => "mean",
            IntervalFunctional::Terminal => "terminal",
        }
    }

    /// One fold step: the state after absorbing the `k`-th sample (1-based).
    pub fn update(&self, state: &mut [f64], x: &[f64], k: usize) {
        match self {
            IntervalFunctional::Mean => {
                let w = 1.0 / k as f64;
                for (m, &v) in state.iter_mut().zip(x) {
                    *m += (v - *m) * w;
                }
            }
            IntervalFunctional::Terminal => state.copy_from_slice(x),
        }
    }

    /// Incremental evaluation over a nonempty run of samples.
    pub fn fold<'a, I>(&self, width: usize, samples: I) -> Vec<f64>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut state = vec![0.0; width];
        for (k, x) in samples.into_iter().enumerate() {
            self.update(&mut state, x, k + 1);
        }
        state
    }

    /// From-scratch evaluation over a nonempty run of samples.
    pub fn recompute<'a, I>(&self, width: usize, samples: I) -> Vec<f64>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let samples: Vec<&[f64]> = samples.into_iter().collect();
        match self {
            IntervalFunctional::Mean => {
                let n = samples.len() as f64;
                (0..width).map(|c| samples.iter().map(|x| x[c]).sum::<f64>() / n).collect()
            }
            IntervalFunctional::Terminal => samples.last().map_or_else(|| vec![0.0; width], |x| x.to_vec()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordEntry {
    pub n: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub omega_symbol: usize,
    pub omega_value: Vec<f64>,
    pub v_symbol: usize,
    pub v_value: Vec<f64>,
    /// Interval mean of `φ_1`.
    pub phi_summary: f64,
    /// `φ` at `t_end`.
    pub phi_end: Vec<f64>,
}

impl WordEntry {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordSequence {
    pub alphabet_size: usize,
    pub entries: Vec<WordEntry>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl WordSequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn omega_symbols(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.omega_symbol).collect()
    }

    pub fn v_symbols(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.v_symbol).collect()
    }

    pub fn phi_summaries(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.phi_summary).collect()
    }

    pub fn median_duration(&self) -> Option<f64> {
        median(self.entries.iter().map(WordEntry::duration).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(["n", "t_start", "t_end", "omega_symbol", "v_symbol"])?;
        for e in &self.entries {
            out.serialize(WordRow::from(e))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Vec<WordRow>> {
        let mut rdr = csv::Reader::from_reader(r);
        rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
    }
}

/// Symbol-only view of a word, as exported to CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordRow {
    pub n: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub omega_symbol: usize,
    pub v_symbol: usize,
}

impl From<&WordEntry> for WordRow {
    fn from(e: &WordEntry) -> Self {
        WordRow {
            n: e.n,
            t_start: e.t_start,
            t_end: e.t_end,
            omega_symbol: e.omega_symbol,
            v_symbol: e.v_symbol,
        }
    }
}

pub(crate) fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) })
}

/// Everything needed to turn aligned `ε` and control records into words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verbalizer {
    /// Partition of the flattened `ε` of all players.
    pub omega_partition: CellPartition,
    /// Partition of the flattened pure controls of all players.
    pub control_partition: CellPartition,
    pub omega_functional: IntervalFunctional,
    pub v_functional: IntervalFunctional,
}

/// JSON sidecar of a words file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordsDocument {
    pub verbalizer: Verbalizer,
    pub words: WordSequence,
}

impl Verbalizer {
    pub fn new(omega_partition: CellPartition, control_partition: CellPartition) -> Result<Self> {
        let v = Verbalizer {
            omega_partition,
            control_partition,
            omega_functional: IntervalFunctional::Mean,
            v_functional: IntervalFunctional::Mean,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        self.omega_partition.validate()?;
        self.control_partition.validate()?;
        if self.omega_partition.alphabet_size() != self.control_partition.alphabet_size() {
            return Err(Error::validation(
                "partition",
                format!(
                    "state and control alphabets differ ({} vs {})",
                    self.omega_partition.alphabet_size(),
                    self.control_partition.alphabet_size()
                ),
            ));
        }
        Ok(())
    }

    pub fn alphabet_size(&self) -> usize {
        self.omega_partition.alphabet_size()
    }

    fn check_aligned(&self, trace: &EpsilonTrace, traj: &Trajectory) -> Result<()> {
        if trace.len() != traj.len() {
            return Err(Error::LengthMismatch {
                context: "eps trace vs trajectory samples",
                left: trace.len(),
                right: traj.len(),
            });
        }
        if trace.width() != self.omega_partition.dims() {
            return Err(Error::LengthMismatch {
                context: "eps width vs state partition axes",
                left: trace.width(),
                right: self.omega_partition.dims(),
            });
        }
        let control_width: usize = traj.control_dims().iter().sum();
        if control_width != self.control_partition.dims() {
            return Err(Error::LengthMismatch {
                context: "control width vs control partition axes",
                left: control_width,
                right: self.control_partition.dims(),
            });
        }
        Ok(())
    }

    /// The word of the interval owning samples `start..end`, which runs from
    /// `t[start]` to `t[end]`. Requires `start < end < len`.
    pub fn word(&self, trace: &EpsilonTrace, traj: &Trajectory, start: usize, end: usize, n: usize) -> WordEntry {
        let omega_value = self
            .omega_functional
            .fold(trace.width(), trace.values[start..end].iter().map(Vec::as_slice));
        let controls: Vec<Vec<f64>> = traj.samples[start..end].iter().map(|s| s.u_pure.concat()).collect();
        let v_value = self
            .v_functional
            .fold(self.control_partition.dims(), controls.iter().map(Vec::as_slice));
        let phi_summary = IntervalFunctional::Mean.fold(1, traj.samples[start..end].iter().map(|s| &s.phi[..1]))[0];
        WordEntry {
            n,
            t_start: traj.samples[start].t,
            t_end: traj.samples[end].t,
            omega_symbol: self.omega_partition.symbol(&self.omega_partition.cell_of(&omega_value)),
            omega_value,
            v_symbol: self.control_partition.symbol(&self.control_partition.cell_of(&v_value)),
            v_value,
            phi_summary,
            phi_end: traj.samples[end].phi.clone(),
        }
    }

    /// The degenerate word at a single sample, used as the state before any
    /// interval has closed.
    pub fn initial_word(&self, trace: &EpsilonTrace, traj: &Trajectory, index: usize) -> WordEntry {
        let omega_value = trace.values[index].clone();
        let v_value = traj.samples[index].u_pure.concat();
        WordEntry {
            n: 0,
            t_start: traj.samples[index].t,
            t_end: traj.samples[index].t,
            omega_symbol: self.omega_partition.symbol(&self.omega_partition.cell_of(&omega_value)),
            omega_value,
            v_symbol: self.control_partition.symbol(&self.control_partition.cell_of(&v_value)),
            v_value,
            phi_summary: traj.samples[index].phi[0],
            phi_end: traj.samples[index].phi.clone(),
        }
    }

    /// Words over the intervals `[boundaries[k], boundaries[k+1]]` given as
    /// sample indices. Empty intervals are skipped with a warning.
    pub fn words_for_boundaries(
        &self,
        trace: &EpsilonTrace,
        traj: &Trajectory,
        boundaries: &[usize],
    ) -> Result<WordSequence> {
        self.check_aligned(trace, traj)?;
        let mut words = WordSequence {
            alphabet_size: self.alphabet_size(),
            entries: Vec::new(),
            warnings: Vec::new(),
        };
        for w in boundaries.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b >= traj.len() || a > b {
                return Err(Error::validation("boundaries", "must be nondecreasing sample indices"));
            }
            if a == b {
                words
                    .warnings
                    .push(format!("empty interval at t = {} skipped", traj.samples[a].t));
                continue;
            }
            let n = words.entries.len() + 1;
            words.entries.push(self.word(trace, traj, a, b, n));
        }
        Ok(words)
    }

    /// Words over the intervals between consecutive cell transitions of `ε`,
    /// the last one closing at the final sample.
    pub fn emit_words(&self, trace: &EpsilonTrace, traj: &Trajectory) -> Result<WordSequence> {
        self.check_aligned(trace, traj)?;
        let mut boundaries: Vec<usize> = detect_transitions(trace, &self.omega_partition)?
            .into_iter()
            .map(|tr| tr.index)
            .collect();
        boundaries.push(trace.len() - 1);
        self.words_for_boundaries(trace, traj, &boundaries)
    }
}
