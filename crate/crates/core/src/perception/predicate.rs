use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::verbalization::WordEntry;

/// Slack on clock comparisons so accumulated rounding in `φ` cannot add a step.
const CLOCK_SLACK: f64 = 1e-6;

pub const PREDICATE_IDS: [&str; 4] = ["always", "norm-exceeds", "clock", "cell-exit"];

/// Registered finishing rules. Each sees only the current `φ` and the word in
/// force at the start of the set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum FinishingPredicate {
    Always,
    NormExceeds { threshold: f64 },
    /// `φ[index]` is a clock; finish once it has run `period` past the start word's end.
    Clock { index: usize, period: f64 },
    /// Finish when `φ[axes]` leaves the grid cell it occupied when the start word closed.
    CellExit { phi_axes: Vec<usize>, cuts: Vec<Vec<f64>> },
}

impl FinishingPredicate {
    pub fn id(&self) -> &'static str {
        match self {
            FinishingPredicate::Always => "always",
            FinishingPredicate::NormExceeds { .. } => "norm-exceeds",
            FinishingPredicate::Clock { .. } => "clock",
            FinishingPredicate::CellExit { .. } => "cell-exit",
        }
    }

    pub fn validate(&self, state_dim: usize) -> Result<()> {
        match self {
            FinishingPredicate::Always => Ok(()),
            FinishingPredicate::NormExceeds { threshold } => {
                if threshold.is_finite() {
                    Ok(())
                } else {
                    Err(Error::validation("predicate.threshold", "must be finite"))
                }
            }
            FinishingPredicate::Clock { index, period } => {
                if *index >= state_dim {
                    return Err(Error::validation("predicate.index", "outside the state"));
                }
                if !(*period > 0.0 && period.is_finite()) {
                    return Err(Error::validation("predicate.period", "must be positive and finite"));
                }
                Ok(())
            }
            FinishingPredicate::CellExit { phi_axes, cuts } => {
                if phi_axes.is_empty() || phi_axes.len() != cuts.len() || phi_axes.iter().any(|&a| a >= state_dim) {
                    return Err(Error::validation("predicate.phi_axes", "need one cut list per in-range axis"));
                }
                if cuts.iter().flatten().any(|c| !c.is_finite()) || cuts.iter().any(|c| c.windows(2).any(|w| w[0] >= w[1])) {
                    return Err(Error::validation("predicate.cuts", "must be finite and strictly increasing"));
                }
                Ok(())
            }
        }
    }

    fn cell(phi: &[f64], axes: &[usize], cuts: &[Vec<f64>]) -> Vec<usize> {
        axes.iter()
            .zip(cuts)
            .map(|(&a, c)| c.partition_point(|&x| x < phi[a]))
            .collect()
    }

    pub fn finished(&self, phi: &[f64], omega_start: &WordEntry) -> bool {
        match self {
            FinishingPredicate::Always => true,
            FinishingPredicate::NormExceeds { threshold } => phi.iter().map(|x| x * x).sum::<f64>().sqrt() > *threshold,
            FinishingPredicate::Clock { index, period } => phi[*index] - omega_start.t_end >= period - CLOCK_SLACK,
            FinishingPredicate::CellExit { phi_axes, cuts } => {
                Self::cell(phi, phi_axes, cuts) != Self::cell(&omega_start.phi_end, phi_axes, cuts)
            }
        }
    }
}
