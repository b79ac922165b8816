//! Coarse-graining of `ε`-space and emission of the hidden dialogue.
//!
//! A word covers one interval `[t_{n−1}, t_n]` and owns the samples at
//! `t_{n−1} ≤ t < t_n`; with zero-order-hold controls the sample mean is the
//! exact time average.

mod partition;
mod transitions;
mod words;

pub use partition::{assign_cell, factor_alphabet, CellId, CellPartition};
pub use transitions::{detect_transitions, Transition};
pub use words::{
    IntervalFunctional, Verbalizer, WordEntry, WordRow, WordSequence, WordsDocument, FUNCTIONAL_IDS,
};
pub(crate) use words::median;
