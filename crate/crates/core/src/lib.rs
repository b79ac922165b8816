//! Kaleidoscope-roulette: simulation and analysis of perception games whose
//! hidden dialogue is a quasirandom word sequence.
//!
//! Pipeline: [`dynamics`] integrates the game, [`epsilon`] recovers the hidden
//! parameters from observables, [`verbalization`] turns them into words,
//! [`perception`] runs the game set by set, [`roulette`] certifies
//! quasirandomness, detects resonances and bets on them, and [`harness`] wires
//! everything into reproducible experiments.

pub mod dynamics;
pub mod epsilon;
pub mod error;
pub mod harness;
pub mod perception;
pub mod roulette;
pub mod seed;
pub mod verbalization;

pub use error::{Error, Result};
