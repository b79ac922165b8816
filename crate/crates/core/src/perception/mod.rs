//! Multistage perception games: the trajectory is cut into sets, each
//! finishing by a predicate on the current `φ` and the word in force when the
//! set began, each starting where the previous one stopped.

mod engine;
mod predicate;

pub use engine::{write_match_log, read_match_log, FinishingReason, MatchEngine, MatchRecord, Position, SetRecord};
pub use predicate::{FinishingPredicate, PREDICATE_IDS};
