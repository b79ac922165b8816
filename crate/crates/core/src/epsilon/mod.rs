//! A-posteriori analysis of the `ε`-parameters: recovery from observables,
//! correlation integrals, short-term forecasts and the applicability check
//! for resonance control.

mod integrals;
mod predict;
mod recover;
mod timescale;
mod trace;

pub use integrals::{check_correlation_integrals, CorrelationFunctional, IntegralCheck, EXACT_RELATION_TOL};
pub use predict::{predict_epsilon, Forecast, PredictionModel, RANK_TOL};
pub use recover::{recover_epsilon, recover_sample};
pub use timescale::{autocorrelation, timescale_ratio, variation_timescale};
pub use trace::{EpsilonTrace, Provenance};
