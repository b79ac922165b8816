//! The kaleidoscope-roulette proper: certifying that the hidden dialogue is
//! quasirandom, detecting resonances between control words and state words,
//! and betting on the next word with a short-term `ε` forecast.

mod ledger;
mod predictor;
mod quasirandom;
mod resonance;

pub use ledger::{binomial_p_greater, binomial_p_two_sided, settle_bet, BetEntry, BetLedger};
pub use predictor::{forecast_next_word, predict_next_word, ControllerConfig, WordPrediction, MIN_HISTORY};
pub use quasirandom::{
    chi_square_uniformity, conditional_entropy_rate, cramers_v, quasirandomness_suite, ChiSquareUniformity,
    LagCorrelation, QuasirandomReport, Verdict, ENTROPY_FRACTION_MIN, SERIAL_V_MAX, UNIFORMITY_P_MIN,
};
pub use resonance::{
    detect_resonance, mutual_information, PhiBin, ResonanceConfig, ResonanceReport, SurrogateNull, MIN_SURROGATES,
};
