use serde::{Deserialize, Serialize};

use crate::epsilon::{predict_epsilon, timescale_ratio, EpsilonTrace, Forecast, PredictionModel};
use crate::error::{Error, Result};
use crate::verbalization::{CellPartition, WordSequence};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordPrediction {
    pub symbol: usize,
    pub confidence: f64,
    /// Whether `ε` varies slower than sets change.
    pub applicable: bool,
}

/// Minimum number of finished sets before a prediction is attempted.
pub const MIN_HISTORY: usize = 3;

fn samples_per_set(history: &WordSequence, dt: f64) -> Result<usize> {
    if history.len() < MIN_HISTORY {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_HISTORY} sets, got {}",
            history.len()
        )));
    }
    let d = history.median_duration().unwrap_or(0.0);
    Ok(((d / dt).round() as usize).max(1))
}

/// Symbol of the next set from an `ε` forecast that starts at the current
/// set boundary. The next set owns the boundary sample, already observed,
/// and the following `m − 1` forecast samples, `m` being the median set
/// length in samples.
pub fn predict_next_word(
    history: &WordSequence,
    forecast: &Forecast,
    partition: &CellPartition,
    ratio: f64,
) -> Result<WordPrediction> {
    let m = samples_per_set(history, forecast.dt)?;
    if forecast.path.len() + 1 < m {
        return Err(Error::validation(
            "forecast",
            format!(
                "horizon {} is shorter than the median set duration {}",
                forecast.horizon(),
                m as f64 * forecast.dt
            ),
        ));
    }
    let samples: Vec<&[f64]> = std::iter::once(forecast.last_observed.as_slice())
        .chain(forecast.path[..m - 1].iter().map(Vec::as_slice))
        .collect();
    let width = forecast.last_observed.len();
    let mean: Vec<f64> = (0..width)
        .map(|c| samples.iter().map(|x| x[c]).sum::<f64>() / samples.len() as f64)
        .collect();
    let symbol = partition.symbol(&partition.cell_of(&mean));

    let mut counts = vec![0usize; partition.alphabet_size()];
    for x in &samples {
        counts[partition.symbol(&partition.cell_of(x))] += 1;
    }
    let modal = counts.iter().copied().max().unwrap_or(0);
    let mut confidence = modal as f64 / samples.len() as f64;
    let applicable = ratio < 1.0;
    if !applicable {
        confidence = confidence.min(1.0 / partition.alphabet_size() as f64);
    }
    Ok(WordPrediction {
        symbol,
        confidence,
        applicable,
    })
}

/// Settings of the `ε` extrapolator behind the bets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub order: usize,
    pub fit_window: usize,
    /// Trailing samples used to estimate the `ε` variation timescale.
    pub timescale_window: usize,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            order: 4,
            fit_window: 400,
            timescale_window: 4096,
        }
    }
}

/// Forecasts `ε` one median set ahead and turns it into a bet on the next word.
pub fn forecast_next_word(
    trace: &EpsilonTrace,
    history: &WordSequence,
    partition: &CellPartition,
    cfg: &ControllerConfig,
) -> Result<(WordPrediction, PredictionModel)> {
    let m = samples_per_set(history, trace.dt)?;
    let forecast = predict_epsilon(trace, m as f64 * trace.dt, cfg.order, cfg.fit_window)?;
    let tail = trace.tail(cfg.timescale_window.min(trace.len()));
    let ratio = timescale_ratio(&tail, history)?;
    let prediction = predict_next_word(history, &forecast, partition, ratio)?;
    Ok((prediction, forecast.model))
}
