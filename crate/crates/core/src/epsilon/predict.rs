//! Local short-term forecasting of `ε` by a least-squares autoregression.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::trace::EpsilonTrace;
use crate::error::{Error, Result};

/// Singular-value ratio below which the AR design matrix counts as rank-deficient.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionModel {
    pub order: usize,
    #[serde(rename = "window")]
    pub fit_window: usize,
    /// Per component: `x_t = Σ_j coefficients[j]·x_{t−1−j}`.
    pub coefficients: Vec<Vec<f64>>,
    /// Per component: the fit was rank-deficient and persistence was used.
    pub fallback: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forecast {
    pub last_observed: Vec<f64>,
    /// Forecasts at `t_end + k·dt` for `k = 1..=steps`.
    pub path: Vec<Vec<f64>>,
    pub dt: f64,
    pub model: PredictionModel,
}

impl Forecast {
    /// Forecast at `t_end + delta_t`.
    pub fn end(&self) -> &[f64] {
        self.path.last().unwrap_or(&self.last_observed)
    }

    pub fn horizon(&self) -> f64 {
        self.path.len() as f64 * self.dt
    }
}

fn fit_component(window: &[f64], order: usize) -> Option<Vec<f64>> {
    let rows = window.len() - order;
    let design = DMatrix::from_fn(rows, order, |r, j| window[r + order - 1 - j]);
    let target = DVector::from_fn(rows, |r, _| window[r + order]);
    let svd = design.svd(true, true);
    let sv = &svd.singular_values;
    let max = sv.max();
    if !(max > 0.0) || sv.min() / max < RANK_TOL {
        return None;
    }
    let coef = svd.solve(&target, 0.0).ok()?;
    coef.iter().all(|c| c.is_finite()).then(|| coef.iter().copied().collect())
}

/// Fits AR(`order`) per component on the last `fit_window` samples and
/// iterates it `delta_t / dt` steps past the end of the trace.
pub fn predict_epsilon(trace: &EpsilonTrace, delta_t: f64, order: usize, fit_window: usize) -> Result<Forecast> {
    if order == 0 {
        return Err(Error::validation("order", "must be >= 1"));
    }
    if fit_window <= order {
        return Err(Error::validation("fit_window", "must exceed the order"));
    }
    if trace.len() < fit_window {
        return Err(Error::InsufficientData(format!(
            "trace has {} samples, fit window is {fit_window}",
            trace.len()
        )));
    }
    if !(delta_t >= 0.0 && delta_t.is_finite()) {
        return Err(Error::validation("delta_t", "must be finite and >= 0"));
    }
    let ratio = delta_t / trace.dt;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-6 {
        return Err(Error::validation("delta_t", "must be a multiple of dt"));
    }
    let steps = steps as usize;
    let width = trace.width();
    let start = trace.len() - fit_window;
    let last_observed = trace.values[trace.len() - 1].clone();

    let mut coefficients = Vec::with_capacity(width);
    let mut fallback = Vec::with_capacity(width);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(width);
    for c in 0..width {
        let window: Vec<f64> = trace.values[start..].iter().map(|v| v[c]).collect();
        match fit_component(&window, order) {
            Some(coef) => {
                coefficients.push(coef);
                fallback.push(false);
            }
            None => {
                let mut persistence = vec![0.0; order];
                persistence[0] = 1.0;
                coefficients.push(persistence);
                fallback.push(true);
            }
        }
        columns.push(window);
    }

    let mut path = vec![vec![0.0; width]; steps];
    for c in 0..width {
        let coef = &coefficients[c];
        let hist = &mut columns[c];
        for step in path.iter_mut() {
            let next = if fallback[c] {
                *hist.last().unwrap()
            } else {
                let n = hist.len();
                coef.iter().enumerate().map(|(j, a)| a * hist[n - 1 - j]).sum()
            };
            hist.push(next);
            step[c] = next;
        }
    }

    Ok(Forecast {
        last_observed,
        path,
        dt: trace.dt,
        model: PredictionModel {
            order,
            fit_window,
            coefficients,
            fallback,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epsilon::Provenance;

    fn trace(values: Vec<f64>, dt: f64) -> EpsilonTrace {
        EpsilonTrace {
            dt,
            times: (0..values.len()).map(|k| k as f64 * dt).collect(),
            dims: vec![1],
            values: values.into_iter().map(|v| vec![v]).collect(),
            provenance: Provenance::Recovered,
        }
    }

    #[test]
    fn constant_trace_falls_back_to_persistence() {
        let tr = trace(vec![0.7; 50], 0.1);
        let f = predict_epsilon(&tr, 2.0, 3, 20).unwrap();
        assert!(f.model.fallback[0]);
        assert!(f.path.iter().all(|v| v[0] == 0.7));
        assert_eq!(f.path.len(), 20);
    }

    #[test]
    fn ramp_is_continued_exactly() {
        let dt = 0.01;
        let tr = trace((0..100).map(|k| k as f64 * dt).collect(), dt);
        let f = predict_epsilon(&tr, 0.5, 2, 40).unwrap();
        assert!(!f.model.fallback[0]);
        let t_end = 99.0 * dt;
        for (k, v) in f.path.iter().enumerate() {
            let expected = t_end + (k + 1) as f64 * dt;
            assert!((v[0] - expected).abs() < 1e-9, "{} vs {expected}", v[0]);
        }
    }

    #[test]
    fn zero_horizon_returns_last_observation() {
        let tr = trace((0..30).map(|k| (k as f64 * 0.3).sin()).collect(), 0.1);
        let f = predict_epsilon(&tr, 0.0, 2, 10).unwrap();
        assert!(f.path.is_empty());
        assert_eq!(f.end(), tr.values.last().unwrap().as_slice());
    }

    #[test]
    fn rejects_non_multiple_horizon() {
        let tr = trace(vec![1.0; 30], 0.1);
        assert!(predict_epsilon(&tr, 0.15, 2, 10).is_err());
    }

    #[test]
    fn rejects_short_trace() {
        let tr = trace(vec![1.0; 5], 0.1);
        assert!(matches!(
            predict_epsilon(&tr, 0.1, 2, 10),
            Err(Error::InsufficientData(_))
        ));
    }
}
