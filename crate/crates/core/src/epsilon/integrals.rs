use serde::{Deserialize, Serialize};

use super::trace::EpsilonTrace;
use crate::error::{Error, Result};

/// Tolerance for relations that hold exactly in algebra (only float error remains).
pub const EXACT_RELATION_TOL: f64 = 1e-6;

/// A candidate time-independent relation among simultaneous `ε`-representations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum CorrelationFunctional {
    /// `F ≡ 0`.
    Zero,
    /// `F = ε^(lhs) − factor·ε^(rhs)`, component-wise.
    LinearRelation { lhs: usize, rhs: usize, factor: f64 },
}

impl CorrelationFunctional {
    fn evaluate(&self, traces: &[EpsilonTrace], k: usize, out: &mut Vec<f64>) {
        out.clear();
        match *self {
            CorrelationFunctional::Zero => out.push(0.0),
            CorrelationFunctional::LinearRelation { lhs, rhs, factor } => {
                out.extend(
                    traces[lhs].values[k]
                        .iter()
                        .zip(&traces[rhs].values[k])
                        .map(|(a, b)| a - factor * b),
                );
            }
        }
    }

    fn validate(&self, traces: &[EpsilonTrace]) -> Result<()> {
        if let CorrelationFunctional::LinearRelation { lhs, rhs, .. } = *self {
            if lhs >= traces.len() || rhs >= traces.len() {
                return Err(Error::validation("functional", "references a missing trace"));
            }
            if traces[lhs].width() != traces[rhs].width() {
                return Err(Error::LengthMismatch {
                    context: "eps width of related traces",
                    left: traces[lhs].width(),
                    right: traces[rhs].width(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralCheck {
    pub functional: CorrelationFunctional,
    /// Time mean of `F`, per component.
    pub mean: Vec<f64>,
    /// `max_t max_c |F_c(t) − mean_c|`.
    pub max_deviation: f64,
    pub integral: bool,
}

/// Checks each functional for time-independence over traces of one run.
pub fn check_correlation_integrals(
    traces: &[EpsilonTrace],
    functionals: &[CorrelationFunctional],
    tol: f64,
) -> Result<Vec<IntegralCheck>> {
    let first = traces
        .first()
        .ok_or_else(|| Error::InsufficientData("need at least one trace".into()))?;
    for t in &traces[1..] {
        if t.len() != first.len() {
            return Err(Error::LengthMismatch {
                context: "trace lengths",
                left: first.len(),
                right: t.len(),
            });
        }
    }
    if first.is_empty() {
        return Err(Error::InsufficientData("traces are empty".into()));
    }
    let n = first.len();
    let mut buf = Vec::new();
    functionals
        .iter()
        .map(|f| {
            f.validate(traces)?;
            let series: Vec<Vec<f64>> = (0..n)
                .map(|k| {
                    f.evaluate(traces, k, &mut buf);
                    buf.clone()
                })
                .collect();
            let width = series[0].len();
            let mean: Vec<f64> = (0..width)
                .map(|c| series.iter().map(|v| v[c]).sum::<f64>() / n as f64)
                .collect();
            let max_deviation = series
                .iter()
                .flat_map(|v| v.iter().zip(&mean).map(|(x, m)| (x - m).abs()))
                .fold(0.0, f64::max);
            Ok(IntegralCheck {
                functional: f.clone(),
                mean,
                max_deviation,
                integral: max_deviation < tol,
            })
        })
        .collect()
}
