//! Reduction of a delayed state feedback to a differential game by enlarging
//! the intention field with a sampled delay line.

use serde::{Deserialize, Serialize};

use super::model::{GameDefinition, XiBlock, XiFeedback};
use crate::error::{Error, Result};

/// Feedback `v_coalition += gain·φ(t − delay)` on the first
/// `min(state_dim, control_dim)` channels, with constant pre-history `φ(t≤0) = φ(0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayFeedback {
    pub delay: f64,
    pub dt: f64,
    pub coalition: usize,
    pub gain: f64,
}

const REPRESENTABLE_TOL: f64 = 1e-9;

/// Returns a game whose intention field carries `buffer_resolution` copies of
/// `φ`, shifted every `delay / (buffer_resolution·dt)` steps, with the oldest
/// copy fed back into the coalition control. The reproduction of the delayed
/// trajectory is exact when that hold is one step and a zero-order-hold
/// approximation otherwise.
pub fn augment_history_feedback(
    game: &GameDefinition,
    feedback: &DelayFeedback,
    buffer_resolution: usize,
) -> Result<GameDefinition> {
    if feedback.delay == 0.0 {
        return Ok(game.clone());
    }
    if buffer_resolution == 0 {
        return Err(Error::validation("buffer_resolution", "must be >= 1"));
    }
    if !(feedback.dt > 0.0 && feedback.delay >= feedback.dt * (1.0 - REPRESENTABLE_TOL)) {
        return Err(Error::validation("delay", "need delay >= dt > 0"));
    }
    if feedback.coalition >= game.coalitions.len() {
        return Err(Error::validation("coalition", "no such coalition"));
    }
    let hold = feedback.delay / (buffer_resolution as f64 * feedback.dt);
    let hold_steps = hold.round();
    if hold_steps < 1.0 || (hold - hold_steps).abs() > REPRESENTABLE_TOL * hold.max(1.0) {
        return Err(Error::DelayNotRepresentable {
            delay: feedback.delay,
            resolution: buffer_resolution,
            dt: feedback.dt,
        });
    }

    let width = game.state_dim;
    let mut out = game.clone();
    let line_offset = game.intention_dim;
    out.intention_dim += width * buffer_resolution;
    out.xi_rhs.push(XiBlock::DelayLine {
        width,
        cells: buffer_resolution,
        hold_steps: hold_steps as usize,
    });
    if !out.xi0.is_empty() {
        out.xi0.extend(std::iter::repeat_n(0.0, width * buffer_resolution));
    }
    out.xi_feedback.push(XiFeedback {
        coalition: feedback.coalition,
        offset: line_offset + width * (buffer_resolution - 1),
        dim: width.min(game.control_dim),
        gain: feedback.gain,
    });
    out.validate()?;
    Ok(out)
}
