use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::trace::EpsilonTrace;
use crate::error::{Error, Result};
use crate::verbalization::WordSequence;

/// Biased sample autocorrelation `r(k) = Σ_t x̃_t x̃_{t+k} / Σ_t x̃_t²` for
/// `k = 0..n`, via zero-padded FFT. `None` for a constant series.
pub fn autocorrelation(xs: &[f64]) -> Option<Vec<f64>> {
    let n = xs.len();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if n == 0 || !(hi - lo > 1e-12 * (1.0 + lo.abs().max(hi.abs()))) {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = xs
        .iter()
        .map(|x| Complex::new(x - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let r0 = buf[0].re;
    if !(r0 > 0.0) {
        return None;
    }
    Some(buf[..n].iter().map(|z| z.re / r0).collect())
}

/// Lag (time units) at which the component-averaged autocorrelation of `ε`
/// first drops below `1/e`. Infinite when no component varies or the
/// average never drops that far.
pub fn variation_timescale(trace: &EpsilonTrace) -> f64 {
    let acfs: Vec<Vec<f64>> = (0..trace.width())
        .filter_map(|c| autocorrelation(&trace.component(c)))
        .collect();
    if acfs.is_empty() {
        return f64::INFINITY;
    }
    let threshold = (-1.0f64).exp();
    (0..trace.len())
        .find(|&k| acfs.iter().map(|a| a[k]).sum::<f64>() / (acfs.len() as f64) < threshold)
        .map_or(f64::INFINITY, |k| k as f64 * trace.dt)
}

/// Median set duration over the `ε` variation timescale. Resonance control is
/// applicable when this is below 1.
pub fn timescale_ratio(trace: &EpsilonTrace, words: &WordSequence) -> Result<f64> {
    if words.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 sets, got {}",
            words.len()
        )));
    }
    let set = words.median_duration().unwrap_or(0.0);
    let scale = variation_timescale(trace);
    Ok(if scale.is_infinite() { 0.0 } else { set / scale })
}
