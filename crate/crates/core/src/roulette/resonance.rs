use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{stream_rng, RESONANCE_SURROGATES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceConfig {
    /// Words per window.
    pub window: usize,
    pub n_surrogates: usize,
    /// Alignments `ω_{t+lag}` vs `v_t` scanned for `lag = 0..=max_lag`.
    pub max_lag: usize,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        ResonanceConfig {
            window: 64,
            n_surrogates: 200,
            max_lag: 3,
        }
    }
}

pub const MIN_SURROGATES: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateNull {
    pub mean: f64,
    pub p95: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mi: f64,
    pub null_p95: f64,
    pub above_null: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub window: usize,
    pub best_lag: usize,
    /// Median window MI for every scanned lag.
    pub lag_scan: Vec<f64>,
    /// Window MIs at the best lag (bits).
    pub mi_per_window: Vec<f64>,
    pub median_mi: f64,
    pub surrogate_null: SurrogateNull,
    pub phi_conditioned_mi: Vec<PhiBin>,
    pub detected: bool,
    pub p_value: f64,
}

/// Plug-in mutual information (bits) of aligned symbol pairs.
pub fn mutual_information(x: &[usize], y: &[usize], alphabet_size: usize) -> f64 {
    let n = x.len().min(y.len());
    if n == 0 {
        return 0.0;
    }
    let k = alphabet_size;
    let mut joint = vec![0usize; k * k];
    let mut px = vec![0usize; k];
    let mut py = vec![0usize; k];
    for (&a, &b) in x.iter().zip(y) {
        joint[a * k + b] += 1;
        px[a] += 1;
        py[b] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for a in 0..k {
        for b in 0..k {
            let c = joint[a * k + b];
            if c > 0 {
                mi += c as f64 / nf * (c as f64 * nf / (px[a] as f64 * py[b] as f64)).log2();
            }
        }
    }
    mi.clamp(0.0, (k as f64).log2())
}

fn windowed_mi(v: &[usize], omega: &[usize], lag: usize, window: usize, k: usize) -> Vec<f64> {
    let pairs = omega.len().saturating_sub(lag);
    (0..pairs / window)
        .map(|w| {
            let a = w * window;
            mutual_information(&v[a..a + window], &omega[a + lag..a + lag + window], k)
        })
        .collect()
}

fn median(xs: Vec<f64>) -> f64 {
    crate::verbalization::median(xs).unwrap_or(0.0)
}

/// `(median window MI per lag, best lag)`. Lags too long for one full window are scored 0.
fn scan(v: &[usize], omega: &[usize], cfg: &ResonanceConfig, k: usize) -> (Vec<f64>, usize) {
    let scores: Vec<f64> = (0..=cfg.max_lag)
        .map(|lag| {
            let w = windowed_mi(v, omega, lag, cfg.window, k);
            if w.is_empty() {
                0.0
            } else {
                median(w)
            }
        })
        .collect();
    let best = scores
        .iter()
        .enumerate()
        .fold(0, |best, (lag, &s)| if s > scores[best] { lag } else { best });
    (scores, best)
}

/// Nearest-rank 95th percentile.
fn p95(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let rank = ((0.95 * s.len() as f64).ceil() as usize).clamp(1, s.len());
    s[rank - 1]
}

/// Quartile edges of `xs` (linear interpolation between order statistics).
fn quartile_edges(xs: &[f64]) -> [f64; 3] {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (s.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
    };
    [q(0.25), q(0.5), q(0.75)]
}

fn bin_of(x: f64, edges: &[f64; 3]) -> usize {
    edges.partition_point(|&e| e < x)
}

fn binned_mi(v: &[usize], omega: &[usize], bins: &[usize], lag: usize, bin: usize, k: usize) -> (f64, usize) {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for t in 0..omega.len().saturating_sub(lag) {
        if bins[t + lag] == bin {
            xs.push(v[t]);
            ys.push(omega[t + lag]);
        }
    }
    (mutual_information(&xs, &ys, k), xs.len())
}

/// Windowed MI between the control words `v` and the state words `ω`
/// against a shuffled-`v` null. `phi_summary[n]` is the scalar `φ` summary
/// of word `n`, used for the quartile-conditioned check.
pub fn detect_resonance(
    v: &[usize],
    omega: &[usize],
    phi_summary: &[f64],
    alphabet_size: usize,
    cfg: &ResonanceConfig,
    seed: u64,
) -> Result<ResonanceReport> {
    if v.len() != omega.len() || phi_summary.len() != omega.len() {
        return Err(Error::LengthMismatch {
            context: "v words vs omega words vs phi summaries",
            left: v.len(),
            right: omega.len().min(phi_summary.len()),
        });
    }
    if cfg.window == 0 || omega.len() < cfg.window + cfg.max_lag {
        return Err(Error::InsufficientData(format!(
            "need at least {} words, got {}",
            cfg.window + cfg.max_lag,
            omega.len()
        )));
    }
    if cfg.n_surrogates < MIN_SURROGATES {
        return Err(Error::validation("resonance.n_surrogates", format!("must be >= {MIN_SURROGATES}")));
    }
    if alphabet_size < 2 || v.iter().chain(omega).any(|&s| s >= alphabet_size) {
        return Err(Error::validation("words", "symbols must lie in the alphabet"));
    }
    let k = alphabet_size;
    let degenerate = v.iter().all(|&s| s == v[0]) || omega.iter().all(|&s| s == omega[0]);

    let (lag_scan, best_lag) = scan(v, omega, cfg, k);
    let mi_per_window = windowed_mi(v, omega, best_lag, cfg.window, k);
    let observed = lag_scan[best_lag];

    let edges = quartile_edges(phi_summary);
    let bins: Vec<usize> = phi_summary.iter().map(|&x| bin_of(x, &edges)).collect();
    let observed_bins: Vec<(f64, usize)> = (0..4).map(|b| binned_mi(v, omega, &bins, best_lag, b, k)).collect();

    let mut rng = stream_rng(seed, RESONANCE_SURROGATES);
    let mut null = Vec::with_capacity(cfg.n_surrogates);
    let mut bin_null: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.n_surrogates); 4];
    let mut shuffled = v.to_vec();
    for _ in 0..cfg.n_surrogates {
        shuffled.copy_from_slice(v);
        shuffled.shuffle(&mut rng);
        let (scores, _) = scan(&shuffled, omega, cfg, k);
        null.push(scores.into_iter().fold(0.0, f64::max));
        for (b, acc) in bin_null.iter_mut().enumerate() {
            acc.push(binned_mi(&shuffled, omega, &bins, best_lag, b, k).0);
        }
    }
    let null_p95 = p95(&null);
    let exceed = null.iter().filter(|&&x| x >= observed).count();
    let p_value = if degenerate {
        1.0
    } else {
        (1 + exceed) as f64 / (cfg.n_surrogates + 1) as f64
    };

    let lo = phi_summary.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = phi_summary.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lowers = [lo, edges[0], edges[1], edges[2]];
    let uppers = [edges[0], edges[1], edges[2], hi];
    let phi_conditioned_mi = (0..4)
        .map(|b| {
            let np95 = p95(&bin_null[b]);
            let (mi, count) = if degenerate { (0.0, observed_bins[b].1) } else { observed_bins[b] };
            PhiBin {
                lower: lowers[b],
                upper: uppers[b],
                count,
                mi,
                null_p95: np95,
                above_null: !degenerate && mi > np95,
            }
        })
        .collect();

    Ok(ResonanceReport {
        window: cfg.window,
        best_lag,
        lag_scan: if degenerate { vec![0.0; cfg.max_lag + 1] } else { lag_scan },
        mi_per_window: if degenerate { vec![0.0; mi_per_window.len()] } else { mi_per_window },
        median_mi: if degenerate { 0.0 } else { observed },
        surrogate_null: SurrogateNull {
            mean: null.iter().sum::<f64>() / null.len() as f64,
            p95: null_p95,
        },
        phi_conditioned_mi,
        detected: !degenerate && observed > null_p95,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mi_of_identical_uniform_is_entropy() {
        let x: Vec<usize> = (0..64).map(|k| k % 4).collect();
        assert!((mutual_information(&x, &x, 4) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mi_of_independent_product_is_zero() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                x.push(a);
                y.push(b);
            }
        }
        assert!(mutual_information(&x, &y, 4).abs() < 1e-12);
    }

    #[test]
    fn degenerate_input_never_detects() {
        let v = vec![0usize; 200];
        let omega: Vec<usize> = (0..200).map(|k| (k * 7 + 3) % 4).collect();
        let phi: Vec<f64> = (0..200).map(|k| k as f64).collect();
        let r = detect_resonance(&v, &omega, &phi, 4, &ResonanceConfig::default(), 1).unwrap();
        assert!(!r.detected);
        assert_eq!(r.median_mi, 0.0);
    }

    #[test]
    fn rejects_too_few_surrogates() {
        let x: Vec<usize> = (0..100).map(|k| k % 4).collect();
        let phi = vec![0.0; 100];
        let cfg = ResonanceConfig {
            n_surrogates: 50,
            ..ResonanceConfig::default()
        };
        assert!(detect_resonance(&x, &x, &phi, 4, &cfg, 1).is_err());
    }

    #[test]
    fn quartile_bins_are_balanced() {
        let xs: Vec<f64> = (0..100).map(|k| (k * 37 % 100) as f64).collect();
        let e = quartile_edges(&xs);
        let mut counts = [0; 4];
        for &x in &xs {
            counts[bin_of(x, &e)] += 1;
        }
        assert_eq!(counts, [25, 25, 25, 25]);
    }
}
