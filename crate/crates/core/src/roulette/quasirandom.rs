use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

pub const SERIAL_V_MAX: f64 = 0.2;
pub const UNIFORMITY_P_MIN: f64 = 0.01;
pub const ENTROPY_FRACTION_MIN: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation {
    pub lag: usize,
    pub cramers_v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareUniformity {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub serial: bool,
    pub uniformity: bool,
    pub entropy: bool,
    pub overall: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasirandomReport {
    pub alphabet_size: usize,
    pub length: usize,
    pub serial_correlation: Vec<LagCorrelation>,
    pub chi_square_uniformity: ChiSquareUniformity,
    /// Conditional plug-in entropy rate (bits/symbol) for block lengths 1, 2, 3.
    pub ngram_entropy_rate: Vec<f64>,
    pub verdict: Verdict,
}

/// Cramér's V of the contingency table of `(x_t, y_t)`. A table with a
/// single occupied row or column is fully predictable and scores 1.
pub fn cramers_v(x: &[usize], y: &[usize], alphabet_size: usize) -> f64 {
    let k = alphabet_size;
    let n = x.len().min(y.len());
    if n == 0 {
        return 0.0;
    }
    let mut table = vec![0usize; k * k];
    for (&a, &b) in x.iter().zip(y) {
        table[a * k + b] += 1;
    }
    let rows: Vec<usize> = (0..k).map(|i| table[i * k..(i + 1) * k].iter().sum()).collect();
    let cols: Vec<usize> = (0..k).map(|j| (0..k).map(|i| table[i * k + j]).sum()).collect();
    let occupied = rows.iter().filter(|&&r| r > 0).count().min(cols.iter().filter(|&&c| c > 0).count());
    if occupied <= 1 {
        return 1.0;
    }
    let nf = n as f64;
    let mut chi2 = 0.0;
    for i in 0..k {
        for j in 0..k {
            if rows[i] == 0 || cols[j] == 0 {
                continue;
            }
            let e = rows[i] as f64 * cols[j] as f64 / nf;
            let d = table[i * k + j] as f64 - e;
            chi2 += d * d / e;
        }
    }
    (chi2 / (nf * (occupied - 1) as f64)).sqrt().min(1.0)
}

pub fn chi_square_uniformity(words: &[usize], alphabet_size: usize) -> ChiSquareUniformity {
    let mut counts = vec![0usize; alphabet_size];
    for &w in words {
        counts[w] += 1;
    }
    let e = words.len() as f64 / alphabet_size as f64;
    let statistic: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let dof = alphabet_size - 1;
    let p_value = ChiSquared::new(dof as f64).map_or(0.0, |d| d.sf(statistic));
    ChiSquareUniformity {
        statistic,
        dof,
        p_value,
    }
}

/// Plug-in `H(X_n | X_1..X_{n−1})` from overlapping `n`-blocks, with the
/// prefix distribution taken as the marginal of the block table.
pub fn conditional_entropy_rate(words: &[usize], n: usize) -> f64 {
    if n == 0 || words.len() < n {
        return 0.0;
    }
    let mut blocks: BTreeMap<&[usize], usize> = BTreeMap::new();
    let mut prefixes: BTreeMap<&[usize], usize> = BTreeMap::new();
    for w in words.windows(n) {
        *blocks.entry(w).or_default() += 1;
        *prefixes.entry(&w[..n - 1]).or_default() += 1;
    }
    let total = (words.len() - n + 1) as f64;
    let mut h = 0.0;
    for (block, &c) in &blocks {
        let p_block = c as f64 / total;
        let p_prefix = prefixes[&block[..n - 1]] as f64 / total;
        h -= p_block * (p_block / p_prefix).log2();
    }
    h.max(0.0)
}

pub fn quasirandomness_suite(words: &[usize], alphabet_size: usize, max_lag: usize) -> Result<QuasirandomReport> {
    if alphabet_size < 2 {
        return Err(Error::validation("alphabet_size", "need at least 2 symbols"));
    }
    if max_lag == 0 {
        return Err(Error::validation("max_lag", "must be >= 1"));
    }
    if words.len() < 10 * alphabet_size || words.len() <= max_lag {
        return Err(Error::InsufficientData(format!(
            "need at least {} words, got {}",
            (10 * alphabet_size).max(max_lag + 1),
            words.len()
        )));
    }
    if let Some(&bad) = words.iter().find(|&&w| w >= alphabet_size) {
        return Err(Error::validation("words", format!("symbol {bad} outside the alphabet")));
    }
    let serial_correlation: Vec<LagCorrelation> = (1..=max_lag)
        .map(|lag| LagCorrelation {
            lag,
            cramers_v: cramers_v(&words[..words.len() - lag], &words[lag..], alphabet_size),
        })
        .collect();
    let chi = chi_square_uniformity(words, alphabet_size);
    let cap = (alphabet_size as f64).log2();
    let ngram_entropy_rate: Vec<f64> = (1..=3).map(|n| conditional_entropy_rate(words, n).min(cap)).collect();

    let serial = serial_correlation.iter().all(|l| l.cramers_v < SERIAL_V_MAX);
    let uniformity = chi.p_value > UNIFORMITY_P_MIN;
    let entropy = ngram_entropy_rate[0] >= ENTROPY_FRACTION_MIN * cap;
    Ok(QuasirandomReport {
        alphabet_size,
        length: words.len(),
        serial_correlation,
        chi_square_uniformity: chi,
        ngram_entropy_rate,
        verdict: Verdict {
            serial,
            uniformity,
            entropy,
            overall: serial && uniformity && entropy,
        },
    })
}
