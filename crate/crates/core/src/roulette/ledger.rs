use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, Discrete, DiscreteCDF};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetEntry {
    pub set: usize,
    pub predicted: usize,
    pub actual: usize,
    pub stake: f64,
    pub payoff: f64,
    /// Balance after this entry.
    pub balance: f64,
}

/// Single-symbol bets at fair odds: a hit pays `stake·(alphabet_size − 1)`,
/// a miss loses the stake.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetLedger {
    pub alphabet_size: usize,
    pub entries: Vec<BetEntry>,
    pub balance: f64,
}

impl BetLedger {
    pub fn new(alphabet_size: usize) -> Self {
        BetLedger {
            alphabet_size,
            entries: Vec::new(),
            balance: 0.0,
        }
    }

    pub fn settle(&mut self, set: usize, predicted: usize, actual: usize, stake: f64) -> Result<&BetEntry> {
        if !(stake > 0.0 && stake.is_finite()) {
            return Err(Error::validation("stake", "must be positive and finite"));
        }
        if predicted >= self.alphabet_size || actual >= self.alphabet_size {
            return Err(Error::validation("symbol", "outside the alphabet"));
        }
        if self.entries.iter().any(|e| e.set == set) {
            return Err(Error::DuplicateBet(set));
        }
        let payoff = if predicted == actual {
            stake * (self.alphabet_size - 1) as f64
        } else {
            -stake
        };
        self.balance += payoff;
        self.entries.push(BetEntry {
            set,
            predicted,
            actual,
            stake,
            payoff,
            balance: self.balance,
        });
        Ok(self.entries.last().unwrap())
    }

    pub fn hits(&self) -> usize {
        self.entries.iter().filter(|e| e.predicted == e.actual).count()
    }

    pub fn hit_rate(&self) -> f64 {
        if self.entries.is_empty() {
            0.0
        } else {
            self.hits() as f64 / self.entries.len() as f64
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(["set", "predicted", "actual", "stake", "payoff", "balance"])?;
        for e in &self.entries {
            out.serialize(e)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, alphabet_size: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let entries: Vec<BetEntry> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        let balance = entries.last().map_or(0.0, |e| e.balance);
        Ok(BetLedger {
            alphabet_size,
            entries,
            balance,
        })
    }
}

/// Functional form of [`BetLedger::settle`].
pub fn settle_bet(mut ledger: BetLedger, set: usize, predicted: usize, actual: usize, stake: f64) -> Result<BetLedger> {
    ledger.settle(set, predicted, actual, stake)?;
    Ok(ledger)
}

/// `P(X ≥ hits)` for `X ~ Bin(trials, p)`.
pub fn binomial_p_greater(hits: usize, trials: usize, p: f64) -> f64 {
    if hits == 0 {
        return 1.0;
    }
    Binomial::new(p, trials as u64).map_or(1.0, |b| b.sf(hits as u64 - 1))
}

/// Two-sided exact binomial test: total probability of outcomes no more
/// likely than the observed one.
pub fn binomial_p_two_sided(hits: usize, trials: usize, p: f64) -> f64 {
    let Ok(b) = Binomial::new(p, trials as u64) else {
        return 1.0;
    };
    let observed = b.pmf(hits as u64);
    let cut = observed * (1.0 + 1e-7);
    (0..=trials as u64)
        .map(|k| b.pmf(k))
        .filter(|&q| q <= cut)
        .sum::<f64>()
        .min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_and_miss_payoffs() {
        let l = settle_bet(BetLedger::new(4), 0, 2, 2, 1.0).unwrap();
        assert_eq!(l.entries[0].payoff, 3.0);
        let l = settle_bet(l, 1, 2, 1, 1.0).unwrap();
        assert_eq!(l.entries[1].payoff, -1.0);
        assert_eq!(l.balance, 2.0);
    }

    #[test]
    fn duplicate_set_rejected() {
        let l = settle_bet(BetLedger::new(4), 3, 0, 0, 1.0).unwrap();
        assert_eq!(settle_bet(l, 3, 1, 1, 1.0).unwrap_err(), Error::DuplicateBet(3));
    }

    #[test]
    fn nonpositive_stake_rejected() {
        assert!(settle_bet(BetLedger::new(4), 0, 0, 0, 0.0).is_err());
    }

    #[test]
    fn binomial_tails() {
        assert!((binomial_p_greater(0, 10, 0.25) - 1.0).abs() < 1e-12);
        assert!((binomial_p_greater(10, 10, 0.5) - 0.5f64.powi(10)).abs() < 1e-12);
        assert!((binomial_p_two_sided(5, 10, 0.5) - 1.0).abs() < 1e-9);
        let p = binomial_p_two_sided(0, 10, 0.5);
        assert!((p - 2.0 * 0.5f64.powi(10)).abs() < 1e-12);
    }
}
