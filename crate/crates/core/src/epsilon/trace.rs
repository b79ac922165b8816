use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Recovered,
    /// Copied from the simulator's hidden record. Test oracles only.
    GroundTruthOracle,
}

/// Time series of `ε` estimates for every player, flattened per sample in
/// player order.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonTrace {
    pub dt: f64,
    pub times: Vec<f64>,
    /// `ε` dimension of each player.
    pub dims: Vec<usize>,
    pub values: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl EpsilonTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total number of `ε` components per sample.
    pub fn width(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }

    /// Slice of player `p`'s components in sample `k`.
    pub fn player(&self, k: usize, p: usize) -> &[f64] {
        let start: usize = self.dims[..p].iter().sum();
        &self.values[k][start..start + self.dims[p]]
    }

    /// The first `n` samples.
    pub fn head(&self, n: usize) -> EpsilonTrace {
        EpsilonTrace {
            dt: self.dt,
            times: self.times[..n].to_vec(),
            dims: self.dims.clone(),
            values: self.values[..n].to_vec(),
            provenance: self.provenance,
        }
    }

    /// The last `n` samples.
    pub fn tail(&self, n: usize) -> EpsilonTrace {
        let start = self.len() - n.min(self.len());
        EpsilonTrace {
            dt: self.dt,
            times: self.times[start..].to_vec(),
            dims: self.dims.clone(),
            values: self.values[start..].to_vec(),
            provenance: self.provenance,
        }
    }

    /// Ground truth as a trace. Reserved for test oracles: it reads through the
    /// information barrier.
    pub fn from_ground_truth(traj: &Trajectory) -> Result<Self> {
        let truth = traj
            .hidden_eps()
            .ok_or_else(|| Error::InsufficientData("trajectory carries no hidden record".into()))?
            .reveal();
        let dims = truth.first().map_or_else(Vec::new, |e| e.iter().map(Vec::len).collect());
        Ok(EpsilonTrace {
            dt: traj.dt,
            times: traj.samples.iter().map(|s| s.t).collect(),
            dims,
            values: truth.iter().map(|e| e.concat()).collect(),
            provenance: Provenance::GroundTruthOracle,
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        for (p, &d) in self.dims.iter().enumerate() {
            header.extend((1..=d).map(|c| format!("eps_{}_{c}", p + 1)));
        }
        out.write_record(&header)?;
        for (t, v) in self.times.iter().zip(&self.values) {
            let mut row = vec![t.to_string()];
            row.extend(v.iter().map(f64::to_string));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut dims: Vec<usize> = Vec::new();
        for h in rdr.headers()?.iter().skip(1) {
            let p: usize = h
                .split('_')
                .nth(1)
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::validation("eps header", format!("bad column {h}")))?;
            if dims.len() < p {
                dims.resize(p, 0);
            }
            dims[p - 1] += 1;
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row: Vec<f64> = rec
                .iter()
                .map(|x| x.parse::<f64>().map_err(|e| Error::validation("eps row", e.to_string())))
                .collect::<Result<_>>()?;
            times.push(row[0]);
            values.push(row[1..].to_vec());
        }
        let dt = if times.len() >= 2 { times[1] - times[0] } else { 0.0 };
        Ok(EpsilonTrace {
            dt,
            times,
            dims,
            values,
            provenance: Provenance::Recovered,
        })
    }
}
