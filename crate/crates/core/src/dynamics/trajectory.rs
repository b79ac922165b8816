use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Wrapper for data the analysis side must not read. Only test oracles and the
/// `--reveal-hidden` export call [`Hidden::reveal`].
#[derive(Clone, Debug, PartialEq)]
pub struct Hidden<T>(T);

impl<T> Hidden<T> {
    pub(crate) fn new(value: T) -> Self {
        Hidden(value)
    }

    pub fn reveal(&self) -> &T {
        &self.0
    }
}

/// One recorded instant. The controls are the ones held over the step that
/// starts at `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
    pub u_pure: Vec<Vec<f64>>,
    pub u_coupled: Vec<Vec<f64>>,
}

/// Per-sample, per-player ground-truth `ε`.
pub type EpsTruth = Vec<Vec<Vec<f64>>>;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
    hidden_eps: Option<Hidden<EpsTruth>>,
}

impl Trajectory {
    pub fn new(dt: f64) -> Self {
        Trajectory {
            dt,
            samples: Vec::new(),
            hidden_eps: Some(Hidden::new(Vec::new())),
        }
    }

    pub(crate) fn push(&mut self, sample: Sample, eps_truth: Vec<Vec<f64>>) {
        self.samples.push(sample);
        if let Some(h) = self.hidden_eps.as_mut() {
            h.0.push(eps_truth);
        }
    }

    /// Overwrites the controls of the most recent sample (used when the step
    /// after a set junction is taken under a different policy).
    pub(crate) fn replace_last_inputs(&mut self, sample: Sample, eps_truth: Vec<Vec<f64>>) {
        let last = self.samples.len() - 1;
        self.samples[last] = sample;
        if let Some(h) = self.hidden_eps.as_mut() {
            h.0[last] = eps_truth;
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn hidden_eps(&self) -> Option<&Hidden<EpsTruth>> {
        self.hidden_eps.as_ref()
    }

    pub fn state_dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.phi.len())
    }

    pub fn control_dims(&self) -> Vec<usize> {
        self.samples
            .first()
            .map_or_else(Vec::new, |s| s.u_pure.iter().map(Vec::len).collect())
    }

    fn header(&self) -> Vec<String> {
        let Some(first) = self.samples.first() else {
            return vec!["t".into()];
        };
        let mut h = vec!["t".to_string()];
        h.extend((1..=first.phi.len()).map(|i| format!("phi_{i}")));
        h.extend((1..=first.xi.len()).map(|i| format!("xi_{i}")));
        for (tag, rows) in [("upure", &first.u_pure), ("ucoup", &first.u_coupled)] {
            for (p, u) in rows.iter().enumerate() {
                h.extend((1..=u.len()).map(|c| format!("{tag}_{}_{c}", p + 1)));
            }
        }
        h
    }

    /// Observable columns only; `ε` truth goes through [`Trajectory::write_hidden_csv`].
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header())?;
        for s in &self.samples {
            let mut row = vec![s.t.to_string()];
            row.extend(s.phi.iter().chain(&s.xi).map(f64::to_string));
            for u in s.u_pure.iter().chain(&s.u_coupled) {
                row.extend(u.iter().map(f64::to_string));
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_hidden_csv<W: Write>(&self, w: W) -> Result<()> {
        let truth = self
            .hidden_eps
            .as_ref()
            .ok_or_else(|| Error::InsufficientData("trajectory carries no hidden record".into()))?
            .reveal();
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        if let Some(first) = truth.first() {
            for (p, e) in first.iter().enumerate() {
                header.extend((1..=e.len()).map(|c| format!("eps_{}_{c}", p + 1)));
            }
        }
        out.write_record(&header)?;
        for (s, eps) in self.samples.iter().zip(truth) {
            let mut row = vec![s.t.to_string()];
            for e in eps {
                row.extend(e.iter().map(f64::to_string));
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Parses a file produced by [`Trajectory::write_csv`]. The result carries
    /// no hidden record.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let count = |prefix: &str| header.iter().filter(|h| h.starts_with(prefix)).count();
        let n_phi = count("phi_");
        let n_xi = count("xi_");
        // control layout from upure_<p>_<c> names
        let mut dims: Vec<usize> = Vec::new();
        for h in header.iter().filter(|h| h.starts_with("upure_")) {
            let mut parts = h.split('_').skip(1);
            let p: usize = parts
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::validation("trajectory header", format!("bad column {h}")))?;
            if dims.len() < p {
                dims.resize(p, 0);
            }
            dims[p - 1] += 1;
        }
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|e| Error::validation("trajectory row", e.to_string()))
                })
                .collect::<Result<_>>()?;
            let mut it = vals.into_iter();
            let t = it.next().unwrap_or(0.0);
            let phi: Vec<f64> = it.by_ref().take(n_phi).collect();
            let xi: Vec<f64> = it.by_ref().take(n_xi).collect();
            let u_pure: Vec<Vec<f64>> = dims.iter().map(|&d| it.by_ref().take(d).collect()).collect();
            let u_coupled: Vec<Vec<f64>> = dims.iter().map(|&d| it.by_ref().take(d).collect()).collect();
            samples.push(Sample {
                t,
                phi,
                xi,
                u_pure,
                u_coupled,
            });
        }
        let dt = if samples.len() >= 2 {
            samples[1].t - samples[0].t
        } else {
            0.0
        };
        Ok(Trajectory {
            dt,
            samples,
            hidden_eps: None,
        })
    }
}
