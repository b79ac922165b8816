use crate::dynamics::{CouplingSpec, Sample, Trajectory};
use crate::error::{Error, Result};

use super::trace::{EpsilonTrace, Provenance};

/// Inverts each player's known coupling at one sample.
pub fn recover_sample(sample: &Sample, couplings: &[CouplingSpec], index: usize) -> Result<Vec<f64>> {
    let mut flat = Vec::with_capacity(couplings.iter().map(|c| c.eps_dim).sum());
    for (player, coupling) in couplings.iter().enumerate() {
        let eps = coupling
            .invert(&sample.u_pure[player], &sample.u_coupled[player])
            .ok_or(Error::NonInvertibleCoupling { player, sample: index })?;
        flat.extend(eps);
    }
    Ok(flat)
}

/// A-posteriori `ε` from the observed `(u°, u)` pairs.
pub fn recover_epsilon(traj: &Trajectory, couplings: &[CouplingSpec]) -> Result<EpsilonTrace> {
    if let Some(first) = traj.samples.first() {
        if first.u_pure.len() != couplings.len() {
            return Err(Error::LengthMismatch {
                context: "players in trajectory vs couplings",
                left: first.u_pure.len(),
                right: couplings.len(),
            });
        }
    }
    let values = traj
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| recover_sample(s, couplings, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(EpsilonTrace {
        dt: traj.dt,
        times: traj.samples.iter().map(|s| s.t).collect(),
        dims: couplings.iter().map(|c| c.eps_dim).collect(),
        values,
        provenance: Provenance::Recovered,
    })
}
