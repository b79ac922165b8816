use serde::{Deserialize, Serialize};

use super::partition::{assign_cell, CellId, CellPartition};
use crate::epsilon::EpsilonTrace;
use crate::error::{Error, Result};

/// A moment at which the running cell changes. The first entry is the start
/// of the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub index: usize,
    pub t: f64,
    pub cell: CellId,
}

pub fn detect_transitions(trace: &EpsilonTrace, partition: &CellPartition) -> Result<Vec<Transition>> {
    if trace.is_empty() {
        return Err(Error::InsufficientData("trace is empty".into()));
    }
    if trace.width() != partition.dims() {
        return Err(Error::LengthMismatch {
            context: "eps width vs partition axes",
            left: trace.width(),
            right: partition.dims(),
        });
    }
    let mut running = partition.cell_of(&trace.values[0]);
    let mut out = vec![Transition {
        index: 0,
        t: trace.times[0],
        cell: running.clone(),
    }];
    for (k, eps) in trace.values.iter().enumerate().skip(1) {
        let cell = assign_cell(eps, partition, Some(&running));
        if cell != running {
            running = cell;
            out.push(Transition {
                index: k,
                t: trace.times[k],
                cell: running.clone(),
            });
        }
    }
    Ok(out)
}
