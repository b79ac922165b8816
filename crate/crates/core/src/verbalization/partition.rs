use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-axis grid indices of a rectangular cell. Index `i` on an axis with
/// cuts `c` covers `(c[i−1], c[i]]`, the outermost cells being unbounded.
pub type CellId = Vec<usize>;

/// Axis-aligned rectangular partition of a real vector space with an optional
/// hysteresis margin and a symbol map that folds grid indices modulo a
/// per-axis period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPartition {
    pub cuts: Vec<Vec<f64>>,
    #[serde(default)]
    pub hysteresis: f64,
    /// Symbol period per axis; the symbol of a cell is
    /// `Σ_a (index_a mod fold_a)·Π_{b<a} fold_b`.
    pub fold: Vec<usize>,
}

impl CellPartition {
    /// Plain grid: every cell of the product has its own symbol.
    pub fn grid(cuts: Vec<Vec<f64>>, hysteresis: f64) -> Result<Self> {
        let fold = cuts.iter().map(|c| c.len() + 1).collect();
        let p = CellPartition { cuts, hysteresis, fold };
        p.validate()?;
        Ok(p)
    }

    /// Cut at zero on each of `dims` axes.
    pub fn sign(dims: usize) -> Self {
        CellPartition {
            cuts: vec![vec![0.0]; dims],
            hysteresis: 0.0,
            fold: vec![2; dims],
        }
    }

    /// Uniform cuts of `width` covering `[-extent, extent]` on the `active`
    /// axes (the rest uncut), symbols folded so the alphabet has `alphabet` letters.
    pub fn folded_uniform(dims: usize, active: &[usize], width: f64, extent: f64, alphabet: usize) -> Result<Self> {
        if !(width > 0.0 && extent > 0.0 && width.is_finite() && extent.is_finite()) {
            return Err(Error::validation("partition.cell_width", "width and extent must be positive"));
        }
        if active.is_empty() || active.iter().any(|&a| a >= dims) {
            return Err(Error::validation("partition.axes", "need at least one axis within range"));
        }
        let periods = factor_alphabet(alphabet, active.len())?;
        let n = (2.0 * extent / width).round() as usize;
        let line: Vec<f64> = (0..=n).map(|k| -extent + k as f64 * width).collect();
        let mut cuts = vec![Vec::new(); dims];
        let mut fold = vec![1; dims];
        for (&axis, &period) in active.iter().zip(&periods) {
            cuts[axis] = line.clone();
            fold[axis] = period;
        }
        let p = CellPartition {
            cuts,
            hysteresis: 0.0,
            fold,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dims(&self) -> usize {
        self.cuts.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.fold.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cuts.is_empty() {
            return Err(Error::validation("partition.cuts", "need at least one axis"));
        }
        if self.fold.len() != self.cuts.len() {
            return Err(Error::validation("partition.fold", "need one period per axis"));
        }
        if !(self.hysteresis >= 0.0 && self.hysteresis.is_finite()) {
            return Err(Error::validation("partition.hysteresis", "must be finite and >= 0"));
        }
        for (a, cuts) in self.cuts.iter().enumerate() {
            if cuts.iter().any(|c| !c.is_finite()) || cuts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::validation(
                    format!("partition.cuts[{a}]"),
                    "cut points must be finite and strictly increasing",
                ));
            }
            if self.fold[a] == 0 || self.fold[a] > cuts.len() + 1 {
                return Err(Error::validation(
                    format!("partition.fold[{a}]"),
                    "period must be between 1 and the number of cells on the axis",
                ));
            }
        }
        Ok(())
    }

    /// Grid cell without hysteresis. Points on a cut go to the lower cell.
    pub fn cell_of(&self, x: &[f64]) -> CellId {
        self.cuts
            .iter()
            .zip(x)
            .map(|(cuts, &v)| cuts.partition_point(|&c| c < v))
            .collect()
    }

    /// Whether `x` lies in `cell` widened by the hysteresis margin on every side.
    pub fn within_margin(&self, x: &[f64], cell: &[usize]) -> bool {
        let h = self.hysteresis;
        self.cuts.iter().zip(x).zip(cell).all(|((cuts, &v), &i)| {
            let above_lower = i == 0 || v > cuts[i - 1] - h;
            let below_upper = i >= cuts.len() || v <= cuts[i] + h;
            above_lower && below_upper
        })
    }

    pub fn symbol(&self, cell: &[usize]) -> usize {
        let mut stride = 1;
        let mut s = 0;
        for (&i, &f) in cell.iter().zip(&self.fold) {
            s += (i % f) * stride;
            stride *= f;
        }
        s
    }
}

/// Splits an alphabet over `axes` axes as evenly as divisibility allows.
pub fn factor_alphabet(alphabet: usize, axes: usize) -> Result<Vec<usize>> {
    if alphabet < 2 {
        return Err(Error::validation("alphabet", "need at least 2 symbols"));
    }
    let mut periods = Vec::with_capacity(axes);
    let mut rest = alphabet;
    for left in (1..=axes).rev() {
        if left == 1 {
            periods.push(rest);
            break;
        }
        let target = (rest as f64).powf(1.0 / left as f64).floor() as usize;
        let a = (1..=target.max(1)).rev().find(|d| rest % d == 0).unwrap_or(1);
        periods.push(a);
        rest /= a;
    }
    periods.sort_unstable();
    Ok(periods)
}

/// Grid cell of `eps`, keeping `previous` while `eps` stays within its
/// hysteresis margin.
pub fn assign_cell(eps: &[f64], partition: &CellPartition, previous: Option<&[usize]>) -> CellId {
    match previous {
        Some(prev) if partition.hysteresis > 0.0 && partition.within_margin(eps, prev) => prev.to_vec(),
        _ => partition.cell_of(eps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_quadrant() {
        let p = CellPartition::sign(2);
        assert_eq!(assign_cell(&[0.5, -0.3], &p, None), vec![1, 0]);
    }

    #[test]
    fn boundary_goes_to_lower_cell() {
        let p = CellPartition::sign(2);
        assert_eq!(assign_cell(&[0.0, 0.0], &p, None), vec![0, 0]);
        let g = CellPartition::grid(vec![vec![-1.0, 1.0]], 0.0).unwrap();
        assert_eq!(assign_cell(&[1.0], &g, None), vec![1]);
        assert_eq!(assign_cell(&[-1.0], &g, None), vec![0]);
    }

    #[test]
    fn hysteresis_keeps_previous() {
        let mut p = CellPartition::sign(2);
        p.hysteresis = 0.01;
        assert_eq!(assign_cell(&[0.001, 1.0], &p, Some(&[0, 1])), vec![0, 1]);
        assert_eq!(assign_cell(&[0.02, 1.0], &p, Some(&[0, 1])), vec![1, 1]);
        assert_eq!(assign_cell(&[0.001, 1.0], &p, None), vec![1, 1]);
    }

    #[test]
    fn folded_symbols_cover_alphabet() {
        let p = CellPartition::folded_uniform(4, &[0, 1], 0.1, 1.0, 4).unwrap();
        assert_eq!(p.alphabet_size(), 4);
        assert_eq!(p.fold, vec![2, 2, 1, 1]);
        let mut seen = [false; 4];
        for i in 0..4 {
            for j in 0..4 {
                seen[p.symbol(&[i, j, 0, 0])] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn alphabet_factoring() {
        assert_eq!(factor_alphabet(4, 2).unwrap(), vec![2, 2]);
        assert_eq!(factor_alphabet(6, 2).unwrap(), vec![2, 3]);
        assert_eq!(factor_alphabet(7, 2).unwrap(), vec![1, 7]);
        assert_eq!(factor_alphabet(8, 3).unwrap(), vec![2, 2, 2]);
        assert_eq!(factor_alphabet(5, 1).unwrap(), vec![5]);
    }

    #[test]
    fn rejects_unsorted_cuts() {
        assert!(CellPartition::grid(vec![vec![1.0, 0.0]], 0.0).is_err());
        assert!(CellPartition::grid(vec![vec![0.0, 0.0]], 0.0).is_err());
        assert!(CellPartition::grid(vec![vec![0.0]], -1.0).is_err());
    }
}
