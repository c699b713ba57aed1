//! Subsequence dynamic time warping.

use super::MetricError;
use crate::dsp::FeatureMatrix;

/// Step weights for diagonal, vertical and horizontal moves.
pub const W_DIAG: f64 = 2.0;
pub const W_VERT: f64 = 1.0;
pub const W_HORZ: f64 = 1.0;

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Accumulated cost and path length (cells on the path) for the best path into a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    cost: f64,
    len: usize,
}

impl Cell {
    fn extend(self, weight: f64, local: f64) -> Cell {
        Cell {
            cost: self.cost + weight * local,
            len: self.len + 1,
        }
    }

    /// Lower cost wins; equal costs prefer the shorter path.
    fn better(self, other: Cell) -> Cell {
        if other.cost < self.cost || (other.cost == self.cost && other.len < self.len) {
            other
        } else {
            self
        }
    }
}

/// Normalized cost of the best alignment of `patch` to any contiguous stretch
/// of `reference`.
///
/// Patch frames index the rows `i`, reference frames the columns `j`. The
/// first row is the local cost itself, so a path may start at any reference
/// frame; the result is the minimum over end columns of accumulated cost
/// divided by the number of cells on the path.
pub fn sdtw_cost(reference: &FeatureMatrix, patch: &FeatureMatrix) -> Result<f64, MetricError> {
    if reference.coeffs() != patch.coeffs() {
        return Err(MetricError::DimensionMismatch {
            reference: reference.coeffs(),
            patch: patch.coeffs(),
        });
    }
    let (n, m) = (patch.frames(), reference.frames());
    if n < 2 {
        return Err(MetricError::PatchTooShort(n));
    }
    if m < n {
        return Err(MetricError::PatchLongerThanReference { patch: n, reference: m });
    }

    let local = |i: usize, j: usize| euclidean(patch.row(i), reference.row(j));
    let mut prev: Vec<Cell> = (0..m).map(|j| Cell { cost: local(0, j), len: 1 }).collect();
    let mut cur = prev.clone();
    for i in 1..n {
        for j in 0..m {
            let c = local(i, j);
            let mut best = prev[j].extend(W_VERT, c);
            if j > 0 {
                best = best.better(prev[j - 1].extend(W_DIAG, c));
                best = best.better(cur[j - 1].extend(W_HORZ, c));
            }
            cur[j] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev
        .iter()
        .map(|c| c.cost / c.len as f64)
        .fold(f64::INFINITY, f64::min))
}
