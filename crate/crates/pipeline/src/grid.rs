use serde::{Deserialize, Serialize};

use crate::{PipelineError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult<C> {
    pub best_index: usize,
    pub best: C,
    /// Validation score of every cell, in grid order.
    pub scores: Vec<f64>,
}

/// Evaluates every cell of `space` (lower score is better) and returns the
/// best. Ties, and NaN scores, resolve to the earliest cell, so a space
/// listed in lexicographic order yields the lexicographically first optimum.
pub fn grid_search<C: Clone>(space: &[C], mut score: impl FnMut(&C) -> Result<f64>) -> Result<GridResult<C>> {
    if space.is_empty() {
        return Err(PipelineError::Config("empty search grid".into()));
    }
    let mut scores = Vec::with_capacity(space.len());
    let mut best_index = 0;
    for (i, cell) in space.iter().enumerate() {
        let s = score(cell)?;
        scores.push(s);
        if s < scores[best_index] || (scores[best_index].is_nan() && !s.is_nan()) {
            best_index = i;
        }
    }
    Ok(GridResult {
        best_index,
        best: space[best_index].clone(),
        scores,
    })
}

/// Cartesian product of hidden sizes and learning rates, in lexicographic
/// order (hidden size major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KamGrid {
    pub hidden: Vec<usize>,
    pub learning_rate: Vec<f64>,
}

impl KamGrid {
    pub fn cells(&self) -> Vec<(usize, f64)> {
        let mut hidden = self.hidden.clone();
        hidden.sort_unstable();
        hidden.dedup();
        let mut lrs = self.learning_rate.clone();
        lrs.sort_by(f64::total_cmp);
        lrs.dedup();
        hidden.iter().flat_map(|&h| lrs.iter().map(move |&lr| (h, lr))).collect()
    }
}
