//! Deterministic floating-point reductions.
//!
//! Every accumulation over grid nodes in this crate goes through the pairwise
//! summation here, in node index order. The reduction tree depends only on
//! the element count, so results are bit-identical across runs and across
//! thread counts (parallel stages produce per-node values; summation itself
//! is sequential).

use crate::C64;

const SEQ_CUTOFF: usize = 32;

/// Pairwise sum of a slice, fixed recursion tree (split at midpoint).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= SEQ_CUTOFF {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Pairwise sum for complex values.
pub fn pairwise_sum_c(xs: &[C64]) -> C64 {
    if xs.len() <= SEQ_CUTOFF {
        let mut acc = C64::new(0.0, 0.0);
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
    }
}

/// Streaming pairwise accumulator (binary-counter scheme).
///
/// Pushing values in index order reproduces a fixed left-complete reduction
/// tree without materialising the whole slice; used where per-node
/// contributions are produced chunk by chunk.
#[derive(Debug, Clone)]
pub struct PairwiseAcc {
    levels: Vec<Option<f64>>,
    count: usize,
}

impl PairwiseAcc {
    pub fn new() -> Self {
        PairwiseAcc {
            levels: Vec::new(),
            count: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        let mut carry = x;
        let mut level = 0;
        loop {
            if level == self.levels.len() {
                self.levels.push(Some(carry));
                break;
            }
            match self.levels[level].take() {
                None => {
                    self.levels[level] = Some(carry);
                    break;
                }
                Some(prev) => {
                    carry += prev;
                    level += 1;
                }
            }
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Final value; folds remaining levels from the bottom up.
    pub fn total(&self) -> f64 {
        let mut acc = 0.0;
        for v in self.levels.iter().flatten() {
            acc += v;
        }
        acc
    }
}

impl Default for PairwiseAcc {
    fn default() -> Self {
        Self::new()
    }
}

/// Trapezoid rule on a uniformly spaced sample vector.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = pairwise_sum(&values[1..values.len() - 1]);
    dt * (0.5 * (values[0] + values[values.len() - 1]) + interior)
}

/// Cumulative trapezoid; output[0] = 0.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}
