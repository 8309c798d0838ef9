//! Time-weighted batch-means estimates.

use serde::{Deserialize, Serialize};

/// Default number of equal-time batches.
pub const DEFAULT_BATCHES: usize = 32;
/// Fewer completed batches than this flags the estimate low-confidence.
pub const MIN_VALID_BATCHES: usize = 20;

/// A time-averaged observable with a batch-means error bar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunEstimate {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
    pub total_time: f64,
    pub batches: usize,
    pub replica: u64,
    /// false when the batch count or measurement time is too small to
    /// trust the error bar
    pub valid: bool,
}

/// Splits a piecewise-constant signal into equal-time batches and reduces
/// them to mean and standard error. Weights may straddle batch
/// boundaries; they are chopped exactly.
#[derive(Debug, Clone)]
pub struct BatchAccumulator {
    batch_len: f64,
    sums: Vec<f64>,
    idx: usize,
    /// time consumed inside the current batch
    filled: f64,
}

impl BatchAccumulator {
    pub fn new(total_time: f64, n_batches: usize) -> Self {
        assert!(n_batches >= 1);
        Self {
            batch_len: if total_time > 0.0 {
                total_time / n_batches as f64
            } else {
                0.0
            },
            sums: vec![0.0; n_batches],
            idx: 0,
            filled: 0.0,
        }
    }

    pub fn add(&mut self, mut weight: f64, value: f64) {
        while weight > 0.0 && self.idx < self.sums.len() {
            let room = self.batch_len - self.filled;
            let w = weight.min(room);
            self.sums[self.idx] += w * value;
            self.filled += w;
            weight -= w;
            // tolerate summation-order rounding at the boundary
            if self.batch_len - self.filled <= 1e-12 * self.batch_len {
                self.idx += 1;
                self.filled = 0.0;
            }
        }
    }

    /// Batches completed so far.
    pub fn completed(&self) -> usize {
        self.idx
    }

    pub fn batch_means(&self) -> Vec<f64> {
        self.sums[..self.idx]
            .iter()
            .map(|s| s / self.batch_len)
            .collect()
    }

    pub fn finish(&self, name: &str, replica: u64) -> RunEstimate {
        let means = self.batch_means();
        let b = means.len();
        let (mean, stderr) = if b == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let mean = means.iter().sum::<f64>() / b as f64;
            let stderr = if b > 1 {
                let var =
                    means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b as f64 - 1.0);
                (var / b as f64).sqrt()
            } else {
                f64::NAN
            };
            (mean, stderr)
        };
        RunEstimate {
            name: name.to_string(),
            mean,
            stderr,
            total_time: self.batch_len * b as f64,
            batches: b,
            replica,
            valid: b >= MIN_VALID_BATCHES && self.batch_len > 0.0,
        }
    }
}

/// Pool replica estimates of the same observable: inverse-variance-free
/// equal weighting (replicas share the same measurement time).
pub fn merge_replicas(name: &str, estimates: &[RunEstimate]) -> RunEstimate {
    assert!(!estimates.is_empty());
    let k = estimates.len() as f64;
    let mean = estimates.iter().map(|e| e.mean).sum::<f64>() / k;
    let stderr = if estimates.len() > 1 {
        let var = estimates
            .iter()
            .map(|e| (e.mean - mean).powi(2))
            .sum::<f64>()
            / (k - 1.0);
        (var / k).sqrt()
    } else {
        estimates[0].stderr
    };
    RunEstimate {
        name: name.to_string(),
        mean,
        stderr,
        total_time: estimates.iter().map(|e| e.total_time).sum(),
        batches: estimates.iter().map(|e| e.batches).sum(),
        replica: u64::MAX,
        valid: estimates.iter().all(|e| e.valid),
    }
}
