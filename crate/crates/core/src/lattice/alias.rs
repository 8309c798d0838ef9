//! Walker-Vose alias table for O(1) sampling from a fixed finite
//! distribution.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
    total: f64,
}

impl AliasTable {
    /// Build from non-negative weights (at least one strictly positive).
    pub fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        assert!(n > 0, "alias table needs at least one weight");
        let total: f64 = weights.iter().sum();
        assert!(
            total > 0.0 && weights.iter().all(|w| w.is_finite() && *w >= 0.0),
            "weights must be finite, non-negative, not all zero"
        );
        let mut prob: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut alias = vec![0usize; n];
        let mut small: Vec<usize> = Vec::with_capacity(n);
        let mut large: Vec<usize> = Vec::with_capacity(n);
        for (i, p) in prob.iter().enumerate() {
            if *p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            alias[s] = l;
            prob[l] = (prob[l] + prob[s]) - 1.0;
            if prob[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // leftovers are 1 up to rounding
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        Self { prob, alias, total }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let i = rng.gen_range(0..self.prob.len());
        if rng.gen::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }

    /// Sum of the input weights.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frequencies_match_weights_chi_square() {
        let weights = [5.0, 1.0, 0.0, 3.0, 0.5, 2.5];
        let table = AliasTable::new(&weights);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 1_000_000usize;
        let mut counts = vec![0u64; weights.len()];
        for _ in 0..draws {
            counts[table.sample(&mut rng)] += 1;
        }
        assert_eq!(counts[2], 0, "zero-weight bucket must never be drawn");
        let mut chi2 = 0.0;
        let mut dof = 0;
        for (i, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let expect = w / table.total() * draws as f64;
            chi2 += (counts[i] as f64 - expect).powi(2) / expect;
            dof += 1;
        }
        let dof = dof - 1;
        let dist = statrs::distribution::ChiSquared::new(dof as f64).unwrap();
        let p = 1.0 - statrs::distribution::ContinuousCDF::cdf(&dist, chi2);
        assert!(p > 0.001, "chi2 = {chi2}, p = {p}");
    }

    #[test]
    fn single_bucket() {
        let table = AliasTable::new(&[2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(table.sample(&mut rng), 0);
        assert_eq!(table.total(), 2.0);
    }
}
