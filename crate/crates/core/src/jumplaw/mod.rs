//! Long-jump step distribution and its tail structure.
//!
//! The step law is `p(z) = c_gamma |z|^{-(1+gamma)}` for `|z| >= 1` with
//! `p(0) = 0` and `gamma` in (1, 2). The normalization `c_gamma` is fixed to
//! `1 / (2 zeta(1+gamma))`, the unique constant making `p` a probability.
//! Tail sums are tabulated up to a horizon `K_max` and continued beyond it
//! by the integral asymptotic with Euler-Maclaurin corrections, so tail
//! queries cost O(1) at any lag without a precision cliff.

mod fraclap;
mod operators;

pub use fraclap::{frac_laplacian_1d, frac_laplacian_1d_checked, DEFAULT_EPS_SPLIT};
pub(crate) use operators::bump;
pub use operators::{
    apply_k_n, convergence_report, ConvergenceReport, ConvergenceRow, DiscreteOperatorTable,
};

use crate::error::{Error, Result};

/// Default tail-table horizon.
pub const DEFAULT_K_MAX: usize = 1 << 20;

/// The step distribution of the long-jump walk, with precomputed tail and
/// moment-tail tables.
#[derive(Debug, Clone)]
pub struct JumpLaw {
    gamma: f64,
    c_gamma: f64,
    /// `tail[k-1] = T(k) = sum_{j >= k} p(j)`, `k = 1..=K_max`.
    tail: Vec<f64>,
    /// `moment_tail[k-1] = sum_{j >= k} j p(j)`.
    moment_tail: Vec<f64>,
    k_max: usize,
}

/// Riemann zeta on (1, 3]: partial sum plus Euler-Maclaurin continuation.
fn zeta(s: f64) -> f64 {
    let m = 100_000u64;
    let mut sum = 0.0;
    // ascending terms summed smallest-first
    for k in (1..m).rev() {
        sum += (k as f64).powf(-s);
    }
    let mf = m as f64;
    sum + mf.powf(1.0 - s) / (s - 1.0) + 0.5 * mf.powf(-s) + s * mf.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * mf.powf(-s - 3.0) / 720.0
}

impl JumpLaw {
    /// Build the law for `gamma` in (1, 2) with tail tables up to `k_max`.
    pub fn new(gamma: f64, k_max: usize) -> Result<Self> {
        if !(gamma > 1.0 && gamma < 2.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        if k_max < 4 {
            return Err(Error::InvalidParameter(format!(
                "K_max = {k_max} below minimum 4"
            )));
        }
        let c_gamma = 0.5 / zeta(1.0 + gamma);

        // Backward accumulation from the asymptotic continuation: small
        // terms first, so no compensated summation is needed.
        let mut tail = vec![0.0; k_max];
        let mut moment_tail = vec![0.0; k_max];
        let mut t = tail_asymptotic(gamma, c_gamma, (k_max + 1) as f64);
        let mut mt = moment_tail_asymptotic(gamma, c_gamma, (k_max + 1) as f64);
        for k in (1..=k_max).rev() {
            let kf = k as f64;
            let p = c_gamma * kf.powf(-1.0 - gamma);
            t += p;
            mt += kf * p;
            tail[k - 1] = t;
            moment_tail[k - 1] = mt;
        }

        Ok(Self {
            gamma,
            c_gamma,
            tail,
            moment_tail,
            k_max,
        })
    }

    /// Build with the default horizon.
    pub fn with_default_tables(gamma: f64) -> Result<Self> {
        Self::new(gamma, DEFAULT_K_MAX)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c_gamma(&self) -> f64 {
        self.c_gamma
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Single-step probability `p(z)`.
    pub fn p(&self, z: i64) -> f64 {
        if z == 0 {
            return 0.0;
        }
        self.c_gamma * (z.unsigned_abs() as f64).powf(-1.0 - self.gamma)
    }

    /// `T(k) = sum_{j >= k} p(j)` for `k >= 1`.
    pub fn tail(&self, k: usize) -> f64 {
        assert!(k >= 1, "tail index starts at 1");
        if k <= self.k_max {
            self.tail[k - 1]
        } else {
            tail_asymptotic(self.gamma, self.c_gamma, k as f64)
        }
    }

    /// `T~(k) = sum_{j >= k} j p(j)` for `k >= 1`.
    pub fn moment_tail(&self, k: usize) -> f64 {
        assert!(k >= 1, "moment tail index starts at 1");
        if k <= self.k_max {
            self.moment_tail[k - 1]
        } else {
            moment_tail_asymptotic(self.gamma, self.c_gamma, k as f64)
        }
    }

    /// Deliberately break one tail-table entry. Only for exercising the
    /// failure paths of the validation suite; a corrupted table violates
    /// `T(k) = p(k) + T(k+1)` and with it every identity built on it.
    #[doc(hidden)]
    pub fn corrupt_tail_entry(&mut self, k: usize, delta: f64) {
        assert!(k >= 1 && k <= self.k_max);
        self.tail[k - 1] += delta;
    }

    /// Continuum tail limit `r^-(q) = c_gamma q^{-gamma} / gamma`.
    pub fn r_minus_limit(&self, q: f64) -> f64 {
        self.c_gamma / self.gamma * q.powf(-self.gamma)
    }

    /// Continuum tail limit `r^+(q) = c_gamma (1-q)^{-gamma} / gamma`.
    pub fn r_plus_limit(&self, q: f64) -> f64 {
        self.c_gamma / self.gamma * (1.0 - q).powf(-self.gamma)
    }
}

/// `sum_{j >= k} j^{-(1+gamma)}` continuation: integral plus the first two
/// Euler-Maclaurin correction terms.
fn tail_asymptotic(gamma: f64, c_gamma: f64, k: f64) -> f64 {
    let s = 1.0 + gamma;
    c_gamma
        * (k.powf(-gamma) / gamma
            + 0.5 * k.powf(-s)
            + s / 12.0 * k.powf(-s - 1.0)
            - s * (s + 1.0) * (s + 2.0) / 720.0 * k.powf(-s - 3.0))
}

/// `sum_{j >= k} j^{-gamma}` continuation (one power less singular).
fn moment_tail_asymptotic(gamma: f64, c_gamma: f64, k: f64) -> f64 {
    c_gamma
        * (k.powf(1.0 - gamma) / (gamma - 1.0)
            + 0.5 * k.powf(-gamma)
            + gamma / 12.0 * k.powf(-1.0 - gamma)
            - gamma * (gamma + 1.0) * (gamma + 2.0) / 720.0 * k.powf(-gamma - 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_gamma_outside_open_interval() {
        assert!(JumpLaw::new(1.0, 64).is_err());
        assert!(JumpLaw::new(2.0, 64).is_err());
        assert!(JumpLaw::new(0.5, 64).is_err());
        assert!(JumpLaw::new(2.5, 64).is_err());
        assert!(JumpLaw::new(1.5, 2).is_err());
    }

    #[test]
    fn c_gamma_matches_zeta_oracle() {
        // 1 / (2 zeta(2.5)), zeta(2.5) = 1.3414872572509171
        let law = JumpLaw::new(1.5, 1 << 16).unwrap();
        assert!((law.c_gamma() - 0.372_720_648_144_388_6).abs() < 1e-12);
    }

    #[test]
    fn normalization_and_symmetry() {
        for gamma in [1.25, 1.5, 1.75] {
            let law = JumpLaw::new(gamma, 1 << 16).unwrap();
            // 2 sum_{k>=1} p(k) = 1 via T(1) = 1/2
            assert!(
                (2.0 * law.tail(1) - 1.0).abs() < 1e-12,
                "normalization off for gamma = {gamma}"
            );
            assert_eq!(law.p(7), law.p(-7));
            assert_eq!(law.p(0), 0.0);
        }
    }

    #[test]
    fn tail_values_match_definitions() {
        let law = JumpLaw::new(1.5, 1 << 16).unwrap();
        assert!((law.tail(1) - 0.5).abs() < 1e-13);
        // T(2) = T(1) - p(1) = 1/2 - c_gamma
        assert!((law.tail(2) - (0.5 - law.c_gamma())).abs() < 1e-13);
    }

    #[test]
    fn tails_strictly_decreasing_and_consistent_across_horizon() {
        let law = JumpLaw::new(1.5, 64).unwrap();
        for k in 1..200 {
            assert!(law.tail(k) > law.tail(k + 1));
            assert!(law.moment_tail(k) > law.moment_tail(k + 1));
            // tail identity T(k) = p(k) + T(k+1) must hold through the
            // table/continuation boundary
            let lhs = law.tail(k);
            let rhs = law.p(k as i64) + law.tail(k + 1);
            assert!((lhs - rhs).abs() <= 1e-14, "k = {k}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn tail_asymptotic_bound() {
        // |T(k) - c_gamma k^{-gamma}/gamma| <= c_gamma k^{-gamma-1}
        let law = JumpLaw::new(1.5, 1 << 16).unwrap();
        let (g, c) = (law.gamma(), law.c_gamma());
        for k in [10usize, 100, 1000, 10_000] {
            let kf = k as f64;
            let gap = (law.tail(k) - c * kf.powf(-g) / g).abs();
            assert!(gap <= c * kf.powf(-g - 1.0), "k = {k}");
        }
    }

    #[test]
    fn large_k_uses_continuation() {
        let law = JumpLaw::new(1.5, 64).unwrap();
        let big = JumpLaw::new(1.5, 1 << 16).unwrap();
        for k in [65usize, 100, 1000, 60_000] {
            let rel = (law.tail(k) - big.tail(k)).abs() / big.tail(k);
            assert!(rel < 1e-12, "k = {k}: rel = {rel}");
        }
    }
}
