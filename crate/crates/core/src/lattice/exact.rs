//! Dense generator over the full state space `{0,1}^{N-1}` and its exact
//! stationary distribution.

use nalgebra::{DMatrix, DVector};

use super::Configuration;
use crate::error::{Error, Result};
use crate::jumplaw::JumpLaw;

/// Largest system the dense path accepts (state space 2^13 = 8192).
pub const N_EXACT_MAX: usize = 14;

/// Dense rate matrix `Q` with `Q[s][s']` the rate from state `s` to `s'`
/// and diagonal fixed by zero row sums. State index bit `z-1` is `eta_z`.
pub struct ExactGenerator {
    n: usize,
    alpha: f64,
    beta: f64,
    q: DMatrix<f64>,
}

/// Build from the three generator parts. Pair exchanges enter once per
/// unordered pair at rate `p(y-x)`; reservoir flips at
/// `r_N^-(z/N)[eta_z(1-alpha) + (1-eta_z)alpha]` and the `beta` mirror.
pub fn build_exact_generator(
    n: usize,
    law: &JumpLaw,
    alpha: f64,
    beta: f64,
) -> Result<ExactGenerator> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N = {n} below minimum 2")));
    }
    if n > N_EXACT_MAX {
        return Err(Error::SystemTooLarge { n, max: N_EXACT_MAX });
    }
    let sites = n - 1;
    let dim = 1usize << sites;
    let mut q = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        let mut out = 0.0;
        // pair exchanges
        for x in 1..n {
            for y in (x + 1)..n {
                let bx = (s >> (x - 1)) & 1;
                let by = (s >> (y - 1)) & 1;
                if bx == by {
                    continue;
                }
                let t = s ^ (1 << (x - 1)) ^ (1 << (y - 1));
                let rate = law.p((y - x) as i64);
                q[(s, t)] += rate;
                out += rate;
            }
        }
        // reservoir flips
        for z in 1..n {
            let eta = ((s >> (z - 1)) & 1) as f64;
            let t = s ^ (1 << (z - 1));
            let rate = law.tail(z) * (eta * (1.0 - alpha) + (1.0 - eta) * alpha)
                + law.tail(n - z) * (eta * (1.0 - beta) + (1.0 - eta) * beta);
            q[(s, t)] += rate;
            out += rate;
        }
        q[(s, s)] = -out;
    }
    Ok(ExactGenerator { n, alpha, beta, q })
}

impl ExactGenerator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.q[(from, to)]
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim())
            .map(|s| self.q.row(s).sum().abs())
            .fold(0.0, f64::max)
    }

    /// `mu Q` for a row vector `mu`, used for residual checks.
    pub fn left_apply(&self, mu: &DVector<f64>) -> DVector<f64> {
        self.q.tr_mul(mu)
    }

    /// Stationary distribution by a null-space solve of `Q^T mu = 0` with
    /// the first equation replaced by the normalization `sum mu = 1`.
    /// The residual `||mu Q||_inf` is verified to 1e-10; a violation is an
    /// error, never patched over.
    pub fn solve_stationary(&self) -> Result<StationaryDistribution> {
        let dim = self.dim();
        let mut a = self.q.transpose();
        for j in 0..dim {
            a[(0, j)] = 1.0;
        }
        let mut b = DVector::zeros(dim);
        b[0] = 1.0;
        let mu = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::SolverFailure("singular normalized system".into()))?;
        let min = mu.min();
        if min < -1e-12 {
            return Err(Error::SolverFailure(format!(
                "stationary vector has negative mass {min}"
            )));
        }
        let mut mu = mu.map(|v| v.max(0.0));
        mu /= mu.sum();
        let residual = self.left_apply(&mu).amax();
        if residual > 1e-10 {
            return Err(Error::SolverFailure(format!(
                "stationary residual {residual} above 1e-10"
            )));
        }
        Ok(StationaryDistribution {
            n: self.n,
            alpha: self.alpha,
            beta: self.beta,
            mu,
            residual,
        })
    }
}

/// Exact stationary distribution `mu_N` as a dense vector over states.
pub struct StationaryDistribution {
    n: usize,
    alpha: f64,
    beta: f64,
    mu: DVector<f64>,
    residual: f64,
}

impl StationaryDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn prob(&self, state: usize) -> f64 {
        self.mu[state]
    }

    /// `<f>_N` for an arbitrary configuration functional.
    pub fn expectation<F: Fn(&Configuration) -> f64>(&self, f: F) -> f64 {
        let mut acc = 0.0;
        let mut cfg = Configuration::new(self.n, self.alpha, self.beta).expect("valid by construction");
        for s in 0..self.mu.len() {
            for z in 1..self.n {
                cfg.set(z, ((s >> (z - 1)) & 1) as u8);
            }
            acc += self.mu[s] * f(&cfg);
        }
        acc
    }

    /// `<eta_z>_N` for one site.
    pub fn site_density(&self, z: usize) -> f64 {
        let mut acc = 0.0;
        for s in 0..self.mu.len() {
            acc += self.mu[s] * ((s >> (z - 1)) & 1) as f64;
        }
        acc
    }

    /// The whole profile `(<eta_1>_N, .., <eta_{N-1}>_N)`.
    pub fn profile(&self) -> Vec<f64> {
        (1..self.n).map(|z| self.site_density(z)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> JumpLaw {
        JumpLaw::new(1.5, 1 << 12).unwrap()
    }

    #[test]
    fn rejects_out_of_range_n() {
        let law = law();
        assert!(build_exact_generator(1, &law, 0.2, 0.8).is_err());
        assert!(matches!(
            build_exact_generator(15, &law, 0.2, 0.8),
            Err(Error::SystemTooLarge { .. })
        ));
    }

    #[test]
    fn rows_sum_to_zero_offdiag_nonnegative() {
        let law = law();
        let gen = build_exact_generator(7, &law, 0.2, 0.8).unwrap();
        assert!(gen.max_row_sum() < 1e-12);
        for s in 0..gen.dim() {
            for t in 0..gen.dim() {
                if s != t {
                    assert!(gen.rate(s, t) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn n2_closed_form_occupation() {
        // single site: birth-death with in-rate alpha*S_- + beta*S_+ and
        // out-rate (1-alpha)S_- + (1-beta)S_+, S_-+ = r_N(-+)(1/2)
        let law = law();
        let gen = build_exact_generator(2, &law, 0.3, 0.9).unwrap();
        let mu = gen.solve_stationary().unwrap();
        let s_minus = law.tail(1);
        let s_plus = law.tail(1);
        let expect = (0.3 * s_minus + 0.9 * s_plus) / (s_minus + s_plus);
        assert!((mu.site_density(1) - expect).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_product_is_stationary_at_equal_densities() {
        let law = law();
        let rho = 0.3;
        let n = 6;
        let gen = build_exact_generator(n, &law, rho, rho).unwrap();

        // Bernoulli(rho) product is a left null vector of the rate matrix
        let dim = gen.dim();
        let bern = DVector::from_iterator(
            dim,
            (0..dim).map(|s| {
                (1..n)
                    .map(|z| if (s >> (z - 1)) & 1 == 1 { rho } else { 1.0 - rho })
                    .product::<f64>()
            }),
        );
        assert!(gen.left_apply(&bern).amax() <= 1e-10);

        // and the solver recovers it
        let mu = gen.solve_stationary().unwrap();
        let max_dev = (0..dim)
            .map(|s| (mu.prob(s) - bern[s]).abs())
            .fold(0.0, f64::max)
            .max(0.0);
        assert!(max_dev <= 1e-10, "max deviation {max_dev}");
    }

    #[test]
    fn profile_monotone_for_increasing_reservoirs() {
        let law = law();
        let gen = build_exact_generator(8, &law, 0.2, 0.8).unwrap();
        let profile = gen.solve_stationary().unwrap().profile();
        for w in profile.windows(2) {
            assert!(w[0] < w[1], "profile not increasing: {profile:?}");
        }
        // regression fixture from this solver (oracle = the dense solve);
        // alpha+beta = 1 also forces the profile symmetry below
        assert!((profile[0] - 0.307_217_915_065_900_35).abs() < 1e-9);
        for z in 1..=7usize {
            assert!((profile[z - 1] + profile[7 - z] - 1.0).abs() < 1e-10);
        }
    }
}
