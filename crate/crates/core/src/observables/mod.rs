//! Currents, empirical measures, and the discrete functions entering the
//! Fick's-law decomposition.

mod estimate;
mod observers;

pub use estimate::{
    merge_replicas, BatchAccumulator, RunEstimate, DEFAULT_BATCHES, MIN_VALID_BATCHES,
};
pub use observers::{
    ConfigFunctional, FluxObserver, PairProductFunctional, ProfileObserver, ScalarObserver,
    TestFunctionFunctional, W1Functional, RESYNC_EVERY,
};

use crate::error::{Error, Result};
use crate::jumplaw::JumpLaw;
use crate::lattice::Configuration;

/// Current through the bond `x - 1/2` in its all-finite form:
///
/// ```text
/// W_x = sum_{1 <= y <= x-1 < z <= N-1} p(z-y)(eta_y - eta_z)
///     + sum_{z=x}^{N-1} T(z)(alpha - eta_z)
///     - sum_{y=1}^{x-1} T(N-y)(beta - eta_y)
/// ```
///
/// The defining double sum over the extended configuration agrees with
/// this after the reservoir-to-reservoir mass cancels.
pub fn current_w(config: &Configuration, law: &JumpLaw, x: usize) -> Result<f64> {
    let n = config.n();
    if x < 1 || x > n {
        return Err(Error::SiteOutOfRange { x, n });
    }
    let mut w = 0.0;
    for y in 1..x {
        for z in x..n {
            w += law.p((z - y) as i64) * (config.get(y) as f64 - config.get(z) as f64);
        }
    }
    for z in x..n {
        w += law.tail(z) * (config.alpha() - config.get(z) as f64);
    }
    for y in 1..x {
        w -= law.tail(n - y) * (config.beta() - config.get(y) as f64);
    }
    Ok(w)
}

/// `W_1` specialization, O(N).
pub fn w1(config: &Configuration, law: &JumpLaw) -> f64 {
    (1..config.n())
        .map(|z| law.tail(z) * (config.alpha() - config.get(z) as f64))
        .sum()
}

/// Site-weight view of the empirical measures `pi^N` and `pi_hat^N`.
pub struct EmpiricalMeasures {
    n: usize,
    occ: Vec<f64>,
}

impl EmpiricalMeasures {
    pub fn new(config: &Configuration) -> Self {
        Self {
            n: config.n(),
            occ: (1..config.n()).map(|z| config.get(z) as f64).collect(),
        }
    }

    /// Total mass of `pi^N`, in [0, 1].
    pub fn mass(&self) -> f64 {
        self.occ.iter().sum::<f64>() / (self.n as f64 - 1.0)
    }

    /// `<pi^N, H> = (N-1)^{-1} sum_x eta_x H(x/N)`.
    pub fn pi_action<H: Fn(f64) -> f64>(&self, h: H) -> f64 {
        self.occ
            .iter()
            .enumerate()
            .map(|(i, &e)| e * h((i + 1) as f64 / self.n as f64))
            .sum::<f64>()
            / (self.n as f64 - 1.0)
    }

    /// `<pi_hat^N, J> = (N-1)^{-2} sum_{x,y} eta_x eta_y J(x/N, y/N)`,
    /// materialized against the test function on demand (the diagonal is
    /// included, as in the definition).
    pub fn pi_hat_action<J: Fn(f64, f64) -> f64>(&self, j: J) -> f64 {
        let nf = self.n as f64;
        let mut acc = 0.0;
        for (i, &ei) in self.occ.iter().enumerate() {
            if ei == 0.0 {
                continue;
            }
            for (k, &ek) in self.occ.iter().enumerate() {
                if ek != 0.0 {
                    acc += j((i + 1) as f64 / nf, (k + 1) as f64 / nf);
                }
            }
        }
        acc / ((nf - 1.0) * (nf - 1.0))
    }
}

/// The discrete Fick decomposition function
///
/// ```text
/// phi_N(z/N) = -(z/N) N^gamma T(z) + (1 - 1/N - z/N) N^gamma T(N-z)
///            + N^{gamma-1} (Tm(z) - Tm(N-z))
/// ```
///
/// returned for `z = 1..=N-1` (`Tm` the first-moment tail).
pub fn phi_n_table(law: &JumpLaw, n: usize) -> Result<Vec<f64>> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("N = {n} below minimum 4")));
    }
    let gamma = law.gamma();
    let nf = n as f64;
    let n_gamma = nf.powf(gamma);
    Ok((1..n)
        .map(|z| {
            let q = z as f64 / nf;
            -q * n_gamma * law.tail(z)
                + (1.0 - 1.0 / nf - q) * n_gamma * law.tail(n - z)
                + n_gamma / nf * (law.moment_tail(z) - law.moment_tail(n - z))
        })
        .collect())
}

/// Continuum limit `phi(q) = c_gamma/(gamma(1-gamma)) [(1-q)^{1-gamma} - q^{1-gamma}]`.
pub fn phi_limit(law: &JumpLaw, q: f64) -> f64 {
    let g = law.gamma();
    law.c_gamma() / (g * (1.0 - g)) * ((1.0 - q).powf(1.0 - g) - q.powf(1.0 - g))
}

/// `theta_N = alpha/(N-1) sum_z z T(z) - beta/(N-1) sum_w (w-1) T(w)`,
/// the reservoir part of the averaged-current decomposition, exact via
/// tail tables in O(N).
pub fn theta_n(law: &JumpLaw, n: usize, alpha: f64, beta: f64) -> Result<f64> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("N = {n} below minimum 4")));
    }
    let mut a = 0.0;
    let mut b = 0.0;
    for z in 1..n {
        a += z as f64 * law.tail(z);
        b += (z as f64 - 1.0) * law.tail(z);
    }
    Ok((alpha * a - beta * b) / (n as f64 - 1.0))
}

/// `lim N^{gamma-1} theta_N = c_gamma (alpha - beta) / (gamma (2 - gamma))`.
pub fn theta_limit(law: &JumpLaw, alpha: f64, beta: f64) -> f64 {
    let g = law.gamma();
    law.c_gamma() * (alpha - beta) / (g * (2.0 - g))
}
