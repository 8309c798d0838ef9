//! Lattice configurations and the process generator, both as an exact
//! small-N dense object and as an event-driven simulator that is exact in
//! law.
//!
//! Sites live on `Lambda_N = {1, .., N-1}`. The boundary extension
//! `eta_z = alpha` for `z <= 0`, `eta_z = beta` for `z >= N` is applied in
//! formulas only, never materialized.

mod alias;
mod exact;
mod kmc;

pub use alias::AliasTable;
pub use exact::{build_exact_generator, ExactGenerator, StationaryDistribution, N_EXACT_MAX};
pub use kmc::{
    kmc_step, run_trajectory, EventCounters, EventKind, EventRecord, Observer, RateCatalog,
    Reservoir, TrajectoryCheckpoint, TrajectoryState,
};

use crate::error::{Error, Result};
use crate::jumplaw::JumpLaw;

/// Occupation state of `Lambda_N` plus the reservoir densities.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    n: usize,
    /// `occ[z-1]` is `eta_z` for `z = 1..=N-1`.
    occ: Vec<u8>,
    alpha: f64,
    beta: f64,
}

impl Configuration {
    /// Empty configuration. Reservoir densities live in [0, 1]; the
    /// degenerate endpoints are allowed here (they make useful absorbing
    /// test cases), experiment configs restrict to the open interval.
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("N = {n} below minimum 2")));
        }
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} not in [0, 1]")));
            }
        }
        Ok(Self {
            n,
            occ: vec![0; n - 1],
            alpha,
            beta,
        })
    }

    pub fn from_occupancy(occ: Vec<u8>, alpha: f64, beta: f64) -> Result<Self> {
        let mut c = Self::new(occ.len() + 1, alpha, beta)?;
        if occ.iter().any(|&o| o > 1) {
            return Err(Error::InvalidParameter("occupancies must be 0/1".into()));
        }
        c.occ = occ;
        Ok(c)
    }

    /// Decode a state index: bit `z-1` of `state` is `eta_z`.
    pub fn from_state_index(n: usize, state: usize, alpha: f64, beta: f64) -> Result<Self> {
        let mut c = Self::new(n, alpha, beta)?;
        for z in 1..n {
            c.occ[z - 1] = ((state >> (z - 1)) & 1) as u8;
        }
        Ok(c)
    }

    pub fn state_index(&self) -> usize {
        self.occ
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &o)| acc | ((o as usize) << i))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn num_sites(&self) -> usize {
        self.n - 1
    }

    /// `eta_z` for an interior site `z` in `1..=N-1`.
    pub fn get(&self, z: usize) -> u8 {
        self.occ[z - 1]
    }

    pub fn set(&mut self, z: usize, v: u8) {
        debug_assert!(v <= 1);
        self.occ[z - 1] = v;
    }

    /// `eta_z` under the boundary extension: `alpha` left of the box,
    /// `beta` right of it.
    pub fn eta_ext(&self, z: i64) -> f64 {
        if z <= 0 {
            self.alpha
        } else if z >= self.n as i64 {
            self.beta
        } else {
            self.occ[(z - 1) as usize] as f64
        }
    }

    pub fn swap(&mut self, x: usize, y: usize) {
        self.occ.swap(x - 1, y - 1);
    }

    pub fn flip(&mut self, z: usize) {
        self.occ[z - 1] ^= 1;
    }

    pub fn particle_count(&self) -> usize {
        self.occ.iter().map(|&o| o as usize).sum()
    }

    /// Occupancy packed LSB-first into hex, site 1 = bit 0.
    pub fn occupancy_hex(&self) -> String {
        let mut bytes = vec![0u8; (self.occ.len() + 7) / 8];
        for (i, &o) in self.occ.iter().enumerate() {
            bytes[i / 8] |= o << (i % 8);
        }
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_occupancy_hex(n: usize, hex: &str, alpha: f64, beta: f64) -> Result<Self> {
        let expect = 2 * ((n - 1 + 7) / 8);
        if hex.len() != expect {
            return Err(Error::InvalidParameter(format!(
                "occupancy hex length {} does not match N = {n} (want {expect})",
                hex.len()
            )));
        }
        let mut c = Self::new(n, alpha, beta)?;
        for i in 0..n - 1 {
            let byte = u8::from_str_radix(&hex[2 * (i / 8)..2 * (i / 8) + 2], 16)
                .map_err(|e| Error::InvalidParameter(format!("bad occupancy hex: {e}")))?;
            c.occ[i] = (byte >> (i % 8)) & 1;
        }
        Ok(c)
    }
}

/// The three generator parts `(L_N^0 f, L_N^l f, L_N^r f)` evaluated at one
/// configuration by enumerating every single transition. O(N^2) pair terms
/// plus O(N) flips per call, meant for small systems and identity tests.
pub fn apply_generator_parts<F: Fn(&Configuration) -> f64>(
    config: &Configuration,
    law: &JumpLaw,
    f: F,
) -> (f64, f64, f64) {
    let n = config.n;
    let f0 = f(config);
    let mut scratch = config.clone();

    // pair exchanges, once per unordered pair (the half-symmetrized form)
    let mut l0 = 0.0;
    for x in 1..n {
        for y in (x + 1)..n {
            if scratch.get(x) == scratch.get(y) {
                continue; // f(eta^{xy}) = f(eta)
            }
            scratch.swap(x, y);
            l0 += law.p((y - x) as i64) * (f(&scratch) - f0);
            scratch.swap(x, y);
        }
    }

    // reservoir flips
    let mut ll = 0.0;
    let mut lr = 0.0;
    for z in 1..n {
        let eta = scratch.get(z) as f64;
        scratch.flip(z);
        let df = f(&scratch) - f0;
        scratch.flip(z);
        let left_rate = law.tail(z) * (eta * (1.0 - config.alpha) + (1.0 - eta) * config.alpha);
        let right_rate = law.tail(n - z) * (eta * (1.0 - config.beta) + (1.0 - eta) * config.beta);
        ll += left_rate * df;
        lr += right_rate * df;
    }
    (l0, ll, lr)
}

/// Full generator `L_N f = L_N^0 f + L_N^l f + L_N^r f` at one configuration.
pub fn apply_generator_to_function<F: Fn(&Configuration) -> f64>(
    config: &Configuration,
    law: &JumpLaw,
    f: F,
) -> f64 {
    let (l0, ll, lr) = apply_generator_parts(config, law, f);
    l0 + ll + lr
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_config(rng: &mut ChaCha8Rng, n: usize, alpha: f64, beta: f64) -> Configuration {
        let occ: Vec<u8> = (0..n - 1).map(|_| rng.gen_range(0..=1u8)).collect();
        Configuration::from_occupancy(occ, alpha, beta).unwrap()
    }

    #[test]
    fn construction_and_bounds() {
        assert!(Configuration::new(1, 0.5, 0.5).is_err());
        assert!(Configuration::new(8, -0.1, 0.5).is_err());
        assert!(Configuration::new(8, 0.5, 1.2).is_err());
        let c = Configuration::new(8, 0.2, 0.8).unwrap();
        assert_eq!(c.num_sites(), 7);
        assert_eq!(c.particle_count(), 0);
    }

    #[test]
    fn extension_convention() {
        let mut c = Configuration::new(6, 0.2, 0.8).unwrap();
        c.set(3, 1);
        assert_eq!(c.eta_ext(0), 0.2);
        assert_eq!(c.eta_ext(-5), 0.2);
        assert_eq!(c.eta_ext(6), 0.8);
        assert_eq!(c.eta_ext(100), 0.8);
        assert_eq!(c.eta_ext(3), 1.0);
        assert_eq!(c.eta_ext(2), 0.0);
    }

    #[test]
    fn hex_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 8, 9, 17, 64] {
            let c = random_config(&mut rng, n, 0.3, 0.7);
            let hex = c.occupancy_hex();
            let back = Configuration::from_occupancy_hex(n, &hex, 0.3, 0.7).unwrap();
            assert_eq!(c, back);
        }
        assert!(Configuration::from_occupancy_hex(8, "zz", 0.3, 0.7).is_err());
        assert!(Configuration::from_occupancy_hex(64, "00", 0.3, 0.7).is_err());
    }

    #[test]
    fn state_index_roundtrip() {
        for state in 0..(1usize << 5) {
            let c = Configuration::from_state_index(6, state, 0.2, 0.8).unwrap();
            assert_eq!(c.state_index(), state);
        }
    }

    #[test]
    fn generator_kills_constants() {
        let law = JumpLaw::new(1.5, 1 << 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let c = random_config(&mut rng, 9, 0.2, 0.8);
            let v = apply_generator_to_function(&c, &law, |_| 1.0);
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn full_system_with_unit_reservoirs_is_absorbing() {
        let law = JumpLaw::new(1.5, 1 << 12).unwrap();
        let c = Configuration::from_occupancy(vec![1; 7], 1.0, 1.0).unwrap();
        for x in 1..8usize {
            let v = apply_generator_to_function(&c, &law, |cfg| cfg.get(x) as f64);
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn generator_product_identities() {
        // pair part:  L0(eta_j eta_k) = eta_j L0 eta_k + eta_k L0 eta_j
        //                               - p(k-j)(eta_k - eta_j)^2
        // reservoirs: L(eta_j eta_k) = eta_j L eta_k + eta_k L eta_j
        let law = JumpLaw::new(1.5, 1 << 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 10usize;
        for _ in 0..1000 {
            let c = random_config(&mut rng, n, 0.2, 0.8);
            let j = rng.gen_range(1..n);
            let k = loop {
                let k = rng.gen_range(1..n);
                if k != j {
                    break k;
                }
            };
            let ej = c.get(j) as f64;
            let ek = c.get(k) as f64;
            let fj = |cfg: &Configuration| cfg.get(j) as f64;
            let fk = |cfg: &Configuration| cfg.get(k) as f64;
            let fjk = |cfg: &Configuration| (cfg.get(j) * cfg.get(k)) as f64;

            let (l0_jk, ll_jk, lr_jk) = apply_generator_parts(&c, &law, fjk);
            let (l0_j, ll_j, lr_j) = apply_generator_parts(&c, &law, fj);
            let (l0_k, ll_k, lr_k) = apply_generator_parts(&c, &law, fk);

            let rhs0 = ej * l0_k + ek * l0_j - law.p((k as i64) - (j as i64)) * (ek - ej).powi(2);
            assert!((l0_jk - rhs0).abs() < 1e-12, "pair identity");
            assert!((ll_jk - (ej * ll_k + ek * ll_j)).abs() < 1e-12, "left identity");
            assert!((lr_jk - (ej * lr_k + ek * lr_j)).abs() < 1e-12, "right identity");
        }
    }
}
