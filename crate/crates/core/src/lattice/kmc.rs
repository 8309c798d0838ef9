//! Event-driven simulation of the process, exact in law.
//!
//! The pair part runs on pair clocks: a gap `k` is drawn from an alias
//! table with weight `(N-1-k) p(k)`, the position uniformly; a swap of
//! equal occupations is a no-op, which reproduces the half-symmetrized
//! generator exactly with a configuration-independent total rate.
//! Reservoir flips are thinned against the bound 1 on
//! `eta(1-rho) + (1-eta)rho`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AliasTable, Configuration};
use crate::error::{Error, Result};
use crate::jumplaw::JumpLaw;

/// Precomputed sampling structures; valid for one `(N, alpha, beta, law)`.
#[derive(Debug, Clone)]
pub struct RateCatalog {
    n: usize,
    alpha: f64,
    beta: f64,
    /// gap k = index + 1, weight (N-1-k) p(k)
    gap_sampler: AliasTable,
    pair_total: f64,
    /// site z = index + 1, weight r_N^-(z/N) + r_N^+(z/N)
    flip_site_sampler: AliasTable,
    flip_left: Vec<f64>,
    flip_right: Vec<f64>,
    flip_bound_total: f64,
    grand_total: f64,
}

impl RateCatalog {
    pub fn new(law: &JumpLaw, n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "N = {n} too small for the pair-clock catalog (need N >= 3)"
            )));
        }
        let gap_weights: Vec<f64> = (1..=n - 2)
            .map(|k| (n - 1 - k) as f64 * law.p(k as i64))
            .collect();
        let gap_sampler = AliasTable::new(&gap_weights);
        let pair_total = gap_sampler.total();

        let flip_left: Vec<f64> = (1..n).map(|z| law.tail(z)).collect();
        let flip_right: Vec<f64> = (1..n).map(|z| law.tail(n - z)).collect();
        let site_weights: Vec<f64> = (0..n - 1).map(|i| flip_left[i] + flip_right[i]).collect();
        let flip_site_sampler = AliasTable::new(&site_weights);
        let flip_bound_total = flip_site_sampler.total();

        Ok(Self {
            n,
            alpha,
            beta,
            gap_sampler,
            pair_total,
            flip_site_sampler,
            flip_left,
            flip_right,
            flip_bound_total,
            grand_total: pair_total + flip_bound_total,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pair_total_rate(&self) -> f64 {
        self.pair_total
    }

    pub fn flip_bound_total(&self) -> f64 {
        self.flip_bound_total
    }

    pub fn grand_total(&self) -> f64 {
        self.grand_total
    }

    /// Burn-in heuristic `10 N^2 / pair_total_rate`; nothing in the theory
    /// pins down mixing constants, so runs record this choice in their
    /// manifests and the autocorrelation diagnostic guards it.
    pub fn default_burn_in(&self) -> f64 {
        10.0 * (self.n as f64).powi(2) / self.pair_total
    }

    fn matches(&self, config: &Configuration) -> bool {
        self.n == config.n() && self.alpha == config.alpha() && self.beta == config.beta()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reservoir {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    /// attempted exchange of sites x < y
    Pair { x: usize, y: usize },
    /// attempted flip at z driven by one reservoir
    Flip { z: usize, reservoir: Reservoir },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub dt: f64,
    pub kind: EventKind,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounters {
    pub pair_accepted: u64,
    pub pair_rejected: u64,
    pub flip_accepted: u64,
    pub flip_rejected: u64,
    /// RNG stream position at checkpoint time, for exact resumption
    pub rng_word_pos: u64,
}

impl EventCounters {
    pub fn total(&self) -> u64 {
        self.pair_accepted + self.pair_rejected + self.flip_accepted + self.flip_rejected
    }
}

/// One trajectory: configuration, clock, its own RNG stream, counters.
/// Confined to a single thread; replicas differ by RNG stream id.
pub struct TrajectoryState {
    config: Configuration,
    clock: f64,
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
    counters: EventCounters,
}

impl TrajectoryState {
    pub fn new(config: Configuration, seed: u64) -> Self {
        Self::with_stream(config, seed, 0)
    }

    /// Replica streams: same seed, distinct counter-mode stream ids.
    pub fn with_stream(config: Configuration, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            config,
            clock: 0.0,
            rng,
            seed,
            stream,
            counters: EventCounters::default(),
        }
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn counters(&self) -> &EventCounters {
        &self.counters
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draw the holding time and the next event, advance the clock, but do
    /// not touch the configuration yet. The acceptance decision is made
    /// here (it depends on the pre-event configuration).
    pub fn sample_event(&mut self, catalog: &RateCatalog) -> EventRecord {
        debug_assert!(catalog.matches(&self.config), "catalog/config mismatch");
        let u: f64 = self.rng.gen();
        let dt = -(1.0 - u).ln() / catalog.grand_total;
        self.clock += dt;

        if self.rng.gen::<f64>() * catalog.grand_total < catalog.pair_total {
            let k = catalog.gap_sampler.sample(&mut self.rng) + 1;
            let x = self.rng.gen_range(1..=catalog.n - 1 - k);
            let y = x + k;
            let accepted = self.config.get(x) != self.config.get(y);
            EventRecord {
                dt,
                kind: EventKind::Pair { x, y },
                accepted,
            }
        } else {
            let z = catalog.flip_site_sampler.sample(&mut self.rng) + 1;
            let left_w = catalog.flip_left[z - 1];
            let right_w = catalog.flip_right[z - 1];
            let reservoir = if self.rng.gen::<f64>() * (left_w + right_w) < left_w {
                Reservoir::Left
            } else {
                Reservoir::Right
            };
            let rho = match reservoir {
                Reservoir::Left => catalog.alpha,
                Reservoir::Right => catalog.beta,
            };
            let eta = self.config.get(z) as f64;
            let accept_prob = eta * (1.0 - rho) + (1.0 - eta) * rho;
            let accepted = self.rng.gen::<f64>() < accept_prob;
            EventRecord {
                dt,
                kind: EventKind::Flip { z, reservoir },
                accepted,
            }
        }
    }

    /// Apply a sampled event to the configuration and bump the counters.
    pub fn apply_event(&mut self, ev: &EventRecord) {
        match (ev.kind, ev.accepted) {
            (EventKind::Pair { x, y }, true) => {
                self.config.swap(x, y);
                self.counters.pair_accepted += 1;
            }
            (EventKind::Pair { .. }, false) => self.counters.pair_rejected += 1,
            (EventKind::Flip { z, .. }, true) => {
                self.config.flip(z);
                self.counters.flip_accepted += 1;
            }
            (EventKind::Flip { .. }, false) => self.counters.flip_rejected += 1,
        }
    }

    pub fn checkpoint(&mut self, gamma: f64) -> Result<TrajectoryCheckpoint> {
        let pos = self.rng.get_word_pos();
        let rng_word_pos = u64::try_from(pos)
            .map_err(|_| Error::InvalidParameter("RNG position exceeds u64".into()))?;
        let mut counters = self.counters.clone();
        counters.rng_word_pos = rng_word_pos;
        Ok(TrajectoryCheckpoint {
            n: self.config.n(),
            gamma,
            alpha: self.config.alpha(),
            beta: self.config.beta(),
            seed: self.seed,
            stream: self.stream,
            clock: self.clock,
            occupancy_hex: self.config.occupancy_hex(),
            counters,
        })
    }

    pub fn from_checkpoint(cp: &TrajectoryCheckpoint) -> Result<Self> {
        let config = Configuration::from_occupancy_hex(cp.n, &cp.occupancy_hex, cp.alpha, cp.beta)?;
        let mut state = Self::with_stream(config, cp.seed, cp.stream);
        state.rng.set_word_pos(cp.counters.rng_word_pos as u128);
        state.clock = cp.clock;
        state.counters = cp.counters.clone();
        Ok(state)
    }
}

/// JSON-serialized trajectory snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryCheckpoint {
    pub n: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub stream: u64,
    pub clock: f64,
    pub occupancy_hex: String,
    pub counters: EventCounters,
}

/// Advance one event: sample, apply, return the record.
pub fn kmc_step(state: &mut TrajectoryState, catalog: &RateCatalog) -> EventRecord {
    let ev = state.sample_event(catalog);
    state.apply_event(&ev);
    ev
}

/// Receives the exact piecewise-constant trajectory during measurement:
/// each event delivers the time weight spent in the pre-event
/// configuration (clipped at the measurement horizon).
pub trait Observer {
    /// Called once at the start of the measurement window.
    fn begin(&mut self, config: &Configuration);
    /// `weight` is the (possibly clipped) holding time of `config_before`.
    fn record(&mut self, weight: f64, config_before: &Configuration, event: &EventRecord);
    /// Called once after the horizon is reached.
    fn end(&mut self, _config: &Configuration) {}
}

/// Burn in for `t_burn`, then measure for exactly `t_measure` of process
/// time, streaming exact time weights to the observers. Deterministic
/// given the state's seed and stream.
pub fn run_trajectory(
    state: &mut TrajectoryState,
    catalog: &RateCatalog,
    t_burn: f64,
    t_measure: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<()> {
    if t_burn < 0.0 || t_measure < 0.0 {
        return Err(Error::InvalidParameter(
            "negative burn-in or measurement time".into(),
        ));
    }
    let burn_end = state.clock + t_burn;
    while state.clock < burn_end {
        kmc_step(state, catalog);
    }
    for obs in observers.iter_mut() {
        obs.begin(&state.config);
    }
    let measure_end = state.clock + t_measure;
    while state.clock < measure_end {
        let pre_clock = state.clock;
        let ev = state.sample_event(catalog);
        let weight = ev.dt.min(measure_end - pre_clock);
        for obs in observers.iter_mut() {
            obs.record(weight, &state.config, &ev);
        }
        state.apply_event(&ev);
    }
    for obs in observers.iter_mut() {
        obs.end(&state.config);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> JumpLaw {
        JumpLaw::new(1.5, 1 << 12).unwrap()
    }

    #[test]
    fn pair_total_matches_double_sum() {
        let law = law();
        for n in [3usize, 8, 33, 100] {
            let cat = RateCatalog::new(&law, n, 0.2, 0.8).unwrap();
            let mut direct = 0.0;
            for x in 1..n {
                for y in (x + 1)..n {
                    direct += law.p((y - x) as i64);
                }
            }
            assert!(
                (cat.pair_total_rate() - direct).abs() < 1e-12,
                "N = {n}: {} vs {direct}",
                cat.pair_total_rate()
            );
        }
    }

    #[test]
    fn channel_frequencies_chi_square() {
        // three coarse channels: pair, left flip, right flip
        let law = law();
        let n = 8;
        let cat = RateCatalog::new(&law, n, 0.2, 0.8).unwrap();
        let cfg = Configuration::new(n, 0.2, 0.8).unwrap();
        let mut state = TrajectoryState::new(cfg, 99);
        let steps = 1_000_000usize;
        let mut counts = [0u64; 3];
        for _ in 0..steps {
            match kmc_step(&mut state, &cat).kind {
                EventKind::Pair { .. } => counts[0] += 1,
                EventKind::Flip { reservoir: Reservoir::Left, .. } => counts[1] += 1,
                EventKind::Flip { reservoir: Reservoir::Right, .. } => counts[2] += 1,
            }
        }
        let left_total: f64 = cat.flip_left.iter().sum();
        let right_total: f64 = cat.flip_right.iter().sum();
        let probs = [
            cat.pair_total_rate() / cat.grand_total(),
            left_total / cat.grand_total(),
            right_total / cat.grand_total(),
        ];
        let mut chi2 = 0.0;
        for (c, p) in counts.iter().zip(probs) {
            let e = p * steps as f64;
            chi2 += (*c as f64 - e).powi(2) / e;
        }
        let dist = statrs::distribution::ChiSquared::new(2.0).unwrap();
        let p = 1.0 - statrs::distribution::ContinuousCDF::cdf(&dist, chi2);
        assert!(p > 0.001, "chi2 = {chi2}, p = {p}");
    }

    #[test]
    fn holding_times_have_the_right_mean() {
        let law = law();
        let cat = RateCatalog::new(&law, 16, 0.2, 0.8).unwrap();
        let cfg = Configuration::new(16, 0.2, 0.8).unwrap();
        let mut state = TrajectoryState::new(cfg, 5);
        let steps = 200_000;
        for _ in 0..steps {
            kmc_step(&mut state, &cat);
        }
        let mean_dt = state.clock() / steps as f64;
        let expect = 1.0 / cat.grand_total();
        // CLT: relative error ~ 1/sqrt(steps)
        assert!((mean_dt / expect - 1.0).abs() < 0.01);
    }

    #[test]
    fn unit_reservoirs_full_system_invariant() {
        let law = law();
        let n = 8;
        let cat = RateCatalog::new(&law, n, 1.0, 1.0).unwrap();
        let cfg = Configuration::from_occupancy(vec![1; n - 1], 1.0, 1.0).unwrap();
        let mut state = TrajectoryState::new(cfg.clone(), 17);
        for _ in 0..10_000 {
            kmc_step(&mut state, &cat);
        }
        assert_eq!(state.config(), &cfg);
        // vacating an occupied site against a unit-density reservoir has
        // thinning probability 0, so no flip is ever accepted
        assert_eq!(state.counters().flip_accepted, 0);
    }

    #[test]
    fn equilibrium_density_matches_reservoirs() {
        let law = law();
        let n = 16;
        let rho = 0.4;
        let cat = RateCatalog::new(&law, n, rho, rho).unwrap();
        let cfg = Configuration::new(n, rho, rho).unwrap();
        let mut state = TrajectoryState::new(cfg, 23);

        struct DensityAvg {
            sum: f64,
            time: f64,
            count: usize,
        }
        impl Observer for DensityAvg {
            fn begin(&mut self, config: &Configuration) {
                self.count = config.particle_count();
            }
            fn record(&mut self, w: f64, config: &Configuration, ev: &EventRecord) {
                self.sum += w * self.count as f64 / config.num_sites() as f64;
                self.time += w;
                if let (EventKind::Flip { z, .. }, true) = (ev.kind, ev.accepted) {
                    if config.get(z) == 1 {
                        self.count -= 1;
                    } else {
                        self.count += 1;
                    }
                }
            }
        }
        let mut obs = DensityAvg { sum: 0.0, time: 0.0, count: 0 };
        run_trajectory(
            &mut state,
            &cat,
            cat.default_burn_in(),
            4000.0,
            &mut [&mut obs],
        )
        .unwrap();
        assert!((obs.time - 4000.0).abs() < 1e-9);
        assert!(
            (obs.sum / obs.time - rho).abs() < 0.02,
            "mean density {}",
            obs.sum / obs.time
        );
    }

    #[test]
    fn determinism_and_checkpoint_resume() {
        let law = law();
        let n = 12;
        let cat = RateCatalog::new(&law, n, 0.2, 0.8).unwrap();
        let cfg = Configuration::new(n, 0.2, 0.8).unwrap();

        // two fresh states, same seed: identical
        let mut a = TrajectoryState::new(cfg.clone(), 777);
        let mut b = TrajectoryState::new(cfg.clone(), 777);
        for _ in 0..10_000 {
            kmc_step(&mut a, &cat);
            kmc_step(&mut b, &cat);
        }
        assert_eq!(a.config(), b.config());
        assert_eq!(a.clock(), b.clock());
        assert_eq!(a.counters().total(), b.counters().total());

        // checkpoint at half-way, resume, must rejoin the same path
        let mut c = TrajectoryState::new(cfg.clone(), 31);
        let mut d = TrajectoryState::new(cfg, 31);
        for _ in 0..5_000 {
            kmc_step(&mut c, &cat);
            kmc_step(&mut d, &cat);
        }
        let json = serde_json::to_string(&d.checkpoint(1.5).unwrap()).unwrap();
        let cp: TrajectoryCheckpoint = serde_json::from_str(&json).unwrap();
        let mut d = TrajectoryState::from_checkpoint(&cp).unwrap();
        for _ in 0..5_000 {
            kmc_step(&mut c, &cat);
            kmc_step(&mut d, &cat);
        }
        let cp_c = c.checkpoint(1.5).unwrap();
        let cp_d = d.checkpoint(1.5).unwrap();
        assert_eq!(
            serde_json::to_string(&cp_c).unwrap(),
            serde_json::to_string(&cp_d).unwrap()
        );
    }

    #[test]
    fn distinct_streams_diverge() {
        let law = law();
        let cat = RateCatalog::new(&law, 12, 0.2, 0.8).unwrap();
        let cfg = Configuration::new(12, 0.2, 0.8).unwrap();
        let mut a = TrajectoryState::with_stream(cfg.clone(), 1, 0);
        let mut b = TrajectoryState::with_stream(cfg, 1, 1);
        for _ in 0..1000 {
            kmc_step(&mut a, &cat);
            kmc_step(&mut b, &cat);
        }
        assert_ne!(a.clock(), b.clock());
    }

    #[test]
    fn rejects_negative_times() {
        let law = law();
        let cat = RateCatalog::new(&law, 8, 0.2, 0.8).unwrap();
        let cfg = Configuration::new(8, 0.2, 0.8).unwrap();
        let mut state = TrajectoryState::new(cfg, 1);
        assert!(run_trajectory(&mut state, &cat, -1.0, 1.0, &mut []).is_err());
    }
}
