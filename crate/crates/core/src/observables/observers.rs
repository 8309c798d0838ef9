//! Trajectory observers: O(1) incremental functionals with periodic
//! resynchronization, per-site profiles, and the event-flux cross-check.

use super::estimate::{BatchAccumulator, RunEstimate, DEFAULT_BATCHES, MIN_VALID_BATCHES};
use crate::jumplaw::JumpLaw;
use crate::lattice::{Configuration, EventKind, EventRecord, Observer, Reservoir};

/// Events between full recomputations of incremental functionals.
pub const RESYNC_EVERY: u64 = 100_000;

/// A scalar configuration functional that can be evaluated from scratch
/// and updated in O(1) from an event.
pub trait ConfigFunctional {
    fn evaluate(&mut self, config: &Configuration) -> f64;
    /// Change caused by `ev` given the pre-event configuration.
    fn delta(&mut self, config_before: &Configuration, ev: &EventRecord) -> f64;
}

/// `W_1(eta) = sum_z T(z)(alpha - eta_z)`, updated incrementally:
/// swap x<->y contributes `(eta_x - eta_y)(T(x) - T(y))`, a flip at z
/// contributes `-T(z)` (0 -> 1) or `+T(z)` (1 -> 0).
pub struct W1Functional {
    tails: Vec<f64>,
}

impl W1Functional {
    pub fn new(law: &JumpLaw, n: usize) -> Self {
        Self {
            tails: (1..n).map(|z| law.tail(z)).collect(),
        }
    }

    fn t(&self, z: usize) -> f64 {
        self.tails[z - 1]
    }
}

impl ConfigFunctional for W1Functional {
    fn evaluate(&mut self, config: &Configuration) -> f64 {
        (1..config.n())
            .map(|z| self.t(z) * (config.alpha() - config.get(z) as f64))
            .sum()
    }

    fn delta(&mut self, config: &Configuration, ev: &EventRecord) -> f64 {
        if !ev.accepted {
            return 0.0;
        }
        match ev.kind {
            EventKind::Pair { x, y } => {
                (config.get(x) as f64 - config.get(y) as f64) * (self.t(x) - self.t(y))
            }
            EventKind::Flip { z, .. } => {
                if config.get(z) == 0 {
                    -self.t(z)
                } else {
                    self.t(z)
                }
            }
        }
    }
}

/// `<pi^N, H> = (N-1)^{-1} sum_x eta_x H(x/N)`.
pub struct TestFunctionFunctional {
    h: Vec<f64>,
    norm: f64,
}

impl TestFunctionFunctional {
    pub fn new<H: Fn(f64) -> f64>(h: H, n: usize) -> Self {
        Self {
            h: (1..n).map(|z| h(z as f64 / n as f64)).collect(),
            norm: 1.0 / (n as f64 - 1.0),
        }
    }
}

impl ConfigFunctional for TestFunctionFunctional {
    fn evaluate(&mut self, config: &Configuration) -> f64 {
        self.norm
            * (1..config.n())
                .map(|z| config.get(z) as f64 * self.h[z - 1])
                .sum::<f64>()
    }

    fn delta(&mut self, config: &Configuration, ev: &EventRecord) -> f64 {
        if !ev.accepted {
            return 0.0;
        }
        self.norm
            * match ev.kind {
                EventKind::Pair { x, y } => {
                    (config.get(x) as f64 - config.get(y) as f64)
                        * (self.h[y - 1] - self.h[x - 1])
                }
                EventKind::Flip { z, .. } => {
                    if config.get(z) == 0 {
                        self.h[z - 1]
                    } else {
                        -self.h[z - 1]
                    }
                }
            }
    }
}

/// `<pi_hat^N, H (x) G> = S_H S_G / (N-1)^2` with `S_H = sum eta_x H(x/N)`;
/// the two partial sums are carried along so the product updates in O(1).
pub struct PairProductFunctional {
    h: Vec<f64>,
    g: Vec<f64>,
    s_h: f64,
    s_g: f64,
    norm: f64,
}

impl PairProductFunctional {
    pub fn new<H: Fn(f64) -> f64, G: Fn(f64) -> f64>(h: H, g: G, n: usize) -> Self {
        Self {
            h: (1..n).map(|z| h(z as f64 / n as f64)).collect(),
            g: (1..n).map(|z| g(z as f64 / n as f64)).collect(),
            s_h: 0.0,
            s_g: 0.0,
            norm: 1.0 / ((n as f64 - 1.0) * (n as f64 - 1.0)),
        }
    }
}

impl ConfigFunctional for PairProductFunctional {
    fn evaluate(&mut self, config: &Configuration) -> f64 {
        self.s_h = (1..config.n())
            .map(|z| config.get(z) as f64 * self.h[z - 1])
            .sum();
        self.s_g = (1..config.n())
            .map(|z| config.get(z) as f64 * self.g[z - 1])
            .sum();
        self.norm * self.s_h * self.s_g
    }

    fn delta(&mut self, config: &Configuration, ev: &EventRecord) -> f64 {
        if !ev.accepted {
            return 0.0;
        }
        let old = self.s_h * self.s_g;
        match ev.kind {
            EventKind::Pair { x, y } => {
                let d = config.get(x) as f64 - config.get(y) as f64;
                self.s_h += d * (self.h[y - 1] - self.h[x - 1]);
                self.s_g += d * (self.g[y - 1] - self.g[x - 1]);
            }
            EventKind::Flip { z, .. } => {
                let s = if config.get(z) == 0 { 1.0 } else { -1.0 };
                self.s_h += s * self.h[z - 1];
                self.s_g += s * self.g[z - 1];
            }
        }
        self.norm * (self.s_h * self.s_g - old)
    }
}

/// Time-averages one scalar functional with batch means, resyncing the
/// incremental value against a full recomputation every [`RESYNC_EVERY`]
/// events and tracking the worst drift seen.
pub struct ScalarObserver<F: ConfigFunctional> {
    name: String,
    functional: F,
    value: f64,
    acc: BatchAccumulator,
    events: u64,
    max_drift: f64,
    replica: u64,
}

impl<F: ConfigFunctional> ScalarObserver<F> {
    pub fn new(name: &str, functional: F, t_measure: f64, replica: u64) -> Self {
        Self {
            name: name.to_string(),
            functional,
            value: 0.0,
            acc: BatchAccumulator::new(t_measure, DEFAULT_BATCHES),
            events: 0,
            max_drift: 0.0,
            replica,
        }
    }

    pub fn estimate(&self) -> RunEstimate {
        self.acc.finish(&self.name, self.replica)
    }

    /// Worst |incremental - recomputed| seen at resync points.
    pub fn max_drift(&self) -> f64 {
        self.max_drift
    }
}

impl<F: ConfigFunctional> Observer for ScalarObserver<F> {
    fn begin(&mut self, config: &Configuration) {
        self.value = self.functional.evaluate(config);
    }

    fn record(&mut self, weight: f64, config: &Configuration, ev: &EventRecord) {
        self.events += 1;
        if self.events % RESYNC_EVERY == 0 {
            let fresh = self.functional.evaluate(config);
            self.max_drift = self.max_drift.max((fresh - self.value).abs());
            self.value = fresh;
        }
        self.acc.add(weight, self.value);
        self.value += self.functional.delta(config, ev);
    }
}

/// Per-site time averages `<eta_z>` with batch means. Sites are closed out
/// lazily: only sites touched by an event cost work, plus an O(N) sweep at
/// each batch boundary.
pub struct ProfileObserver {
    n: usize,
    batch_len: f64,
    tau: f64,
    batch_idx: usize,
    val: Vec<f64>,
    t0: Vec<f64>,
    cur: Vec<f64>,
    batch_means: Vec<Vec<f64>>,
    replica: u64,
}

impl ProfileObserver {
    pub fn new(n: usize, t_measure: f64, replica: u64) -> Self {
        Self {
            n,
            batch_len: t_measure / DEFAULT_BATCHES as f64,
            tau: 0.0,
            batch_idx: 0,
            val: vec![0.0; n - 1],
            t0: vec![0.0; n - 1],
            cur: vec![0.0; n - 1],
            batch_means: Vec::new(),
            replica,
        }
    }

    fn close_batch(&mut self) {
        let be = self.batch_len * (self.batch_idx + 1) as f64;
        for i in 0..self.n - 1 {
            self.cur[i] += self.val[i] * (be - self.t0[i]);
            self.t0[i] = be;
        }
        let means: Vec<f64> = self.cur.iter().map(|s| s / self.batch_len).collect();
        self.batch_means.push(means);
        self.cur.iter_mut().for_each(|s| *s = 0.0);
        self.batch_idx += 1;
    }

    fn touch(&mut self, z: usize, new_val: f64, at: f64) {
        let i = z - 1;
        self.cur[i] += self.val[i] * (at - self.t0[i]);
        self.t0[i] = at;
        self.val[i] = new_val;
    }

    /// Per-site estimates, site order 1..=N-1.
    pub fn estimates(&self) -> Vec<RunEstimate> {
        let b = self.batch_means.len();
        (0..self.n - 1)
            .map(|i| {
                let means: Vec<f64> = self.batch_means.iter().map(|m| m[i]).collect();
                let mean = means.iter().sum::<f64>() / b as f64;
                let var =
                    means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b as f64 - 1.0);
                RunEstimate {
                    name: format!("eta_{}", i + 1),
                    mean,
                    stderr: (var / b as f64).sqrt(),
                    total_time: self.batch_len * b as f64,
                    batches: b,
                    replica: self.replica,
                    valid: b >= MIN_VALID_BATCHES && self.batch_len > 0.0,
                }
            })
            .collect()
    }

    /// Raw batch matrix, `[batch][site]`.
    pub fn batch_matrix(&self) -> &[Vec<f64>] {
        &self.batch_means
    }
}

impl Observer for ProfileObserver {
    fn begin(&mut self, config: &Configuration) {
        for z in 1..self.n {
            self.val[z - 1] = config.get(z) as f64;
        }
    }

    fn record(&mut self, weight: f64, config: &Configuration, ev: &EventRecord) {
        let t_ev = self.tau + weight;
        while self.batch_idx < DEFAULT_BATCHES
            && t_ev >= self.batch_len * (self.batch_idx + 1) as f64 - 1e-12 * self.batch_len
        {
            self.close_batch();
        }
        self.tau = t_ev;
        if ev.accepted {
            match ev.kind {
                EventKind::Pair { x, y } => {
                    let ex = config.get(x) as f64;
                    let ey = config.get(y) as f64;
                    self.touch(x, ey, t_ev);
                    self.touch(y, ex, t_ev);
                }
                EventKind::Flip { z, .. } => {
                    let e = config.get(z) as f64;
                    self.touch(z, 1.0 - e, t_ev);
                }
            }
        }
    }

    fn end(&mut self, _config: &Configuration) {
        // rounding can leave the final boundary un-crossed
        while self.batch_idx < DEFAULT_BATCHES && self.batch_len > 0.0 {
            self.close_batch();
        }
    }
}

/// Independent current estimator: the net signed particle flux from the
/// left reservoir, counted event by event. Every accepted left-reservoir
/// flip crosses the bond 1/2, with sign +1 for an injection. Its rate
/// estimates `<W_1>` with the same sign convention.
pub struct FluxObserver {
    batch_len: f64,
    tau: f64,
    counts: Vec<f64>,
    replica: u64,
}

impl FluxObserver {
    pub fn new(t_measure: f64, replica: u64) -> Self {
        Self {
            batch_len: t_measure / DEFAULT_BATCHES as f64,
            tau: 0.0,
            counts: vec![0.0; DEFAULT_BATCHES],
            replica,
        }
    }

    pub fn estimate(&self) -> RunEstimate {
        let b = self.counts.len();
        let rates: Vec<f64> = self.counts.iter().map(|c| c / self.batch_len).collect();
        let mean = rates.iter().sum::<f64>() / b as f64;
        let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (b as f64 - 1.0);
        RunEstimate {
            name: "W1_flux".to_string(),
            mean,
            stderr: (var / b as f64).sqrt(),
            total_time: self.batch_len * b as f64,
            batches: b,
            replica: self.replica,
            valid: b >= MIN_VALID_BATCHES && self.batch_len > 0.0,
        }
    }
}

impl Observer for FluxObserver {
    fn begin(&mut self, _config: &Configuration) {}

    fn record(&mut self, weight: f64, config: &Configuration, ev: &EventRecord) {
        self.tau += weight;
        if let (EventKind::Flip { z, reservoir: Reservoir::Left }, true) = (ev.kind, ev.accepted) {
            let idx = ((self.tau / self.batch_len) as usize).min(self.counts.len() - 1);
            self.counts[idx] += if config.get(z) == 0 { 1.0 } else { -1.0 };
        }
    }
}
