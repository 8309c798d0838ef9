//! Per-site tail tables on the lattice scale and the lattice operator
//! `K_N`, together with convergence diagnostics against the continuum
//! limits.

use super::JumpLaw;
use crate::error::{Error, Result};
use crate::jumplaw::frac_laplacian_1d;

/// Per-site tables of the reservoir tail rates `r_N^{+/-}(z/N)` and their
/// first-moment analogues, for `z = 0..=N` with the endpoint convention
/// that positions 0 and 1 copy the nearest interior value.
#[derive(Debug, Clone)]
pub struct DiscreteOperatorTable {
    n: usize,
    r_minus: Vec<f64>,
    r_plus: Vec<f64>,
    rt_minus: Vec<f64>,
    rt_plus: Vec<f64>,
}

impl DiscreteOperatorTable {
    pub fn new(law: &JumpLaw, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("N = {n} below minimum 2")));
        }
        let mut r_minus = vec![0.0; n + 1];
        let mut r_plus = vec![0.0; n + 1];
        let mut rt_minus = vec![0.0; n + 1];
        let mut rt_plus = vec![0.0; n + 1];
        for z in 1..n {
            r_minus[z] = law.tail(z);
            r_plus[z] = law.tail(n - z);
            rt_minus[z] = law.moment_tail(z);
            rt_plus[z] = law.moment_tail(n - z);
        }
        // endpoint convention: copy the nearest interior value
        r_minus[0] = r_minus[1];
        r_plus[0] = r_plus[1];
        rt_minus[0] = rt_minus[1];
        rt_plus[0] = rt_plus[1];
        r_minus[n] = r_minus[n - 1];
        r_plus[n] = r_plus[n - 1];
        rt_minus[n] = rt_minus[n - 1];
        rt_plus[n] = rt_plus[n - 1];
        Ok(Self {
            n,
            r_minus,
            r_plus,
            rt_minus,
            rt_plus,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `r_N^-(z/N) = sum_{y >= z} p(y)`, `z = 0..=N`.
    pub fn r_minus(&self, z: usize) -> f64 {
        self.r_minus[z]
    }

    /// `r_N^+(z/N) = sum_{y <= z-N} p(y)`.
    pub fn r_plus(&self, z: usize) -> f64 {
        self.r_plus[z]
    }

    /// Moment tail `sum_{y >= z} y p(y)`.
    pub fn rt_minus(&self, z: usize) -> f64 {
        self.rt_minus[z]
    }

    /// Moment tail `-sum_{y <= z-N} y p(y)`.
    pub fn rt_plus(&self, z: usize) -> f64 {
        self.rt_plus[z]
    }
}

/// Apply the full-lattice operator `K_N` to a sampled function at site `x`.
///
/// `f` holds samples at `z/N` for `z = 0..=N` and must vanish at both
/// endpoints (the evaluation identity `K_N = L_N - r_N^- - r_N^+` requires
/// compact support in (0, 1)).
pub fn apply_k_n(law: &JumpLaw, table: &DiscreteOperatorTable, f: &[f64], x: usize) -> Result<f64> {
    let n = table.n();
    if f.len() != n + 1 {
        return Err(Error::InvalidParameter(format!(
            "sample vector length {} does not match N = {n}",
            f.len()
        )));
    }
    if f[0] != 0.0 || f[n] != 0.0 {
        return Err(Error::NotCompactlySupported);
    }
    if x == 0 || x >= n {
        return Err(Error::SiteOutOfRange { x, n });
    }
    let mut l_n = 0.0;
    for y in 1..n {
        if y != x {
            l_n += law.p(y as i64 - x as i64) * (f[y] - f[x]);
        }
    }
    Ok(l_n - (table.r_minus(x) + table.r_plus(x)) * f[x])
}

/// One row of a convergence report.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n: usize,
    /// sup over `z/N` in `[a, 1-a]` of `|N^gamma r_N^-(q) - r^-(q)|`.
    pub sup_err_minus: f64,
    pub sup_err_plus: f64,
    /// worst ratio of that gap against the bound `c_gamma N^{-1} q^{-gamma-1}`.
    pub bound_ratio: f64,
    /// sup of `|N^gamma (K_N F)(q) + (-lap)^{gamma/2} F(q)|` on a bump.
    pub sup_err_k_n: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub gamma: f64,
    pub a: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// CSV with columns (N, sup_err_minus, sup_err_plus, bound_ratio, sup_err_K_N).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,sup_err_minus,sup_err_plus,bound_ratio,sup_err_K_N\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                r.n, r.sup_err_minus, r.sup_err_plus, r.bound_ratio, r.sup_err_k_n
            ));
        }
        out
    }
}

/// Smooth bump supported on `[a, 1-a]`, normalized to peak value 1.
pub(crate) fn bump(a: f64, q: f64) -> f64 {
    let t = (2.0 * q - 1.0) / (1.0 - 2.0 * a);
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Tail and operator convergence diagnostics over a list of system sizes.
///
/// For every `N` the sup over lattice points `q = z/N` in `[a, 1-a]` of the
/// tail-rate gaps is reported together with the worst ratio against the
/// per-point bound `c_gamma N^{-1} q^{-gamma-1}`, plus the sup gap of the
/// rescaled operator `N^gamma K_N` against minus the fractional Laplacian,
/// evaluated on a smooth bump supported in `[a, 1-a]`.
pub fn convergence_report(law: &JumpLaw, n_list: &[usize], a: f64) -> Result<ConvergenceReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("empty N list".into()));
    }
    if !(a > 0.0 && a < 0.5) {
        return Err(Error::InvalidParameter(format!("a = {a} not in (0, 1/2)")));
    }
    let min_n = *n_list.iter().min().expect("non-empty");
    if a < 2.0 / min_n as f64 {
        return Err(Error::InvalidParameter(format!(
            "a = {a} too small for N = {min_n}; need a >= 2/N"
        )));
    }
    let gamma = law.gamma();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let table = DiscreteOperatorTable::new(law, n)?;
        let nf = n as f64;
        let n_gamma = nf.powf(gamma);
        let mut sup_minus: f64 = 0.0;
        let mut sup_plus: f64 = 0.0;
        let mut worst_ratio: f64 = 0.0;
        for z in 1..n {
            let q = z as f64 / nf;
            if q < a || q > 1.0 - a {
                continue;
            }
            let gap_minus = (n_gamma * table.r_minus(z) - law.r_minus_limit(q)).abs();
            let gap_plus = (n_gamma * table.r_plus(z) - law.r_plus_limit(q)).abs();
            sup_minus = sup_minus.max(gap_minus);
            sup_plus = sup_plus.max(gap_plus);
            let bound = law.c_gamma() / nf * q.powf(-gamma - 1.0);
            worst_ratio = worst_ratio.max(gap_minus / bound);
        }

        // operator gap on the bump, probed on a lattice-aligned subgrid
        let samples: Vec<f64> = (0..=n).map(|z| bump(a, z as f64 / nf)).collect();
        let stride = (n / 256).max(1);
        let mut sup_k = 0.0f64;
        let mut z = 1;
        while z < n {
            let q = z as f64 / nf;
            if q >= a && q <= 1.0 - a {
                let kn = apply_k_n(law, &table, &samples, z)?;
                let flap = frac_laplacian_1d(law, |y| bump(a, y), (a, 1.0 - a), q, 1e-3);
                sup_k = sup_k.max((n_gamma * kn + flap).abs());
            }
            z += stride;
        }

        rows.push(ConvergenceRow {
            n,
            sup_err_minus: sup_minus,
            sup_err_plus: sup_plus,
            bound_ratio: worst_ratio,
            sup_err_k_n: sup_k,
        });
    }
    Ok(ConvergenceReport {
        gamma,
        a,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> JumpLaw {
        JumpLaw::new(1.5, 1 << 16).unwrap()
    }

    #[test]
    fn table_matches_tail_definitions() {
        let law = law();
        let t = DiscreteOperatorTable::new(&law, 100).unwrap();
        assert_eq!(t.r_minus(50), law.tail(50));
        assert_eq!(t.r_plus(50), law.tail(50)); // symmetry at midpoint
        assert_eq!(t.r_minus(1), law.tail(1));
        assert!((t.r_minus(1) - 0.5).abs() < 1e-13);
        // endpoint convention copies nearest interior
        assert_eq!(t.r_minus(0), t.r_minus(1));
        assert_eq!(t.r_plus(100), t.r_plus(99));
    }

    #[test]
    fn reflection_symmetry() {
        let law = law();
        let n = 64;
        let t = DiscreteOperatorTable::new(&law, n).unwrap();
        for z in 1..n {
            assert_eq!(t.r_minus(z), t.r_plus(n - z));
        }
    }

    #[test]
    fn k_n_kills_nothing_on_zero_and_rejects_support_violations() {
        let law = law();
        let n = 32;
        let t = DiscreteOperatorTable::new(&law, n).unwrap();
        let zero = vec![0.0; n + 1];
        for x in 1..n {
            assert_eq!(apply_k_n(&law, &t, &zero, x).unwrap(), 0.0);
        }
        let mut bad = zero.clone();
        bad[0] = 1.0;
        assert!(apply_k_n(&law, &t, &bad, 5).is_err());
    }

    #[test]
    fn k_n_on_plateau_center_is_minus_tail_rates() {
        // constant plateau wide enough that in-plateau differences vanish
        // for every in-lattice jump; remaining mass is the reservoir tails.
        let law = JumpLaw::new(1.5, 1 << 16).unwrap();
        let n = 64;
        let t = DiscreteOperatorTable::new(&law, n).unwrap();
        let c = 2.5;
        let f: Vec<f64> = (0..=n)
            .map(|z| if z >= 1 && z <= n - 1 { c } else { 0.0 })
            .collect();
        let x = n / 2;
        let got = apply_k_n(&law, &t, &f, x).unwrap();
        // direct two-sided sum: within the lattice all differences are 0,
        // outside the lattice F = 0 so each side contributes -tail * c
        let expected = -(t.r_minus(x) + t.r_plus(x)) * c;
        assert!((got - expected).abs() < 1e-14);
    }

    #[test]
    fn k_n_matches_direct_truncated_sum() {
        // operator identity: K_N computed via L_N minus tail rates equals
        // the direct two-sided sum over y in Z truncated at K_max with tail
        // correction, to 1e-10
        let law = JumpLaw::new(1.5, 1 << 16).unwrap();
        let n = 128;
        let t = DiscreteOperatorTable::new(&law, n).unwrap();
        let a = 0.2;
        let f: Vec<f64> = (0..=n).map(|z| bump(a, z as f64 / n as f64)).collect();
        let fq = |z: i64| -> f64 {
            if z <= 0 || z >= n as i64 {
                0.0
            } else {
                f[z as usize]
            }
        };
        for x in [26usize, 51, 64, 77, 100] {
            let direct: f64 = {
                let mut s = 0.0;
                let k_trunc = 1 << 15;
                for y in (x as i64 - k_trunc)..=(x as i64 + k_trunc) {
                    s += law.p(y - x as i64) * (fq(y) - f[x]);
                }
                // beyond the truncation F vanishes, leaving -F(x) tails
                s - f[x] * 2.0 * law.tail((k_trunc + 1) as usize)
            };
            let via_identity = apply_k_n(&law, &t, &f, x).unwrap();
            assert!(
                (direct - via_identity).abs() < 1e-10,
                "x = {x}: {direct} vs {via_identity}"
            );
        }
    }

    #[test]
    fn report_rejects_small_a() {
        let law = law();
        assert!(convergence_report(&law, &[16], 0.05).is_err());
        assert!(convergence_report(&law, &[], 0.2).is_err());
    }

    #[test]
    fn tail_gap_bound_and_decay() {
        let law = law();
        let rep = convergence_report(&law, &[64, 128, 256], 0.2).unwrap();
        for r in &rep.rows {
            assert!(r.bound_ratio <= 1.0, "N = {}: ratio {}", r.n, r.bound_ratio);
        }
        // doubling N halves the sup error within factor 1.2
        for w in rep.rows.windows(2) {
            let ratio = w[0].sup_err_minus / w[1].sup_err_minus;
            assert!(
                ratio > 2.0 / 1.2 && ratio < 2.0 * 1.2,
                "decay ratio {ratio}"
            );
        }
    }

    #[test]
    fn r_minus_limit_value() {
        // r^-(1/2) = c_gamma 2^gamma / gamma for gamma = 1.5
        let law = law();
        assert!((law.r_minus_limit(0.5) - 0.702_808_794_109_712_9).abs() < 1e-12);
    }
}
