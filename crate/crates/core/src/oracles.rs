//! Independent ground-truth generators used by the test suites: exact
//! branching-process formulas and brute-force Monte Carlo estimators that
//! bypass the grid machinery entirely.

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::parallel;
use statrs::function::gamma::ln_gamma;

/// Galton-Watson tree with binomial(b, p) offspring: the independent
/// percolation cluster the avalanche reduces to on gap measures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GwSpec {
    pub b: u32,
    pub p: f64,
}

impl GwSpec {
    pub fn new(b: u32, p: f64) -> Result<GwSpec> {
        if b < 2 {
            return Err(Error::invalid("GW spec needs b >= 2"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("open probability p = {p} outside [0, 1]")));
        }
        Ok(GwSpec { b, p })
    }
}

fn ln_binomial_pmf(m: u64, k: u64, p: f64) -> f64 {
    debug_assert!(k <= m);
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if k == m { 0.0 } else { f64::NEG_INFINITY };
    }
    let (m, k) = (m as f64, k as f64);
    ln_gamma(m + 1.0) - ln_gamma(k + 1.0) - ln_gamma(m - k + 1.0)
        + k * p.ln()
        + (m - k) * (1.0 - p).ln()
}

/// Exact tail P(N >= n), n = 1..=n_max, of the total progeny N of a GW tree
/// rooted at one toppled site, via the hitting-time identity
/// P(N = n) = P(Bin(b n, p) = n - 1) / n in log space.
pub fn otter_dwass_tail(spec: GwSpec, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 || n_max > 100_000 {
        return Err(Error::invalid(format!("n_max = {n_max} outside 1..=1e5")));
    }
    let mut tail = Vec::with_capacity(n_max);
    let mut below = 0.0f64; // P(N < n)
    for n in 1..=n_max as u64 {
        tail.push((1.0 - below).max(0.0));
        let ln_p = ln_binomial_pmf(spec.b as u64 * n, n - 1, spec.p) - (n as f64).ln();
        below += ln_p.exp();
    }
    Ok(tail)
}

/// Point masses P(N = n), n = 1..=n_max.
pub fn otter_dwass_pmf(spec: GwSpec, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 || n_max > 100_000 {
        return Err(Error::invalid(format!("n_max = {n_max} outside 1..=1e5")));
    }
    Ok((1..=n_max as u64)
        .map(|n| (ln_binomial_pmf(spec.b as u64 * n, n - 1, spec.p) - (n as f64).ln()).exp())
        .collect())
}

/// Survival probability of the GW tree: smallest root of
/// s = 1 - (1 - p s)^b, zero when b p <= 1.
pub fn gw_survival(spec: GwSpec, tol: f64) -> f64 {
    let GwSpec { b, p } = spec;
    if b as f64 * p <= 1.0 {
        return 0.0;
    }
    let f = |s: f64| 1.0 - (1.0 - p * s).powi(b as i32) - s;
    // f > 0 just above 0 (slope bp - 1 > 0) and f(1) <= 0
    let mut lo = 1e-300;
    let mut hi = 1.0;
    while hi - lo > tol {
        let mid = (lo + hi) / 2.0;
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

/// Direct Monte Carlo on the defining event of the path-survival
/// probability: the fraction of i.i.d. paths X_1..X_n with all partial
/// values Q_k = X_k + Q_{k-1}/b at or above 1. Sampling here is its own
/// stream family, separate from the avalanche simulators.
pub fn mc_z(
    measure: &Measure,
    b: u32,
    theta: f64,
    n: u32,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::invalid("mc_z needs samples >= 1"));
    }
    if b < 2 {
        return Err(Error::invalid("mc_z needs b >= 2"));
    }
    if theta < 1.0 {
        // Z_n(theta) = 0 whenever theta < 1, exactly
        return Ok((0.0, 0.0));
    }
    let hits = parallel::chunked_sum_u64(samples, workers, |range| {
        let mut hits = 0u64;
        for idx in range {
            let mut key = splitmix(seed ^ splitmix(idx.wrapping_add(0x9e37_79b9_7f4a_7c15)));
            let mut q = theta;
            let mut ok = true;
            for _ in 0..n {
                key = splitmix(key.wrapping_add(0xd1b5_4a32_d192_ed03));
                let u = to_unit(key);
                q = measure.sample(u) + q / b as f64;
                if q < 1.0 {
                    ok = false;
                    break;
                }
            }
            if ok {
                hits += 1;
            }
        }
        hits
    });
    let est = hits as f64 / samples as f64;
    let stderr = (est * (1.0 - est) / samples as f64).sqrt();
    Ok((est, stderr))
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn to_unit(key: u64) -> f64 {
    (key >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn otter_dwass_trivial_p0() {
        let t = otter_dwass_tail(GwSpec::new(2, 0.0).unwrap(), 5).unwrap();
        assert_eq!(t[0], 1.0);
        assert!(t[1].abs() < 1e-15);
    }

    #[test]
    fn otter_dwass_critical_first_mass() {
        // b=2, p=1/2: P(N=1) = P(Bin(2, 1/2) = 0) = 1/4
        let t = otter_dwass_tail(GwSpec::new(2, 0.5).unwrap(), 3).unwrap();
        assert!((t[0] - 1.0).abs() < 1e-14);
        assert!((t[1] - 0.75).abs() < 1e-12);
        let pmf = otter_dwass_pmf(GwSpec::new(2, 0.5).unwrap(), 2).unwrap();
        assert!((pmf[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn otter_dwass_critical_tail_amplitude() {
        // sqrt(n) P(N >= n) -> 2/sqrt(pi) for b=2, p=1/2
        let n = 10_000;
        let t = otter_dwass_tail(GwSpec::new(2, 0.5).unwrap(), n).unwrap();
        let amp = (n as f64).sqrt() * t[n - 1];
        let want = 2.0 / std::f64::consts::PI.sqrt();
        assert!(
            (amp / want - 1.0).abs() < 0.01,
            "amplitude {amp} vs {want}"
        );
    }

    #[test]
    fn otter_dwass_mass_accounting() {
        // subcritical: pmf sums to 1 within 1e-10 (survival term zero)
        let spec = GwSpec::new(2, 0.4).unwrap();
        let pmf = otter_dwass_pmf(spec, 2_000).unwrap();
        let total: f64 = pmf.iter().sum::<f64>() + gw_survival(spec, 1e-14);
        assert!((total - 1.0).abs() < 1e-10, "total {total}");

        // supercritical: pmf + survival accounts for everything
        let spec = GwSpec::new(2, 0.6).unwrap();
        let pmf = otter_dwass_pmf(spec, 5_000).unwrap();
        let total: f64 = pmf.iter().sum::<f64>() + gw_survival(spec, 1e-14);
        assert!((total - 1.0).abs() < 1e-10, "total {total}");
    }

    #[test]
    fn gw_survival_values() {
        assert_eq!(gw_survival(GwSpec::new(2, 0.5).unwrap(), 1e-12), 0.0);
        assert_eq!(gw_survival(GwSpec::new(3, 0.2).unwrap(), 1e-12), 0.0);
        assert!((gw_survival(GwSpec::new(2, 1.0).unwrap(), 1e-12) - 1.0).abs() < 1e-10);
        // closed quadratic root for b=2: s = (2p-1)/p^2
        let s = gw_survival(GwSpec::new(2, 0.6).unwrap(), 1e-13);
        assert!((s - 0.2 / 0.36).abs() < 1e-10, "s = {s}");
    }

    #[test]
    fn gw_survival_monotone() {
        let mut prev = 0.0;
        for i in 0..=10 {
            let p = 0.5 + 0.05 * i as f64;
            let s = gw_survival(GwSpec::new(2, p).unwrap(), 1e-12);
            assert!(s >= prev - 1e-12);
            prev = s;
        }
        assert!(
            gw_survival(GwSpec::new(3, 0.6).unwrap(), 1e-12)
                >= gw_survival(GwSpec::new(2, 0.6).unwrap(), 1e-12)
        );
    }

    #[test]
    fn mc_z_below_one_is_zero() {
        let m = Measure::uniform(0.0, 1.0).unwrap();
        let (z, se) = mc_z(&m, 2, 0.9, 5, 1000, 7, 1).unwrap();
        assert_eq!(z, 0.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn mc_z_matches_exact_mass_at_n1() {
        // Z_1(theta) = rho([1 - theta/b, 1])
        let m = Measure::uniform(0.0, 1.0).unwrap();
        let (est, se) = mc_z(&m, 2, 1.2, 1, 400_000, 11, 2).unwrap();
        let exact = m.mass(1.0 - 1.2 / 2.0, 1.0, true, true);
        assert!((est - exact).abs() < 4.0 * se, "est {est} exact {exact} se {se}");
    }

    #[test]
    fn mc_z_gap_geometric() {
        let m = Measure::gap(2, 0.8, 0.4, 0.05).unwrap();
        let (est, se) = mc_z(&m, 2, 1.0, 10, 2_000_000, 3, 2).unwrap();
        let exact = 0.4f64.powi(10);
        assert!((est - exact).abs() < 4.0 * se.max(1e-9), "est {est} exact {exact}");
    }

    #[test]
    fn mc_z_worker_invariant() {
        let m = Measure::uniform(0.0, 1.0).unwrap();
        let a = mc_z(&m, 2, 1.0, 4, 100_000, 42, 1).unwrap();
        let b = mc_z(&m, 2, 1.0, 4, 100_000, 42, 2).unwrap();
        assert_eq!(a, b);
    }
}
