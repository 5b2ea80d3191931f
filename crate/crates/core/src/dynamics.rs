//! Avalanche simulation on the directed b-ary tree.
//!
//! Two independent mechanisms over the same replayable energy field: the
//! literal toppling dynamics (`run_direct`) and the open-path percolation
//! search (`run_frontier`). Their outcomes must agree exactly, field by
//! field, which is the executable form of the equivalence between the
//! dynamics and the path-value characterization.

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::parallel;

/// Per-site uniform variates addressed by tree path. Implementations must
/// be pure: the same site always yields the same variate.
pub trait EnergySource {
    type Site: Copy;
    fn root(&self) -> Self::Site;
    fn child(&self, site: Self::Site, index: u32) -> Self::Site;
    /// Uniform variate in [0, 1) attached to the site.
    fn variate(&self, site: Self::Site) -> f64;
}

/// Counter-based random energy field: the variate of a site is a pure
/// function of (seed, path label), so both simulators consume identical
/// fields and parallel runs replay exactly.
#[derive(Clone, Copy, Debug)]
pub struct EnergyField {
    seed: u64,
    b: u32,
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl EnergyField {
    pub fn new(seed: u64, b: u32) -> EnergyField {
        EnergyField { seed, b }
    }

    /// Independent stream for one Monte Carlo sample index.
    pub fn for_sample(seed: u64, sample: u64, b: u32) -> EnergyField {
        EnergyField {
            seed: splitmix(seed ^ splitmix(sample ^ 0x5851_f42d_4c95_7f2d)),
            b,
        }
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl EnergySource for EnergyField {
    type Site = u64;

    fn root(&self) -> u64 {
        splitmix(self.seed)
    }

    fn child(&self, site: u64, index: u32) -> u64 {
        splitmix(site ^ 0xa076_1d64_78bd_642f_u64.wrapping_mul(index as u64 + 1))
    }

    fn variate(&self, site: u64) -> f64 {
        (site >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Per-run record of an avalanche.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AvalancheOutcome {
    /// Number of toppled sites.
    pub size: u64,
    /// (b-1) * size + 1: the avalanche set together with its outer boundary.
    pub boundary_size: u64,
    /// Deepest layer containing a toppled site (root is layer 0).
    pub depth: u32,
    /// Frontier still active when depth_cap was reached, or the expansion
    /// was stopped by a size cap; the reported size is then a partial count.
    pub truncated: bool,
}

impl AvalancheOutcome {
    fn new(b: u32, size: u64, depth: u32, truncated: bool) -> AvalancheOutcome {
        AvalancheOutcome {
            size,
            boundary_size: (b as u64 - 1) * size + 1,
            depth,
            truncated,
        }
    }

    /// Diagnostic count of all children of toppled sites (b * size), the
    /// alternative boundary convention.
    pub fn children_count(&self, b: u32) -> u64 {
        b as u64 * self.size
    }
}

fn check_run_args(v: f64, depth_cap: u32) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("trigger v = {v} must be positive")));
    }
    if depth_cap == 0 {
        return Err(Error::invalid("depth_cap must be >= 1"));
    }
    Ok(())
}

/// Literal toppling dynamics, layer by layer: a site holding at least 1
/// adds 1/b of its value to each child and is zeroed. Only the active
/// frontier and its children are ever materialized; the rest of the
/// infinite tree does not change before the front arrives.
pub fn run_direct<S: EnergySource>(
    measure: &Measure,
    source: &S,
    b: u32,
    v: f64,
    depth_cap: u32,
) -> Result<AvalancheOutcome> {
    check_run_args(v, depth_cap)?;
    let root = source.root();
    let root_value = measure.sample(source.variate(root)) + v;
    if root_value < 1.0 {
        return Ok(AvalancheOutcome::new(b, 0, 0, false));
    }
    let mut frontier: Vec<(S::Site, f64)> = vec![(root, root_value)];
    let mut size = 1u64;
    let mut depth = 0u32;
    let mut layer = 0u32;
    let mut next: Vec<(S::Site, f64)> = Vec::new();
    while !frontier.is_empty() {
        if layer == depth_cap {
            return Ok(AvalancheOutcome::new(b, size, depth_cap, true));
        }
        next.clear();
        for &(site, value) in &frontier {
            let share = value / b as f64;
            for i in 0..b {
                let c = source.child(site, i);
                let cv = measure.sample(source.variate(c)) + share;
                if cv >= 1.0 {
                    next.push((c, cv));
                    size += 1;
                    depth = layer + 1;
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        layer += 1;
    }
    Ok(AvalancheOutcome::new(b, size, depth, false))
}

/// Open-path percolation search: with theta = X_root + v, a site is open
/// iff its path value Q = X + Q_parent / b stays at or above 1; the
/// avalanche set is the open cluster containing the root.
pub fn run_frontier<S: EnergySource>(
    measure: &Measure,
    source: &S,
    b: u32,
    v: f64,
    depth_cap: u32,
) -> Result<AvalancheOutcome> {
    check_run_args(v, depth_cap)?;
    let root = source.root();
    let theta = measure.sample(source.variate(root)) + v;
    if theta < 1.0 {
        return Ok(AvalancheOutcome::new(b, 0, 0, false));
    }
    let mut frontier: Vec<(S::Site, f64)> = vec![(root, theta)];
    let mut size = 1u64;
    let mut depth = 0u32;
    let mut layer = 0u32;
    let mut next: Vec<(S::Site, f64)> = Vec::new();
    while !frontier.is_empty() {
        if layer == depth_cap {
            return Ok(AvalancheOutcome::new(b, size, depth_cap, true));
        }
        next.clear();
        for &(site, q) in &frontier {
            let share = q / b as f64;
            for i in 0..b {
                let c = source.child(site, i);
                let qc = measure.sample(source.variate(c)) + share;
                if qc >= 1.0 {
                    next.push((c, qc));
                    size += 1;
                    depth = layer + 1;
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        layer += 1;
    }
    Ok(AvalancheOutcome::new(b, size, depth, false))
}

/// Depth-first probe: does the open cluster reach `target_depth`? Exits on
/// the first open path, so supercritical fields cost O(depth) instead of
/// O(b^depth).
pub fn probe_depth<S: EnergySource>(
    measure: &Measure,
    source: &S,
    b: u32,
    v: f64,
    target_depth: u32,
) -> Result<bool> {
    check_run_args(v, target_depth.max(1))?;
    let root = source.root();
    let theta = measure.sample(source.variate(root)) + v;
    if theta < 1.0 {
        return Ok(false);
    }
    if target_depth == 0 {
        return Ok(true);
    }
    let mut stack: Vec<(S::Site, f64, u32)> = vec![(root, theta, 0)];
    while let Some((site, q, layer)) = stack.pop() {
        let share = q / b as f64;
        for i in 0..b {
            let c = source.child(site, i);
            let qc = measure.sample(source.variate(c)) + share;
            if qc >= 1.0 {
                if layer + 1 == target_depth {
                    return Ok(true);
                }
                stack.push((c, qc, layer + 1));
            }
        }
    }
    Ok(false)
}

/// Frontier run with an additional size cap; used by the Monte Carlo
/// drivers so that near-critical tails cost O(cap) per run.
fn run_capped<S: EnergySource>(
    measure: &Measure,
    source: &S,
    b: u32,
    v: f64,
    depth_cap: u32,
    size_cap: u64,
) -> AvalancheOutcome {
    let root = source.root();
    let theta = measure.sample(source.variate(root)) + v;
    if theta < 1.0 {
        return AvalancheOutcome::new(b, 0, 0, false);
    }
    let mut frontier: Vec<(S::Site, f64)> = vec![(root, theta)];
    let mut size = 1u64;
    let mut depth = 0u32;
    let mut layer = 0u32;
    let mut next: Vec<(S::Site, f64)> = Vec::new();
    while !frontier.is_empty() {
        if layer == depth_cap {
            return AvalancheOutcome::new(b, size, depth_cap, true);
        }
        if size >= size_cap {
            return AvalancheOutcome::new(b, size, depth, true);
        }
        next.clear();
        for &(site, q) in &frontier {
            let share = q / b as f64;
            for i in 0..b {
                let c = source.child(site, i);
                let qc = measure.sample(source.variate(c)) + share;
                if qc >= 1.0 {
                    next.push((c, qc));
                    size += 1;
                    depth = layer + 1;
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        layer += 1;
    }
    AvalancheOutcome::new(b, size, depth, false)
}

/// Exact threshold for the avalanche to propagate n levels, by the
/// max/min recursion over the subtree of depth n (O(b^n) sites).
pub fn sample_vn<S: EnergySource>(measure: &Measure, source: &S, b: u32, n: u32) -> Result<f64> {
    let cost = (b as u64).checked_pow(n);
    if cost.is_none() || cost.unwrap() > 1 << 20 {
        return Err(Error::invalid(format!(
            "V_n recursion visits b^n = {b}^{n} sites; raise only below 2^20"
        )));
    }
    fn rec<S: EnergySource>(measure: &Measure, source: &S, b: u32, site: S::Site, n: u32) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let x = measure.sample(source.variate(site));
        let mut min_child = f64::INFINITY;
        for i in 0..b {
            let c = source.child(site, i);
            min_child = min_child.min(rec(measure, source, b, c, n - 1));
        }
        (1.0 - x).max(b as f64 * min_child - x)
    }
    if n == 0 {
        return Ok(0.0);
    }
    let root = source.root();
    let x = measure.sample(source.variate(root));
    let mut min_child = f64::INFINITY;
    for i in 0..b {
        let c = source.child(root, i);
        min_child = min_child.min(rec(measure, source, b, c, n - 1));
    }
    Ok((1.0 - x).max(b as f64 * min_child - x))
}

/// Tail table from a Monte Carlo sweep: P(|A| >= n) for n = 1..=n_max.
#[derive(Clone, Debug)]
pub struct TailTable {
    /// p_ge[k] estimates P(|A| >= k+1).
    pub p_ge: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: u64,
    pub truncated_fraction: f64,
    /// Some truncated run stopped below n_max: entries beyond its partial
    /// size are lower bounds.
    pub lower_bound: bool,
}

/// Survival function of observed avalanche sizes. Runs are expanded up to
/// depth_cap and stopped once the size reaches n_max; as long as
/// depth_cap >= n_max every truncated run still counts into all table
/// rows, so the table is exact (otherwise it is a flagged lower bound).
pub fn mc_tail(
    measure: &Measure,
    b: u32,
    v: f64,
    samples: u64,
    depth_cap: u32,
    seed: u64,
    workers: usize,
    n_max: usize,
) -> Result<TailTable> {
    if samples == 0 {
        return Err(Error::invalid("mc_tail needs samples >= 1"));
    }
    if n_max == 0 {
        return Err(Error::invalid("mc_tail needs n_max >= 1"));
    }
    check_run_args(v, depth_cap)?;
    struct Part {
        hist: Vec<u64>,
        truncated: u64,
        lower_bound: bool,
    }
    let parts = parallel::chunked(samples, workers, |range| {
        let mut part = Part {
            hist: vec![0u64; n_max + 1],
            truncated: 0,
            lower_bound: false,
        };
        for idx in range {
            let field = EnergyField::for_sample(seed, idx, b);
            let out = run_capped(measure, &field, b, v, depth_cap, n_max as u64);
            let s = out.size.min(n_max as u64) as usize;
            part.hist[s] += 1;
            if out.truncated {
                part.truncated += 1;
                if out.size < n_max as u64 {
                    part.lower_bound = true;
                }
            }
        }
        part
    });
    let mut hist = vec![0u64; n_max + 1];
    let mut truncated = 0u64;
    let mut lower_bound = false;
    for p in parts {
        for (h, ph) in hist.iter_mut().zip(&p.hist) {
            *h += ph;
        }
        truncated += p.truncated;
        lower_bound |= p.lower_bound;
    }
    // suffix counts: runs with size >= n
    let mut p_ge = Vec::with_capacity(n_max);
    let mut stderr = Vec::with_capacity(n_max);
    let mut at_least = samples;
    for n in 1..=n_max {
        at_least -= hist[n - 1];
        let p = at_least as f64 / samples as f64;
        p_ge.push(p);
        stderr.push((p * (1.0 - p) / samples as f64).sqrt());
    }
    Ok(TailTable {
        p_ge,
        stderr,
        samples,
        truncated_fraction: truncated as f64 / samples as f64,
        lower_bound,
    })
}

/// Mean avalanche size plus the depth-survival observable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSurvival {
    pub mean_size: f64,
    pub stderr: f64,
    /// Fraction of runs stopped by a cap; when nonzero the mean is a lower
    /// bound, not an estimate.
    pub truncated_fraction: f64,
    /// Estimate of P(depth >= depth_cap).
    pub survival: f64,
    pub survival_stderr: f64,
}

/// Sample mean of |A| (valid as an estimate only when the truncation
/// fraction is ~0) and the probability of reaching depth_cap. Runs whose
/// expansion is stopped by `size_cap` before reaching depth_cap are
/// re-probed depth-first, so the survival column is exact for every run.
pub fn mc_chi_and_survival(
    measure: &Measure,
    b: u32,
    v: f64,
    samples: u64,
    depth_cap: u32,
    size_cap: u64,
    seed: u64,
    workers: usize,
) -> Result<ChiSurvival> {
    if samples == 0 {
        return Err(Error::invalid("mc_chi_and_survival needs samples >= 1"));
    }
    check_run_args(v, depth_cap)?;
    #[derive(Default)]
    struct Part {
        sum: u128,
        sum_sq: u128,
        truncated: u64,
        survived: u64,
    }
    let parts = parallel::chunked(samples, workers, |range| {
        let mut part = Part::default();
        for idx in range {
            let field = EnergyField::for_sample(seed, idx, b);
            let out = run_capped(measure, &field, b, v, depth_cap, size_cap);
            part.sum += out.size as u128;
            part.sum_sq += (out.size as u128) * (out.size as u128);
            if out.truncated {
                part.truncated += 1;
            }
            let survived = if out.depth >= depth_cap {
                true
            } else if out.truncated {
                // stopped by the size cap before depth_cap was settled
                probe_depth(measure, &field, b, v, depth_cap).expect("args validated")
            } else {
                false
            };
            if survived {
                part.survived += 1;
            }
        }
        part
    });
    let mut sum = 0u128;
    let mut sum_sq = 0u128;
    let mut truncated = 0u64;
    let mut survived = 0u64;
    for p in parts {
        sum += p.sum;
        sum_sq += p.sum_sq;
        truncated += p.truncated;
        survived += p.survived;
    }
    let n = samples as f64;
    let mean = sum as f64 / n;
    let var = (sum_sq as f64 / n - mean * mean).max(0.0);
    let survival = survived as f64 / n;
    Ok(ChiSurvival {
        mean_size: mean,
        stderr: (var / n).sqrt(),
        truncated_fraction: truncated as f64 / n,
        survival,
        survival_stderr: (survival * (1.0 - survival) / n).sqrt(),
    })
}

/// P(depth >= target_depth) by the early-exit probe alone.
pub fn mc_survival(
    measure: &Measure,
    b: u32,
    v: f64,
    samples: u64,
    target_depth: u32,
    seed: u64,
    workers: usize,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::invalid("mc_survival needs samples >= 1"));
    }
    check_run_args(v, target_depth)?;
    let hits = parallel::chunked_sum_u64(samples, workers, |range| {
        let mut hits = 0u64;
        for idx in range {
            let field = EnergyField::for_sample(seed, idx, b);
            if probe_depth(measure, &field, b, v, target_depth).expect("args validated") {
                hits += 1;
            }
        }
        hits
    });
    let p = hits as f64 / samples as f64;
    Ok((p, (p * (1.0 - p) / samples as f64).sqrt()))
}

/// Independent draws of V_n, one per sample stream.
pub fn mc_vn(
    measure: &Measure,
    b: u32,
    n: u32,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<f64>> {
    // validate the recursion cost once up front
    sample_vn(measure, &EnergyField::for_sample(seed, 0, b), b, n)?;
    let parts = parallel::chunked(samples, workers, |range| {
        range
            .map(|idx| {
                let field = EnergyField::for_sample(seed, idx, b);
                sample_vn(measure, &field, b, n).expect("cost validated")
            })
            .collect::<Vec<f64>>()
    });
    Ok(parts.into_iter().flatten().collect())
}
