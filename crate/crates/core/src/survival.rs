//! Deterministic computation of the path-survival quantities: Z_n(theta),
//! the critical functional z(rho), the limit profile psi, and the expected
//! avalanche size chi, all by exact piecewise-linear integration on grids.
//!
//! Two complementary recursions are used. The forward recursion propagates
//! the sub-probability density of the path value Q_n on the survival event
//! (needed for conditioned laws); the backward recursion advances the
//! whole profile theta -> Z_n(theta) at once, which is what the ratio
//! estimator for z, the psi product and the chi series consume.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::{self, Conv, ConvKernel};
use crate::measures::{Measure, MeasureSummary};

/// Sub-probability density of Q_n restricted to the survival event
/// {Q_k >= 1, k = 0..n}; its total mass is Z_n(theta).
#[derive(Clone, Debug)]
pub struct SurvivalDensity {
    pub theta: f64,
    pub n: u32,
    pub density: GridFunction,
    pub mass: f64,
}

fn checked_summary(measure: &Measure, b: u32) -> Result<MeasureSummary> {
    measure.require_flat()?;
    let s = measure.summary(b)?;
    if s.theta_marginal {
        return Err(Error::Degenerate(
            "x_star = 1 - 1/b: the marginal theta_b = 1 family is excluded".into(),
        ));
    }
    Ok(s)
}

/// Grid upper end for profiles that must host theta = x + v.
pub fn theta_max_for(summary: &MeasureSummary, v: f64) -> f64 {
    summary.theta_b.max(summary.x_star + v)
}

/// Result of `propagate`.
#[derive(Clone, Debug)]
pub struct Propagated {
    /// Z[k] = Z_k(theta) for k = 0..=n.
    pub z: Vec<f64>,
    pub density: SurvivalDensity,
    /// Point-mass start (n = 0) represented as a narrow grid spike.
    pub degenerate: bool,
}

/// Propagates the survival density n steps from Q_0 = theta.
///
/// The first two levels are computed with the density jumps handled
/// analytically (Z_1 is exact; the level-2 density is evaluated from the
/// exact double integral at every node); from there each step is the
/// precomputed kernel convolution restricted to q >= 1.
pub fn propagate(measure: &Measure, b: u32, theta: f64, n: u32, nodes: usize) -> Result<Propagated> {
    let s = checked_summary(measure, b)?;
    if !(0.0..=64.0).contains(&theta) {
        return Err(Error::invalid(format!("theta = {theta} outside [0, 64]")));
    }
    if n > 10_000 {
        return Err(Error::invalid("propagate: n > 10000"));
    }
    if nodes < 8 {
        return Err(Error::invalid("propagate needs at least 8 nodes"));
    }
    let theta_max = s.theta_b.max(theta).max(1.0 + 1e-6);
    let lo = 1.0;
    let step = (theta_max - lo) / (nodes - 1) as f64;

    if theta < 1.0 {
        // Z_n(theta) = 0 whenever theta < 1, exactly
        let density = GridFunction::constant(lo, theta_max, nodes, 0.0)?;
        return Ok(Propagated {
            z: vec![0.0; n as usize + 1],
            density: SurvivalDensity {
                theta,
                n,
                density,
                mass: 0.0,
            },
            degenerate: false,
        });
    }

    let mut z = Vec::with_capacity(n as usize + 1);
    z.push(1.0);
    if n == 0 {
        let density = spike(lo, theta_max, nodes, theta)?;
        return Ok(Propagated {
            z,
            density: SurvivalDensity {
                theta,
                n,
                density,
                mass: 1.0,
            },
            degenerate: true,
        });
    }

    // level 1: density q -> phi(q - theta/b) on q >= 1; mass exact
    let bf = b as f64;
    let z1 = measure.mass(1.0 - theta / bf, 1.0, true, true);
    z.push(z1);
    if n == 1 || z1 == 0.0 {
        let mut density =
            GridFunction::from_fn(lo, theta_max, nodes, |q| density_at_flat(measure, q - theta / bf))?;
        z.extend(std::iter::repeat(0.0).take((n as usize).saturating_sub(1)));
        let mass = if z1 == 0.0 { 0.0 } else { density.mass() };
        if z1 == 0.0 {
            density.scale(0.0);
        }
        return Ok(Propagated {
            z,
            density: SurvivalDensity {
                theta,
                n,
                density,
                mass,
            },
            degenerate: false,
        });
    }

    // level 2 from the exact double integral, so the level-1 jumps never
    // meet the grid
    let mut f = GridFunction::from_fn(lo, theta_max, nodes, |q| level2_density(measure, b, theta, q))?;
    let mut mass = f.mass();
    z.push(mass);
    let mut current_z = mass;
    if mass > 0.0 {
        let inv = 1.0 / mass;
        f.scale(inv);
    }

    if n > 2 && current_z > 0.0 {
        let kern = ConvKernel::new(measure, b, lo, step, nodes, Conv::Forward)?;
        let mut out = vec![0.0; nodes];
        for _ in 3..=n {
            kern.apply(f.values(), 0, &mut out);
            f.values_mut().copy_from_slice(&out);
            mass = f.mass();
            current_z *= mass;
            z.push(current_z);
            if current_z == 0.0 {
                break;
            }
            let inv = 1.0 / mass;
            f.scale(inv);
        }
        while z.len() < n as usize + 1 {
            z.push(0.0);
        }
    } else {
        while z.len() < n as usize + 1 {
            z.push(0.0);
        }
    }
    f.scale(current_z);
    Ok(Propagated {
        z,
        density: SurvivalDensity {
            theta,
            n,
            density: f,
            mass: current_z,
        },
        degenerate: false,
    })
}

fn density_at_flat(measure: &Measure, x: f64) -> f64 {
    for p in measure.pieces() {
        if p.left <= x && x < p.right {
            return p.density_at(x);
        }
    }
    0.0
}

/// Exact density of Q_2 on the survival event at level 2:
/// int over u >= 1 of phi(u - theta/b) phi(q - u/b) du.
fn level2_density(measure: &Measure, b: u32, theta: f64, q: f64) -> f64 {
    let bf = b as f64;
    let mut acc = 0.0;
    for p1 in measure.pieces() {
        for p2 in measure.pieces() {
            let u0 = (p1.left + theta / bf).max(bf * (q - p2.right)).max(1.0);
            let u1 = (p1.right + theta / bf).min(bf * (q - p2.left));
            if u1 <= u0 {
                continue;
            }
            let f0 = p1.density_at(u0 - theta / bf);
            let f1 = p1.density_at(u1 - theta / bf);
            let g0 = p2.density_at(q - u0 / bf);
            let g1 = p2.density_at(q - u1 / bf);
            acc += crate::grid::linear_product_integral(u0, u1, f0, f1, g0, g1);
        }
    }
    acc
}

fn spike(lo: f64, hi: f64, nodes: usize, at: f64) -> Result<GridFunction> {
    let step = (hi - lo) / (nodes - 1) as f64;
    let i = (((at - lo) / step).round() as usize).min(nodes - 1);
    let mut g = GridFunction::constant(lo, hi, nodes, 0.0)?;
    g.values_mut()[i] = 1.0;
    let m = g.mass();
    g.scale(1.0 / m);
    Ok(g)
}

/// Conditioned law of Q_n given survival: the final propagated density
/// normalized to mass 1.
#[derive(Clone, Debug)]
pub struct ConditionedDensity {
    pub density: GridFunction,
    pub degenerate: bool,
}

pub fn conditioned_density(
    measure: &Measure,
    b: u32,
    theta: f64,
    n: u32,
    nodes: usize,
) -> Result<ConditionedDensity> {
    let prop = propagate(measure, b, theta, n, nodes)?;
    if prop.degenerate {
        return Ok(ConditionedDensity {
            density: prop.density.density,
            degenerate: true,
        });
    }
    if prop.density.mass <= 0.0 {
        return Err(Error::Degenerate(format!(
            "Z_{n}({theta}) = 0: conditioning event has zero mass"
        )));
    }
    let mut density = prop.density.density;
    let m = density.mass();
    density.scale(1.0 / m);
    Ok(ConditionedDensity {
        density,
        degenerate: false,
    })
}

/// Z_n values at theta = 1 and theta = theta_b for n = 0..=N.
#[derive(Clone, Debug, Default)]
pub struct ZetaTrace {
    pub z_at_1: Vec<f64>,
    pub z_at_top: Vec<f64>,
}

/// Outcome of the ratio estimator for z(rho).
#[derive(Clone, Debug)]
pub struct ZOutcome {
    pub z: f64,
    /// Ratio-based uncertainty: spread between the two theta ratios and
    /// their last Cauchy increments.
    pub half_width: f64,
    /// Rigorous bracket [Z_n(1)^(1/n), Z_n(theta_b)^(1/n)] at the final n.
    pub bracket: (f64, f64),
    pub iterations: u32,
    pub converged: bool,
    pub trace: ZetaTrace,
}

/// The critical functional z(rho) = lim Z_n(theta)^(1/n), estimated by
/// consecutive ratios of the backward profile at theta = 1 and
/// theta = theta_b simultaneously; convergence requires both ratios to be
/// Cauchy within tol and to agree within tol.
pub fn z_of_rho(measure: &Measure, b: u32, nodes: usize, tol: f64, iter_cap: u32) -> Result<ZOutcome> {
    let s = checked_summary(measure, b)?;
    if s.mass_top == 0.0 {
        // Z_1(1) = rho([1 - 1/b, 1]) = 0 forces z = 0
        return Ok(ZOutcome {
            z: 0.0,
            half_width: 0.0,
            bracket: (0.0, 0.0),
            iterations: 0,
            converged: true,
            trace: ZetaTrace {
                z_at_1: vec![1.0, 0.0],
                z_at_top: vec![1.0, s.mass_top],
            },
        });
    }
    if nodes < 8 {
        return Err(Error::invalid("z_of_rho needs at least 8 nodes"));
    }
    let lo = 1.0;
    let hi = s.theta_b;
    let step = (hi - lo) / (nodes - 1) as f64;
    let kern = ConvKernel::new(measure, b, lo, step, nodes, Conv::Backward)?;

    let mut w = vec![1.0; nodes];
    let mut out = vec![0.0; nodes];
    let mut trace = ZetaTrace {
        z_at_1: vec![1.0],
        z_at_top: vec![1.0],
    };
    let mut log2_scale = 0.0f64;
    let (mut r1, mut r2) = (f64::NAN, f64::NAN);
    let (mut r1_prev, mut r2_prev);
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=iter_cap {
        kern.apply(&w, 0, &mut out);
        r1_prev = r1;
        r2_prev = r2;
        r1 = out[0] / w[0];
        r2 = out[nodes - 1] / w[nodes - 1];
        let sup = out.iter().copied().fold(0.0f64, f64::max);
        if sup <= 0.0 {
            // profile died: z = 0
            return Ok(ZOutcome {
                z: 0.0,
                half_width: 0.0,
                bracket: (0.0, 0.0),
                iterations: k,
                converged: true,
                trace,
            });
        }
        log2_scale += sup.log2();
        trace
            .z_at_1
            .push((log2_scale + (out[0] / sup).log2()).exp2());
        trace
            .z_at_top
            .push((log2_scale + (out[nodes - 1] / sup).log2()).exp2());
        for (wi, oi) in w.iter_mut().zip(&out) {
            *wi = oi / sup;
        }
        iterations = k;
        if k >= 3
            && (r1 - r1_prev).abs() < tol
            && (r2 - r2_prev).abs() < tol
            && (r1 - r2).abs() < tol
        {
            converged = true;
            break;
        }
    }
    let n = iterations as f64;
    let z1n = trace.z_at_1.last().copied().unwrap_or(0.0);
    let ztn = trace.z_at_top.last().copied().unwrap_or(0.0);
    let bracket = (z1n.powf(1.0 / n), ztn.powf(1.0 / n));
    let half_width = ((r1 - r2).abs() / 2.0).max(1e-18);
    Ok(ZOutcome {
        z: (r1 + r2) / 2.0,
        half_width,
        bracket,
        iterations,
        converged,
        trace,
    })
}

/// The limit profile psi(theta) = lim Z_n(theta) / z^n on [1, theta_max],
/// with psi = 0 below 1 exactly.
#[derive(Clone, Debug)]
pub struct PsiProfile {
    grid: GridFunction,
    pub z: f64,
    pub converged: bool,
    pub factors: u32,
}

impl PsiProfile {
    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }

    /// psi(theta): zero below 1, interpolated on [1, theta_max], error above.
    pub fn eval0(&self, theta: f64) -> Result<f64> {
        if theta < self.grid.lo() {
            return Ok(0.0);
        }
        self.grid.eval(theta)
    }

    /// E_rho psi(X + v) by exact quadrature against the density.
    pub fn mean_shifted(&self, measure: &Measure, v: f64) -> f64 {
        kernel::integrate_shifted(&self.grid, measure, v)
    }

    /// Profile multiplied by a constant; for homogeneity checks.
    #[cfg(test)]
    pub(crate) fn scaled(&self, factor: f64) -> PsiProfile {
        let mut grid = self.grid.clone();
        grid.scale(factor);
        PsiProfile {
            grid,
            z: self.z,
            converged: self.converged,
            factors: self.factors,
        }
    }
}

/// Computes psi by the normalized product: run the profile recursion and
/// divide by z each step until the factors settle within tol (geometric
/// convergence), capped at 500 factors.
pub fn psi(measure: &Measure, b: u32, theta_max: f64, nodes: usize, tol: f64) -> Result<PsiProfile> {
    let s = checked_summary(measure, b)?;
    let zres = z_of_rho(measure, b, nodes, tol.min(1e-9).max(1e-13), 500)?;
    if zres.z <= 0.0 {
        return Err(Error::Degenerate(
            "psi requires z(rho) > 0; the profile dies out".into(),
        ));
    }
    let z = zres.z;
    let lo = 1.0;
    let hi = theta_max.max(s.theta_b);
    if hi <= lo {
        return Err(Error::invalid(format!("theta_max = {hi} must exceed 1")));
    }
    let step = (hi - lo) / (nodes - 1) as f64;
    let kern = ConvKernel::new(measure, b, lo, step, nodes, Conv::Backward)?;
    let mut psi_now = GridFunction::constant(lo, hi, nodes, 1.0)?;
    let mut out = vec![0.0; nodes];
    let mut converged = false;
    let mut factors = 0;
    for k in 1..=500u32 {
        kern.apply(psi_now.values(), 0, &mut out);
        let mut delta = 0.0f64;
        let inv_z = 1.0 / z;
        for (p, o) in psi_now.values_mut().iter_mut().zip(&out) {
            let next = o * inv_z;
            delta = delta.max((next - *p).abs());
            *p = next;
        }
        factors = k;
        if delta < tol {
            converged = true;
            break;
        }
    }
    Ok(PsiProfile {
        grid: psi_now,
        z,
        converged,
        factors,
    })
}

/// chi as a function of whether the geometric series converges.
#[derive(Clone, Debug, PartialEq)]
pub enum ChiOutcome {
    Finite { chi: f64, z: f64, terms: u32 },
    /// b z >= 1: the series diverges (reported, not an error).
    Divergent { z: f64 },
}

impl ChiOutcome {
    pub fn value(&self) -> f64 {
        match self {
            ChiOutcome::Finite { chi, .. } => *chi,
            ChiOutcome::Divergent { .. } => f64::INFINITY,
        }
    }
}

/// Expected avalanche size chi = sum_n b^n E_rho Z_n(X + v): the profile
/// recursion supplies Z_n on a grid wide enough for theta = x + v, each
/// term is an exact quadrature over x, and once the term ratio is stable
/// the geometric tail is summed in closed form.
pub fn chi_quadrature(measure: &Measure, b: u32, v: f64, nodes: usize, tol: f64) -> Result<ChiOutcome> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("chi needs v > 0, got {v}")));
    }
    let s = checked_summary(measure, b)?;
    let zres = z_of_rho(measure, b, nodes, 1e-10, 500)?;
    let z = zres.z;
    // divergence decided at solver precision: z within 1e-9 of z_c counts
    if b as f64 * z >= 1.0 - 1e-9 {
        return Ok(ChiOutcome::Divergent { z });
    }
    let lo = 1.0;
    let hi = theta_max_for(&s, v).max(1.0 + 1e-6);
    let step = (hi - lo) / (nodes - 1) as f64;
    let kern = ConvKernel::new(measure, b, lo, step, nodes, Conv::Backward)?;

    let mut w = GridFunction::constant(lo, hi, nodes, 1.0)?;
    let mut out = vec![0.0; nodes];
    let mut log2_scale = 0.0f64;
    let log2_b = (b as f64).log2();

    // n = 0 term: P(X + v >= 1)
    let mut sum = measure.mass(1.0 - v, 1.0, true, true);
    let mut prev_term = sum;
    let mut prev_ratio = f64::NAN;
    let cap = 20_000u32;
    for k in 1..=cap {
        kern.apply(w.values(), 0, &mut out);
        let sup = out.iter().copied().fold(0.0f64, f64::max);
        if sup <= 0.0 {
            return Ok(ChiOutcome::Finite { chi: sum, z, terms: k });
        }
        log2_scale += sup.log2();
        for (wi, oi) in w.values_mut().iter_mut().zip(&out) {
            *wi = oi / sup;
        }
        let q = kernel::integrate_shifted(&w, measure, v);
        let term = if q > 0.0 {
            (k as f64 * log2_b + log2_scale + q.log2()).exp2()
        } else {
            0.0
        };
        sum += term;
        if term <= tol * sum {
            return Ok(ChiOutcome::Finite { chi: sum, z, terms: k });
        }
        let ratio = term / prev_term;
        if k >= 10 && ratio < 0.99999 && (ratio - prev_ratio).abs() < 1e-10 {
            // stable geometric regime: close the tail analytically
            sum += term * ratio / (1.0 - ratio);
            return Ok(ChiOutcome::Finite { chi: sum, z, terms: k });
        }
        prev_term = term;
        prev_ratio = ratio;
    }
    Err(Error::NonConvergence {
        what: "chi_quadrature series".into(),
        iters: cap as usize,
        residual: prev_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;

    fn uniform01() -> Measure {
        Measure::uniform(0.0, 1.0).unwrap()
    }

    fn gap(p: f64) -> Measure {
        Measure::gap(2, 0.8, p, 0.05).unwrap()
    }

    #[test]
    fn theta_below_one_is_exactly_zero() {
        let p = propagate(&uniform01(), 2, 0.9, 6, 256).unwrap();
        assert!(p.z.iter().skip(0).all(|&z| z == 0.0 || z == 1.0));
        assert_eq!(p.z[3], 0.0);
        assert_eq!(p.density.mass, 0.0);
    }

    #[test]
    fn uniform_first_levels_exact() {
        let p = propagate(&uniform01(), 2, 1.0, 2, 4096).unwrap();
        assert!((p.z[1] - 0.5).abs() < 1e-15, "Z_1 = {}", p.z[1]);
        // Z_2(1) = int_{1/2}^{1} (x + 1/2)/2 dx = 5/16
        assert!((p.z[2] - 0.3125).abs() < 1e-6, "Z_2 = {}", p.z[2]);
    }

    #[test]
    fn propagate_matches_mc_at_depth() {
        let m = uniform01();
        let p = propagate(&m, 2, 1.0, 5, 2048).unwrap();
        let (est, se) = oracles::mc_z(&m, 2, 1.0, 5, 2_000_000, 99, 2).unwrap();
        assert!(
            (p.z[5] - est).abs() < 4.0 * se,
            "grid {} mc {est} se {se}",
            p.z[5]
        );
    }

    #[test]
    fn gap_measures_are_geometric() {
        for p in [0.2, 0.4, 0.45, 0.55] {
            let m = gap(p);
            let prop = propagate(&m, 2, 1.0, 8, 2048).unwrap();
            for k in 1..=8 {
                let want = p.powi(k as i32);
                assert!(
                    (prop.z[k] - want).abs() < 2e-4 * want,
                    "p={p} k={k}: {} vs {want}",
                    prop.z[k]
                );
            }
        }
    }

    #[test]
    fn z_of_rho_gap_exact() {
        for p in [0.2, 0.4, 0.45, 0.55] {
            let r = z_of_rho(&gap(p), 2, 2048, 1e-9, 300).unwrap();
            assert!(r.converged);
            assert!((r.z - p).abs() < 1e-9, "p={p}: z={}", r.z);
            assert!(r.half_width < 1e-9);
            assert!(r.bracket.0 <= r.z + 1e-9 && r.z <= r.bracket.1 + 1e-9);
        }
    }

    #[test]
    fn z_of_rho_no_top_mass() {
        let r = z_of_rho(&Measure::uniform(0.0, 0.4).unwrap(), 2, 512, 1e-9, 100).unwrap();
        assert_eq!(r.z, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn z_of_rho_rejects_marginal() {
        let m = Measure::uniform(0.0, 0.5).unwrap();
        assert!(matches!(z_of_rho(&m, 2, 256, 1e-9, 50), Err(Error::Degenerate(_))));
    }

    #[test]
    fn z_profile_monotone_in_theta() {
        // Z_n(theta) non-decreasing in theta: check the traced profile by
        // comparing the two traced columns
        let r = z_of_rho(&uniform01(), 2, 1024, 1e-9, 200).unwrap();
        for (a, b) in r.trace.z_at_1.iter().zip(&r.trace.z_at_top) {
            assert!(a <= &(b + 1e-12));
        }
    }

    #[test]
    fn z_multiplicative_bounds() {
        // submultiplicative at theta = 1, supermultiplicative at theta_b
        let r = z_of_rho(&uniform01(), 2, 1024, 1e-12, 40).unwrap();
        let z1 = &r.trace.z_at_1;
        let zt = &r.trace.z_at_top;
        let n = z1.len().min(41);
        for i in 1..n {
            for j in 1..n {
                if i + j < n {
                    assert!(
                        z1[i + j] >= z1[i] * z1[j] * (1.0 - 1e-9),
                        "submult fails at {i}+{j}"
                    );
                    assert!(
                        zt[i + j] <= zt[i] * zt[j] * (1.0 + 1e-9),
                        "supermult fails at {i}+{j}"
                    );
                }
            }
        }
    }

    #[test]
    fn z_grid_refinement_stable() {
        let tol = 1e-6;
        let a = z_of_rho(&uniform01(), 2, 2048, tol, 400).unwrap();
        let b = z_of_rho(&uniform01(), 2, 4096, tol, 400).unwrap();
        assert!((a.z - b.z).abs() < 10.0 * tol, "{} vs {}", a.z, b.z);
    }

    #[test]
    fn psi_gap_is_one() {
        let m = gap(0.4);
        let prof = psi(&m, 2, 1.8, 2048, 1e-12).unwrap();
        assert!(prof.converged);
        for &v in prof.grid().values() {
            assert!((v - 1.0).abs() < 1e-8, "psi value {v}");
        }
        assert!((prof.eval0(0.5).unwrap() - 0.0).abs() < 1e-15);
        // E psi(X + 1) = 1 for the gap family at v = 1
        assert!((prof.mean_shifted(&m, 1.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn psi_uniform_monotone() {
        let prof = psi(&uniform01(), 2, 2.0, 1024, 1e-10).unwrap();
        let v = prof.grid().values();
        for w in v.windows(2) {
            assert!(w[1] >= w[0] - 1e-10);
        }
        assert!(v[0] > 0.0);
    }

    #[test]
    fn chi_gap_closed_form() {
        // sum (b p)^n = 1/(1 - 0.8) = 5
        let r = chi_quadrature(&gap(0.4), 2, 1.0, 2048, 1e-9).unwrap();
        match r {
            ChiOutcome::Finite { chi, z, .. } => {
                assert!((chi - 5.0).abs() < 1e-4, "chi = {chi}");
                assert!((z - 0.4).abs() < 1e-8);
            }
            _ => panic!("expected finite chi"),
        }
    }

    #[test]
    fn chi_divergent_at_critical() {
        let r = chi_quadrature(&gap(0.5), 2, 1.0, 1024, 1e-9).unwrap();
        assert!(matches!(r, ChiOutcome::Divergent { .. }));
        assert!(r.value().is_infinite());
    }

    #[test]
    fn chi_zero_when_never_triggered() {
        // support [0, 0.4], v = 0.5: X + v < 1 almost surely
        let m = Measure::uniform(0.0, 0.4).unwrap();
        let r = chi_quadrature(&m, 2, 0.5, 512, 1e-9).unwrap();
        match r {
            ChiOutcome::Finite { chi, z, .. } => {
                assert_eq!(chi, 0.0);
                assert_eq!(z, 0.0);
            }
            _ => panic!("expected finite chi"),
        }
    }

    #[test]
    fn conditioned_density_normalized() {
        let c = conditioned_density(&uniform01(), 2, 1.2, 6, 2048).unwrap();
        assert!(!c.degenerate);
        assert!((c.density.mass() - 1.0).abs() < 1e-10);
        // support inside [1, theta_b]
        assert!(c.density.lo() >= 1.0 - 1e-12);
    }

    #[test]
    fn conditioned_density_spike_at_n0() {
        let c = conditioned_density(&uniform01(), 2, 1.2, 0, 512).unwrap();
        assert!(c.degenerate);
        assert!((c.density.mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conditioned_density_zero_mass_rejected() {
        let m = Measure::uniform(0.0, 0.4).unwrap();
        assert!(conditioned_density(&m, 2, 1.0, 3, 256).is_err());
    }
}
