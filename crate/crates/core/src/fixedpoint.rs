//! Solvers for the model's three functional equations: the threshold-CDF
//! recurrence driven by Phi_b, the stationary law of the path value far
//! from the root, and the external-field equation, plus the derived
//! constants kappa(lambda) and c.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::{self, Conv, ConvKernel};
use crate::measures::Measure;
use crate::survival::{self, PsiProfile};

/// Distribution function of the minimum of b i.i.d. draws:
/// Phi_b(y) = 1 - (1 - y)^b on [0, 1].
pub fn phi_b(y: f64, b: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::invalid(format!("phi_b argument {y} outside [0, 1]")));
    }
    if b < 1 {
        return Err(Error::invalid("phi_b needs b >= 1"));
    }
    Ok(1.0 - (1.0 - y).powi(b as i32))
}

fn binomials(b: u32) -> Vec<f64> {
    let mut c = vec![1.0f64];
    for i in 0..b {
        c.push(c[i as usize] * (b - i) as f64 / (i + 1) as f64);
    }
    c
}

/// Exact integral over [x0, x1] of Phi_b(psi(x)) g(x) dx where psi and g
/// are linear with the given endpoint values. Expands (1 - psi)^b
/// binomially; all terms are polynomial moments of t on [0, 1].
fn phi_segment_integral(
    x0: f64,
    x1: f64,
    psi0: f64,
    psi1: f64,
    g0: f64,
    g1: f64,
    binom: &[f64],
) -> f64 {
    let w = x1 - x0;
    if w <= 0.0 {
        return 0.0;
    }
    let u0 = (1.0 - psi0).clamp(0.0, 1.0);
    let u1 = (1.0 - psi1).clamp(0.0, 1.0);
    let du = u1 - u0;
    let dg = g1 - g0;
    let b = binom.len() - 1;
    // moments m0 = int (u0 + t du)^b dt, m1 = int (u0 + t du)^b t dt
    let mut m0 = 0.0;
    let mut m1 = 0.0;
    let mut u0_pow = vec![1.0; b + 1];
    for i in 1..=b {
        u0_pow[i] = u0_pow[i - 1] * u0;
    }
    let mut du_pow = 1.0;
    for i in 0..=b {
        let c = binom[i] * u0_pow[b - i] * du_pow;
        m0 += c / (i as f64 + 1.0);
        m1 += c / (i as f64 + 2.0);
        du_pow *= du;
    }
    let plain = w * (g0 + g1) / 2.0;
    plain - w * (g0 * m0 + dg * m1)
}

/// One application of the threshold recurrence on the grid:
/// out(theta) = int_{x >= 1 - theta} Phi_b(psi((x + theta)/b)) rho(dx).
/// `b_pow` is the exponent used inside Phi (it equals b except in the
/// tamper-detection test).
fn psi_step(measure: &Measure, b: u32, b_pow: u32, psi_fn: &GridFunction, out: &mut [f64]) {
    let binom = binomials(b_pow);
    let bf = b as f64;
    let n = psi_fn.len();
    let step = psi_fn.step();
    for (i, slot) in out.iter_mut().enumerate() {
        let theta = psi_fn.lo() + step * i as f64;
        let x_lo_all = (1.0 - theta).max(0.0);
        let mut acc = 0.0;
        for p in measure.pieces() {
            let a = p.left.max(x_lo_all);
            let bnd = p.right;
            if bnd <= a {
                continue;
            }
            // walk sub-segments between grid-node crossings of (x+theta)/b
            let mut xa = a;
            let mut pa = psi_fn.eval_inside(((xa + theta) / bf).clamp(psi_fn.lo(), psi_fn.hi()));
            let mut ga = p.density_at(xa);
            // next x where (x+theta)/b hits a node above
            let arg_a = (xa + theta) / bf;
            let mut next_node = ((arg_a - psi_fn.lo()) / step).floor() as usize + 1;
            while xa < bnd {
                let x_next = if next_node >= n {
                    bnd
                } else {
                    (bf * (psi_fn.lo() + step * next_node as f64) - theta).min(bnd)
                };
                let xb = x_next.max(xa);
                if xb > xa {
                    let pb =
                        psi_fn.eval_inside(((xb + theta) / bf).clamp(psi_fn.lo(), psi_fn.hi()));
                    let gb = p.density_at(xb);
                    acc += phi_segment_integral(xa, xb, pa, pb, ga, gb, &binom);
                    xa = xb;
                    pa = pb;
                    ga = gb;
                }
                next_node += 1;
                if x_next >= bnd {
                    break;
                }
            }
        }
        *slot = acc.clamp(0.0, 1.0);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsiVerdict {
    /// sup Psi_n fell below eps: no infinite avalanche at any trigger.
    Vanishes,
    /// iterates stabilized above eps: the limit is nontrivial.
    Persists,
    /// neither within n_max iterations (expected near criticality).
    Undecided,
}

/// The decreasing sequence of threshold distribution functions and the
/// verdict on its limit.
#[derive(Clone, Debug)]
pub struct PsiSequence {
    pub iterates: Vec<GridFunction>,
    pub verdict: PsiVerdict,
    /// inf{theta : Psi(theta) > eps} when the limit persists.
    pub threshold: Option<f64>,
    pub iterations: u32,
}

impl PsiSequence {
    pub fn last(&self) -> &GridFunction {
        self.iterates.last().expect("at least Psi_0")
    }
}

/// Iterates Psi_{n+1}(theta) = E[Phi_b(Psi_n((X+theta)/b)); X >= 1-theta]
/// from Psi_0 = 1{theta >= 0} and classifies the limit.
pub fn psi_sequence(
    measure: &Measure,
    b: u32,
    theta_max: Option<f64>,
    nodes: usize,
    n_max: u32,
    eps: f64,
) -> Result<PsiSequence> {
    measure.require_flat()?;
    let s = measure.summary(b)?;
    if s.theta_marginal {
        return Err(Error::Degenerate(
            "x_star = 1 - 1/b: the marginal theta_b = 1 family is excluded".into(),
        ));
    }
    if b > 32 {
        return Err(Error::invalid("psi_sequence supports b <= 32"));
    }
    let default_max = (s.theta_b + 1.0).max(1.0 / (b as f64 - 1.0) + 0.5);
    let theta_max = theta_max.unwrap_or(default_max);
    // the recurrence evaluates Psi at (x + theta)/b <= (1 + theta_max)/b
    if theta_max < (1.0 + theta_max) / b as f64 {
        return Err(Error::invalid(format!(
            "theta_max = {theta_max} too small: needs theta_max >= 1/(b-1)"
        )));
    }
    if nodes < 8 || n_max == 0 {
        return Err(Error::invalid("psi_sequence needs nodes >= 8 and n_max >= 1"));
    }
    let mut iterates = vec![GridFunction::constant(0.0, theta_max, nodes, 1.0)?];
    let mut out = vec![0.0; nodes];
    let mut verdict = PsiVerdict::Undecided;
    let mut iterations = 0;
    for _ in 1..=n_max {
        let prev = iterates.last().unwrap();
        psi_step(measure, b, b, prev, &mut out);
        // invariants: non-decreasing in theta, non-increasing in n, in [0,1];
        // clamp the roundoff dust, loud failure for anything real
        let mut next = prev.clone();
        {
            let v = next.values_mut();
            let pv = prev.values();
            let mut run_max = 0.0f64;
            for i in 0..nodes {
                let mut x = out[i];
                debug_assert!(x <= pv[i] + 1e-9, "Psi monotonicity in n violated");
                x = x.min(pv[i]);
                debug_assert!(x >= run_max - 1e-9, "Psi monotonicity in theta violated");
                run_max = run_max.max(x);
                v[i] = run_max;
            }
        }
        let sup = next.max_value();
        let delta = next.sup_diff(iterates.last().unwrap())?;
        iterates.push(next);
        iterations += 1;
        if sup < eps {
            verdict = PsiVerdict::Vanishes;
            break;
        }
        if delta < eps * 1e-3 {
            verdict = PsiVerdict::Persists;
            break;
        }
    }
    let threshold = if verdict == PsiVerdict::Persists {
        let last = iterates.last().unwrap();
        last.values()
            .iter()
            .position(|&v| v > eps)
            .map(|i| last.node(i))
    } else {
        None
    };
    Ok(PsiSequence {
        iterates,
        verdict,
        threshold,
        iterations,
    })
}

/// Residual of the fixed-point equation at the final iterate: one more
/// application of the recurrence, sup-norm difference.
pub fn psi_fixed_point_residual(measure: &Measure, b: u32, seq: &PsiSequence) -> Result<f64> {
    let last = seq.last();
    let mut out = vec![0.0; last.len()];
    psi_step(measure, b, b, last, &mut out);
    Ok(last
        .values()
        .iter()
        .zip(&out)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
pub(crate) fn psi_step_tampered(
    measure: &Measure,
    b: u32,
    b_pow: u32,
    psi_fn: &GridFunction,
    out: &mut [f64],
) {
    psi_step(measure, b, b_pow, psi_fn, out)
}

/// Stationary law of the path value conditioned on survival.
#[derive(Clone, Debug)]
pub struct QLaw {
    pub density: GridFunction,
    /// Mass on [1, theta_b]: an independent computation of z(rho).
    pub z_hat: f64,
    /// sup-norm residual of the distributional identity at the fixed point.
    pub residual: f64,
    pub iterations: u32,
    /// Index of the grid node sitting exactly at 1.
    pub one_node: usize,
}

fn q_grid(theta_b: f64, b: u32, nodes: usize) -> (f64, f64, usize, usize) {
    // grid anchored so that 1 is a node; spans [1/b, theta_b] plus slack
    let span = theta_b - 1.0 / b as f64;
    let step = span / (nodes - 1) as f64;
    let below = ((1.0 - 1.0 / b as f64) / step).ceil() as usize;
    let above = ((theta_b - 1.0) / step).ceil() as usize + 1;
    let lo = 1.0 - below as f64 * step;
    let hi = 1.0 + above as f64 * step;
    (lo, hi, below + above + 1, below)
}

/// Solves the distributional identity: the law of X + Q/b conditioned on
/// Q >= 1 equals the law of Q. Iterates the normalized conditioned
/// transfer from a warm start (the conditioned level-8 density pushed one
/// unconditioned step).
pub fn q_infinity(
    measure: &Measure,
    b: u32,
    nodes: usize,
    tol: f64,
    iter_cap: u32,
) -> Result<QLaw> {
    q_infinity_from(measure, b, nodes, tol, iter_cap, 1.0)
}

/// Same solver with an explicit initialization value Q_0 = theta0; the
/// limit must not depend on it, which is a correctness check in itself.
pub fn q_infinity_from(
    measure: &Measure,
    b: u32,
    nodes: usize,
    tol: f64,
    iter_cap: u32,
    theta0: f64,
) -> Result<QLaw> {
    measure.require_flat()?;
    let s = measure.summary(b)?;
    if s.theta_marginal {
        return Err(Error::Degenerate(
            "x_star = 1 - 1/b: the marginal theta_b = 1 family is excluded".into(),
        ));
    }
    if s.mass_top == 0.0 {
        return Err(Error::Degenerate("q_infinity requires z(rho) > 0".into()));
    }
    let cd = survival::conditioned_density(measure, b, theta0, 8, nodes)?;
    let (lo, hi, n, one_node) = q_grid(s.theta_b, b, nodes);
    let step = (hi - lo) / (n - 1) as f64;
    // one unconditioned step spreads the conditioned law onto [1/b, theta_b]
    let h0 = kernel::convolve_forward_direct(&cd.density, measure, b, lo, step, n);
    let mut h = GridFunction::new(lo, hi, h0)?;
    let m = h.mass();
    if !(m > 0.0) {
        return Err(Error::Degenerate("empty initializer for q_infinity".into()));
    }
    h.scale(1.0 / m);

    let kern = ConvKernel::new(measure, b, lo, step, n, Conv::Forward)?;
    let mut raw = vec![0.0; n];
    let apply = |h: &GridFunction, raw: &mut Vec<f64>| -> Result<GridFunction> {
        let cond_mass = h.mass_from_node(one_node);
        if !(cond_mass > 0.0) {
            return Err(Error::Degenerate("conditioning mass vanished".into()));
        }
        kern.apply(h.values(), one_node, raw);
        let mut next = GridFunction::new(lo, hi, raw.clone())?;
        next.scale(1.0 / cond_mass);
        let m = next.mass();
        next.scale(1.0 / m);
        Ok(next)
    };

    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    for _ in 1..=iter_cap {
        let next = apply(&h, &mut raw)?;
        delta = next.sup_diff(&h)?;
        h = next;
        iterations += 1;
        if delta < tol {
            break;
        }
    }
    if delta >= tol {
        return Err(Error::NonConvergence {
            what: "q_infinity transfer iteration".into(),
            iters: iterations as usize,
            residual: delta,
        });
    }
    let residual = apply(&h, &mut raw)?.sup_diff(&h)?;
    let z_hat = h.mass_from_node(one_node);
    Ok(QLaw {
        density: h,
        z_hat,
        residual,
        iterations,
        one_node,
    })
}

/// External-field solution B(theta, lambda) on [1, theta_max]; equals
/// lambda below 1 exactly.
#[derive(Clone, Debug)]
pub struct BProfile {
    grid: GridFunction,
    pub lambda: f64,
    pub residual: f64,
    pub iterations: u32,
}

impl BProfile {
    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }

    /// B(theta): lambda below 1, interpolated above.
    pub fn eval0(&self, theta: f64) -> Result<f64> {
        if theta < self.grid.lo() {
            return Ok(self.lambda);
        }
        self.grid.eval(theta)
    }

    /// E_rho B(X + shift) with the below-1 part in closed form.
    pub fn mean_shifted(&self, measure: &Measure, shift: f64) -> f64 {
        self.lambda * measure.mass(0.0, 1.0 - shift, true, false)
            + kernel::integrate_shifted(&self.grid, measure, shift)
    }
}

/// Solves B = lambda + (1 - lambda) 1{theta >= 1} Phi_b(E B(X + theta/b))
/// by monotone iteration from B = lambda, with a safeguarded geometric
/// extrapolation every few sweeps (near criticality the plain iteration
/// contracts only at rate 1 - O(sqrt(lambda))).
pub fn b_infinity(
    measure: &Measure,
    b: u32,
    lambda: f64,
    theta_max: Option<f64>,
    nodes: usize,
    tol: f64,
    iter_cap: u32,
) -> Result<BProfile> {
    measure.require_flat()?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!("lambda = {lambda} outside [0, 1]")));
    }
    let s = measure.summary(b)?;
    if s.theta_marginal {
        return Err(Error::Degenerate(
            "x_star = 1 - 1/b: the marginal theta_b = 1 family is excluded".into(),
        ));
    }
    let hi = theta_max.unwrap_or(s.theta_b).max(s.theta_b).max(1.0 + 1e-6);
    let lo = 1.0;
    let step = (hi - lo) / (nodes - 1) as f64;
    let kern = ConvKernel::new(measure, b, lo, step, nodes, Conv::Backward)?;
    // mass of {X + theta/b < 1} per node: the below-1 part contributes
    // lambda times this
    let below: Vec<f64> = (0..nodes)
        .map(|i| {
            let theta = lo + step * i as f64;
            measure.mass(0.0, 1.0 - theta / b as f64, true, false)
        })
        .collect();

    let mut bfun = GridFunction::constant(lo, hi, nodes, lambda)?;
    let mut raw = vec![0.0; nodes];
    let mut prev_delta_vec: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let mut converged = false;
    let step_once = |bfun: &GridFunction, raw: &mut Vec<f64>| -> Vec<f64> {
        kern.apply(bfun.values(), 0, raw);
        (0..nodes)
            .map(|i| {
                let g = (lambda * below[i] + raw[i]).clamp(0.0, 1.0);
                lambda + (1.0 - lambda) * (1.0 - (1.0 - g).powi(b as i32))
            })
            .collect()
    };
    for k in 1..=iter_cap {
        let next = step_once(&bfun, &mut raw);
        let delta_vec: Vec<f64> = next
            .iter()
            .zip(bfun.values())
            .map(|(a, b)| a - b)
            .collect();
        let delta = delta_vec.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        bfun.values_mut().copy_from_slice(&next);
        iterations = k;
        if delta < tol {
            converged = true;
            break;
        }
        if k % 8 == 0 {
            if let Some(prev) = &prev_delta_vec {
                let num: f64 = delta_vec.iter().zip(prev).map(|(a, b)| a * b).sum();
                let den: f64 = prev.iter().map(|d| d * d).sum();
                if den > 0.0 {
                    let rho = num / den;
                    if rho > 0.0 && rho < 1.0 - 1e-12 {
                        let gain = rho / (1.0 - rho);
                        for (v, d) in bfun.values_mut().iter_mut().zip(&delta_vec) {
                            *v = (*v + d * gain).clamp(lambda, 1.0);
                        }
                    }
                }
            }
        }
        prev_delta_vec = Some(delta_vec);
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "b_infinity monotone iteration".into(),
            iters: iterations as usize,
            residual: prev_delta_vec
                .map(|v| v.iter().fold(0.0f64, |m, d| m.max(d.abs())))
                .unwrap_or(f64::NAN),
        });
    }
    let next = step_once(&bfun, &mut raw);
    let residual = next
        .iter()
        .zip(bfun.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(BProfile {
        grid: bfun,
        lambda,
        residual,
        iterations,
    })
}

/// kappa(lambda) = E[ (E_X B(X + Q/b, lambda))^2 | Q >= 1 ] and the
/// stationary field B_star = E B(Q, lambda), both against the stationary
/// law of Q.
pub fn kappa_and_bstar(
    measure: &Measure,
    b: u32,
    qlaw: &QLaw,
    binf: &BProfile,
) -> Result<(f64, f64)> {
    if qlaw.density.len() != binf.grid.len() {
        return Err(Error::GridMismatch(format!(
            "qlaw has {} nodes, B has {}; resample rejected",
            qlaw.density.len(),
            binf.grid.len()
        )));
    }
    let h = &qlaw.density;
    let n = h.len();
    let cond_mass = h.mass_from_node(qlaw.one_node);
    if !(cond_mass > 0.0) {
        return Err(Error::Degenerate("zero conditional mass in kappa".into()));
    }
    let bf = b as f64;
    let g_sq: Vec<f64> = (0..n)
        .map(|i| {
            let q = h.node(i);
            let g = binf.mean_shifted(measure, q / bf);
            g * g
        })
        .collect();
    let kappa = kernel::product_mass_from(h, &g_sq, qlaw.one_node) / cond_mass;
    let b_at: Vec<f64> = (0..n)
        .map(|i| binf.eval0(h.node(i)).unwrap_or(binf.lambda))
        .collect();
    let b_star = kernel::product_mass_from(h, &b_at, 0);
    Ok((kappa, b_star))
}

/// The critical amplitude constant: 1/c^2 = (b-1)/2 E[(E_X psi(X + Q/b))^2 | Q >= 1].
#[derive(Clone, Copy, Debug)]
pub struct CRhoOutcome {
    pub c: f64,
    /// z_hat of the supplied stationary law; c is meaningful at z = 1/b.
    pub z_hat: f64,
    /// false when the inputs are off-critical by more than 1e-4.
    pub critical: bool,
}

pub fn c_rho(measure: &Measure, b: u32, qlaw: &QLaw, psi: &PsiProfile) -> Result<CRhoOutcome> {
    let h = &qlaw.density;
    let cond_mass = h.mass_from_node(qlaw.one_node);
    if !(cond_mass > 0.0) {
        return Err(Error::Degenerate("zero conditional mass in c_rho".into()));
    }
    let bf = b as f64;
    let inner_sq: Vec<f64> = (0..h.len())
        .map(|i| {
            let q = h.node(i);
            let e = kernel::integrate_shifted(psi.grid(), measure, q / bf);
            e * e
        })
        .collect();
    let mean = kernel::product_mass_from(h, &inner_sq, qlaw.one_node) / cond_mass;
    if !(mean > 0.0) {
        return Err(Error::Degenerate("degenerate psi in c_rho".into()));
    }
    let c = (2.0 / ((bf - 1.0) * mean)).sqrt();
    let z_c = 1.0 / bf;
    Ok(CRhoOutcome {
        c,
        z_hat: qlaw.z_hat,
        critical: (qlaw.z_hat - z_c).abs() <= 1e-4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::psi;

    fn uniform01() -> Measure {
        Measure::uniform(0.0, 1.0).unwrap()
    }

    fn gap(p: f64) -> Measure {
        Measure::gap(2, 0.8, p, 0.05).unwrap()
    }

    #[test]
    fn phi_b_values() {
        assert_eq!(phi_b(0.0, 3).unwrap(), 0.0);
        assert_eq!(phi_b(1.0, 3).unwrap(), 1.0);
        assert!((phi_b(0.5, 2).unwrap() - 0.75).abs() < 1e-15);
        assert!(phi_b(1.2, 2).is_err());
        assert!(phi_b(-0.1, 2).is_err());
    }

    #[test]
    fn psi_one_is_top_mass() {
        // Psi_1(theta) = rho([1 - theta, 1]) exactly at the nodes
        for m in [uniform01(), gap(0.5)] {
            let seq = psi_sequence(&m, 2, Some(2.6), 1301, 1, 1e-6).unwrap();
            let psi1 = &seq.iterates[1];
            for i in (0..psi1.len()).step_by(97) {
                let theta = psi1.node(i);
                let want = m.mass(1.0 - theta, 1.0, true, true);
                assert!(
                    (psi1.values()[i] - want).abs() < 1e-12,
                    "theta {theta}: {} vs {want}",
                    psi1.values()[i]
                );
            }
        }
        // uniform at theta = 0.3 interpolates exactly (Psi_1 linear there)
        let seq = psi_sequence(&uniform01(), 2, Some(3.0), 2001, 1, 1e-6).unwrap();
        assert!((seq.iterates[1].eval(0.3).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn psi_verdicts_on_gap_family() {
        let sub = psi_sequence(&gap(0.4), 2, None, 2048, 200, 1e-6).unwrap();
        assert_eq!(sub.verdict, PsiVerdict::Vanishes);
        assert!(sub.threshold.is_none());

        let sup = psi_sequence(&gap(0.6), 2, None, 2048, 200, 1e-6).unwrap();
        assert_eq!(sup.verdict, PsiVerdict::Persists);
        let th = sup.threshold.unwrap();
        let spacing = sup.last().step();
        assert!(
            (th - 0.2).abs() <= spacing + 1e-12,
            "threshold {th} vs 0.2 (spacing {spacing})"
        );
    }

    #[test]
    fn psi_fixed_point_residual_small_when_persists() {
        let seq = psi_sequence(&gap(0.6), 2, None, 1024, 300, 1e-8).unwrap();
        assert_eq!(seq.verdict, PsiVerdict::Persists);
        let r = psi_fixed_point_residual(&gap(0.6), 2, &seq).unwrap();
        assert!(r < 1e-7, "residual {r}");
    }

    #[test]
    fn tampered_phi_exponent_is_detected() {
        // off-by-one exponent inside Phi_b must visibly change the iterate
        let m = gap(0.6);
        let seq = psi_sequence(&m, 2, None, 512, 40, 1e-6).unwrap();
        let last = seq.last();
        let mut good = vec![0.0; last.len()];
        let mut bad = vec![0.0; last.len()];
        psi_step_tampered(&m, 2, 2, last, &mut good);
        psi_step_tampered(&m, 2, 3, last, &mut bad);
        let diff = good
            .iter()
            .zip(&bad)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff > 1e-3, "tampering invisible: {diff}");
    }

    #[test]
    fn q_infinity_gap_z_hat() {
        let q = q_infinity(&gap(0.4), 2, 2048, 1e-11, 400).unwrap();
        assert!((q.density.mass() - 1.0).abs() < 1e-10);
        assert!((q.z_hat - 0.4).abs() < 1e-6, "z_hat {}", q.z_hat);
        assert!(q.residual < 1e-10);
        // support stays within [1/b, theta_b] + grid slack
        assert!(q.density.hi() <= 1.6 + 2.0 * q.density.step() + 1e-9);
    }

    #[test]
    fn q_infinity_theta_independent() {
        let a = q_infinity_from(&uniform01(), 2, 1024, 1e-11, 600, 1.0).unwrap();
        let b = q_infinity_from(&uniform01(), 2, 1024, 1e-11, 600, 2.0).unwrap();
        assert!(a.density.sup_diff(&b.density).unwrap() < 1e-9);
    }

    #[test]
    fn q_infinity_no_atom_at_one() {
        let q = q_infinity(&uniform01(), 2, 2048, 1e-11, 600).unwrap();
        let h = &q.density;
        let step = h.step();
        let sup = h.max_value();
        // mass near 1 scales like the window; no point mass can hide there
        let near: f64 = h.mass_from(1.0 - step).unwrap() - h.mass_from(1.0 + step).unwrap();
        assert!(near <= 4.0 * step * sup, "near-1 mass {near}");
    }

    #[test]
    fn b_infinity_identities() {
        let m = gap(0.5);
        // lambda = 1: B = 1 on theta >= 1
        let b1 = b_infinity(&m, 2, 1.0, None, 256, 1e-12, 50).unwrap();
        for &v in b1.grid().values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        // below 1 the profile is lambda exactly
        let bl = b_infinity(&m, 2, 0.3, None, 256, 1e-10, 2000).unwrap();
        assert_eq!(bl.eval0(0.5).unwrap(), 0.3);
        // B >= lambda everywhere, monotone in theta
        for w in bl.grid().values().windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        assert!(bl.grid().min_value() >= 0.3 - 1e-12);
    }

    #[test]
    fn b_infinity_monotone_in_lambda() {
        let m = uniform01();
        let a = b_infinity(&m, 2, 1e-3, None, 512, 1e-11, 5000).unwrap();
        let b = b_infinity(&m, 2, 2e-3, None, 512, 1e-11, 5000).unwrap();
        for (x, y) in a.grid().values().iter().zip(b.grid().values()) {
            assert!(x <= &(y + 1e-10));
        }
    }

    #[test]
    fn b_infinity_critical_gap_sqrt_lambda() {
        // closed-form small-lambda root of u = lambda + (1-lambda) Phi_2((u+lambda)/2)
        let lambda = 1e-6f64;
        let w = (-4.0 * lambda + (32.0 * lambda - 16.0 * lambda * lambda).sqrt())
            / (2.0 * (1.0 - lambda));
        let u_exact = w - lambda;
        let bp = b_infinity(&gap(0.5), 2, lambda, None, 2048, 1e-12, 100_000).unwrap();
        let got = bp.eval0(1.0).unwrap();
        assert!(
            (got - u_exact).abs() < 1e-8,
            "B(1) = {got} vs scalar root {u_exact}"
        );
        // and the sqrt-lambda asymptote: B(1)/sqrt(lambda) ~ 2 sqrt(2)
        let ratio = got / lambda.sqrt();
        assert!((ratio / (2.0 * 2.0f64.sqrt()) - 1.0).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn kappa_small_lambda_identity() {
        // ((b-1)/2) kappa / lambda -> 1 at criticality
        let m = gap(0.5);
        let lambda = 1e-6;
        let q = q_infinity(&m, 2, 2048, 1e-11, 400).unwrap();
        let nodes = q.density.len();
        let bp = b_infinity(&m, 2, lambda, None, nodes, 1e-12, 100_000).unwrap();
        let (kappa, b_star) = kappa_and_bstar(&m, 2, &q, &bp).unwrap();
        let check = 0.5 * kappa / lambda;
        assert!((check - 1.0).abs() < 0.02, "(b-1)/2 kappa/lambda = {check}");
        assert!(kappa <= bp.grid().max_value().powi(2) + 1e-12);
        assert!(b_star > 0.0 && b_star < 1.0);
    }

    #[test]
    fn kappa_zero_below_criticality_at_lambda_zero() {
        let m = gap(0.4);
        let q = q_infinity(&m, 2, 1024, 1e-11, 400).unwrap();
        let bp = b_infinity(&m, 2, 0.0, None, q.density.len(), 1e-12, 50).unwrap();
        let (kappa, b_star) = kappa_and_bstar(&m, 2, &q, &bp).unwrap();
        assert_eq!(kappa, 0.0);
        assert_eq!(b_star, 0.0);
    }

    #[test]
    fn kappa_rejects_mixed_resolution() {
        let m = gap(0.5);
        let q = q_infinity(&m, 2, 512, 1e-10, 400).unwrap();
        let bp = b_infinity(&m, 2, 0.1, None, 300, 1e-10, 2000).unwrap();
        assert!(matches!(
            kappa_and_bstar(&m, 2, &q, &bp),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn c_rho_gap_closed_form() {
        // inner expectation is p identically, so c = sqrt(2 b^2/(b-1)) = 2 sqrt(2)
        let m = gap(0.5);
        let q = q_infinity(&m, 2, 2048, 1e-11, 400).unwrap();
        let prof = psi(&m, 2, 1.8, 2048, 1e-12).unwrap();
        let out = c_rho(&m, 2, &q, &prof).unwrap();
        assert!(out.critical);
        let want = 2.0 * 2.0f64.sqrt();
        assert!((out.c - want).abs() < 1e-6, "c = {} vs {want}", out.c);
    }

    #[test]
    fn c_rho_homogeneity() {
        // psi scaled by 2 halves c
        let m = gap(0.5);
        let q = q_infinity(&m, 2, 1024, 1e-11, 400).unwrap();
        let prof = psi(&m, 2, 1.8, 1024, 1e-12).unwrap();
        let c1 = c_rho(&m, 2, &q, &prof).unwrap().c;
        let c2 = c_rho(&m, 2, &q, &prof.scaled(2.0)).unwrap().c;
        assert!((c2 - c1 / 2.0).abs() < 1e-9);
    }
}
