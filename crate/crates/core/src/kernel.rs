//! Exact piecewise-linear integration of grid functions against the
//! measure density.
//!
//! Every solver step below is an integral of the form
//! `int f(u) phi(t + a u) du` with `f` piecewise linear on a uniform grid
//! and `phi` the piecewise-linear density. Decomposing `f` into hat
//! functions makes the integral a lattice convolution: the hat/density
//! overlap depends only on `i*b - j`, so it is precomputed once per grid
//! and each solver step is a Toeplitz mat-vec. The node values of the
//! result are exact given the PL input; the only discretization error in
//! the solvers is re-representing the output as PL through its nodes.

use crate::error::{Error, Result};
use crate::grid::{linear_product_integral, GridFunction};
use crate::measures::Measure;

#[derive(Clone, Copy, PartialEq)]
enum HatPart {
    Full,
    RightHalfOnly, // hat truncated at the domain's left edge
    LeftHalfOnly,  // hat truncated at the domain's right edge
}

/// Integral over s of hat(s) * phi(t + a s), with hat of half-width delta
/// (possibly truncated to one side).
fn hat_phi_integral(measure: &Measure, t: f64, a: f64, delta: f64, part: HatPart) -> f64 {
    let mut acc = 0.0;
    // the hat's two linear legs
    let legs: [(f64, f64); 2] = [(-delta, 0.0), (0.0, delta)];
    let keep = |leg: usize| match part {
        HatPart::Full => true,
        HatPart::RightHalfOnly => leg == 1,
        HatPart::LeftHalfOnly => leg == 0,
    };
    let w_at = |s: f64| 1.0 - s.abs() / delta;
    for (leg, &(lo, hi)) in legs.iter().enumerate() {
        if !keep(leg) {
            continue;
        }
        for p in measure.pieces() {
            // s-window where t + a s lies inside the piece
            let (mut s0, mut s1) = if a > 0.0 {
                ((p.left - t) / a, (p.right - t) / a)
            } else {
                ((p.right - t) / a, (p.left - t) / a)
            };
            s0 = s0.max(lo);
            s1 = s1.min(hi);
            if s1 <= s0 {
                continue;
            }
            let f0 = p.density_at(t + a * s0);
            let f1 = p.density_at(t + a * s1);
            acc += linear_product_integral(s0, s1, w_at(s0), w_at(s1), f0, f1);
        }
    }
    acc
}

/// Direction of the density argument in the integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Conv {
    /// out(c) = int f(u) phi(c - u/b) du  - density propagation
    Forward,
    /// out(c) = int f(u) phi(u - c/b) du  - profile recursion
    Backward,
}

/// Precomputed lattice kernel for one (grid, measure, b, direction).
pub struct ConvKernel {
    conv: Conv,
    b: u32,
    n: usize,
    k_lo: i64,
    full: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl ConvKernel {
    /// Kernel for a map from the grid onto itself. `lo`/`step`/`n` describe
    /// both the input and the output grid.
    pub fn new(measure: &Measure, b: u32, lo: f64, step: f64, n: usize, conv: Conv) -> Result<ConvKernel> {
        measure.require_flat()?;
        if b < 2 {
            return Err(Error::invalid("convolution kernel needs b >= 2"));
        }
        if n < 2 || !(step > 0.0) {
            return Err(Error::invalid("degenerate kernel grid"));
        }
        let a = match conv {
            Conv::Forward => -1.0 / b as f64,
            Conv::Backward => 1.0,
        };
        // lattice: t(i, j) = lo (1 - 1/b) + k step/b with k = i b - j
        // (forward) or k = j b - i (backward)
        let t_base = lo * (1.0 - 1.0 / b as f64);
        let h = step / b as f64;
        let supp_lo = measure.pieces().iter().map(|p| p.left).fold(f64::INFINITY, f64::min);
        let supp_hi = measure
            .pieces()
            .iter()
            .map(|p| p.right)
            .fold(f64::NEG_INFINITY, f64::max);
        let t_lo = supp_lo - a.abs() * step;
        let t_hi = supp_hi + a.abs() * step;
        let k_all_lo = -((n as i64) - 1);
        let k_all_hi = (n as i64 - 1) * b as i64;
        let k_lo = (((t_lo - t_base) / h).floor() as i64 - 1).max(k_all_lo);
        let k_hi = (((t_hi - t_base) / h).ceil() as i64 + 1).min(k_all_hi);
        // an empty overlap is a legitimate zero operator
        let m = (k_hi - k_lo + 1).max(0) as usize;
        let mut full = Vec::with_capacity(m);
        let mut left = Vec::with_capacity(m);
        let mut right = Vec::with_capacity(m);
        for k in k_lo..=k_hi {
            let t = t_base + k as f64 * h;
            full.push(hat_phi_integral(measure, t, a, step, HatPart::Full));
            left.push(hat_phi_integral(measure, t, a, step, HatPart::RightHalfOnly));
            right.push(hat_phi_integral(measure, t, a, step, HatPart::LeftHalfOnly));
        }
        Ok(ConvKernel {
            conv,
            b,
            n,
            k_lo,
            full,
            left,
            right,
        })
    }

    /// Applies the integral operator to the PL function given by `input`
    /// node values. Nodes below `first_active` are treated as zero and the
    /// function is zero outside the grid; the node at `first_active` gets
    /// the edge (half-hat) weight, matching a function that jumps there.
    pub fn apply(&self, input: &[f64], first_active: usize, out: &mut [f64]) {
        assert_eq!(input.len(), self.n);
        assert_eq!(out.len(), self.n);
        let n = self.n as i64;
        let b = self.b as i64;
        let k_hi = self.k_lo + self.full.len() as i64 - 1;
        let fa = first_active as i64;
        let last = n - 1;
        for i in 0..n {
            // j-window with nonzero kernel
            let (j0, j1) = match self.conv {
                Conv::Forward => (i * b - k_hi, i * b - self.k_lo),
                Conv::Backward => (
                    (self.k_lo + i + b - 1).div_euclid(b),
                    (k_hi + i).div_euclid(b),
                ),
            };
            let j0 = j0.max(fa);
            let j1 = j1.min(last);
            let mut acc = 0.0;
            let k_of = |j: i64| match self.conv {
                Conv::Forward => i * b - j,
                Conv::Backward => j * b - i,
            };
            for j in j0..=j1 {
                acc += input[j as usize] * self.full[(k_of(j) - self.k_lo) as usize];
            }
            // edge nodes carry half-hats: swap in the truncated weights
            if j0 <= fa && fa <= j1 {
                let idx = (k_of(fa) - self.k_lo) as usize;
                acc += input[fa as usize] * (self.left[idx] - self.full[idx]);
            }
            if j0 <= last && last <= j1 && last != fa {
                let idx = (k_of(last) - self.k_lo) as usize;
                acc += input[last as usize] * (self.right[idx] - self.full[idx]);
            }
            out[i as usize] = acc;
        }
    }
}

/// Direct evaluation of the forward integral
/// out(c_i) = int f(u) phi(c_i - u/b) du on an arbitrary output grid
/// (`f` is zero outside its domain). One-off cross-grid helper.
pub fn convolve_forward_direct(
    f: &GridFunction,
    measure: &Measure,
    b: u32,
    out_lo: f64,
    out_step: f64,
    out_n: usize,
) -> Vec<f64> {
    let bf = b as f64;
    let mut out = Vec::with_capacity(out_n);
    for i in 0..out_n {
        let c = out_lo + out_step * i as f64;
        let mut acc = 0.0;
        for p in measure.pieces() {
            // u-window where c - u/b lies inside the piece
            let u0 = (bf * (c - p.right)).max(f.lo());
            let u1 = (bf * (c - p.left)).min(f.hi());
            if u1 <= u0 {
                continue;
            }
            acc += integrate_product_over(f, u0, u1, |u| p.density_at(c - u / bf));
        }
        out.push(acc);
    }
    out
}

/// int_{u in [lo, hi]} f(u) phi(u - shift) du with f zero outside its grid.
pub fn integrate_shifted(f: &GridFunction, measure: &Measure, shift: f64) -> f64 {
    let mut acc = 0.0;
    for p in measure.pieces() {
        let u0 = (p.left + shift).max(f.lo());
        let u1 = (p.right + shift).min(f.hi());
        if u1 <= u0 {
            continue;
        }
        acc += integrate_product_over(f, u0, u1, |u| p.density_at(u - shift));
    }
    acc
}

/// Exact integral over [u0, u1] of f (PL on its grid) times a function that
/// is linear between f's nodes; `g` is sampled at segment endpoints.
fn integrate_product_over(f: &GridFunction, u0: f64, u1: f64, g: impl Fn(f64) -> f64) -> f64 {
    if u1 <= u0 {
        return 0.0;
    }
    let step = f.step();
    let lo = f.lo();
    let n = f.len();
    let mut i = (((u0 - lo) / step).floor() as isize).clamp(0, n as isize - 2) as usize;
    let mut a = u0;
    let mut fa = f.eval_inside(a);
    let mut ga = g(a);
    let mut acc = 0.0;
    while a < u1 {
        let right = if i + 1 >= n - 1 {
            u1
        } else {
            (lo + step * (i + 1) as f64).min(u1)
        };
        if right > a {
            let fb = f.eval_inside(right);
            let gb = g(right);
            acc += linear_product_integral(a, right, fa, fb, ga, gb);
            a = right;
            fa = fb;
            ga = gb;
        }
        i += 1;
    }
    acc
}

/// Exact integral of the product of two PL functions on the same grid,
/// from node `from` to the end.
pub fn product_mass_from(f: &GridFunction, g: &[f64], from: usize) -> f64 {
    let v = f.values();
    assert_eq!(v.len(), g.len());
    let step = f.step();
    let mut acc = 0.0;
    for j in from..v.len() - 1 {
        acc += linear_product_integral(0.0, step, v[j], v[j + 1], g[j], g[j + 1]);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform01() -> Measure {
        Measure::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn forward_kernel_matches_direct() {
        let m = Measure::gap(2, 0.8, 0.4, 0.05).unwrap();
        let n = 257;
        let lo = 1.0;
        let hi = 1.8;
        let step = (hi - lo) / (n - 1) as f64;
        let f = GridFunction::from_fn(lo, hi, n, |q| (q - 1.0) * (2.0 - q) + 0.3).unwrap();
        let kern = ConvKernel::new(&m, 2, lo, step, n, Conv::Forward).unwrap();
        let mut out = vec![0.0; n];
        kern.apply(f.values(), 0, &mut out);
        let direct = convolve_forward_direct(&f, &m, 2, lo, step, n);
        for i in 0..n {
            assert!(
                (out[i] - direct[i]).abs() < 1e-12,
                "node {i}: {} vs {}",
                out[i],
                direct[i]
            );
        }
    }

    #[test]
    fn backward_apply_reproduces_shifted_integral() {
        let m = uniform01();
        let n = 513;
        let lo = 1.0;
        let hi = 2.0;
        let step = (hi - lo) / (n - 1) as f64;
        let f = GridFunction::from_fn(lo, hi, n, |q| 1.0 + 0.5 * (q - 1.5).powi(2)).unwrap();
        let kern = ConvKernel::new(&m, 2, lo, step, n, Conv::Backward).unwrap();
        let mut out = vec![0.0; n];
        kern.apply(f.values(), 0, &mut out);
        for &i in &[0usize, 1, 100, 256, 511, 512] {
            let theta = lo + step * i as f64;
            // int f(x + theta/2) dx over x in [0,1] with f zero below 1
            let want = integrate_shifted(&f, &m, theta / 2.0);
            assert!(
                (out[i] - want).abs() < 1e-12,
                "node {i}: {} vs {want}",
                out[i]
            );
        }
    }

    #[test]
    fn restriction_uses_half_hat() {
        // f == 1 on [0.5, 2.0]; restricted from u = 1.0 (a node), the
        // forward integral against uniform(0,1) at c must equal the exact
        // mass of the overlap.
        let m = uniform01();
        let n = 601;
        let lo = 0.5;
        let hi = 2.0;
        let step = (hi - lo) / (n - 1) as f64;
        let first = ((1.0 - lo) / step).round() as usize;
        assert!(((lo + first as f64 * step) - 1.0).abs() < 1e-12);
        let ones = vec![1.0; n];
        let kern = ConvKernel::new(&m, 2, lo, step, n, Conv::Forward).unwrap();
        let mut out = vec![0.0; n];
        kern.apply(&ones, first, &mut out);
        for &i in &[0usize, 200, 400, 600] {
            let c = lo + step * i as f64;
            // int_{u >= 1} 1 * phi(c - u/2) du: u in [2(c-1), 2c] cap [1, 2]
            let u0 = (2.0 * (c - 1.0)).max(1.0);
            let u1 = (2.0 * c).min(2.0);
            let want = (u1 - u0).max(0.0);
            assert!((out[i] - want).abs() < 1e-12, "node {i}: {} vs {want}", out[i]);
        }
    }

    #[test]
    fn integrate_shifted_closed_form() {
        let m = uniform01();
        let f = GridFunction::from_fn(1.0, 2.0, 2001, |q| q).unwrap();
        // int_{x in [0,1]} f(x + 0.7) with f = q on [1, 2], zero elsewhere:
        // x in [0.3, 1] -> integral of (x + 0.7) = 0.7*0.7 + (1 - 0.09)/2
        let want = 0.7 * 0.7 + (1.0 - 0.09) / 2.0;
        assert!((integrate_shifted(&f, &m, 0.7) - want).abs() < 1e-12);
    }

    #[test]
    fn product_mass_matches_quadrature() {
        let f = GridFunction::from_fn(0.0, 1.0, 1001, |x| x).unwrap();
        let g: Vec<f64> = (0..1001).map(|i| 1.0 - i as f64 / 1000.0).collect();
        // int x (1-x) = 1/6
        assert!((product_mass_from(&f, &g, 0) - 1.0 / 6.0).abs() < 1e-9);
    }
}
