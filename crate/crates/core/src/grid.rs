//! Real functions on uniform grids with piecewise-linear interpolation.
//!
//! `GridFunction` is the shared numeric carrier for survival profiles,
//! conditioned densities, distribution functions and external-field
//! solutions. Values between nodes are linear; evaluation outside the
//! domain is an error.

use crate::error::{Error, Result};

/// Relative slack when checking whether a point lies inside the domain,
/// so that arguments produced by arithmetic like `lo + i*step` do not get
/// rejected for an ulp of rounding.
const DOMAIN_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!(
                "grid domain [{lo}, {hi}] must be a finite non-empty interval"
            )));
        }
        if values.len() < 2 {
            return Err(Error::invalid("grid needs at least 2 nodes"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid values must be finite"));
        }
        Ok(GridFunction { lo, hi, values })
    }

    pub fn from_fn(lo: f64, hi: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::invalid("grid needs at least 2 nodes"));
        }
        let step = (hi - lo) / (nodes - 1) as f64;
        let values = (0..nodes).map(|i| f(lo + step * i as f64)).collect();
        GridFunction::new(lo, hi, values)
    }

    pub fn constant(lo: f64, hi: f64, nodes: usize, c: f64) -> Result<Self> {
        GridFunction::from_fn(lo, hi, nodes, |_| c)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.values.len() {
            self.hi
        } else {
            self.lo + self.step() * i as f64
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Piecewise-linear evaluation. Arguments outside `[lo, hi]` (beyond a
    /// tiny rounding slack) are an explicit error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let slack = DOMAIN_SLACK * (self.hi - self.lo);
        if !x.is_finite() || x < self.lo - slack || x > self.hi + slack {
            return Err(Error::OutOfDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(self.eval_inside(x.clamp(self.lo, self.hi)))
    }

    /// Evaluation for callers that have already range-checked `x`.
    pub(crate) fn eval_inside(&self, x: f64) -> f64 {
        let step = self.step();
        let t = (x - self.lo) / step;
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let frac = (t - i as f64).clamp(0.0, 1.0);
        self.values[i] + (self.values[i + 1] - self.values[i]) * frac
    }

    /// Exact integral of the piecewise-linear interpolant over the domain.
    pub fn mass(&self) -> f64 {
        let step = self.step();
        let n = self.values.len();
        let mut acc = 0.0;
        for i in 0..n - 1 {
            acc += self.values[i] + self.values[i + 1];
        }
        acc * step / 2.0
    }

    /// Exact integral of the interpolant over `[a, hi]`; `a` may fall
    /// strictly between nodes.
    pub fn mass_from(&self, a: f64) -> Result<f64> {
        if a <= self.lo {
            return Ok(self.mass());
        }
        if a >= self.hi {
            return Ok(0.0);
        }
        let step = self.step();
        let t = (a - self.lo) / step;
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let fa = self.eval_inside(a);
        let right = self.node(i + 1);
        let mut acc = (fa + self.values[i + 1]) * (right - a) / 2.0;
        for j in i + 1..self.values.len() - 1 {
            acc += (self.values[j] + self.values[j + 1]) * step / 2.0;
        }
        Ok(acc)
    }

    /// Exact integral of the interpolant from node `i` to the end.
    pub fn mass_from_node(&self, i: usize) -> f64 {
        let step = self.step();
        let mut acc = 0.0;
        for j in i..self.values.len() - 1 {
            acc += (self.values[j] + self.values[j + 1]) * step / 2.0;
        }
        acc
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// Sup-norm distance to another function on the same grid.
    pub fn sup_diff(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.values.len() != other.values.len()
            || (self.lo - other.lo).abs() > 1e-12
            || (self.hi - other.hi).abs() > 1e-12
        {
            return Err(Error::GridMismatch(format!(
                "[{}, {}] x{} vs [{}, {}] x{}",
                self.lo,
                self.hi,
                self.values.len(),
                other.lo,
                other.hi,
                other.values.len()
            )));
        }
        Ok(())
    }
}

/// Exact integral over `[a, b]` of the product of two linear functions
/// given by their endpoint values.
#[inline]
pub(crate) fn linear_product_integral(a: f64, b: f64, fa: f64, fb: f64, ga: f64, gb: f64) -> f64 {
    (b - a) / 6.0 * (2.0 * fa * ga + fa * gb + fb * ga + 2.0 * fb * gb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_interpolates_linearly() {
        let g = GridFunction::new(0.0, 1.0, vec![0.0, 2.0, 4.0]).unwrap();
        assert_eq!(g.eval(0.25).unwrap(), 1.0);
        assert_eq!(g.eval(0.75).unwrap(), 3.0);
        assert_eq!(g.eval(1.0).unwrap(), 4.0);
    }

    #[test]
    fn eval_outside_domain_is_error() {
        let g = GridFunction::new(0.0, 1.0, vec![0.0, 1.0]).unwrap();
        assert!(matches!(g.eval(1.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(g.eval(-0.1), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn mass_is_exact_for_linear() {
        let g = GridFunction::from_fn(0.0, 2.0, 101, |x| 3.0 * x).unwrap();
        assert!((g.mass() - 6.0).abs() < 1e-12);
        assert!((g.mass_from(1.0).unwrap() - 4.5).abs() < 1e-12);
        // cut point strictly between nodes
        let a = 1.0 + g.step() / 3.0;
        let exact = 3.0 * (4.0 - a * a) / 2.0;
        assert!((g.mass_from(a).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridFunction::new(1.0, 1.0, vec![0.0, 0.0]).is_err());
        assert!(GridFunction::new(0.0, 1.0, vec![0.0]).is_err());
        assert!(GridFunction::new(0.0, 1.0, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn product_integral_matches_closed_form() {
        // f(x) = x, g(x) = 2 - x on [0, 2]: integral of x(2-x) = 4/3
        let v = linear_product_integral(0.0, 2.0, 0.0, 2.0, 2.0, 0.0);
        assert!((v - 4.0 / 3.0).abs() < 1e-14);
    }
}
