//! The single-site energy distribution: piecewise-linear densities on
//! [0, 1] plus optional atoms.
//!
//! Piecewise-linear densities close under mixing, admit exact quadrature
//! and exact inverse-CDF sampling, which keeps the downstream grid solvers
//! free of density-representation error.

use crate::error::{Error, Result};

/// Total-mass validation tolerance.
pub const MASS_TOL: f64 = 1e-12;

/// One linear density block: `f_left` at `left` to `f_right` at `right`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub left: f64,
    pub right: f64,
    pub f_left: f64,
    pub f_right: f64,
}

impl Piece {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn mass(&self) -> f64 {
        (self.f_left + self.f_right) / 2.0 * self.width()
    }

    /// Density at `x` inside `[left, right]`.
    pub fn density_at(&self, x: f64) -> f64 {
        let t = (x - self.left) / self.width();
        self.f_left + (self.f_right - self.f_left) * t
    }

    /// Integral of the density over `[c, d]` which must lie inside the piece.
    fn integral(&self, c: f64, d: f64) -> f64 {
        if d <= c {
            return 0.0;
        }
        (self.density_at(c) + self.density_at(d)) / 2.0 * (d - c)
    }
}

/// A point mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

#[derive(Clone, Debug)]
enum SampleSeg {
    Lin {
        x0: f64,
        x1: f64,
        f0: f64,
        f1: f64,
    },
    Point {
        x: f64,
    },
}

/// A Borel probability measure on [0, 1]: ordered non-overlapping linear
/// density pieces plus atoms, total mass 1.
#[derive(Clone, Debug)]
pub struct Measure {
    pieces: Vec<Piece>,
    atoms: Vec<Atom>,
    // inverse-CDF table: coordinate-ordered segments with cumulative mass
    segs: Vec<SampleSeg>,
    cum: Vec<f64>,
}

impl PartialEq for Measure {
    fn eq(&self, other: &Self) -> bool {
        self.pieces == other.pieces && self.atoms == other.atoms
    }
}

impl Measure {
    /// General constructor; validates all invariants.
    pub fn piecewise(pieces: Vec<Piece>, atoms: Vec<Atom>) -> Result<Measure> {
        let mut pieces: Vec<Piece> = pieces
            .into_iter()
            .filter(|p| p.f_left != 0.0 || p.f_right != 0.0)
            .collect();
        pieces.sort_by(|a, b| a.left.total_cmp(&b.left));
        for p in &pieces {
            if !(p.left.is_finite() && p.right.is_finite()) || p.left < 0.0 || p.right > 1.0 {
                return Err(Error::InvalidMeasure(format!(
                    "piece [{}, {}] outside [0, 1]",
                    p.left, p.right
                )));
            }
            if p.right <= p.left {
                return Err(Error::InvalidMeasure(format!(
                    "piece [{}, {}] is empty or reversed",
                    p.left, p.right
                )));
            }
            if p.f_left < 0.0 || p.f_right < 0.0 || !p.f_left.is_finite() || !p.f_right.is_finite()
            {
                return Err(Error::InvalidMeasure(format!(
                    "negative density on piece [{}, {}]",
                    p.left, p.right
                )));
            }
        }
        for w in pieces.windows(2) {
            if w[1].left < w[0].right - 1e-15 {
                return Err(Error::InvalidMeasure(format!(
                    "pieces [{}, {}] and [{}, {}] overlap",
                    w[0].left, w[0].right, w[1].left, w[1].right
                )));
            }
        }
        let mut atoms: Vec<Atom> = atoms.into_iter().collect();
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
        for a in &atoms {
            if !(0.0..=1.0).contains(&a.x) || !a.x.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom at {} outside [0, 1]", a.x)));
            }
            if !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {} must carry positive mass",
                    a.x
                )));
            }
        }
        // merge duplicate atom locations
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.x == a.x => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        let atoms = merged;

        let total: f64 =
            pieces.iter().map(Piece::mass).sum::<f64>() + atoms.iter().map(|a| a.mass).sum::<f64>();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "total mass {total} differs from 1 by more than {MASS_TOL}"
            )));
        }

        // split pieces at interior atom locations so the inverse CDF is
        // coordinate-ordered
        let mut split = Vec::with_capacity(pieces.len());
        for p in &pieces {
            let mut lo = p.left;
            for a in &atoms {
                if a.x > lo && a.x < p.right {
                    split.push(Piece {
                        left: lo,
                        right: a.x,
                        f_left: p.density_at(lo),
                        f_right: p.density_at(a.x),
                    });
                    lo = a.x;
                }
            }
            split.push(Piece {
                left: lo,
                right: p.right,
                f_left: p.density_at(lo),
                f_right: p.f_right,
            });
        }

        let mut segs = Vec::new();
        let mut cum = Vec::new();
        let mut acc = 0.0;
        let mut ai = 0;
        for p in &split {
            while ai < atoms.len() && atoms[ai].x <= p.left {
                acc += atoms[ai].mass;
                segs.push(SampleSeg::Point { x: atoms[ai].x });
                cum.push(acc);
                ai += 1;
            }
            acc += p.mass();
            segs.push(SampleSeg::Lin {
                x0: p.left,
                x1: p.right,
                f0: p.f_left,
                f1: p.f_right,
            });
            cum.push(acc);
        }
        while ai < atoms.len() {
            acc += atoms[ai].mass;
            segs.push(SampleSeg::Point { x: atoms[ai].x });
            cum.push(acc);
            ai += 1;
        }
        if let Some(last) = cum.last_mut() {
            *last = last.max(1.0);
        }

        Ok(Measure {
            pieces: split,
            atoms,
            segs,
            cum,
        })
    }

    /// Constant density on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Measure> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidMeasure(format!(
                "uniform support [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
            )));
        }
        let d = 1.0 / (hi - lo);
        Measure::piecewise(
            vec![Piece {
                left: lo,
                right: hi,
                f_left: d,
                f_right: d,
            }],
            vec![],
        )
    }

    /// Two-block measure with no mass in [1 - theta_b/b, (b-1)/b): mass `p`
    /// uniform on [(b-1)/b, x_star], mass 1-p uniform on [0, low_cap]. On
    /// such measures the avalanche reduces to independent site percolation,
    /// so they serve as the exactly solvable anchor family.
    pub fn gap(b: u32, x_star: f64, p: f64, low_cap: f64) -> Result<Measure> {
        if b < 2 {
            return Err(Error::invalid("gap measure needs b >= 2"));
        }
        let edge = (b - 1) as f64 / b as f64;
        if !(x_star > edge && x_star <= 1.0) {
            return Err(Error::InvalidMeasure(format!(
                "gap measure needs (b-1)/b = {edge} < x_star <= 1, got {x_star}"
            )));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidMeasure(format!("gap mass p = {p} outside (0, 1]")));
        }
        let theta_b = b as f64 / (b - 1) as f64 * x_star;
        let gap_left = 1.0 - theta_b / b as f64;
        if p < 1.0 {
            if low_cap <= 0.0 {
                return Err(Error::InvalidMeasure(
                    "gap measure with p < 1 needs low_cap > 0 to place the remaining mass".into(),
                ));
            }
            if low_cap >= gap_left {
                return Err(Error::InvalidMeasure(format!(
                    "low_cap = {low_cap} violates the gap condition low_cap < 1 - theta_b/b = {gap_left}"
                )));
            }
        } else if low_cap != 0.0 {
            return Err(Error::InvalidMeasure(
                "gap measure with p = 1 has no low block; low_cap must be 0".into(),
            ));
        }
        let mut pieces = vec![Piece {
            left: edge,
            right: x_star,
            f_left: p / (x_star - edge),
            f_right: p / (x_star - edge),
        }];
        if p < 1.0 {
            pieces.push(Piece {
                left: 0.0,
                right: low_cap,
                f_left: (1.0 - p) / low_cap,
                f_right: (1.0 - p) / low_cap,
            });
        }
        Measure::piecewise(pieces, vec![])
    }

    /// Pointwise convex combination `(1 - alpha) self + alpha other`.
    pub fn mix(&self, other: &Measure, alpha: f64) -> Result<Measure> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!("mix weight alpha = {alpha} outside [0, 1]")));
        }
        if alpha == 0.0 {
            return Ok(self.clone());
        }
        if alpha == 1.0 {
            return Ok(other.clone());
        }
        let mut cuts: Vec<f64> = Vec::new();
        for m in [self, other] {
            for p in &m.pieces {
                cuts.push(p.left);
                cuts.push(p.right);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let (l, r) = (w[0], w[1]);
            let fl = (1.0 - alpha) * self.density_right(l) + alpha * other.density_right(l);
            let fr = (1.0 - alpha) * self.density_left(r) + alpha * other.density_left(r);
            if fl != 0.0 || fr != 0.0 {
                pieces.push(Piece {
                    left: l,
                    right: r,
                    f_left: fl,
                    f_right: fr,
                });
            }
        }
        let mut atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom {
                x: a.x,
                mass: (1.0 - alpha) * a.mass,
            })
            .chain(other.atoms.iter().map(|a| Atom {
                x: a.x,
                mass: alpha * a.mass,
            }))
            .collect();
        atoms.retain(|a| a.mass > 0.0);
        Measure::piecewise(pieces, atoms)
    }

    /// One-sided density limit from above.
    fn density_right(&self, x: f64) -> f64 {
        for p in &self.pieces {
            if p.left <= x && x < p.right {
                return p.density_at(x);
            }
        }
        0.0
    }

    /// One-sided density limit from below.
    fn density_left(&self, x: f64) -> f64 {
        for p in &self.pieces {
            if p.left < x && x <= p.right {
                return p.density_at(x);
            }
        }
        0.0
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Rejects measures with atoms; grid solvers require an absolutely
    /// continuous bounded density.
    pub fn require_flat(&self) -> Result<()> {
        if !self.atoms.is_empty() {
            return Err(Error::NotFlat(format!(
                "{} atom(s) present; only piecewise-linear densities are admitted here",
                self.atoms.len()
            )));
        }
        Ok(())
    }

    /// rho([a, b]) with explicit endpoint inclusion for the atoms.
    pub fn mass(&self, a: f64, b: f64, include_left: bool, include_right: bool) -> f64 {
        if b < a {
            return 0.0;
        }
        let mut acc = 0.0;
        for p in &self.pieces {
            let c = a.max(p.left);
            let d = b.min(p.right);
            if d > c {
                acc += p.integral(c, d);
            }
        }
        for at in &self.atoms {
            let inside = (at.x > a && at.x < b)
                || (at.x == a && include_left)
                || (at.x == b && include_right && b > a)
                || (at.x == a && a == b && include_left && include_right);
            if inside {
                acc += at.mass;
            }
        }
        acc
    }

    /// Right-continuous distribution function rho([0, x]).
    pub fn cdf(&self, x: f64) -> f64 {
        self.mass(0.0, x, true, true)
    }

    /// Generalized inverse CDF: pushes a uniform variate in [0, 1) to the
    /// law of the measure.
    pub fn sample(&self, u: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&u));
        let i = self.cum.partition_point(|&c| c <= u);
        let i = i.min(self.segs.len() - 1);
        let start = if i == 0 { 0.0 } else { self.cum[i - 1] };
        match self.segs[i] {
            SampleSeg::Point { x } => x,
            SampleSeg::Lin { x0, x1, f0, f1 } => {
                let w = x1 - x0;
                let m = (f0 + f1) / 2.0 * w;
                let t = (u - start).min(m);
                if t <= 0.0 {
                    return x0;
                }
                let c = (f1 - f0) / (2.0 * w);
                let s = if c.abs() < 1e-300 {
                    t / f0
                } else {
                    // stable root of c s^2 + f0 s - t = 0 with s in [0, w]
                    2.0 * t / (f0 + (f0 * f0 + 4.0 * c * t).max(0.0).sqrt())
                };
                (x0 + s).min(x1)
            }
        }
    }

    /// Supremum of the support, computed from the representation.
    pub fn x_star(&self) -> f64 {
        let piece_sup = self
            .pieces
            .iter()
            .map(|p| p.right)
            .fold(f64::NEG_INFINITY, f64::max);
        let atom_sup = self
            .atoms
            .iter()
            .map(|a| a.x)
            .fold(f64::NEG_INFINITY, f64::max);
        piece_sup.max(atom_sup)
    }

    pub fn summary(&self, b: u32) -> Result<MeasureSummary> {
        if b < 2 {
            return Err(Error::invalid("summary needs b >= 2"));
        }
        let x_star = self.x_star();
        let theta_b = b as f64 / (b - 1) as f64 * x_star;
        let density_sup = if self.atoms.is_empty() {
            self.pieces
                .iter()
                .map(|p| p.f_left.max(p.f_right))
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        let mass_top = self.mass(1.0 - 1.0 / b as f64, 1.0, true, true);
        let mflat = self.atoms.is_empty() && density_sup.is_finite() && mass_top > 0.0;
        // the excluded marginal case x_star = 1 - 1/b, i.e. theta_b = 1
        let theta_marginal = (x_star - (1.0 - 1.0 / b as f64)).abs() <= 1e-12;
        Ok(MeasureSummary {
            x_star,
            theta_b,
            density_sup,
            mflat,
            mass_top,
            theta_marginal,
        })
    }
}

/// Derived constants of a measure for a given branching number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureSummary {
    /// Supremum of the support of rho.
    pub x_star: f64,
    /// b/(b-1) * x_star: the largest value any site can hold before toppling.
    pub theta_b: f64,
    /// Sup norm of the density; infinite when atoms are present.
    pub density_sup: f64,
    /// Absolutely continuous with bounded density and rho([1-1/b, 1]) > 0.
    pub mflat: bool,
    /// rho([1-1/b, 1]).
    pub mass_top: f64,
    /// x_star = 1 - 1/b exactly: the pathological theta_b = 1 family that
    /// downstream solvers refuse.
    pub theta_marginal: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gap_2_08_04() -> Measure {
        Measure::gap(2, 0.8, 0.4, 0.05).unwrap()
    }

    #[test]
    fn uniform_examples() {
        let m = Measure::uniform(0.0, 1.0).unwrap();
        assert_eq!(m.pieces().len(), 1);
        assert!((m.pieces()[0].f_left - 1.0).abs() < 1e-15);

        let m = Measure::uniform(0.0, 0.4).unwrap();
        assert!((m.pieces()[0].f_left - 2.5).abs() < 1e-15);

        assert!(Measure::uniform(0.5, 0.5).is_err());
        assert!(Measure::uniform(-0.1, 0.5).is_err());
        assert!(Measure::uniform(0.5, 1.1).is_err());
    }

    #[test]
    fn gap_examples() {
        let m = gap_2_08_04();
        // mass 0.4 on [0.5, 0.8], 0.6 on [0, 0.05], nothing in the gap [0.2, 0.5)
        assert!((m.mass(0.5, 0.8, true, true) - 0.4).abs() < 1e-12);
        assert!((m.mass(0.0, 0.05, true, true) - 0.6).abs() < 1e-12);
        assert_eq!(m.mass(0.2, 0.5, true, false), 0.0);
        let s = m.summary(2).unwrap();
        assert!((s.theta_b - 1.6).abs() < 1e-12);
        assert!((s.x_star - 0.8).abs() < 1e-15);

        // single-block case
        let m = Measure::gap(2, 1.0, 1.0, 0.0).unwrap();
        assert!((m.mass(0.5, 1.0, true, true) - 1.0).abs() < 1e-12);

        // gap condition violated: low_cap 0.3 >= 1 - theta_b/b = 0.2
        assert!(Measure::gap(2, 0.8, 0.4, 0.3).is_err());
        assert!(Measure::gap(2, 0.4, 0.4, 0.05).is_err());
        assert!(Measure::gap(2, 0.8, 0.4, 0.0).is_err());
    }

    #[test]
    fn mass_examples() {
        let u = Measure::uniform(0.0, 1.0).unwrap();
        assert!((u.mass(0.5, 1.0, true, true) - 0.5).abs() < 1e-15);
        assert!((u.mass(0.0, 1.0, true, true) - 1.0).abs() < 1e-15);
        assert!((gap_2_08_04().mass(0.0, 1.0, true, true) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mass_endpoint_inclusion_matters_only_for_atoms() {
        let m = Measure::piecewise(
            vec![Piece {
                left: 0.0,
                right: 0.5,
                f_left: 1.0,
                f_right: 1.0,
            }],
            vec![Atom { x: 0.7, mass: 0.5 }],
        )
        .unwrap();
        assert!((m.mass(0.5, 0.7, true, true) - 0.5).abs() < 1e-15);
        assert!((m.mass(0.5, 0.7, true, false) - 0.0).abs() < 1e-15);
        assert!((m.mass(0.7, 1.0, false, true) - 0.0).abs() < 1e-15);
        assert!((m.cdf(0.7) - 1.0).abs() < 1e-15);
        assert!((m.cdf(0.699) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sample_examples() {
        let u = Measure::uniform(0.0, 1.0).unwrap();
        assert!((u.sample(0.25) - 0.25).abs() < 1e-15);
        let v = Measure::uniform(0.5, 1.0).unwrap();
        assert!((v.sample(0.5) - 0.75).abs() < 1e-15);
        let a = Measure::piecewise(vec![], vec![Atom { x: 0.7, mass: 1.0 }]).unwrap();
        assert_eq!(a.sample(0.0), 0.7);
        assert_eq!(a.sample(0.999), 0.7);
    }

    #[test]
    fn summary_examples() {
        let s = Measure::uniform(0.0, 1.0).unwrap().summary(2).unwrap();
        assert_eq!(s.x_star, 1.0);
        assert!((s.theta_b - 2.0).abs() < 1e-15);
        assert!(s.mflat);
        assert!(!s.theta_marginal);

        let s = Measure::uniform(0.0, 0.4).unwrap().summary(2).unwrap();
        assert!((s.x_star - 0.4).abs() < 1e-15);
        assert_eq!(s.mass_top, 0.0);
        assert!(!s.mflat);

        let s = gap_2_08_04().summary(2).unwrap();
        assert!((s.x_star - 0.8).abs() < 1e-15);
        assert!((s.theta_b - 1.6).abs() < 1e-12);

        // marginal flag at x_star = 1 - 1/b
        let m = Measure::uniform(0.0, 0.5).unwrap();
        assert!(m.summary(2).unwrap().theta_marginal);
    }

    #[test]
    fn mix_identities() {
        let a = Measure::uniform(0.0, 1.0).unwrap();
        let b = gap_2_08_04();
        assert_eq!(a.mix(&b, 0.0).unwrap(), a);
        assert_eq!(a.mix(&b, 1.0).unwrap(), b);
        let c = a.mix(&a, 0.37).unwrap();
        for x in [0.1, 0.4, 0.9] {
            assert!((c.density_right(x) - 1.0).abs() < 1e-12);
        }
        assert!(a.mix(&b, 1.3).is_err());
    }

    #[test]
    fn mix_carries_both_supports() {
        let a = Measure::uniform(0.0, 0.4).unwrap();
        let b = gap_2_08_04();
        let m = a.mix(&b, 0.3).unwrap();
        assert!((m.mass(0.0, 1.0, true, true) - 1.0).abs() < 1e-12);
        assert!((m.x_star() - 0.8).abs() < 1e-15);
        assert!((m.mass(0.5, 0.8, true, true) - 0.3 * 0.4).abs() < 1e-12);
    }

    #[test]
    fn atoms_flagged_not_flat() {
        let m = Measure::piecewise(
            vec![Piece {
                left: 0.0,
                right: 0.5,
                f_left: 1.0,
                f_right: 1.0,
            }],
            vec![Atom { x: 0.9, mass: 0.5 }],
        )
        .unwrap();
        assert!(m.require_flat().is_err());
        assert_eq!(m.summary(2).unwrap().density_sup, f64::INFINITY);
        assert!(!m.summary(2).unwrap().mflat);
    }

    #[test]
    fn rejects_bad_measures() {
        // mass != 1
        assert!(Measure::piecewise(
            vec![Piece {
                left: 0.0,
                right: 0.5,
                f_left: 1.0,
                f_right: 1.0
            }],
            vec![]
        )
        .is_err());
        // negative density
        assert!(Measure::piecewise(
            vec![Piece {
                left: 0.0,
                right: 1.0,
                f_left: 2.0,
                f_right: -0.1
            }],
            vec![]
        )
        .is_err());
        // overlapping pieces
        assert!(Measure::piecewise(
            vec![
                Piece {
                    left: 0.0,
                    right: 0.6,
                    f_left: 1.0,
                    f_right: 1.0
                },
                Piece {
                    left: 0.5,
                    right: 1.0,
                    f_left: 0.8,
                    f_right: 0.8
                }
            ],
            vec![]
        )
        .is_err());
    }

    #[test]
    fn cdf_monotone_right_continuous() {
        let m = Measure::piecewise(
            vec![Piece {
                left: 0.1,
                right: 0.6,
                f_left: 0.4,
                f_right: 2.0,
            }],
            vec![Atom { x: 0.6, mass: 0.4 }],
        )
        .unwrap();
        let mut prev = 0.0;
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let c = m.cdf(x);
            assert!(c >= prev - 1e-15);
            prev = c;
        }
        // jump exactly at the atom
        assert!((m.cdf(0.6) - m.cdf(0.6 - 1e-9) - 0.4).abs() < 1e-6);
    }

    #[test]
    fn sample_hits_atom_interval() {
        // atom sitting inside a piece: inverse CDF must stay coordinate-ordered
        let m = Measure::piecewise(
            vec![Piece {
                left: 0.0,
                right: 0.8,
                f_left: 1.0,
                f_right: 1.0,
            }],
            vec![Atom { x: 0.4, mass: 0.2 }],
        )
        .unwrap();
        assert!((m.sample(0.1) - 0.1).abs() < 1e-12);
        // u in [cdf(0.4-) , cdf(0.4)) = [0.4, 0.6) maps to the atom
        assert_eq!(m.sample(0.45), 0.4);
        assert_eq!(m.sample(0.59), 0.4);
        // beyond the atom the density resumes
        assert!((m.sample(0.8) - 0.6).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn prop_mix_mass_and_support(alpha in 0.0f64..=1.0, lo in 0.0f64..0.3, hi in 0.5f64..=1.0) {
            let a = Measure::uniform(lo, hi).unwrap();
            let b = gap_2_08_04();
            let m = a.mix(&b, alpha).unwrap();
            prop_assert!((m.mass(0.0, 1.0, true, true) - 1.0).abs() < 1e-10);
            if alpha > 0.0 && alpha < 1.0 {
                let want = a.x_star().max(b.x_star());
                prop_assert!((m.x_star() - want).abs() < 1e-12);
            }
        }

        #[test]
        fn prop_sample_within_support_and_cdf_consistent(u in 0.0f64..1.0) {
            let m = gap_2_08_04();
            let x = m.sample(u);
            prop_assert!((0.0..=0.05).contains(&x) || (0.5..=0.8).contains(&x));
            // inverse-CDF consistency: cdf(sample(u)) >= u >= cdf(sample(u) - eps)
            prop_assert!(m.cdf(x) >= u - 1e-9);
            prop_assert!(m.cdf((x - 1e-9).max(0.0)) <= u + 1e-9);
        }
    }
}
