//! Single-avalanche organized criticality on the directed b-ary tree.
//!
//! The model: i.i.d. site energies with law rho on [0, 1]; an amount v is
//! added to the root and any site holding at least 1 distributes its value
//! equally to its b children. The crate provides
//!
//! - exact and Monte Carlo avalanche simulation over replayable energy
//!   fields ([`dynamics`]),
//! - deterministic computation of the path-survival functional z(rho), the
//!   limit profile psi, and the mean avalanche size ([`survival`]),
//! - solvers for the threshold-CDF recurrence, the stationary path-value
//!   law, and the external-field equation ([`fixedpoint`]),
//! - critical-surface location, exponent scans, and amplitude constants
//!   ([`criticality`]),
//! - independent branching-process oracles for cross-validation ([`oracles`]).
//!
//! The phase transition sits at z = 1/b with mean-field exponents
//! gamma = beta = 1, delta = 2.

pub mod criticality;
pub mod dynamics;
pub mod error;
pub mod fixedpoint;
pub mod grid;
pub mod kernel;
pub mod measures;
pub mod oracles;
pub mod parallel;
pub mod survival;

pub use error::{Error, Result};
pub use grid::GridFunction;
pub use measures::{Atom, Measure, MeasureSummary, Piece};
