//! Exact Hamming-distance polynomials for exactly-one 3-SAT (X3SAT).
//!
//! For a formula with solution set S, the polynomial `Σ_k a_k u^k` counts in
//! `a_k` the ordered pairs of solutions that differ in exactly `k` variables.
//! Its degree is the largest Hamming distance between two solutions and `a_0`
//! is `|S|`. [`solve`] computes it with a branch-and-reduce recursion over
//! pairs of formula copies; [`oracle`] computes it by enumeration.
//!
//! ```
//! use x3hd::{solve, Formula, HDPoly, SolveOptions};
//!
//! let f = Formula::from_signed(7, &[&[1, 2, 3], &[1, 4, 5], &[1, 6, 7], &[2, 4, -6]]);
//! let report = solve(&f, &SolveOptions::default()).unwrap();
//! assert_eq!(report.poly.to_string(), "12*u^4 + 4");
//! assert_eq!(report.max_hd, Some(4));
//! ```

pub mod branching;
pub mod decompose;
mod enumerate;
pub mod model;
pub mod oracle;
pub mod poly;
pub mod simplify;
pub mod solver;
pub mod toolkit;

pub use model::{Clause, Formula, Literal, PairState, Var};
pub use poly::HDPoly;
pub use solver::{mhd, solve, SolveError, SolveOptions, SolveReport, SolveStats};
