//! Exact-integer tables, erasure masks, and replayable row-elimination
//! certificates for rank bounds of multiplication maps on chains of
//! elliptic curves.
//!
//! The library builds the vanishing-order tables attached to a sequence
//! over `[0, r]`, forms their `m`-fold tensor tables, erases entries
//! against a twist vector, and then eliminates rows with a small fixed
//! system of elimination rules. A successful elimination of some `N` rows
//! is recorded as a [`rules::Certificate`]: a replayable object whose
//! verification shows the associated multiplication map has rank at least
//! `N`, the combinatorial content of the Maximal Rank Conjecture for the
//! case at hand.
//!
//! Modules:
//! - [`tables`]: sequences, twist vectors, tables, erasure masks, and the
//!   steady/unimaginative predicates.
//! - [`rules`]: the elimination rules, certificates, and the verifier.
//! - [`search`]: certificate search (greedy saturation plus backtracking)
//!   and the surjective column sweep.
//! - [`constructions`]: explicit certificate families and the complete
//!   `m = 2` driver.
//! - [`divisors`]: torsion-order divisor combinatorics backing the two
//!   pair-elimination rules.
//! - [`render`]: text, CSV, and LaTeX table output.
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod constructions;
pub mod divisors;
pub mod error;
pub mod render;
pub mod rules;
pub mod search;
pub mod tables;

pub use error::{Error, Result};
