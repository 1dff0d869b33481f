//! Multiway cut with candidate representatives.
//!
//! Each candidate set `T_i` must be represented by chosen nodes that a cut
//! separates from other sets or their representatives. The crate provides
//! exact and approximate solvers for seven such variants, the LP
//! relaxations and rounding schemes behind them, reductions between the
//! variants and classic problems, and brute-force oracles for testing.

pub mod error;
pub mod gen;
pub mod graph;
pub mod lifted;
pub mod lp;
pub mod mincut;
pub mod oracle;
pub mod reductions;
pub mod rng;
pub mod variants;

pub use error::{Error, LabelCondition, Result};
pub use graph::{components, contract, cut_weight, Cut, Graph, Partition};
pub use lifted::{LabelSet, LabelingInstance, RoundingParams, Scheme};
pub use variants::{CandidateFamily, CutSolution, RepresentativeChoice, Variant, VariantInstance, Violation};
