//! Which solvers apply to which variant, and how to call them.

use std::fmt;

use clap::ValueEnum;
use repcut::lifted::RoundingParams;
use repcut::oracle::{exact_solve, OracleLimits, OracleOutcome};
use repcut::variants::{
    check_feasibility, solve_all_to_all, solve_fixed_to_single_fixed_q_capped, solve_single_to_all_2approx,
    solve_single_to_all_fixed_q_capped, solve_single_to_single_fixed_q_capped, solve_single_to_single_gh,
    solve_single_to_single_tree, solve_some_to_all_fixed_q_capped, solve_some_to_single_fixed_q_capped,
    solve_some_to_some_fixed_q_capped, Feasibility, IsolationMode, DEFAULT_Q_CAP, DEFAULT_SOME_TO_ALL_CAP,
};
use repcut::{CutSolution, Error, Result, Variant, VariantInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum Algorithm {
    /// Pick a default for the variant.
    Auto,
    /// Exhaustive search over node partitions.
    Oracle,
    /// Contract the sets and round the multiway cut relaxation.
    Lp,
    /// Union of all isolating cuts.
    Isolating,
    /// Union of isolating cuts without the heaviest one.
    IsolatingDrop,
    /// Enumerate representatives (exponential in q).
    FixedQ,
    /// Greedy good cuts on a Gomory-Hu tree.
    GomoryHu,
    /// Exact greedy on an input that is a tree.
    Tree,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::Oracle => "oracle",
            Algorithm::Lp => "lp",
            Algorithm::Isolating => "isolating",
            Algorithm::IsolatingDrop => "isolating-drop",
            Algorithm::FixedQ => "fixed-q",
            Algorithm::GomoryHu => "gomory-hu",
            Algorithm::Tree => "tree",
        }
    }

    /// Proven approximation factor on an instance with `q` sets, when one
    /// applies to the returned solution itself (not just in expectation).
    pub fn bound(self, variant: Variant, q: usize) -> Option<f64> {
        match (self, variant) {
            (Algorithm::Oracle | Algorithm::Tree, _) | (Algorithm::FixedQ, Variant::FixedToSingle) => Some(1.0),
            (Algorithm::Isolating | Algorithm::IsolatingDrop, _) => Some(2.0),
            (Algorithm::GomoryHu, _) => Some((2.0 - 2.0 / q as f64).max(1.0)),
            _ => None,
        }
    }

    pub fn bound_label(self, variant: Variant) -> &'static str {
        match (self, variant) {
            (Algorithm::GomoryHu, _) => "2-2/q",
            _ => match self.bound(variant, 2) {
                Some(b) if b == 1.0 => "1",
                Some(_) => "2",
                None => "-",
            },
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every concrete algorithm that accepts `inst`.
pub fn applicable(inst: &VariantInstance) -> Vec<Algorithm> {
    let mut out = vec![Algorithm::Oracle];
    out.extend(match inst.variant {
        Variant::AllToAll => vec![Algorithm::Lp],
        Variant::SingleToAll => vec![Algorithm::Isolating, Algorithm::IsolatingDrop, Algorithm::FixedQ],
        Variant::SingleToSingle if inst.graph.is_tree() => vec![Algorithm::Tree, Algorithm::GomoryHu, Algorithm::FixedQ],
        Variant::SingleToSingle => vec![Algorithm::GomoryHu, Algorithm::FixedQ],
        _ => vec![Algorithm::FixedQ],
    });
    out
}

/// Settings shared by every solver call.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub params: RoundingParams,
    pub samples: u64,
    /// Overrides the default cap on `q` for the enumeration algorithms.
    pub q_cap: Option<usize>,
    pub limits: OracleLimits,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            params: RoundingParams::default(),
            samples: 200,
            q_cap: None,
            limits: OracleLimits::default(),
        }
    }
}

/// Replaces `Auto` by the default for the instance, or explains why the
/// requested algorithm does not apply.
pub fn resolve(alg: Algorithm, inst: &VariantInstance, cfg: &SolveConfig) -> std::result::Result<Algorithm, String> {
    if alg == Algorithm::Auto {
        let cap = cfg.q_cap.unwrap_or(DEFAULT_Q_CAP);
        return Ok(match inst.variant {
            Variant::AllToAll => Algorithm::Lp,
            Variant::SingleToAll if inst.q() <= cap => Algorithm::FixedQ,
            Variant::SingleToAll => Algorithm::IsolatingDrop,
            Variant::SingleToSingle if inst.graph.is_tree() => Algorithm::Tree,
            Variant::SingleToSingle if inst.q() <= cap => Algorithm::FixedQ,
            Variant::SingleToSingle => Algorithm::GomoryHu,
            _ => Algorithm::FixedQ,
        });
    }
    if applicable(inst).contains(&alg) {
        return Ok(alg);
    }
    let hint = applicable(inst).iter().map(|a| a.name()).collect::<Vec<_>>().join(", ");
    if alg == Algorithm::Tree && inst.variant == Variant::SingleToSingle {
        return Err(format!("the tree algorithm needs a tree input; use one of: {hint}"));
    }
    Err(format!("{alg} does not apply to {}; use one of: {hint}", inst.variant))
}

/// Runs a concrete algorithm. Infeasible instances give
/// [`Error::Infeasible`] whichever algorithm is used.
pub fn run(alg: Algorithm, inst: &VariantInstance, cfg: &SolveConfig) -> Result<CutSolution> {
    let p = &cfg.params;
    let n = cfg.samples;
    let cap = cfg.q_cap;
    match alg {
        Algorithm::Auto => Err(Error::Precondition("resolve the algorithm first".into())),
        Algorithm::Oracle => match exact_solve(inst, &cfg.limits)? {
            OracleOutcome::Optimal(sol) => Ok(sol),
            OracleOutcome::Infeasible => match check_feasibility(inst) {
                Feasibility::Infeasible(v) => Err(Error::Infeasible(v)),
                Feasibility::Feasible(_) => Err(Error::Internal("oracle and feasibility check disagree".into())),
            },
        },
        Algorithm::Lp => solve_all_to_all(inst, p, n),
        Algorithm::Isolating => solve_single_to_all_2approx(inst, IsolationMode::KeepAll),
        Algorithm::IsolatingDrop => solve_single_to_all_2approx(inst, IsolationMode::DropLargest),
        Algorithm::GomoryHu => solve_single_to_single_gh(&inst.graph, &inst.family),
        Algorithm::Tree => solve_single_to_single_tree(&inst.graph, &inst.family),
        Algorithm::FixedQ => match inst.variant {
            Variant::SingleToAll => solve_single_to_all_fixed_q_capped(inst, p, n, cap.unwrap_or(DEFAULT_Q_CAP)),
            Variant::SingleToSingle => solve_single_to_single_fixed_q_capped(inst, p, n, cap.unwrap_or(DEFAULT_Q_CAP)),
            Variant::FixedToSingle => solve_fixed_to_single_fixed_q_capped(inst, cap.unwrap_or(DEFAULT_Q_CAP)),
            Variant::SomeToSingle => solve_some_to_single_fixed_q_capped(inst, p, n, cap.unwrap_or(DEFAULT_SOME_TO_ALL_CAP)),
            Variant::SomeToSome => solve_some_to_some_fixed_q_capped(inst, p, n, cap.unwrap_or(DEFAULT_SOME_TO_ALL_CAP)),
            Variant::SomeToAll => solve_some_to_all_fixed_q_capped(inst, p, n, cap.unwrap_or(DEFAULT_SOME_TO_ALL_CAP)),
            Variant::AllToAll => Err(Error::Precondition("all-to-all has no representatives to enumerate".into())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use repcut::Graph;

    fn path() -> VariantInstance {
        let g = Graph::from_named_edges(&["a", "b", "c"], &[("a", "b", 2.0), ("b", "c", 1.0)]).unwrap();
        VariantInstance::named(Variant::SingleToSingle, g, &[&["a"], &["c"]], None).unwrap()
    }

    #[test]
    fn auto_prefers_the_tree_algorithm() {
        let cfg = SolveConfig::default();
        assert_eq!(resolve(Algorithm::Auto, &path(), &cfg), Ok(Algorithm::Tree));
        assert!(resolve(Algorithm::Lp, &path(), &cfg).is_err());
    }

    #[test]
    fn every_applicable_algorithm_agrees_on_a_path() {
        let cfg = SolveConfig::default();
        for alg in applicable(&path()) {
            assert_eq!(run(alg, &path(), &cfg).unwrap().weight, 1.0, "{alg}");
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(Algorithm::GomoryHu.bound(Variant::SingleToSingle, 4), Some(1.5));
        assert_eq!(Algorithm::GomoryHu.bound(Variant::SingleToSingle, 1), Some(1.0));
        assert_eq!(Algorithm::Lp.bound_label(Variant::AllToAll), "-");
        assert_eq!(Algorithm::IsolatingDrop.bound_label(Variant::SingleToAll), "2");
    }
}
