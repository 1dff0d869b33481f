//! The seven representative multiway cut variants.
//!
//! Every variant takes a graph and candidate sets `T_0..T_{q-1}`; they
//! differ in which representatives are chosen and what must be separated:
//!
//! | variant          | demand for each `i != j`                    |
//! |------------------|---------------------------------------------|
//! | all-to-all       | all of `T_i` from all of `T_j`              |
//! | single-to-all    | `t_i` from all of `T_j`                     |
//! | single-to-single | `t_i` from `t_j`                            |
//! | fixed-to-single  | the fixed node `s` from each `t_j`          |
//! | some-to-single   | `t_i^j` from `t_j`                          |
//! | some-to-some     | `t_i^j` from `t_j^i`                        |
//! | some-to-all      | `t_i^j` from all of `T_j`                   |
//!
//! Set indices are 0-based in code; human-facing messages print them
//! 1-based (`T_1` is `family.set(0)`).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{components, contract, cut_weight, dichromatic_edges, Cut, Graph, Partition};
use crate::lifted::{solve_lifted_cut, solve_multiway_cut, LabelSet, LabelingInstance, RoundingParams};
use crate::mincut::{gomory_hu, isolating_cut, FlowNetwork};

/// Default cap on `q` for the representative-enumeration solvers.
pub const DEFAULT_Q_CAP: usize = 4;
/// Default cap on `q` for the some-to-all enumeration (it guesses `q^2`
/// representatives).
pub const DEFAULT_SOME_TO_ALL_CAP: usize = 3;
/// Default cap on the number of distinct terminals in a multicut.
pub const DEFAULT_TERMINAL_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    AllToAll,
    SingleToAll,
    SingleToSingle,
    FixedToSingle,
    SomeToSingle,
    SomeToSome,
    SomeToAll,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::AllToAll,
        Variant::SingleToAll,
        Variant::SingleToSingle,
        Variant::FixedToSingle,
        Variant::SomeToSingle,
        Variant::SomeToSome,
        Variant::SomeToAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::AllToAll => "all-to-all",
            Variant::SingleToAll => "single-to-all",
            Variant::SingleToSingle => "single-to-single",
            Variant::FixedToSingle => "fixed-to-single",
            Variant::SomeToSingle => "some-to-single",
            Variant::SomeToSome => "some-to-some",
            Variant::SomeToAll => "some-to-all",
        }
    }

    /// Whether solutions carry one representative per set.
    pub fn has_single_reps(self) -> bool {
        matches!(
            self,
            Variant::SingleToAll | Variant::SingleToSingle | Variant::FixedToSingle | Variant::SomeToSingle
        )
    }

    /// Whether solutions carry one representative per ordered pair.
    pub fn has_pair_reps(self) -> bool {
        matches!(self, Variant::SomeToSingle | Variant::SomeToSome | Variant::SomeToAll)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown variant `{s}`")))
    }
}

/// Candidate sets, each stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CandidateFamily {
    sets: Vec<Vec<usize>>,
}

impl CandidateFamily {
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Precondition("at least one candidate set is required".into()));
        }
        let mut out = Vec::with_capacity(sets.len());
        for (i, mut s) in sets.into_iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Precondition(format!("candidate set T_{} is empty", i + 1)));
            }
            s.sort_unstable();
            s.dedup();
            out.push(s);
        }
        Ok(CandidateFamily { sets: out })
    }

    pub fn q(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn contains(&self, i: usize, v: usize) -> bool {
        self.sets[i].binary_search(&v).is_ok()
    }

    /// `∪_{j != i} T_j`, ascending.
    pub fn union_except(&self, i: usize) -> Vec<usize> {
        let mut u: Vec<usize> = (0..self.q()).filter(|&j| j != i).flat_map(|j| self.sets[j].iter().copied()).collect();
        u.sort_unstable();
        u.dedup();
        u
    }

    fn check(&self, g: &Graph) -> Result<()> {
        for s in &self.sets {
            for &v in s {
                g.check_node(v)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantInstance {
    pub variant: Variant,
    pub graph: Graph,
    pub family: CandidateFamily,
    /// The fixed node; present exactly for fixed-to-single.
    pub fixed: Option<usize>,
}

impl VariantInstance {
    pub fn new(variant: Variant, graph: Graph, family: CandidateFamily, fixed: Option<usize>) -> Result<Self> {
        family.check(&graph)?;
        match (variant, fixed) {
            (Variant::FixedToSingle, None) => {
                return Err(Error::Precondition("fixed-to-single needs a fixed node".into()))
            }
            (Variant::FixedToSingle, Some(s)) => graph.check_node(s)?,
            (_, Some(_)) => {
                return Err(Error::Precondition(format!("{variant} takes no fixed node")))
            }
            _ => {}
        }
        Ok(VariantInstance {
            variant,
            graph,
            family,
            fixed,
        })
    }

    /// Builds an instance from node names.
    pub fn named(variant: Variant, graph: Graph, sets: &[&[&str]], fixed: Option<&str>) -> Result<Self> {
        let sets = sets
            .iter()
            .map(|s| s.iter().map(|n| graph.node(n)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let fixed = fixed.map(|n| graph.node(n)).transpose()?;
        VariantInstance::new(variant, graph, CandidateFamily::new(sets)?, fixed)
    }

    pub fn q(&self) -> usize {
        self.family.q()
    }

    /// The same graph and sets under another variant (the fixed node is
    /// dropped unless the target is fixed-to-single).
    pub fn with_variant(&self, variant: Variant, fixed: Option<usize>) -> Result<Self> {
        VariantInstance::new(variant, self.graph.clone(), self.family.clone(), fixed)
    }
}

/// Chosen representatives. `single[i]` is `t_i`; `pair[(i, j)]` is `t_i^j`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RepresentativeChoice {
    pub single: Option<Vec<usize>>,
    pub pair: Option<BTreeMap<(usize, usize), usize>>,
}

impl RepresentativeChoice {
    pub fn none() -> Self {
        RepresentativeChoice::default()
    }

    pub fn singles(reps: Vec<usize>) -> Self {
        RepresentativeChoice {
            single: Some(reps),
            pair: None,
        }
    }

    pub fn pairs(reps: BTreeMap<(usize, usize), usize>) -> Self {
        RepresentativeChoice {
            single: None,
            pair: Some(reps),
        }
    }
}

/// One demand of a solution together with the component ids showing it is
/// met: no id appears on both sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeparationWitness {
    pub i: usize,
    pub j: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutSolution {
    pub cut: Cut,
    pub reps: RepresentativeChoice,
    pub weight: f64,
    pub certificate: Vec<SeparationWitness>,
    /// Cut-comparable relaxation value when an LP was involved.
    pub lp_value: Option<f64>,
}

/// Why an instance has no feasible solution. Set indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    /// All-to-all: `T_i` and `T_j` share a node.
    Intersecting(usize, usize),
    /// Single-to-all: `T_i` lies inside the union of the other sets.
    Covered(usize),
    /// Single-to-single: no system of distinct representatives; only
    /// `matched` sets can be matched.
    NoTransversal { matched: usize },
    /// Fixed-to-single: `T_i` is exactly `{s}`.
    FixedSingleton(usize),
    /// Some-to-single: every node of `T_j` is the sole member of some other
    /// set.
    SingletonsCover(usize),
    /// Some-to-all: `T_i ⊆ T_j`.
    Contained(usize, usize),
    /// Some-to-some: `T_i` and `T_j` are the same singleton.
    EqualSingletons(usize, usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Intersecting(i, j) => write!(f, "T_{} and T_{} intersect", i + 1, j + 1),
            Violation::Covered(i) => write!(f, "T_{} is covered by the other candidate sets", i + 1),
            Violation::NoTransversal { matched } => {
                write!(f, "no system of distinct representatives (maximum matching has size {matched})")
            }
            Violation::FixedSingleton(i) => write!(f, "T_{} consists of the fixed node only", i + 1),
            Violation::SingletonsCover(j) => {
                write!(f, "every member of T_{} forms a singleton candidate set elsewhere", j + 1)
            }
            Violation::Contained(i, j) => write!(f, "T_{} is contained in T_{}", i + 1, j + 1),
            Violation::EqualSingletons(i, j) => write!(f, "T_{} and T_{} are the same singleton", i + 1, j + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// Representatives that work with the cut `E`.
    Feasible(RepresentativeChoice),
    Infeasible(Violation),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Maximum bipartite matching of sets to nodes; `result[i]` is the node
/// matched to set `i`. Augmenting paths are tried in ascending node order.
pub(crate) fn match_sets(sets: &[Vec<usize>], n: usize) -> Vec<Option<usize>> {
    fn augment(i: usize, sets: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &sets[i] {
            if !seen[v] {
                seen[v] = true;
                if owner[v].map_or(true, |k| augment(k, sets, seen, owner)) {
                    owner[v] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for i in 0..sets.len() {
        let mut seen = vec![false; n];
        augment(i, sets, &mut seen, &mut owner);
    }
    let mut result = vec![None; sets.len()];
    for (v, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            result[*i] = Some(v);
        }
    }
    result
}

/// Decides feasibility from the structure of the sets alone. Every variant
/// only gets easier as the cut grows, so an instance is feasible exactly
/// when removing all edges works; the witness is a representative choice
/// for that cut.
pub fn check_feasibility(inst: &VariantInstance) -> Feasibility {
    let fam = &inst.family;
    let q = fam.q();
    let set = |i: usize| fam.set(i);
    let singleton = |i: usize| (set(i).len() == 1).then(|| set(i)[0]);
    match inst.variant {
        Variant::AllToAll => {
            for i in 0..q {
                for j in i + 1..q {
                    if set(i).iter().any(|&v| fam.contains(j, v)) {
                        return Feasibility::Infeasible(Violation::Intersecting(i, j));
                    }
                }
            }
            Feasibility::Feasible(RepresentativeChoice::none())
        }
        Variant::SingleToAll => {
            let mut reps = Vec::with_capacity(q);
            for i in 0..q {
                match set(i).iter().find(|&&v| (0..q).all(|j| j == i || !fam.contains(j, v))) {
                    Some(&v) => reps.push(v),
                    None => return Feasibility::Infeasible(Violation::Covered(i)),
                }
            }
            Feasibility::Feasible(RepresentativeChoice::singles(reps))
        }
        Variant::SingleToSingle => {
            let m = match_sets(fam.sets(), inst.graph.node_count());
            let matched = m.iter().filter(|x| x.is_some()).count();
            if matched < q {
                return Feasibility::Infeasible(Violation::NoTransversal { matched });
            }
            Feasibility::Feasible(RepresentativeChoice::singles(m.into_iter().map(Option::unwrap).collect()))
        }
        Variant::FixedToSingle => {
            let s = inst.fixed.expect("validated");
            let mut reps = Vec::with_capacity(q);
            for i in 0..q {
                match set(i).iter().find(|&&v| v != s) {
                    Some(&v) => reps.push(v),
                    None => return Feasibility::Infeasible(Violation::FixedSingleton(i)),
                }
            }
            Feasibility::Feasible(RepresentativeChoice::singles(reps))
        }
        Variant::SomeToSingle => {
            let mut single = Vec::with_capacity(q);
            for j in 0..q {
                let ok = set(j).iter().find(|&&v| (0..q).all(|i| i == j || singleton(i) != Some(v)));
                match ok {
                    Some(&v) => single.push(v),
                    None => return Feasibility::Infeasible(Violation::SingletonsCover(j)),
                }
            }
            let mut pair = BTreeMap::new();
            for i in 0..q {
                for j in 0..q {
                    if i != j {
                        let v = *set(i).iter().find(|&&v| v != single[j]).expect("checked above");
                        pair.insert((i, j), v);
                    }
                }
            }
            Feasibility::Feasible(RepresentativeChoice {
                single: Some(single),
                pair: Some(pair),
            })
        }
        Variant::SomeToSome => {
            let mut pair = BTreeMap::new();
            for i in 0..q {
                for j in i + 1..q {
                    let (a, b) = match (singleton(i), singleton(j)) {
                        (Some(a), Some(b)) if a == b => {
                            return Feasibility::Infeasible(Violation::EqualSingletons(i, j))
                        }
                        (_, Some(b)) => (*set(i).iter().find(|&&v| v != b).expect("nonsingleton or distinct"), b),
                        _ => {
                            let a = set(i)[0];
                            (a, *set(j).iter().find(|&&v| v != a).expect("T_j is no singleton {a}"))
                        }
                    };
                    pair.insert((i, j), a);
                    pair.insert((j, i), b);
                }
            }
            Feasibility::Feasible(RepresentativeChoice::pairs(pair))
        }
        Variant::SomeToAll => {
            let mut pair = BTreeMap::new();
            for i in 0..q {
                for j in 0..q {
                    if i != j {
                        match set(i).iter().find(|&&v| !fam.contains(j, v)) {
                            Some(&v) => {
                                pair.insert((i, j), v);
                            }
                            None => return Feasibility::Infeasible(Violation::Contained(i, j)),
                        }
                    }
                }
            }
            Feasibility::Feasible(RepresentativeChoice::pairs(pair))
        }
    }
}

fn require_feasible(inst: &VariantInstance) -> Result<RepresentativeChoice> {
    match check_feasibility(inst) {
        Feasibility::Feasible(r) => Ok(r),
        Feasibility::Infeasible(v) => Err(Error::Infeasible(v)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(String),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// The demands of `inst` under `reps` as (i, j, left nodes, right nodes):
/// every left node must end up apart from every right node.
fn demands(inst: &VariantInstance, reps: &RepresentativeChoice) -> std::result::Result<Vec<(usize, usize, Vec<usize>, Vec<usize>)>, String> {
    let fam = &inst.family;
    let q = fam.q();
    let v = inst.variant;
    let single = if v.has_single_reps() {
        let s = reps.single.as_ref().ok_or("missing single representatives")?;
        if s.len() != q {
            return Err(format!("expected {q} single representatives, got {}", s.len()));
        }
        for (i, &t) in s.iter().enumerate() {
            if t >= inst.graph.node_count() || !fam.contains(i, t) {
                return Err(format!("representative t_{} is not a member of T_{}", i + 1, i + 1));
            }
        }
        s.clone()
    } else {
        if reps.single.is_some() {
            return Err(format!("{v} takes no single representatives"));
        }
        Vec::new()
    };
    let pair = if v.has_pair_reps() {
        let p = reps.pair.as_ref().ok_or("missing pair representatives")?;
        for i in 0..q {
            for j in 0..q {
                if i != j {
                    let t = *p.get(&(i, j)).ok_or_else(|| format!("missing t_{}^{}", i + 1, j + 1))?;
                    if t >= inst.graph.node_count() || !fam.contains(i, t) {
                        return Err(format!("representative t_{}^{} is not a member of T_{}", i + 1, j + 1, i + 1));
                    }
                }
            }
        }
        if p.len() != q * (q - 1) {
            return Err("pair representatives include extra entries".into());
        }
        p.clone()
    } else {
        if reps.pair.is_some() {
            return Err(format!("{v} takes no pair representatives"));
        }
        BTreeMap::new()
    };
    let mut out = Vec::new();
    for i in 0..q {
        for j in 0..q {
            if i == j {
                continue;
            }
            let d = match v {
                Variant::AllToAll if i < j => Some((fam.set(i).to_vec(), fam.set(j).to_vec())),
                Variant::SingleToAll => Some((vec![single[i]], fam.set(j).to_vec())),
                Variant::SingleToSingle if i < j => Some((vec![single[i]], vec![single[j]])),
                Variant::SomeToSingle => Some((vec![pair[&(i, j)]], vec![single[j]])),
                Variant::SomeToSome if i < j => Some((vec![pair[&(i, j)]], vec![pair[&(j, i)]])),
                Variant::SomeToAll => Some((vec![pair[&(i, j)]], fam.set(j).to_vec())),
                _ => None,
            };
            if let Some((l, r)) = d {
                out.push((i, j, l, r));
            }
        }
    }
    if v == Variant::FixedToSingle {
        let s = inst.fixed.expect("validated");
        for (j, &t) in single.iter().enumerate() {
            out.push((j, j, vec![s], vec![t]));
        }
    }
    Ok(out)
}

fn comps_of(p: &Partition, nodes: &[usize]) -> Vec<usize> {
    let mut c: Vec<usize> = nodes.iter().map(|&v| p.component_of(v)).collect();
    c.sort_unstable();
    c.dedup();
    c
}

fn witnesses(
    inst: &VariantInstance,
    p: &Partition,
    reps: &RepresentativeChoice,
) -> std::result::Result<Vec<SeparationWitness>, String> {
    let mut out = Vec::new();
    for (i, j, l, r) in demands(inst, reps)? {
        let (left, right) = (comps_of(p, &l), comps_of(p, &r));
        if let Some(c) = left.iter().find(|c| right.contains(c)) {
            let who = |i: usize, j: usize| match inst.variant {
                Variant::FixedToSingle => format!("the fixed node and t_{}", j + 1),
                Variant::AllToAll => format!("T_{} and T_{}", i + 1, j + 1),
                _ => format!("the two sides of demand ({}, {})", i + 1, j + 1),
            };
            return Err(format!("{} share component {c}", who(i, j)));
        }
        out.push(SeparationWitness { i, j, left, right });
    }
    Ok(out)
}

/// Recomputes the components of `g - cut` and checks every demand of the
/// variant under the given representatives, plus the reported weight.
pub fn validate_solution(inst: &VariantInstance, sol: &CutSolution) -> Result<Verdict> {
    let p = components(&inst.graph, &sol.cut)?;
    if let Err(reason) = witnesses(inst, &p, &sol.reps) {
        return Ok(Verdict::Reject(reason));
    }
    let w = cut_weight(&inst.graph, &sol.cut)?;
    if (w - sol.weight).abs() > 1e-9 * (1.0 + w.abs()) {
        return Ok(Verdict::Reject(format!("reported weight {} but the cut weighs {w}", sol.weight)));
    }
    Ok(Verdict::Accept)
}

/// Packages a cut with its representatives, computing weight and
/// certificate; fails if the demands are not met.
pub fn certify(inst: &VariantInstance, cut: Cut, reps: RepresentativeChoice, lp_value: Option<f64>) -> Result<CutSolution> {
    let p = components(&inst.graph, &cut)?;
    let certificate = witnesses(inst, &p, &reps).map_err(|r| Error::Internal(format!("solver produced an invalid solution: {r}")))?;
    let weight = cut_weight(&inst.graph, &cut)?;
    Ok(CutSolution {
        cut,
        reps,
        weight,
        certificate,
        lp_value,
    })
}

/// Contracts each candidate set and solves the resulting multiway cut.
pub fn solve_all_to_all(inst: &VariantInstance, params: &RoundingParams, samples: u64) -> Result<CutSolution> {
    expect_variant(inst, Variant::AllToAll)?;
    require_feasible(inst)?;
    if inst.q() == 1 {
        return certify(inst, Cut::empty(), RepresentativeChoice::none(), None);
    }
    let c = contract(&inst.graph, inst.family.sets())?;
    let terminals: Vec<usize> = (0..inst.q()).map(|i| c.image(inst.family.set(i)[0])).collect();
    let r = solve_multiway_cut(&c.graph, &terminals, params, samples)?;
    certify(inst, c.expand_cut(&r.cut), RepresentativeChoice::none(), Some(r.lp_value))
}

fn expect_variant(inst: &VariantInstance, v: Variant) -> Result<()> {
    if inst.variant == v {
        Ok(())
    } else {
        Err(Error::Precondition(format!("expected a {v} instance, got {}", inst.variant)))
    }
}

/// How the isolating-cut heuristic combines its per-set cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IsolationMode {
    /// Union of all `q` isolating cuts.
    KeepAll,
    /// Union of all but the heaviest cut, when that is still feasible.
    DropLargest,
}

/// The isolating-cut solution and how it was assembled.
#[derive(Debug, Clone, PartialEq)]
pub struct IsolationOutcome {
    pub solution: CutSolution,
    /// Weights of the per-set isolating cuts.
    pub cut_weights: Vec<f64>,
    /// The set whose cut was left out, if any.
    pub dropped: Option<usize>,
    /// Drop-largest was requested but its union missed a demand, so the
    /// full union was returned instead.
    pub fell_back: bool,
}

/// For each set, the cheapest isolating cut of one of its private members
/// from all other sets; then the union per `mode`.
pub fn isolating_union(inst: &VariantInstance, mode: IsolationMode) -> Result<IsolationOutcome> {
    expect_variant(inst, Variant::SingleToAll)?;
    require_feasible(inst)?;
    let g = &inst.graph;
    let q = inst.q();
    if q == 1 {
        let reps = RepresentativeChoice::singles(vec![inst.family.set(0)[0]]);
        return Ok(IsolationOutcome {
            solution: certify(inst, Cut::empty(), reps, None)?,
            cut_weights: vec![0.0],
            dropped: None,
            fell_back: false,
        });
    }
    let per_set: Vec<(usize, Cut, f64)> = (0..q)
        .into_par_iter()
        .map(|i| {
            let others = inst.family.union_except(i);
            let mut best: Option<(usize, Cut, f64)> = None;
            for &v in inst.family.set(i) {
                if others.binary_search(&v).is_ok() {
                    continue;
                }
                let r = isolating_cut(g, v, &others)?;
                if best.as_ref().map_or(true, |b| r.weight < b.2) {
                    best = Some((v, r.cut, r.weight));
                }
            }
            best.ok_or_else(|| Error::Internal("feasible set without a private member".into()))
        })
        .collect::<Result<_>>()?;
    let reps = RepresentativeChoice::singles(per_set.iter().map(|x| x.0).collect());
    let cut_weights: Vec<f64> = per_set.iter().map(|x| x.2).collect();
    let all = per_set.iter().fold(Cut::empty(), |acc, x| acc.union(&x.1));
    if mode == IsolationMode::DropLargest {
        // heaviest cut, last index on ties
        let d = (0..q).fold(0, |best, i| if cut_weights[i] >= cut_weights[best] { i } else { best });
        let partial = per_set
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != d)
            .fold(Cut::empty(), |acc, (_, x)| acc.union(&x.1));
        if let Ok(solution) = certify(inst, partial, reps.clone(), None) {
            return Ok(IsolationOutcome {
                solution,
                cut_weights,
                dropped: Some(d),
                fell_back: false,
            });
        }
        return Ok(IsolationOutcome {
            solution: certify(inst, all, reps, None)?,
            cut_weights,
            dropped: None,
            fell_back: true,
        });
    }
    Ok(IsolationOutcome {
        solution: certify(inst, all, reps, None)?,
        cut_weights,
        dropped: None,
        fell_back: false,
    })
}

/// The isolating-cut 2-approximation for single-to-all.
pub fn solve_single_to_all_2approx(inst: &VariantInstance, mode: IsolationMode) -> Result<CutSolution> {
    Ok(isolating_union(inst, mode)?.solution)
}

fn check_cap(q: usize, cap: usize, suggestion: &'static str) -> Result<()> {
    if q > cap {
        Err(Error::CapExceeded {
            what: "q",
            value: q,
            cap,
            suggestion,
        })
    } else {
        Ok(())
    }
}

/// Every tuple picking one node from each list, in lexicographic order.
fn tuples(lists: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for l in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                l.iter().map(move |&v| {
                    let mut t = prefix.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Lightest candidate by weight, ties to the earliest position.
fn pick_best<T>(items: Vec<(f64, T)>) -> Option<T> {
    let mut best: Option<(f64, T)> = None;
    for (w, t) in items {
        if best.as_ref().map_or(true, |b| w < b.0) {
            best = Some((w, t));
        }
    }
    best.map(|b| b.1)
}

/// Labels for one representative tuple of single-to-all.
pub fn single_to_all_labels(inst: &VariantInstance, reps: &[usize]) -> Vec<LabelSet> {
    let q = inst.q();
    let fam = &inst.family;
    (0..inst.graph.node_count())
        .map(|v| {
            if let Some(i) = reps.iter().position(|&t| t == v) {
                return LabelSet::single(i);
            }
            let member: Vec<usize> = (0..q).filter(|&i| fam.contains(i, v)).collect();
            match member.len() {
                0 => LabelSet::full(q + 1),
                1 => LabelSet::single(member[0]).with(q),
                _ => LabelSet::single(q),
            }
        })
        .collect()
}

/// Guess one representative per set and solve each guess as a lifted cut.
pub fn solve_single_to_all_fixed_q(inst: &VariantInstance, params: &RoundingParams, samples: u64) -> Result<CutSolution> {
    solve_single_to_all_fixed_q_capped(inst, params, samples, DEFAULT_Q_CAP)
}

pub fn solve_single_to_all_fixed_q_capped(
    inst: &VariantInstance,
    params: &RoundingParams,
    samples: u64,
    cap: usize,
) -> Result<CutSolution> {
    expect_variant(inst, Variant::SingleToAll)?;
    check_cap(inst.q(), cap, "use the isolating-cut 2-approximation instead")?;
    let witness = require_feasible(inst)?;
    let q = inst.q();
    if q == 1 {
        return certify(inst, Cut::empty(), witness, None);
    }
    let fam = &inst.family;
    let candidates: Vec<Vec<usize>> = (0..q)
        .map(|i| fam.set(i).iter().copied().filter(|&v| (0..q).all(|j| j == i || !fam.contains(j, v))).collect())
        .collect();
    let results: Vec<(f64, (Vec<usize>, Vec<usize>, f64))> = tuples(&candidates)
        .into_par_iter()
        .map(|reps| {
            let labels = single_to_all_labels(inst, &reps);
            let li = LabelingInstance::lifted(inst.graph.clone(), reps.clone(), labels)?;
            let r = solve_lifted_cut(&li, params, samples)?;
            Ok((r.weight, (reps, r.assignment, r.lp_value)))
        })
        .collect::<Result<_>>()?;
    let (reps, assignment, lp) = pick_best(results).expect("at least one tuple");
    let cut = dichromatic_edges(&inst.graph, &assignment);
    certify(inst, cut, RepresentativeChoice::singles(reps), Some(lp))
}

/// Orientation of a tree toward its smallest node: `parent[v]` and the
/// edge to it (`None` at the root).
fn orient(tree: &Graph) -> Vec<Option<(usize, usize)>> {
    let n = tree.node_count();
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        for &(v, e) in tree.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some((u, e));
                stack.push(v);
            }
        }
    }
    parent
}

/// Result of the gammoid test: whether the cut is good, and if so one
/// representative per set that has a path (`None` for the others).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodCut {
    pub good: bool,
    pub reps: Vec<Option<usize>>,
}

/// Gammoid independence of `Z ∪ {r}` where `Z` is the set of child
/// endpoints of the cut edges, in the digraph with tree arcs toward the
/// root `r` (node 0) and an arc from a source per set to each member.
pub fn gammoid_test(tree: &Graph, c: &Cut, fam: &CandidateFamily) -> Result<GoodCut> {
    if !tree.is_tree() {
        return Err(Error::Precondition("the gammoid test needs a tree".into()));
    }
    c.check(tree)?;
    fam.check(tree)?;
    let n = tree.node_count();
    let q = fam.q();
    let parent = orient(tree);
    let child_of = |e: usize| {
        let ed = tree.edges()[e];
        if parent[ed.u].map(|p| p.1) == Some(e) {
            ed.u
        } else {
            ed.v
        }
    };
    let mut targets = vec![false; n];
    targets[0] = true;
    for e in c.iter() {
        targets[child_of(e)] = true;
    }
    let want = c.len() + 1;
    // split nodes: tree node v is in(2v) -> out(2v+1); source i likewise at
    // 2(n+i); super source 2(n+q), super sink 2(n+q)+1
    let big = (n + q + 1) as f64;
    let src = 2 * (n + q);
    let sink = src + 1;
    let mut net = FlowNetwork::new(src + 2);
    for v in 0..n + q {
        net.add_arc(2 * v, 2 * v + 1, 1.0, 0.0);
    }
    for (v, p) in parent.iter().enumerate() {
        if let Some((u, _)) = p {
            net.add_arc(2 * v + 1, 2 * u, big, 0.0);
        }
    }
    let mut member_arcs = Vec::new();
    for i in 0..q {
        net.add_arc(src, 2 * (n + i), 1.0, 0.0);
        for &v in fam.set(i) {
            member_arcs.push((i, v, net.add_arc(2 * (n + i) + 1, 2 * v, big, 0.0)));
        }
    }
    for v in 0..n {
        if targets[v] {
            net.add_arc(2 * v + 1, sink, 1.0, 0.0);
        }
    }
    let value = net.max_flow(src, sink);
    let good = value > want as f64 - 0.5;
    let mut reps = vec![None; q];
    for (i, v, a) in member_arcs {
        if net.flow(a) > 0.5 {
            reps[i] = Some(v);
        }
    }
    Ok(GoodCut { good, reps })
}

/// Whether `G - c` admits `|c| + 1` representatives of distinct sets in
/// distinct components.
pub fn is_good_cut(tree: &Graph, c: &Cut, fam: &CandidateFamily) -> Result<bool> {
    Ok(gammoid_test(tree, c, fam)?.good)
}

/// The matroid greedy on a tree: grow the cut one cheapest good edge at a
/// time (ties by edge index) until it has `q - 1` edges. Returns the cut
/// and the representatives read off the final path system.
fn tree_greedy(tree: &Graph, fam: &CandidateFamily) -> Result<(Cut, Vec<usize>)> {
    let q = fam.q();
    let mut order: Vec<usize> = (0..tree.edge_count()).collect();
    order.sort_by(|&a, &b| tree.edges()[a].w.total_cmp(&tree.edges()[b].w).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() + 1 < q {
        let next = order.iter().copied().filter(|e| !chosen.contains(e)).find(|&e| {
            let c = Cut::new(chosen.iter().copied().chain([e]));
            is_good_cut(tree, &c, fam).unwrap_or(false)
        });
        match next {
            Some(e) => chosen.push(e),
            None => {
                return Err(Error::Internal(format!(
                    "no good edge extends a cut of size {} (q = {q})",
                    chosen.len()
                )))
            }
        }
    }
    let cut = Cut::new(chosen);
    let test = gammoid_test(tree, &cut, fam)?;
    let reps: Option<Vec<usize>> = test.reps.into_iter().collect();
    let reps = reps.ok_or_else(|| Error::Internal("final path system misses a set".into()))?;
    Ok((cut, reps))
}

/// Exact single-to-single on a tree by the gammoid greedy.
pub fn solve_single_to_single_tree(tree: &Graph, fam: &CandidateFamily) -> Result<CutSolution> {
    let inst = VariantInstance::new(Variant::SingleToSingle, tree.clone(), fam.clone(), None)?;
    if !tree.is_tree() {
        return Err(Error::Precondition("input graph is not a tree".into()));
    }
    require_feasible(&inst)?;
    let (cut, reps) = tree_greedy(tree, fam)?;
    certify(&inst, cut, RepresentativeChoice::singles(reps), None)
}

/// Gomory-Hu tree, tree greedy on it, then the union of the graph cuts
/// encoded by the selected tree edges.
pub fn solve_single_to_single_gh(g: &Graph, fam: &CandidateFamily) -> Result<CutSolution> {
    let inst = VariantInstance::new(Variant::SingleToSingle, g.clone(), fam.clone(), None)?;
    require_feasible(&inst)?;
    let gh = gomory_hu(g)?;
    let tree = gh.as_graph(g)?;
    let (tree_cut, reps) = tree_greedy(&tree, fam)?;
    let mut cut = Cut::empty();
    for e in tree_cut.iter() {
        cut = cut.union(&gh.fundamental_cut(g, e)?);
    }
    certify(&inst, cut, RepresentativeChoice::singles(reps), None)
}

/// Guess a transversal and solve each guess as a multiway cut.
pub fn solve_single_to_single_fixed_q(inst: &VariantInstance, params: &RoundingParams, samples: u64) -> Result<CutSolution> {
    solve_single_to_single_fixed_q_capped(inst, params, samples, DEFAULT_Q_CAP)
}

pub fn solve_single_to_single_fixed_q_capped(
    inst: &VariantInstance,
    params: &RoundingParams,
    samples: u64,
    cap: usize,
) -> Result<CutSolution> {
    expect_variant(inst, Variant::SingleToSingle)?;
    check_cap(inst.q(), cap, "use the Gomory-Hu algorithm instead")?;
    let witness = require_feasible(inst)?;
    if inst.q() == 1 {
        return certify(inst, Cut::empty(), witness, None);
    }
    // distinct tuples only; the multiway cut depends on the terminal set
    let mut seen: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut order = Vec::new();
    for t in tuples(inst.family.sets()) {
        let mut key = t.clone();
        key.sort_unstable();
        if key.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        if !seen.contains_key(&key) {
            order.push(key.clone());
            seen.insert(key, t);
        }
    }
    let results: Vec<(f64, (Vec<usize>, Cut, f64))> = order
        .into_par_iter()
        .map(|key| {
            let r = solve_multiway_cut(&inst.graph, &key, params, samples)?;
            Ok((r.weight, (seen[&key].clone(), r.cut, r.lp_value)))
        })
        .collect::<Result<_>>()?;
    let (reps, cut, lp) = pick_best(results).expect("feasible instance has a transversal");
    certify(inst, cut, RepresentativeChoice::singles(reps), Some(lp))
}

/// Exact fixed-to-single for fixed `q`: guess the representatives and cut
/// the fixed node from all of them at once.
pub fn solve_fixed_to_single_fixed_q(inst: &VariantInstance) -> Result<CutSolution> {
    solve_fixed_to_single_fixed_q_capped(inst, DEFAULT_Q_CAP)
}

pub fn solve_fixed_to_single_fixed_q_capped(inst: &VariantInstance, cap: usize) -> Result<CutSolution> {
    expect_variant(inst, Variant::FixedToSingle)?;
    check_cap(inst.q(), cap, "no polynomial algorithm is known for unbounded q")?;
    require_feasible(inst)?;
    let s = inst.fixed.expect("validated");
    let lists: Vec<Vec<usize>> = inst.family.sets().iter().map(|t| t.iter().copied().filter(|&v| v != s).collect()).collect();
    let mut order: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut seen = BTreeSet::new();
    for t in tuples(&lists) {
        let mut key = t.clone();
        key.sort_unstable();
        key.dedup();
        if seen.insert(key.clone()) {
            order.push((key, t));
        }
    }
    let results: Vec<(f64, (Vec<usize>, Cut))> = order
        .into_par_iter()
        .map(|(key, t)| {
            let r = isolating_cut(&inst.graph, s, &key)?;
            Ok((r.weight, (t, r.cut)))
        })
        .collect::<Result<_>>()?;
    let (reps, cut) = pick_best(results).expect("feasible instance has a tuple");
    certify(inst, cut, RepresentativeChoice::singles(reps), None)
}

/// Restricted growth strings of length `n`: `a[0] = 0` and each entry is
/// at most one more than the maximum before it.
pub fn restricted_growth_strings(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut a = vec![0u8; n];
    fn rec(a: &mut Vec<u8>, i: usize, max: u8, out: &mut Vec<Vec<u8>>) {
        if i == a.len() {
            out.push(a.clone());
            return;
        }
        for c in 0..=max + 1 {
            a[i] = c;
            rec(a, i + 1, max.max(c), out);
        }
    }
    rec(&mut a, 1, 0, &mut out);
    out
}

/// A multicut with its terminal partition.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticutSolution {
    pub cut: Cut,
    pub weight: f64,
    /// Classes of demand terminals that stayed together.
    pub classes: Vec<Vec<usize>>,
    pub lp_value: Option<f64>,
}

type MultiwayCache = Mutex<HashMap<Vec<Vec<usize>>, (f64, Cut, f64)>>;

fn multiway_for_classes(g: &Graph, classes: &[Vec<usize>], params: &RoundingParams, samples: u64, cache: &MultiwayCache) -> Result<(f64, Cut, f64)> {
    if let Some(hit) = cache.lock().expect("cache lock").get(classes) {
        return Ok(hit.clone());
    }
    let c = contract(g, classes)?;
    let terminals: Vec<usize> = classes.iter().map(|cl| c.image(cl[0])).collect();
    let r = solve_multiway_cut(&c.graph, &terminals, params, samples)?;
    let out = (r.weight, c.expand_cut(&r.cut), r.lp_value);
    cache.lock().expect("cache lock").insert(classes.to_vec(), out.clone());
    Ok(out)
}

/// Multicut with few terminals: enumerate partitions of the terminals that
/// split every demand, contract each class, solve the multiway cut.
pub fn solve_multicut_fixed_terminals(
    g: &Graph,
    demands: &[(usize, usize)],
    params: &RoundingParams,
    samples: u64,
) -> Result<MulticutSolution> {
    let cache = Mutex::new(HashMap::new());
    multicut_with_cache(g, demands, params, samples, DEFAULT_TERMINAL_CAP, &cache)
}

fn multicut_with_cache(
    g: &Graph,
    demands: &[(usize, usize)],
    params: &RoundingParams,
    samples: u64,
    cap: usize,
    cache: &MultiwayCache,
) -> Result<MulticutSolution> {
    for &(a, b) in demands {
        g.check_node(a)?;
        g.check_node(b)?;
        if a == b {
            return Err(Error::Precondition(format!("demand pair on the single node `{}`", g.name(a))));
        }
    }
    if demands.is_empty() {
        return Ok(MulticutSolution {
            cut: Cut::empty(),
            weight: 0.0,
            classes: Vec::new(),
            lp_value: None,
        });
    }
    let mut terminals: Vec<usize> = demands.iter().flat_map(|&(a, b)| [a, b]).collect();
    terminals.sort_unstable();
    terminals.dedup();
    if terminals.len() > cap {
        return Err(Error::CapExceeded {
            what: "terminal count",
            value: terminals.len(),
            cap,
            suggestion: "reduce the number of distinct demand endpoints",
        });
    }
    let pos = |v: usize| terminals.binary_search(&v).expect("terminal");
    let partitions: Vec<Vec<Vec<usize>>> = restricted_growth_strings(terminals.len())
        .into_iter()
        .filter(|a| demands.iter().all(|&(x, y)| a[pos(x)] != a[pos(y)]))
        .map(|a| {
            let k = *a.iter().max().unwrap_or(&0) as usize + 1;
            let mut classes = vec![Vec::new(); k];
            for (t, &c) in terminals.iter().zip(&a) {
                classes[c as usize].push(*t);
            }
            classes
        })
        .collect();
    let results: Vec<(f64, (Vec<Vec<usize>>, Cut, f64))> = partitions
        .into_par_iter()
        .map(|classes| {
            let (w, cut, lp) = multiway_for_classes(g, &classes, params, samples, cache)?;
            Ok((w, (classes, cut, lp)))
        })
        .collect::<Result<_>>()?;
    let (classes, cut, lp) = pick_best(results).ok_or_else(|| Error::Internal("no demand-splitting partition".into()))?;
    let weight = cut_weight(g, &cut)?;
    Ok(MulticutSolution {
        cut,
        weight,
        classes,
        lp_value: Some(lp),
    })
}

/// All maps from `targets` into `set` using at most two distinct values,
/// in lexicographic order.
fn two_valued_maps(set: &[usize], len: usize) -> Vec<Vec<usize>> {
    tuples(&vec![set.to_vec(); len])
        .into_iter()
        .filter(|m| {
            let mut vals = m.clone();
            vals.sort_unstable();
            vals.dedup();
            vals.len() <= 2
        })
        .collect()
}

/// Shared driver for the two multicut-based variants: each guess yields a
/// demand set; identical demand sets are solved once.
fn solve_by_multicut(
    inst: &VariantInstance,
    guesses: Vec<(RepresentativeChoice, Vec<(usize, usize)>)>,
    params: &RoundingParams,
    samples: u64,
) -> Result<CutSolution> {
    let mut unique: Vec<(Vec<(usize, usize)>, RepresentativeChoice)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (reps, demands) in guesses {
        if demands.iter().any(|&(a, b)| a == b) {
            continue;
        }
        let mut key: Vec<(usize, usize)> = demands.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        key.sort_unstable();
        key.dedup();
        if seen.insert(key.clone()) {
            unique.push((key, reps));
        }
    }
    let cache = Mutex::new(HashMap::new());
    let results: Vec<(f64, (RepresentativeChoice, MulticutSolution))> = unique
        .into_par_iter()
        .map(|(demands, reps)| {
            let m = multicut_with_cache(&inst.graph, &demands, params, samples, DEFAULT_TERMINAL_CAP, &cache)?;
            Ok((m.weight, (reps, m)))
        })
        .collect::<Result<_>>()?;
    let (reps, m) = pick_best(results).ok_or_else(|| Error::Internal("no representative guess survived".into()))?;
    certify(inst, m.cut, reps, m.lp_value)
}

/// Pair maps `j -> t_i^j` for set `i` over all `j != i`.
fn pair_options(inst: &VariantInstance, i: usize) -> Vec<Vec<usize>> {
    two_valued_maps(inst.family.set(i), inst.q() - 1)
}

fn others(q: usize, i: usize) -> impl Iterator<Item = usize> {
    (0..q).filter(move |&j| j != i)
}

/// Guess `t_j` and at most two distinct `t_i^j` per set, then solve the
/// resulting multicut.
pub fn solve_some_to_single_fixed_q(inst: &VariantInstance, params: &RoundingParams, samples: u64) -> Result<CutSolution> {
    solve_some_to_single_fixed_q_capped(inst, params, samples, DEFAULT_SOME_TO_ALL_CAP)
}

pub fn solve_some_to_single_fixed_q_capped(
    inst: &VariantInstance,
    params: &RoundingParams,
    samples: u64,
    cap: usize,
) -> Result<CutSolution> {
    expect_variant(inst, Variant::SomeToSingle)?;
    check_cap(inst.q(), cap, "no approximation for unbounded q is implemented")?;
    let witness = require_feasible(inst)?;
    let q = inst.q();
    if q == 1 {
        return certify(inst, Cut::empty(), witness, None);
    }
    let per_set: Vec<Vec<(usize, Vec<usize>)>> = (0..q)
        .map(|i| {
            let maps = pair_options(inst, i);
            inst.family
                .set(i)
                .iter()
                .flat_map(|&t| maps.iter().map(move |m| (t, m.clone())))
                .collect()
        })
        .collect();
    let index_lists: Vec<Vec<usize>> = per_set.iter().map(|o| (0..o.len()).collect()).collect();
    let guesses = tuples(&index_lists)
        .into_iter()
        .map(|choice| {
            let single: Vec<usize> = (0..q).map(|i| per_set[i][choice[i]].0).collect();
            let mut pair = BTreeMap::new();
            let mut demands = Vec::new();
            for i in 0..q {
                for (k, j) in others(q, i).enumerate() {
                    let t = per_set[i][choice[i]].1[k];
                    pair.insert((i, j), t);
                    demands.push((t, single[j]));
                }
            }
            (
                RepresentativeChoice {
                    single: Some(single),
                    pair: Some(pair),
                },
                demands,
            )
        })
        .collect();
    solve_by_multicut(inst, guesses, params, samples)
}

/// Guess at most two distinct `t_i^j` per set, then solve the multicut.
pub fn solve_some_to_some_fixed_q(inst: &VariantInstance, params: &RoundingParams, samples: u64) -> Result<CutSolution> {
    solve_some_to_some_fixed_q_capped(inst, params, samples, DEFAULT_SOME_TO_ALL_CAP)
}

pub fn solve_some_to_some_fixed_q_capped(
    inst: &VariantInstance,
    params: &RoundingParams,
    samples: u64,
    cap: usize,
) -> Result<CutSolution> {
    expect_variant(inst, Variant::SomeToSome)?;
    check_cap(inst.q(), cap, "reduce to Steiner multicut and use an external solver")?;
    let witness = require_feasible(inst)?;
    let q = inst.q();
    if q == 1 {
        return certify(inst, Cut::empty(), witness, None);
    }
    let per_set: Vec<Vec<Vec<usize>>> = (0..q).map(|i| pair_options(inst, i)).collect();
    let index_lists: Vec<Vec<usize>> = per_set.iter().map(|o| (0..o.len()).collect()).collect();
    let guesses = tuples(&index_lists)
        .into_iter()
        .map(|choice| {
            let mut pair = BTreeMap::new();
            for i in 0..q {
                for (k, j) in others(q, i).enumerate() {
                    pair.insert((i, j), per_set[i][choice[i]][k]);
                }
            }
            let demands = (0..q)
                .flat_map(|i| (i + 1..q).map(move |j| (i, j)))
                .map(|(i, j)| (pair[&(i, j)], pair[&(j, i)]))
                .collect();
            (RepresentativeChoice::pairs(pair), demands)
        })
        .collect();
    solve_by_multicut(inst, guesses, params, samples)
}

/// Labels for one partition of the guessed some-to-all representatives:
/// class `k` is terminal `k`; a member of `T_j` may not join a class
/// holding some `t_i^j`; everyone else may take anything.
fn some_to_all_lifted(
    inst: &VariantInstance,
    classes: &[Vec<usize>],
    avoid: &[u64],
) -> Result<(LabelingInstance, Vec<usize>)> {
    let q1 = classes.len();
    let c = contract(&inst.graph, classes)?;
    let n2 = c.graph.node_count();
    let mut labels = vec![LabelSet::full(q1 + 1); n2];
    let terminals: Vec<usize> = classes.iter().map(|cl| c.image(cl[0])).collect();
    for (k, &t) in terminals.iter().enumerate() {
        labels[t] = LabelSet::single(k);
    }
    for v in 0..inst.graph.node_count() {
        let img = c.image(v);
        if terminals.contains(&img) {
            continue;
        }
        for (k, &mask) in avoid.iter().enumerate() {
            if (0..inst.q()).any(|j| mask >> j & 1 == 1 && inst.family.contains(j, v)) {
                labels[img] = labels[img].without(k);
            }
        }
    }
    Ok((LabelingInstance::lifted(c.graph, terminals, labels)?, c.node_map))
}

/// Guess all `t_i^j`, then every valid partition of them, and solve each
/// as a lifted cut.
pub fn solve_some_to_all_fixed_q(inst: &VariantInstance, params: &RoundingParams, samples: u64) -> Result<CutSolution> {
    solve_some_to_all_fixed_q_capped(inst, params, samples, DEFAULT_SOME_TO_ALL_CAP)
}

pub fn solve_some_to_all_fixed_q_capped(
    inst: &VariantInstance,
    params: &RoundingParams,
    samples: u64,
    cap: usize,
) -> Result<CutSolution> {
    expect_variant(inst, Variant::SomeToAll)?;
    check_cap(inst.q(), cap, "no approximation for unbounded q is implemented")?;
    let witness = require_feasible(inst)?;
    let q = inst.q();
    if q == 1 {
        return certify(inst, Cut::empty(), witness, None);
    }
    let fam = &inst.family;
    let pairs: Vec<(usize, usize)> = (0..q).flat_map(|i| others(q, i).map(move |j| (i, j))).collect();
    let lists: Vec<Vec<usize>> = pairs
        .iter()
        .map(|&(i, j)| fam.set(i).iter().copied().filter(|&v| !fam.contains(j, v)).collect())
        .collect();
    // A guess matters only through which sets each chosen node must avoid.
    let mut seen = BTreeSet::new();
    let mut guesses: Vec<(Vec<usize>, Vec<u64>, Vec<usize>)> = Vec::new();
    for t in tuples(&lists) {
        let mut avoid: BTreeMap<usize, u64> = BTreeMap::new();
        for (k, &(_, j)) in pairs.iter().enumerate() {
            *avoid.entry(t[k]).or_default() |= 1 << j;
        }
        let nodes: Vec<usize> = avoid.keys().copied().collect();
        let masks: Vec<u64> = avoid.values().copied().collect();
        if seen.insert((nodes.clone(), masks.clone())) {
            guesses.push((nodes, masks, t));
        }
    }
    // member_mask[v] = sets containing v
    let member_mask: Vec<u64> = (0..inst.graph.node_count())
        .map(|v| (0..q).filter(|&j| fam.contains(j, v)).fold(0u64, |m, j| m | 1 << j))
        .collect();
    let mut jobs: Vec<(Vec<Vec<usize>>, Vec<u64>, Vec<usize>)> = Vec::new();
    let mut seen_jobs = BTreeSet::new();
    for (nodes, masks, t) in guesses {
        for a in restricted_growth_strings(nodes.len()) {
            let k = *a.iter().max().unwrap_or(&0) as usize + 1;
            let mut classes = vec![Vec::new(); k];
            let mut avoid = vec![0u64; k];
            let mut members = vec![0u64; k];
            for (idx, &c) in a.iter().enumerate() {
                classes[c as usize].push(nodes[idx]);
                avoid[c as usize] |= masks[idx];
                members[c as usize] |= member_mask[nodes[idx]];
            }
            // no class may hold t_i^j together with any member of T_j
            if (0..k).any(|c| avoid[c] & members[c] != 0) {
                continue;
            }
            if seen_jobs.insert((classes.clone(), avoid.clone())) {
                jobs.push((classes, avoid, t.clone()));
            }
        }
    }
    let results: Vec<(f64, (Vec<usize>, Vec<usize>, f64))> = jobs
        .into_par_iter()
        .map(|(classes, avoid, t)| {
            let (li, node_map) = some_to_all_lifted(inst, &classes, &avoid)?;
            let r = solve_lifted_cut(&li, params, samples)?;
            let assignment: Vec<usize> = node_map.iter().map(|&img| r.assignment[img]).collect();
            Ok((r.weight, (t, assignment, r.lp_value)))
        })
        .collect::<Result<_>>()?;
    let (t, assignment, lp) = pick_best(results).ok_or_else(|| Error::Internal("no valid partition".into()))?;
    let pair: BTreeMap<(usize, usize), usize> = pairs.iter().copied().zip(t).collect();
    certify(inst, dichromatic_edges(&inst.graph, &assignment), RepresentativeChoice::pairs(pair), Some(lp))
}
