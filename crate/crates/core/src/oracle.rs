//! Exhaustive exact solvers used as ground truth.
//!
//! The primary oracle enumerates every set partition of the nodes as a
//! restricted growth string; the cut of a partition is the set of edges
//! between classes. The second oracle enumerates edge subsets instead and
//! searches representatives by brute force, so the two share no code
//! beyond the graph type.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{dichromatic_edges, Cut, Graph};
use crate::lifted::LabelingInstance;
use crate::reductions::{HittingSetInstance, SteinerMulticutInstance};
use crate::variants::{certify, restricted_growth_strings, CutSolution, RepresentativeChoice, Variant, VariantInstance};

/// Size and time limits for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    pub max_nodes: usize,
    /// Only partitions with at most this many classes are enumerated.
    pub max_blocks: usize,
    pub time_budget: Option<Duration>,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_nodes: 9,
            max_blocks: usize::MAX,
            time_budget: None,
        }
    }
}

/// Default edge limit of the edge-subset oracle.
pub const DEFAULT_MAX_EDGES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Optimal(CutSolution),
    Infeasible,
}

impl OracleOutcome {
    pub fn weight(&self) -> Option<f64> {
        match self {
            OracleOutcome::Optimal(s) => Some(s.weight),
            OracleOutcome::Infeasible => None,
        }
    }

    pub fn solution(&self) -> Option<&CutSolution> {
        match self {
            OracleOutcome::Optimal(s) => Some(s),
            OracleOutcome::Infeasible => None,
        }
    }
}

const CHUNK: usize = 1024;

struct Budget {
    start: Instant,
    limit: Option<Duration>,
}

impl Budget {
    fn new(limits: &OracleLimits) -> Self {
        Budget {
            start: Instant::now(),
            limit: limits.time_budget,
        }
    }

    fn check(&self) -> Result<()> {
        match self.limit {
            Some(l) if self.start.elapsed() > l => {
                Err(Error::Budget(format!("oracle exceeded its time budget of {:.1}s", l.as_secs_f64())))
            }
            _ => Ok(()),
        }
    }
}

/// Per-partition view: `class[v]` and the node mask of each class.
struct Classes<'a> {
    class: &'a [u8],
    masks: Vec<u32>,
}

impl<'a> Classes<'a> {
    fn new(class: &'a [u8]) -> Self {
        let k = class.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut masks = vec![0u32; k];
        for (v, &c) in class.iter().enumerate() {
            masks[c as usize] |= 1 << v;
        }
        Classes { class, masks }
    }

    fn mask_of(&self, v: usize) -> u32 {
        self.masks[self.class[v] as usize]
    }
}

/// Minimum over all partitions accepted by `accept`, ties to the earliest
/// restricted growth string. Returns the string and what `accept` produced.
fn min_over_partitions<R, F>(g: &Graph, limits: &OracleLimits, accept: F) -> Result<Option<(Vec<u8>, R)>>
where
    R: Send,
    F: Fn(&Classes) -> Option<R> + Sync,
{
    let n = g.node_count();
    if n > limits.max_nodes {
        return Err(Error::Budget(format!("{n} nodes exceed the oracle limit of {}", limits.max_nodes)));
    }
    if n > 32 {
        return Err(Error::Budget("the oracle handles at most 32 nodes".into()));
    }
    let budget = Budget::new(limits);
    let strings: Vec<Vec<u8>> = restricted_growth_strings(n)
        .into_iter()
        .filter(|a| a.iter().map(|&c| c as usize + 1).max().unwrap_or(0) <= limits.max_blocks)
        .collect();
    let edges = g.edges();
    let best = strings
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| -> Result<Option<(f64, usize, R)>> {
            budget.check()?;
            let mut best: Option<(f64, usize, R)> = None;
            for (k, a) in chunk.iter().enumerate() {
                let w: f64 = edges.iter().filter(|e| a[e.u] != a[e.v]).map(|e| e.w).sum();
                if best.as_ref().is_some_and(|b| w >= b.0) {
                    continue;
                }
                if let Some(r) = accept(&Classes::new(a)) {
                    best = Some((w, ci * CHUNK + k, r));
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .fold(None::<(f64, usize, R)>, |acc, x| match acc {
            Some(a) if a.0 < x.0 || (a.0 == x.0 && a.1 < x.1) => Some(a),
            _ => Some(x),
        });
    Ok(best.map(|(_, idx, r)| (strings[idx].clone(), r)))
}

fn set_masks(inst: &VariantInstance) -> Vec<u32> {
    inst.family.sets().iter().map(|s| s.iter().fold(0u32, |m, &v| m | 1 << v)).collect()
}

fn first_in(mask: u32) -> Option<usize> {
    (mask != 0).then(|| mask.trailing_zeros() as usize)
}

/// Representatives that make the partition feasible, found class-wise.
fn partition_reps(inst: &VariantInstance, sets: &[u32], p: &Classes) -> Option<RepresentativeChoice> {
    let q = sets.len();
    let others = |i: usize| (0..q).filter(|&j| j != i).fold(0u32, |m, j| m | sets[j]);
    // members of T_i whose class avoids `forbidden`
    let members_avoiding = |i: usize, forbidden: u32| {
        let mut m = sets[i];
        let mut out = 0u32;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            if p.mask_of(v) & forbidden == 0 {
                out |= 1 << v;
            }
        }
        out
    };
    let pairs = |f: &dyn Fn(usize, usize) -> Option<usize>| -> Option<BTreeMap<(usize, usize), usize>> {
        let mut out = BTreeMap::new();
        for i in 0..q {
            for j in 0..q {
                if i != j {
                    out.insert((i, j), f(i, j)?);
                }
            }
        }
        Some(out)
    };
    match inst.variant {
        Variant::AllToAll => p
            .masks
            .iter()
            .all(|&c| sets.iter().filter(|&&s| s & c != 0).count() <= 1)
            .then(RepresentativeChoice::none),
        Variant::SingleToAll => (0..q)
            .map(|i| first_in(members_avoiding(i, others(i))))
            .collect::<Option<Vec<_>>>()
            .map(RepresentativeChoice::singles),
        Variant::SingleToSingle => {
            // sets to distinct classes by augmenting paths
            let k = p.masks.len();
            let mut owner: Vec<Option<usize>> = vec![None; k];
            fn augment(i: usize, sets: &[u32], masks: &[u32], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
                for c in 0..masks.len() {
                    if sets[i] & masks[c] != 0 && !seen[c] {
                        seen[c] = true;
                        if owner[c].map_or(true, |o| augment(o, sets, masks, seen, owner)) {
                            owner[c] = Some(i);
                            return true;
                        }
                    }
                }
                false
            }
            for i in 0..q {
                let mut seen = vec![false; k];
                if !augment(i, sets, &p.masks, &mut seen, &mut owner) {
                    return None;
                }
            }
            let mut reps = vec![0; q];
            for (c, o) in owner.iter().enumerate() {
                if let Some(i) = o {
                    reps[*i] = first_in(sets[*i] & p.masks[c]).expect("matched class meets the set");
                }
            }
            Some(RepresentativeChoice::singles(reps))
        }
        Variant::FixedToSingle => {
            let s = inst.fixed.expect("validated");
            (0..q)
                .map(|i| first_in(sets[i] & !p.mask_of(s)))
                .collect::<Option<Vec<_>>>()
                .map(RepresentativeChoice::singles)
        }
        Variant::SomeToSingle => {
            let single = (0..q)
                .map(|j| {
                    let mut m = sets[j];
                    while m != 0 {
                        let t = m.trailing_zeros() as usize;
                        m &= m - 1;
                        let c = p.mask_of(t);
                        if (0..q).all(|i| i == j || sets[i] & !c != 0) {
                            return Some(t);
                        }
                    }
                    None
                })
                .collect::<Option<Vec<_>>>()?;
            let pair = pairs(&|i, j| first_in(sets[i] & !p.mask_of(single[j])))?;
            Some(RepresentativeChoice {
                single: Some(single),
                pair: Some(pair),
            })
        }
        Variant::SomeToSome => {
            let mut out = BTreeMap::new();
            for i in 0..q {
                for j in i + 1..q {
                    let mut m = sets[i];
                    let mut found = None;
                    while m != 0 && found.is_none() {
                        let a = m.trailing_zeros() as usize;
                        m &= m - 1;
                        found = first_in(sets[j] & !p.mask_of(a)).map(|b| (a, b));
                    }
                    let (a, b) = found?;
                    out.insert((i, j), a);
                    out.insert((j, i), b);
                }
            }
            Some(RepresentativeChoice::pairs(out))
        }
        Variant::SomeToAll => pairs(&|i, j| first_in(members_avoiding(i, sets[j]))).map(RepresentativeChoice::pairs),
    }
}

/// Exact optimum of a variant instance by partition enumeration.
pub fn exact_solve(inst: &VariantInstance, limits: &OracleLimits) -> Result<OracleOutcome> {
    let sets = set_masks(inst);
    let best = min_over_partitions(&inst.graph, limits, |p| partition_reps(inst, &sets, p))?;
    match best {
        None => Ok(OracleOutcome::Infeasible),
        Some((a, reps)) => {
            let labels: Vec<usize> = a.iter().map(|&c| c as usize).collect();
            let cut = dichromatic_edges(&inst.graph, &labels);
            Ok(OracleOutcome::Optimal(certify(inst, cut, reps, None)?))
        }
    }
}

fn oracle_cut(g: &Graph, a: Vec<u8>) -> (Cut, f64) {
    let labels: Vec<usize> = a.iter().map(|&c| c as usize).collect();
    let cut = dichromatic_edges(g, &labels);
    let w = cut.iter().map(|e| g.edges()[e].w).sum();
    (cut, w)
}

/// Exact multiway cut: terminals end up in pairwise distinct classes.
pub fn exact_multiway_cut(g: &Graph, terminals: &[usize], limits: &OracleLimits) -> Result<(Cut, f64)> {
    for &t in terminals {
        g.check_node(t)?;
    }
    let pairs: Vec<(usize, usize)> = (0..terminals.len())
        .flat_map(|i| (i + 1..terminals.len()).map(move |j| (terminals[i], terminals[j])))
        .collect();
    exact_multicut(g, &pairs, limits)
}

/// Exact multicut: every demand pair ends up in distinct classes.
pub fn exact_multicut(g: &Graph, demands: &[(usize, usize)], limits: &OracleLimits) -> Result<(Cut, f64)> {
    for &(a, b) in demands {
        g.check_node(a)?;
        g.check_node(b)?;
        if a == b {
            return Err(Error::Precondition(format!("demand pair on the single node `{}`", g.name(a))));
        }
    }
    let best = min_over_partitions(g, limits, |p| demands.iter().all(|&(a, b)| p.class[a] != p.class[b]).then_some(()))?;
    let (a, ()) = best.ok_or_else(|| Error::Internal("the all-singletons partition splits every demand".into()))?;
    Ok(oracle_cut(g, a))
}

/// Exact Steiner multicut: no group stays inside one class.
pub fn exact_steiner_multicut(sm: &SteinerMulticutInstance, limits: &OracleLimits) -> Result<Option<(Cut, f64)>> {
    let best = min_over_partitions(&sm.graph, limits, |p| {
        sm.groups.iter().all(|x| x.iter().any(|&v| p.class[v] != p.class[x[0]])).then_some(())
    })?;
    Ok(best.map(|(a, ())| oracle_cut(&sm.graph, a)))
}

/// Exact lifted cut (or any labeling instance) by enumerating every
/// labeling within the lists. Returns the assignment and its cut weight.
pub fn exact_lifted_cut(inst: &LabelingInstance, max_labelings: u64) -> Result<(Vec<usize>, f64)> {
    inst.validate()?;
    let g = &inst.graph;
    let lists: Vec<Vec<usize>> = inst.labels.iter().map(|l| l.iter().collect()).collect();
    let total = lists.iter().try_fold(1u64, |acc, l| acc.checked_mul(l.len() as u64)).unwrap_or(u64::MAX);
    if total > max_labelings {
        return Err(Error::Budget(format!("{total} labelings exceed the limit of {max_labelings}")));
    }
    let n = g.node_count();
    let best = (0..total)
        .into_par_iter()
        .map(|code| {
            let mut rest = code;
            let mut a = vec![0usize; n];
            // last node varies fastest, so codes follow lexicographic order
            for v in (0..n).rev() {
                let k = lists[v].len() as u64;
                a[v] = lists[v][(rest % k) as usize];
                rest /= k;
            }
            let w: f64 = g.edges().iter().filter(|e| a[e.u] != a[e.v]).map(|e| e.w).sum();
            (w, code)
        })
        .reduce(|| (f64::INFINITY, u64::MAX), |x, y| if x.0 < y.0 || (x.0 == y.0 && x.1 < y.1) { x } else { y });
    let mut rest = best.1;
    let mut a = vec![0usize; n];
    for v in (0..n).rev() {
        let k = lists[v].len() as u64;
        a[v] = lists[v][(rest % k) as usize];
        rest /= k;
    }
    Ok((a, best.0))
}

/// Minimum hitting set by subset enumeration, as ground-element indices.
pub fn exact_hitting_set(h: &HittingSetInstance) -> Result<Vec<usize>> {
    let n = h.ground.len();
    if n > 24 {
        return Err(Error::Budget(format!("{n} ground elements exceed the limit of 24")));
    }
    let sets: Vec<u32> = h.sets.iter().map(|s| s.iter().fold(0u32, |m, &x| m | 1 << x)).collect();
    let best = (0u32..1 << n)
        .filter(|&m| sets.iter().all(|&s| s & m != 0))
        .min_by_key(|&m| (m.count_ones(), m.reverse_bits()))
        .ok_or_else(|| Error::Internal("the whole ground set hits every set".into()))?;
    Ok((0..n).filter(|&i| best >> i & 1 == 1).collect())
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Brute-force representative search on explicit component ids.
fn brute_reps(inst: &VariantInstance, comp: &[usize]) -> Option<RepresentativeChoice> {
    let fam = &inst.family;
    let q = fam.q();
    let apart = |a: usize, b: usize| comp[a] != comp[b];
    let apart_from_set = |a: usize, j: usize| fam.set(j).iter().all(|&b| apart(a, b));
    let mut pair = BTreeMap::new();
    match inst.variant {
        Variant::AllToAll => {
            for i in 0..q {
                for j in i + 1..q {
                    if !fam.set(i).iter().all(|&a| apart_from_set(a, j)) {
                        return None;
                    }
                }
            }
            Some(RepresentativeChoice::none())
        }
        Variant::SingleToAll => {
            let mut reps = Vec::new();
            for i in 0..q {
                let t = fam.set(i).iter().copied().find(|&t| (0..q).all(|j| j == i || apart_from_set(t, j)))?;
                reps.push(t);
            }
            Some(RepresentativeChoice::singles(reps))
        }
        Variant::SingleToSingle => {
            fn search(inst: &VariantInstance, comp: &[usize], chosen: &mut Vec<usize>) -> bool {
                let i = chosen.len();
                if i == inst.q() {
                    return true;
                }
                for &t in inst.family.set(i) {
                    if chosen.iter().all(|&c| comp[c] != comp[t]) {
                        chosen.push(t);
                        if search(inst, comp, chosen) {
                            return true;
                        }
                        chosen.pop();
                    }
                }
                false
            }
            let mut chosen = Vec::new();
            search(inst, comp, &mut chosen).then(|| RepresentativeChoice::singles(chosen))
        }
        Variant::FixedToSingle => {
            let s = inst.fixed.expect("validated");
            let reps = (0..q)
                .map(|j| fam.set(j).iter().copied().find(|&t| apart(s, t)))
                .collect::<Option<Vec<_>>>()?;
            Some(RepresentativeChoice::singles(reps))
        }
        Variant::SomeToSingle => {
            let mut single = Vec::new();
            for j in 0..q {
                let t = fam
                    .set(j)
                    .iter()
                    .copied()
                    .find(|&t| (0..q).all(|i| i == j || fam.set(i).iter().any(|&a| apart(a, t))))?;
                single.push(t);
            }
            for i in 0..q {
                for j in 0..q {
                    if i != j {
                        let a = fam.set(i).iter().copied().find(|&a| apart(a, single[j]))?;
                        pair.insert((i, j), a);
                    }
                }
            }
            Some(RepresentativeChoice {
                single: Some(single),
                pair: Some(pair),
            })
        }
        Variant::SomeToSome => {
            for i in 0..q {
                for j in i + 1..q {
                    let (a, b) = fam
                        .set(i)
                        .iter()
                        .flat_map(|&a| fam.set(j).iter().map(move |&b| (a, b)))
                        .find(|&(a, b)| apart(a, b))?;
                    pair.insert((i, j), a);
                    pair.insert((j, i), b);
                }
            }
            Some(RepresentativeChoice::pairs(pair))
        }
        Variant::SomeToAll => {
            for i in 0..q {
                for j in 0..q {
                    if i != j {
                        let a = fam.set(i).iter().copied().find(|&a| apart_from_set(a, j))?;
                        pair.insert((i, j), a);
                    }
                }
            }
            Some(RepresentativeChoice::pairs(pair))
        }
    }
}

/// Exact optimum by enumerating every subset of removed edges; the
/// independent cross-check for [`exact_solve`].
pub fn exact_solve_by_edges(inst: &VariantInstance, max_edges: usize) -> Result<OracleOutcome> {
    let g = &inst.graph;
    let m = g.edge_count();
    if m > max_edges || m >= 32 {
        return Err(Error::Budget(format!("{m} edges exceed the edge-subset limit of {max_edges}")));
    }
    let n = g.node_count();
    let best = (0u64..1 << m)
        .into_par_iter()
        .filter_map(|removed| {
            let mut uf = UnionFind::new(n);
            let mut w = 0.0;
            for (e, ed) in g.edges().iter().enumerate() {
                if removed >> e & 1 == 1 {
                    w += ed.w;
                } else {
                    uf.union(ed.u, ed.v);
                }
            }
            let comp: Vec<usize> = (0..n).map(|v| uf.find(v)).collect();
            brute_reps(inst, &comp).map(|r| (w, removed, r))
        })
        .reduce_with(|x, y| if x.0 < y.0 || (x.0 == y.0 && x.1 < y.1) { x } else { y });
    match best {
        None => Ok(OracleOutcome::Infeasible),
        Some((_, removed, reps)) => {
            let cut = Cut::new((0..m).filter(|e| removed >> e & 1 == 1));
            Ok(OracleOutcome::Optimal(certify(inst, cut, reps, None)?))
        }
    }
}
