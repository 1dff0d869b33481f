//! Instance transformers between the variants and classic problems, each
//! with solution maps in both directions that preserve cut weight exactly.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{components, cut_weight, Cut, Graph, Partition};
use crate::variants::{certify, CandidateFamily, CutSolution, RepresentativeChoice, Variant, VariantInstance};

/// Sets over a ground set; `sets` hold indices into `ground`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HittingSetInstance {
    pub ground: Vec<String>,
    pub sets: Vec<Vec<usize>>,
}

impl HittingSetInstance {
    pub fn new(ground: Vec<String>, sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for g in &ground {
            if !seen.insert(g) {
                return Err(Error::DuplicateNode(g.clone()));
            }
        }
        let mut out = Vec::with_capacity(sets.len());
        for (i, mut s) in sets.into_iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Precondition(format!("set S_{} is empty", i + 1)));
            }
            if let Some(&x) = s.iter().find(|&&x| x >= ground.len()) {
                return Err(Error::NodeOutOfRange(x));
            }
            s.sort_unstable();
            s.dedup();
            out.push(s);
        }
        Ok(HittingSetInstance { ground, sets: out })
    }

    /// Builds an instance from element names.
    pub fn named(ground: &[&str], sets: &[&[&str]]) -> Result<Self> {
        let idx = |x: &str| ground.iter().position(|g| *g == x).ok_or_else(|| Error::UnknownNode(x.to_string()));
        let sets = sets
            .iter()
            .map(|s| s.iter().map(|x| idx(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        HittingSetInstance::new(ground.iter().map(|s| s.to_string()).collect(), sets)
    }

    pub fn is_hitting_set(&self, h: &[usize]) -> bool {
        self.sets.iter().all(|s| s.iter().any(|x| h.contains(x)))
    }
}

/// Node groups that must each be split into at least two components.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerMulticutInstance {
    pub graph: Graph,
    pub groups: Vec<Vec<usize>>,
}

impl SteinerMulticutInstance {
    pub fn new(graph: Graph, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut out = Vec::with_capacity(groups.len());
        for mut x in groups {
            for &v in &x {
                graph.check_node(v)?;
            }
            x.sort_unstable();
            x.dedup();
            if x.is_empty() {
                return Err(Error::Precondition("empty Steiner group".into()));
            }
            out.push(x);
        }
        Ok(SteinerMulticutInstance { graph, groups: out })
    }

    /// A group with fewer than two nodes can never be split.
    pub fn is_feasible(&self) -> bool {
        self.groups.iter().all(|x| x.len() >= 2)
    }

    pub fn is_valid_cut(&self, c: &Cut) -> Result<bool> {
        let p = components(&self.graph, c)?;
        Ok(self.groups.iter().all(|x| x.iter().any(|&v| !p.same(v, x[0]))))
    }
}

/// Hitting set to fixed-to-single on a star: the center is the fixed node
/// and edge `e` joins it to ground element `e` (node `e + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct HittingSetReduction {
    pub source: HittingSetInstance,
    pub target: VariantInstance,
}

fn unique_name(taken: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while taken.iter().any(|t| *t == name) {
        name.push('\'');
    }
    name
}

pub fn hitting_set_to_fixed_to_single(h: &HittingSetInstance) -> Result<HittingSetReduction> {
    let center = unique_name(&h.ground, "s");
    let mut g = Graph::new(std::iter::once(center).chain(h.ground.iter().cloned()))?;
    for x in 0..h.ground.len() {
        g.add_edge(0, x + 1, 1.0)?;
    }
    let sets = h.sets.iter().map(|s| s.iter().map(|&x| x + 1).collect()).collect();
    let target = VariantInstance::new(Variant::FixedToSingle, g, CandidateFamily::new(sets)?, Some(0))?;
    Ok(HittingSetReduction {
        source: h.clone(),
        target,
    })
}

impl HittingSetReduction {
    /// The star cut of a hitting set.
    pub fn forward(&self, hitting: &[usize]) -> Result<CutSolution> {
        if !self.source.is_hitting_set(hitting) {
            return Err(Error::Precondition("not a hitting set".into()));
        }
        let reps = self
            .source
            .sets
            .iter()
            .map(|s| s.iter().find(|x| hitting.contains(x)).expect("hit") + 1)
            .collect();
        certify(&self.target, Cut::new(hitting.iter().copied()), RepresentativeChoice::singles(reps), None)
    }

    /// The elements whose star edge is cut.
    pub fn backward(&self, sol: &CutSolution) -> Result<Vec<usize>> {
        sol.cut.check(&self.target.graph)?;
        let h: Vec<usize> = sol.cut.iter().collect();
        if !self.source.is_hitting_set(&h) {
            return Err(Error::Precondition("the cut is not a fixed-to-single solution".into()));
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    FixedToSomeToSingle,
    FixedToSomeToAll,
}

/// A variant-to-variant reduction whose target graph extends the source
/// graph by isolated nodes only, so cuts carry over unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantReduction {
    pub source: VariantInstance,
    pub target: VariantInstance,
    kind: Kind,
}

/// Fixed-to-single to some-to-single: `T_i' = T_i ∪ {s}` plus a new set
/// `{s}` at index `q`.
pub fn fixed_to_single_to_some_to_single(inst: &VariantInstance) -> Result<VariantReduction> {
    if inst.variant != Variant::FixedToSingle {
        return Err(Error::Precondition("expected a fixed-to-single instance".into()));
    }
    let s = inst.fixed.expect("validated");
    let mut sets: Vec<Vec<usize>> = inst.family.sets().iter().map(|t| t.iter().copied().chain([s]).collect()).collect();
    sets.push(vec![s]);
    let target = VariantInstance::new(Variant::SomeToSingle, inst.graph.clone(), CandidateFamily::new(sets)?, None)?;
    Ok(VariantReduction {
        source: inst.clone(),
        target,
        kind: Kind::FixedToSomeToSingle,
    })
}

/// Fixed-to-single to some-to-all: isolated nodes `s_0..s_{q-1}` are added,
/// `T_i' = T_i ∪ {s_i}` and a new set `{s, s_0, .., s_{q-1}}` at index `q`.
pub fn fixed_to_single_to_some_to_all(inst: &VariantInstance) -> Result<VariantReduction> {
    if inst.variant != Variant::FixedToSingle {
        return Err(Error::Precondition("expected a fixed-to-single instance".into()));
    }
    let q = inst.q();
    if q < 2 {
        return Err(Error::Precondition("the some-to-all reduction needs q >= 2".into()));
    }
    let s = inst.fixed.expect("validated");
    let mut g = inst.graph.clone();
    let n = g.node_count();
    for i in 0..q {
        let name = unique_name(g.names(), &format!("s_{}", i + 1));
        g.add_node(name)?;
    }
    let mut sets: Vec<Vec<usize>> = inst
        .family
        .sets()
        .iter()
        .enumerate()
        .map(|(i, t)| t.iter().copied().chain([n + i]).collect())
        .collect();
    sets.push(std::iter::once(s).chain(n..n + q).collect());
    let target = VariantInstance::new(Variant::SomeToAll, g, CandidateFamily::new(sets)?, None)?;
    Ok(VariantReduction {
        source: inst.clone(),
        target,
        kind: Kind::FixedToSomeToAll,
    })
}

fn singles(sol: &CutSolution) -> Result<&[usize]> {
    sol.reps.single.as_deref().ok_or_else(|| Error::Precondition("solution lacks single representatives".into()))
}

fn pairs(sol: &CutSolution) -> Result<&BTreeMap<(usize, usize), usize>> {
    sol.reps.pair.as_ref().ok_or_else(|| Error::Precondition("solution lacks pair representatives".into()))
}

/// Pair representatives for some-to-some from a cut: for every pair, the
/// first member of `T_i` and the first member of `T_j` outside its component.
fn some_to_some_reps(fam: &CandidateFamily, p: &Partition, fixed: &BTreeMap<(usize, usize), usize>) -> Option<BTreeMap<(usize, usize), usize>> {
    let q = fam.q();
    let mut out = fixed.clone();
    for i in 0..q {
        for j in i + 1..q {
            if out.contains_key(&(i, j)) {
                continue;
            }
            let (a, b) = fam
                .set(i)
                .iter()
                .flat_map(|&a| fam.set(j).iter().map(move |&b| (a, b)))
                .find(|&(a, b)| !p.same(a, b))?;
            out.insert((i, j), a);
            out.insert((j, i), b);
        }
    }
    Some(out)
}

impl VariantReduction {
    /// Maps a source solution to a target solution with the same cut.
    pub fn forward(&self, sol: &CutSolution) -> Result<CutSolution> {
        let q = self.source.q();
        let reps = match self.kind {
            Kind::FixedToSomeToSingle => {
                let s = self.source.fixed.expect("validated");
                let t = singles(sol)?;
                let mut single = t.to_vec();
                single.push(s);
                let mut pair = BTreeMap::new();
                for i in 0..=q {
                    for j in 0..=q {
                        if i != j {
                            pair.insert((i, j), if j == q { t[i] } else { s });
                        }
                    }
                }
                RepresentativeChoice {
                    single: Some(single),
                    pair: Some(pair),
                }
            }
            Kind::FixedToSomeToAll => {
                let t = singles(sol)?;
                let n = self.source.graph.node_count();
                let mut pair = BTreeMap::new();
                for i in 0..q {
                    for j in 0..q {
                        if i != j {
                            pair.insert((i, j), n + i);
                        }
                    }
                    pair.insert((i, q), t[i]);
                    pair.insert((q, i), n + (i + 1) % q);
                }
                RepresentativeChoice::pairs(pair)
            }
        };
        certify(&self.target, sol.cut.clone(), reps, None)
    }

    /// Maps a target solution back to a source solution with the same cut.
    pub fn backward(&self, sol: &CutSolution) -> Result<CutSolution> {
        let q = self.source.q();
        let cut = sol.cut.clone();
        let reps = match self.kind {
            Kind::FixedToSomeToSingle => singles(sol)?[..q].to_vec(),
            Kind::FixedToSomeToAll => {
                let p = pairs(sol)?;
                (0..q).map(|j| p.get(&(j, q)).copied().ok_or_else(|| Error::Precondition(format!("missing t_{}^{}", j + 1, q + 1)))).collect::<Result<_>>()?
            }
        };
        certify(&self.source, cut, RepresentativeChoice::singles(reps), None)
    }
}

/// Steiner multicut to some-to-some: group `X_j` becomes the sets `2j`
/// and `2j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerToSomeToSome {
    pub source: SteinerMulticutInstance,
    pub target: VariantInstance,
}

pub fn steiner_to_some_to_some(sm: &SteinerMulticutInstance) -> Result<SteinerToSomeToSome> {
    let sets = sm.groups.iter().flat_map(|x| [x.clone(), x.clone()]).collect();
    let target = VariantInstance::new(Variant::SomeToSome, sm.graph.clone(), CandidateFamily::new(sets)?, None)?;
    Ok(SteinerToSomeToSome {
        source: sm.clone(),
        target,
    })
}

impl SteinerToSomeToSome {
    pub fn forward(&self, cut: &Cut) -> Result<CutSolution> {
        if !self.source.is_valid_cut(cut)? {
            return Err(Error::Precondition("the cut leaves a Steiner group whole".into()));
        }
        let p = components(&self.source.graph, cut)?;
        let mut fixed = BTreeMap::new();
        for (j, x) in self.source.groups.iter().enumerate() {
            let b = *x.iter().find(|&&v| !p.same(v, x[0])).expect("group is split");
            fixed.insert((2 * j, 2 * j + 1), x[0]);
            fixed.insert((2 * j + 1, 2 * j), b);
        }
        let reps = some_to_some_reps(&self.target.family, &p, &fixed)
            .ok_or_else(|| Error::Internal("split groups leave a pair unseparated".into()))?;
        certify(&self.target, cut.clone(), RepresentativeChoice::pairs(reps), None)
    }

    pub fn backward(&self, sol: &CutSolution) -> Result<Cut> {
        if !self.source.is_valid_cut(&sol.cut)? {
            return Err(Error::Precondition("the solution leaves a Steiner group whole".into()));
        }
        Ok(sol.cut.clone())
    }
}

/// Which branch of the representative extraction produced a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtractionCase {
    /// `v ∈ T_i`, `u ∈ T_j`.
    One,
    /// `u ∈ T_i`, `v ∈ T_j`.
    Two,
    /// Both witnesses in `T_i`, all of `T_j` with `u`.
    ThreeAllWithU,
    /// Both witnesses in `T_i`, some `w ∈ T_j` apart from `u`.
    ThreeSomeApart,
    /// Both witnesses in `T_j`, all of `T_i` with `u`.
    FourAllWithU,
    /// Both witnesses in `T_j`, some `w ∈ T_i` apart from `u`.
    FourSomeApart,
}

impl fmt::Display for ExtractionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtractionCase::One => "1",
            ExtractionCase::Two => "2",
            ExtractionCase::ThreeAllWithU => "3(i)",
            ExtractionCase::ThreeSomeApart => "3(ii)",
            ExtractionCase::FourAllWithU => "4(i)",
            ExtractionCase::FourSomeApart => "4(ii)",
        })
    }
}

/// Some-to-some to Steiner multicut: one group `T_i ∪ T_j` per pair
/// `i < j`, listed in lexicographic pair order.
#[derive(Debug, Clone, PartialEq)]
pub struct SomeToSomeToSteiner {
    pub source: VariantInstance,
    pub target: SteinerMulticutInstance,
    pub pairs: Vec<(usize, usize)>,
}

pub fn some_to_some_to_steiner(inst: &VariantInstance) -> Result<SomeToSomeToSteiner> {
    if inst.variant != Variant::SomeToSome {
        return Err(Error::Precondition("expected a some-to-some instance".into()));
    }
    let q = inst.q();
    let pairs: Vec<(usize, usize)> = (0..q).flat_map(|i| (i + 1..q).map(move |j| (i, j))).collect();
    let groups = pairs
        .iter()
        .map(|&(i, j)| inst.family.set(i).iter().chain(inst.family.set(j)).copied().collect())
        .collect();
    let target = SteinerMulticutInstance::new(inst.graph.clone(), groups)?;
    Ok(SomeToSomeToSteiner {
        source: inst.clone(),
        target,
        pairs,
    })
}

impl SomeToSomeToSteiner {
    pub fn forward(&self, sol: &CutSolution) -> Result<Cut> {
        if !self.target.is_valid_cut(&sol.cut)? {
            return Err(Error::Internal("a some-to-some solution left a pair group whole".into()));
        }
        Ok(sol.cut.clone())
    }

    /// Representatives from a Steiner cut, with the extraction case used for
    /// each pair (in `pairs` order).
    pub fn backward_with_cases(&self, cut: &Cut) -> Result<(CutSolution, Vec<ExtractionCase>)> {
        if !self.target.is_valid_cut(cut)? {
            return Err(Error::Precondition("the cut leaves a pair group whole".into()));
        }
        let p = components(&self.source.graph, cut)?;
        let fam = &self.source.family;
        let mut reps = BTreeMap::new();
        let mut cases = Vec::with_capacity(self.pairs.len());
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let x = &self.target.groups[k];
            let u = x[0];
            let v = *x.iter().find(|&&v| !p.same(u, v)).expect("group is split");
            let (ti, tj, case) = if fam.contains(i, v) && fam.contains(j, u) {
                (v, u, ExtractionCase::One)
            } else if fam.contains(i, u) && fam.contains(j, v) {
                (u, v, ExtractionCase::Two)
            } else if fam.contains(i, u) && fam.contains(i, v) {
                match fam.set(j).iter().find(|&&w| !p.same(w, u)) {
                    None => (v, fam.set(j)[0], ExtractionCase::ThreeAllWithU),
                    Some(&w) => (u, w, ExtractionCase::ThreeSomeApart),
                }
            } else {
                match fam.set(i).iter().find(|&&w| !p.same(w, u)) {
                    None => (fam.set(i)[0], v, ExtractionCase::FourAllWithU),
                    Some(&w) => (w, u, ExtractionCase::FourSomeApart),
                }
            };
            reps.insert((i, j), ti);
            reps.insert((j, i), tj);
            cases.push(case);
        }
        let sol = certify(&self.source, cut.clone(), RepresentativeChoice::pairs(reps), None)?;
        Ok((sol, cases))
    }

    pub fn backward(&self, cut: &Cut) -> Result<CutSolution> {
        Ok(self.backward_with_cases(cut)?.0)
    }
}

/// Weight of a Steiner cut.
pub fn steiner_cut_weight(sm: &SteinerMulticutInstance, cut: &Cut) -> Result<f64> {
    cut_weight(&sm.graph, cut)
}
