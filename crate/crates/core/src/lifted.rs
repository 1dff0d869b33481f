//! Labeling relaxations and their randomized rounding.
//!
//! Three relaxations share one builder:
//!
//! * [`Mode::Lifted`]: terminals `s_0..s_{q-1}` carry exactly their own
//!   label and every other node may also take the extra label `q`. This is
//!   the lifted cut problem; the extra label has no terminal and no
//!   threshold, and threshold schemes always consider it last.
//! * [`Mode::Ckr`]: plain multiway cut, one terminal per simplex vertex.
//! * [`Mode::Uml`]: uniform metric labeling with arbitrary lists.
//!
//! Labels are 0-based throughout. The LP objective is reported both raw
//! (`sum w * |x^u - x^v|_1`) and halved; the halved value equals the cut
//! weight on integral points, so every ratio in this crate uses it.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, LabelCondition, Result};
use crate::graph::{cut_weight, dichromatic_edges, Cut, Graph};
use crate::lp::{solve_lp, LinearProgram, LpSolution, Relation};
use crate::rng::{self, Rng};

/// Hard cap on Kleinberg-Tardos rounds before giving up.
pub const KT_ITERATION_CAP: u64 = 10_000_000;

/// A set of labels below 64, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LabelSet(u64);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);

    pub fn single(i: usize) -> Self {
        assert!(i < 64, "label {i} out of range");
        LabelSet(1 << i)
    }

    /// `{0, .., k-1}`.
    pub fn full(k: usize) -> Self {
        assert!(k <= 64, "label count {k} out of range");
        if k == 64 {
            LabelSet(u64::MAX)
        } else {
            LabelSet((1u64 << k) - 1)
        }
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        *self = self.with(i);
    }

    pub fn with(self, i: usize) -> Self {
        LabelSet(self.0 | LabelSet::single(i).0)
    }

    pub fn without(self, i: usize) -> Self {
        LabelSet(self.0 & !LabelSet::single(i).0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Largest member plus one (0 for the empty set).
    pub fn bound(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.0 >> i & 1 == 1)
    }
}

impl FromIterator<usize> for LabelSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        iter.into_iter().fold(LabelSet::EMPTY, LabelSet::with)
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Lifted,
    Ckr,
    Uml,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelingInstance {
    pub graph: Graph,
    pub label_count: usize,
    pub labels: Vec<LabelSet>,
    /// `terminals[i]` is the node fixed to label `i`.
    pub terminals: Vec<usize>,
    pub mode: Mode,
}

impl LabelingInstance {
    /// A lifted cut instance with `terminals.len() + 1` labels.
    pub fn lifted(graph: Graph, terminals: Vec<usize>, labels: Vec<LabelSet>) -> Result<Self> {
        let inst = LabelingInstance {
            label_count: terminals.len() + 1,
            graph,
            labels,
            terminals,
            mode: Mode::Lifted,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// The multiway cut relaxation: terminal `i` fixed to label `i`, every
    /// other node free over all labels.
    pub fn multiway(graph: Graph, terminals: Vec<usize>) -> Result<Self> {
        let k = terminals.len();
        if k == 0 || k > 64 {
            return Err(Error::Precondition(format!("label count {k} must be in 1..=64")));
        }
        let mut labels = vec![LabelSet::full(k); graph.node_count()];
        for (i, &t) in terminals.iter().enumerate() {
            graph.check_node(t)?;
            labels[t] = LabelSet::single(i);
        }
        let inst = LabelingInstance {
            graph,
            label_count: k,
            labels,
            terminals,
            mode: Mode::Ckr,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Uniform metric labeling with explicit lists and no terminals.
    pub fn uml(graph: Graph, label_count: usize, labels: Vec<LabelSet>) -> Result<Self> {
        let inst = LabelingInstance {
            graph,
            label_count,
            labels,
            terminals: Vec::new(),
            mode: Mode::Uml,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.node_count();
        if self.labels.len() != n {
            return Err(Error::Dimension(format!("{} label lists for {n} nodes", self.labels.len())));
        }
        if self.label_count == 0 || self.label_count > 64 {
            return Err(Error::Precondition(format!("label count {} must be in 1..=64", self.label_count)));
        }
        let mut is_terminal = vec![false; n];
        for &t in &self.terminals {
            self.graph.check_node(t)?;
            if is_terminal[t] {
                return Err(Error::Precondition(format!("terminal `{}` listed twice", self.graph.name(t))));
            }
            is_terminal[t] = true;
        }
        for v in 0..n {
            let l = self.labels[v];
            if l.is_empty() || l.bound() > self.label_count {
                return Err(self.condition(LabelCondition::NonEmpty, v));
            }
        }
        match self.mode {
            Mode::Lifted => {
                if self.label_count != self.terminals.len() + 1 {
                    return Err(Error::Precondition("lifted instances use q + 1 labels".into()));
                }
                for (i, &t) in self.terminals.iter().enumerate() {
                    if self.labels[t] != LabelSet::single(i) {
                        return Err(self.condition(LabelCondition::TerminalLabel, t));
                    }
                }
                let extra = self.terminals.len();
                for v in 0..n {
                    if !is_terminal[v] && !self.labels[v].contains(extra) {
                        return Err(self.condition(LabelCondition::ExtraLabel, v));
                    }
                }
            }
            Mode::Ckr => {
                if self.terminals.len() != self.label_count {
                    return Err(Error::Precondition(
                        "the multiway relaxation needs one terminal per label".into(),
                    ));
                }
                for (i, &t) in self.terminals.iter().enumerate() {
                    if self.labels[t] != LabelSet::single(i) {
                        return Err(self.condition(LabelCondition::TerminalLabel, t));
                    }
                }
            }
            Mode::Uml => {}
        }
        Ok(())
    }

    fn condition(&self, condition: LabelCondition, v: usize) -> Error {
        Error::LabelCondition {
            condition,
            node: self.graph.name(v).to_string(),
        }
    }

    /// The label that threshold schemes leave for last, if fixed.
    pub fn extra_label(&self) -> Option<usize> {
        match self.mode {
            Mode::Lifted => Some(self.terminals.len()),
            _ => None,
        }
    }

    /// Errors unless `assignment` respects every list.
    pub fn check_labeling(&self, assignment: &[usize]) -> Result<()> {
        if assignment.len() != self.graph.node_count() {
            return Err(Error::Dimension("labeling length differs from node count".into()));
        }
        for (v, &a) in assignment.iter().enumerate() {
            if !self.labels[v].contains(a) {
                return Err(Error::Internal(format!(
                    "node `{}` labeled {a} outside its list {}",
                    self.graph.name(v),
                    self.labels[v]
                )));
            }
        }
        for (i, &t) in self.terminals.iter().enumerate() {
            if assignment[t] != i {
                return Err(Error::Internal(format!("terminal `{}` lost its label", self.graph.name(t))));
            }
        }
        Ok(())
    }
}

/// How one embedding coordinate is represented in the program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coord {
    Var(usize),
    Const(f64),
}

/// The linearized relaxation of a labeling instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationLp {
    pub program: LinearProgram,
    /// `coords[v][i]` for node `v`, label `i`.
    pub coords: Vec<Vec<Coord>>,
}

/// Builds the relaxation LP. Nodes with a single allowed label are
/// constants; each edge contributes one auxiliary per coordinate where its
/// endpoints may differ, bounded below by both signed differences.
pub fn build_lift_lp(inst: &LabelingInstance) -> Result<RelaxationLp> {
    inst.validate()?;
    let g = &inst.graph;
    let k = inst.label_count;
    let mut program = LinearProgram::new(0);
    let mut coords = Vec::with_capacity(g.node_count());
    for v in 0..g.node_count() {
        let l = inst.labels[v];
        let row: Vec<Coord> = if l.len() == 1 {
            (0..k).map(|i| Coord::Const(if l.contains(i) { 1.0 } else { 0.0 })).collect()
        } else {
            let row: Vec<Coord> = (0..k)
                .map(|i| {
                    if l.contains(i) {
                        Coord::Var(program.add_variable(format!("x_{v}_{i}"), 0.0, 0.0, 1.0))
                    } else {
                        Coord::Const(0.0)
                    }
                })
                .collect();
            let terms = row
                .iter()
                .filter_map(|c| match c {
                    Coord::Var(j) => Some((*j, 1.0)),
                    Coord::Const(_) => None,
                })
                .collect();
            program.add_constraint(terms, Relation::Eq, 1.0);
            row
        };
        coords.push(row);
    }
    for (ei, e) in g.edges().iter().enumerate() {
        for i in 0..k {
            match (coords[e.u][i], coords[e.v][i]) {
                (Coord::Const(a), Coord::Const(b)) => program.offset += e.w * (a - b).abs(),
                (cu, cv) => {
                    if e.w == 0.0 {
                        continue;
                    }
                    let z = program.add_variable(format!("d_{ei}_{i}"), e.w, 0.0, f64::INFINITY);
                    // z >= x_u - x_v and z >= x_v - x_u
                    for sign in [1.0, -1.0] {
                        let mut terms = vec![(z, 1.0)];
                        let mut rhs = 0.0;
                        for (c, s) in [(cu, -sign), (cv, sign)] {
                            match c {
                                Coord::Var(j) => terms.push((j, s)),
                                Coord::Const(a) => rhs -= s * a,
                            }
                        }
                        program.add_constraint(terms, Relation::Ge, rhs);
                    }
                }
            }
        }
    }
    Ok(RelaxationLp { program, coords })
}

/// One point of the simplex per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexEmbedding {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl SimplexEmbedding {
    /// Raw objective `sum w * |x^u - x^v|_1` over the edges of `g`.
    pub fn raw_objective(&self, g: &Graph) -> f64 {
        g.edges().iter().map(|e| e.w * l1(&self.points[e.u], &self.points[e.v])).sum()
    }

    /// Half the raw objective: equal to the cut weight on integral points.
    pub fn cut_comparable(&self, g: &Graph) -> f64 {
        self.raw_objective(g) / 2.0
    }

    /// The integral embedding of a labeling.
    pub fn from_labeling(dim: usize, assignment: &[usize]) -> Self {
        SimplexEmbedding {
            dim,
            points: assignment
                .iter()
                .map(|&a| (0..dim).map(|i| if i == a { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Reads node points out of an optimal solution: clamps tiny negatives and
/// renormalizes each point to sum exactly to one.
pub fn extract_embedding(sol: &LpSolution, lp: &RelaxationLp) -> Result<SimplexEmbedding> {
    let values = sol.optimal_values()?;
    let dim = lp.coords.first().map_or(0, |r| r.len());
    let mut points = Vec::with_capacity(lp.coords.len());
    for row in &lp.coords {
        let mut p: Vec<f64> = row
            .iter()
            .map(|c| match *c {
                Coord::Var(j) => values[j].max(0.0),
                Coord::Const(a) => a,
            })
            .collect();
        let s: f64 = p.iter().sum();
        if s <= 0.0 {
            return Err(Error::LpNumerical("embedding point with no mass".into()));
        }
        if s != 1.0 {
            p.iter_mut().for_each(|x| *x /= s);
        }
        points.push(p);
    }
    Ok(SimplexEmbedding { dim, points })
}

/// Solves the relaxation and returns its embedding and cut-comparable value.
pub fn solve_relaxation(inst: &LabelingInstance) -> Result<(SimplexEmbedding, f64)> {
    let lp = build_lift_lp(inst)?;
    let sol = solve_lp(&lp.program)?;
    let emb = extract_embedding(&sol, &lp)?;
    Ok((emb, sol.objective / 2.0))
}

/// A graph whose every edge is axis-aligned under its embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedGraph {
    /// Original nodes keep their indices; subdivision nodes follow.
    pub graph: Graph,
    pub embedding: SimplexEmbedding,
    /// New edge index to the original edge it subdivides.
    pub provenance: Vec<usize>,
}

/// The canonical monotone route from `x` to `y`: repeatedly take the
/// smallest coordinate still off target and settle it against the smallest
/// later coordinate off target in the opposite direction. Returns the
/// intermediate points (excluding both ends).
pub fn canonical_route(x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
    let mut p = x.to_vec();
    let mut route = Vec::new();
    let off = |p: &[f64], i: usize| p[i] != y[i];
    loop {
        let Some(i) = (0..p.len()).find(|&i| off(&p, i)) else { break };
        let need = y[i] - p[i];
        let j = (i + 1..p.len()).find(|&j| off(&p, j) && (y[j] - p[j]) * need < 0.0);
        let Some(j) = j else {
            // only rounding residue is left; land exactly on y
            break;
        };
        let avail = (p[j] - y[j]).abs();
        if need.abs() <= avail {
            p[j] -= need;
            p[i] = y[i];
            if need.abs() == avail {
                p[j] = y[j];
            }
        } else {
            let m = avail * need.signum();
            p[i] += m;
            p[j] = y[j];
        }
        route.push(p.clone());
    }
    // the last point is y itself (or y up to rounding residue)
    route.pop();
    route
}

/// Subdivides every edge along its canonical route.
pub fn axis_align(g: &Graph, emb: &SimplexEmbedding) -> Result<AlignedGraph> {
    if emb.points.len() != g.node_count() {
        return Err(Error::Dimension("embedding size differs from node count".into()));
    }
    let mut graph = Graph::new(g.names().iter().cloned())?;
    let mut points = emb.points.clone();
    let mut provenance = Vec::new();
    for (ei, e) in g.edges().iter().enumerate() {
        let route = canonical_route(&emb.points[e.u], &emb.points[e.v]);
        let mut prev = e.u;
        for (k, p) in route.into_iter().enumerate() {
            let mut name = format!("{}~{}#{ei}.{k}", g.name(e.u), g.name(e.v));
            while graph.node(&name).is_ok() {
                name.push('\'');
            }
            let mid = graph.add_node(name)?;
            points.push(p);
            graph.add_edge(prev, mid, e.w)?;
            provenance.push(ei);
            prev = mid;
        }
        graph.add_edge(prev, e.v, e.w)?;
        provenance.push(ei);
    }
    Ok(AlignedGraph {
        graph,
        embedding: SimplexEmbedding { dim: emb.dim, points },
        provenance,
    })
}

/// Number of coordinates in which two points differ.
pub fn differing_coordinates(a: &[f64], b: &[f64]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// A piecewise-constant probability density on `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    /// Bin edges `0 = e_0 < e_1 < .. < e_m = 1`.
    edges: Vec<f64>,
    /// Density value on each bin.
    values: Vec<f64>,
}

impl Density {
    pub fn uniform() -> Self {
        Density {
            edges: vec![0.0, 1.0],
            values: vec![1.0],
        }
    }

    /// Equal-width bins on `[0, 1)` with the given values, which must
    /// integrate to one.
    pub fn from_bins(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        let edges = (0..=m).map(|i| i as f64 / m as f64).collect();
        let d = Density { edges, values };
        d.validate()?;
        Ok(d)
    }

    pub fn new(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let d = Density { edges, values };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.values.len();
        if m == 0 || self.edges.len() != m + 1 {
            return Err(Error::Params("density needs one value per bin".into()));
        }
        if self.edges[0] != 0.0 || self.edges[m] != 1.0 || self.edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Params("density bins must increase from 0 to 1".into()));
        }
        if self.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Params("density values must be finite and nonnegative".into()));
        }
        let mass = self.integral(0.0, 1.0);
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::Params(format!("density integrates to {mass}, not 1")));
        }
        Ok(())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..1.0).contains(&x) {
            return 0.0;
        }
        let k = self.edges.partition_point(|&e| e <= x) - 1;
        self.values[k]
    }

    /// Probability mass of `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.max(0.0), b.min(1.0));
        if a >= b {
            return 0.0;
        }
        (0..self.values.len())
            .map(|k| {
                let lo = self.edges[k].max(a);
                let hi = self.edges[k + 1].min(b);
                if hi > lo {
                    (hi - lo) * self.values[k]
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Inverse-CDF sampling.
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for k in 0..self.values.len() {
            let mass = (self.edges[k + 1] - self.edges[k]) * self.values[k];
            if mass > 0.0 && u < acc + mass {
                let x = self.edges[k] + (u - acc) / self.values[k];
                return x.min(self.edges[k + 1]).max(self.edges[k]);
            }
            acc += mass;
        }
        // u landed in rounding slack at the top; use the last bin with mass
        let k = (0..self.values.len()).rev().find(|&k| self.values[k] > 0.0).unwrap_or(0);
        self.edges[k]
    }
}

/// Parameters of the combined rounding scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingParams {
    /// Upper end of the uniform threshold range for the descending and
    /// independent schemes.
    pub b: f64,
    /// Probabilities of Kleinberg-Tardos, single, descending, independent.
    pub p: [f64; 4],
    /// Single-threshold density.
    pub phi: Density,
    pub seed: u64,
}

impl Default for RoundingParams {
    fn default() -> Self {
        RoundingParams {
            b: 0.7,
            p: [0.25; 4],
            phi: Density::uniform(),
            seed: 0,
        }
    }
}

impl RoundingParams {
    pub fn with_seed(seed: u64) -> Self {
        RoundingParams {
            seed,
            ..Default::default()
        }
    }

    /// Parameters that always pick one scheme.
    pub fn only(scheme: Scheme, seed: u64) -> Self {
        let mut p = [0.0; 4];
        match scheme {
            Scheme::KleinbergTardos => p[0] = 1.0,
            Scheme::SingleThreshold => p[1] = 1.0,
            Scheme::Descending => p[2] = 1.0,
            Scheme::Independent => p[3] = 1.0,
            Scheme::Combined => return RoundingParams::with_seed(seed),
        }
        RoundingParams {
            p,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b <= 1.0) {
            return Err(Error::Params(format!("b = {} must lie in (0, 1]", self.b)));
        }
        if self.p.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Params("scheme probabilities must be nonnegative".into()));
        }
        let s: f64 = self.p.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Params(format!("scheme probabilities sum to {s}, not 1")));
        }
        self.phi.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    KleinbergTardos,
    SingleThreshold,
    Descending,
    Independent,
    Combined,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::KleinbergTardos,
        Scheme::SingleThreshold,
        Scheme::Descending,
        Scheme::Independent,
        Scheme::Combined,
    ];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::KleinbergTardos => "kleinberg-tardos",
            Scheme::SingleThreshold => "single-threshold",
            Scheme::Descending => "descending",
            Scheme::Independent => "independent",
            Scheme::Combined => "combined",
        })
    }
}

/// One draw of a threshold scheme: labels tried in order, each with its
/// threshold, and the label for whatever passes none.
#[derive(Debug, Clone, PartialEq)]
struct ThresholdDraw {
    steps: Vec<(usize, f64)>,
    leftover: usize,
}

impl ThresholdDraw {
    fn label(&self, x: &[f64]) -> usize {
        for &(l, theta) in &self.steps {
            // x > 0 keeps a zero threshold from assigning forbidden labels
            if x[l] > 0.0 && x[l] >= theta {
                return l;
            }
        }
        self.leftover
    }
}

/// Labels that get thresholds, and the one left for last.
fn threshold_frame(inst: &LabelingInstance, rng: &mut Rng) -> Result<(Vec<usize>, usize)> {
    let k = inst.label_count;
    match inst.mode {
        Mode::Lifted => Ok(((0..k - 1).collect(), k - 1)),
        Mode::Ckr => {
            let leftover = rng.random_range(0..k);
            Ok(((0..k).filter(|&i| i != leftover).collect(), leftover))
        }
        Mode::Uml => Err(Error::Precondition(
            "threshold schemes need a leftover label; use Kleinberg-Tardos for plain labeling".into(),
        )),
    }
}

fn draw_single(inst: &LabelingInstance, phi: &Density, rng: &mut Rng) -> Result<ThresholdDraw> {
    let (mut labels, leftover) = threshold_frame(inst, rng)?;
    let theta = phi.sample(rng);
    labels.shuffle(rng);
    Ok(ThresholdDraw {
        steps: labels.into_iter().map(|l| (l, theta)).collect(),
        leftover,
    })
}

fn draw_descending(inst: &LabelingInstance, b: f64, rng: &mut Rng) -> Result<ThresholdDraw> {
    let (labels, leftover) = threshold_frame(inst, rng)?;
    let mut steps: Vec<(usize, f64, u64)> = labels
        .into_iter()
        .map(|l| (l, rng.random::<f64>() * b, rng.random::<u64>()))
        .collect();
    // descending thresholds, exact ties broken by the fresh random key
    steps.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)));
    Ok(ThresholdDraw {
        steps: steps.into_iter().map(|(l, t, _)| (l, t)).collect(),
        leftover,
    })
}

fn draw_independent(inst: &LabelingInstance, b: f64, rng: &mut Rng) -> Result<ThresholdDraw> {
    let (mut labels, leftover) = threshold_frame(inst, rng)?;
    let thetas: Vec<f64> = (0..inst.label_count).map(|_| rng.random::<f64>() * b).collect();
    labels.shuffle(rng);
    Ok(ThresholdDraw {
        steps: labels.into_iter().map(|l| (l, thetas[l])).collect(),
        leftover,
    })
}

/// Kleinberg-Tardos rounds over all labels until every point is assigned.
fn kt_assign(points: &[&[f64]], label_count: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    let mut out = vec![usize::MAX; points.len()];
    let mut remaining = points.len();
    let mut rounds = 0u64;
    while remaining > 0 {
        rounds += 1;
        if rounds > KT_ITERATION_CAP {
            return Err(Error::RoundingStalled(KT_ITERATION_CAP));
        }
        let i = rng.random_range(0..label_count);
        let rho: f64 = rng.random();
        for (v, x) in points.iter().enumerate() {
            if out[v] == usize::MAX && x[i] > 0.0 && x[i] >= rho {
                out[v] = i;
                remaining -= 1;
            }
        }
    }
    Ok(out)
}

fn check_embedding(inst: &LabelingInstance, emb: &SimplexEmbedding) -> Result<()> {
    if emb.points.len() != inst.graph.node_count() || emb.dim != inst.label_count {
        return Err(Error::Dimension("embedding does not match the instance".into()));
    }
    Ok(())
}

fn label_points(
    inst: &LabelingInstance,
    points: &[&[f64]],
    scheme: Scheme,
    params: &RoundingParams,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    let scheme = match scheme {
        Scheme::Combined => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = Scheme::Independent;
            for (p, s) in params.p.iter().zip([
                Scheme::KleinbergTardos,
                Scheme::SingleThreshold,
                Scheme::Descending,
                Scheme::Independent,
            ]) {
                acc += p;
                if *p > 0.0 && u < acc {
                    chosen = s;
                    break;
                }
                if *p > 0.0 {
                    chosen = s;
                }
            }
            chosen
        }
        s => s,
    };
    let draw = match scheme {
        Scheme::KleinbergTardos => return kt_assign(points, inst.label_count, rng),
        Scheme::SingleThreshold => draw_single(inst, &params.phi, rng)?,
        Scheme::Descending => draw_descending(inst, params.b, rng)?,
        Scheme::Independent => draw_independent(inst, params.b, rng)?,
        Scheme::Combined => unreachable!(),
    };
    Ok(points.iter().map(|x| draw.label(x)).collect())
}

/// Rounds with an explicit generator; the building block for all
/// `round_*` functions.
pub fn round_with(
    inst: &LabelingInstance,
    emb: &SimplexEmbedding,
    scheme: Scheme,
    params: &RoundingParams,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    check_embedding(inst, emb)?;
    let points: Vec<&[f64]> = emb.points.iter().map(|p| p.as_slice()).collect();
    label_points(inst, &points, scheme, params, rng)
}

pub fn round_kleinberg_tardos(inst: &LabelingInstance, emb: &SimplexEmbedding, seed: u64) -> Result<Vec<usize>> {
    let params = RoundingParams::default();
    round_with(inst, emb, Scheme::KleinbergTardos, &params, &mut rng::stream(seed, 0))
}

pub fn round_single_threshold(
    inst: &LabelingInstance,
    emb: &SimplexEmbedding,
    phi: &Density,
    seed: u64,
) -> Result<Vec<usize>> {
    phi.validate()?;
    let params = RoundingParams {
        phi: phi.clone(),
        ..Default::default()
    };
    round_with(inst, emb, Scheme::SingleThreshold, &params, &mut rng::stream(seed, 0))
}

pub fn round_descending_thresholds(
    inst: &LabelingInstance,
    emb: &SimplexEmbedding,
    b: f64,
    seed: u64,
) -> Result<Vec<usize>> {
    let params = RoundingParams {
        b,
        ..Default::default()
    };
    params.validate()?;
    round_with(inst, emb, Scheme::Descending, &params, &mut rng::stream(seed, 0))
}

pub fn round_independent_thresholds(
    inst: &LabelingInstance,
    emb: &SimplexEmbedding,
    b: f64,
    seed: u64,
) -> Result<Vec<usize>> {
    let params = RoundingParams {
        b,
        ..Default::default()
    };
    params.validate()?;
    round_with(inst, emb, Scheme::Independent, &params, &mut rng::stream(seed, 0))
}

/// Picks a scheme by `params.p` and rounds once with `params.seed`.
pub fn round_combined(inst: &LabelingInstance, emb: &SimplexEmbedding, params: &RoundingParams) -> Result<Vec<usize>> {
    params.validate()?;
    round_with(inst, emb, Scheme::Combined, params, &mut rng::stream(params.seed, 0))
}

/// A rounded labeling with its cut.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCut {
    pub assignment: Vec<usize>,
    pub cut: Cut,
    pub weight: f64,
    /// Cut-comparable relaxation value.
    pub lp_value: f64,
    /// Index of the winning sample.
    pub sample: u64,
}

/// Draws `samples` roundings (sample `s` uses stream `s` of `params.seed`)
/// and keeps the lightest, ties going to the earliest sample.
pub fn best_of_samples(
    inst: &LabelingInstance,
    emb: &SimplexEmbedding,
    scheme: Scheme,
    params: &RoundingParams,
    samples: u64,
) -> Result<(Vec<usize>, f64, u64)> {
    params.validate()?;
    check_embedding(inst, emb)?;
    if samples == 0 {
        return Err(Error::Params("at least one sample is required".into()));
    }
    let g = &inst.graph;
    let results: Vec<Result<(f64, u64, Vec<usize>)>> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::stream(params.seed, s);
            let a = round_with(inst, emb, scheme, params, &mut r)?;
            let w = g.edges().iter().filter(|e| a[e.u] != a[e.v]).map(|e| e.w).sum::<f64>();
            Ok((w, s, a))
        })
        .collect();
    let mut best: Option<(f64, u64, Vec<usize>)> = None;
    for r in results {
        let r = r?;
        if best.as_ref().map_or(true, |b| r.0 < b.0) {
            best = Some(r);
        }
    }
    let (w, s, a) = best.expect("samples > 0");
    Ok((a, w, s))
}

fn finish(g: &Graph, assignment: Vec<usize>, sample: u64, lp_value: f64) -> Result<LabeledCut> {
    let cut = dichromatic_edges(g, &assignment);
    let weight = cut_weight(g, &cut)?;
    Ok(LabeledCut {
        assignment,
        cut,
        weight,
        lp_value,
        sample,
    })
}

/// Relax, round with the combined scheme, keep the best of `samples`.
pub fn solve_lifted_cut(inst: &LabelingInstance, params: &RoundingParams, samples: u64) -> Result<LabeledCut> {
    inst.validate()?;
    if inst.mode != Mode::Lifted {
        return Err(Error::Precondition("solve_lifted_cut expects a lifted instance".into()));
    }
    solve_labeling(inst, Scheme::Combined, params, samples)
}

/// Relax and round any instance with the given scheme.
pub fn solve_labeling(
    inst: &LabelingInstance,
    scheme: Scheme,
    params: &RoundingParams,
    samples: u64,
) -> Result<LabeledCut> {
    params.validate()?;
    let (emb, lp_value) = solve_relaxation(inst)?;
    let (assignment, _, sample) = best_of_samples(inst, &emb, scheme, params, samples)?;
    inst.check_labeling(&assignment)?;
    finish(&inst.graph, assignment, sample, lp_value)
}

/// Multiway cut through the CKR relaxation: solve, subdivide into
/// axis-aligned edges (checking the objective survives), round with the
/// combined scheme and keep the best of `samples`.
///
/// Rounding labels each point from the shared random draw alone, so the
/// original nodes receive the same labels on the subdivided graph; the
/// returned cut is the set of original edges with a dichromatic segment.
pub fn solve_multiway_cut(
    g: &Graph,
    terminals: &[usize],
    params: &RoundingParams,
    samples: u64,
) -> Result<LabeledCut> {
    if terminals.len() < 2 {
        return Err(Error::Precondition("multiway cut needs at least two terminals".into()));
    }
    let inst = LabelingInstance::multiway(g.clone(), terminals.to_vec())?;
    params.validate()?;
    let (emb, lp_value) = solve_relaxation(&inst)?;
    let aligned = axis_align(g, &emb)?;
    let before = emb.cut_comparable(g);
    let after = aligned.embedding.cut_comparable(&aligned.graph);
    if (before - after).abs() > 1e-7 * (1.0 + before) {
        return Err(Error::Internal(format!("axis alignment changed the objective {before} -> {after}")));
    }
    let (assignment, _, sample) = best_of_samples(&inst, &emb, Scheme::Combined, params, samples)?;
    inst.check_labeling(&assignment)?;
    finish(g, assignment, sample, lp_value)
}

/// Monte-Carlo estimate of a cut density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    pub density: f64,
    pub std_err: f64,
    pub separations: u64,
    pub samples: u64,
}

/// Separation frequency of `u` and `u + eps (e^i - e^j)` under one scheme,
/// divided by `eps`. The point lives in `Delta_{q+1}` with the last
/// coordinate as the extra label.
pub fn estimate_cut_density(
    scheme: Scheme,
    point: &[f64],
    (i, j): (usize, usize),
    eps: f64,
    samples: u64,
    params: &RoundingParams,
) -> Result<DensityEstimate> {
    params.validate()?;
    let d = point.len();
    if d < 2 || i >= d || j >= d || i == j {
        return Err(Error::Precondition(format!("edge type ({i}, {j}) invalid in dimension {d}")));
    }
    if point.iter().any(|&x| x < 0.0) || (point.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition("point is not in the simplex".into()));
    }
    if !(eps > 0.0) || point[j] - eps < 0.0 || point[i] + eps > 1.0 {
        return Err(Error::Precondition("perturbed point leaves the simplex".into()));
    }
    if samples == 0 {
        return Err(Error::Params("at least one sample is required".into()));
    }
    let mut other = point.to_vec();
    other[i] += eps;
    other[j] -= eps;
    // a two-node lifted frame: q = d - 1 threshold labels plus the extra one
    let q = d - 1;
    let mut g = Graph::numbered(d + 1);
    g.add_edge(q, q + 1, 1.0)?;
    let mut labels: Vec<LabelSet> = (0..q).map(LabelSet::single).collect();
    labels.push(LabelSet::full(d));
    labels.push(LabelSet::full(d));
    let inst = LabelingInstance::lifted(g, (0..q).collect(), labels)?;
    const CHUNK: u64 = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let points: [&[f64]; 2] = [point, &other];
    let counts: Vec<Result<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(params.seed, c);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut sep = 0;
            for _ in 0..n {
                let a = label_points(&inst, &points, scheme, params, &mut r)?;
                if a[0] != a[1] {
                    sep += 1;
                }
            }
            Ok(sep)
        })
        .collect();
    let mut separations = 0;
    for c in counts {
        separations += c?;
    }
    let p = separations as f64 / samples as f64;
    Ok(DensityEstimate {
        density: p / eps,
        std_err: (p * (1.0 - p) / samples as f64).sqrt() / eps,
        separations,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_graph(w: f64) -> Graph {
        Graph::from_named_edges(&["s1", "s2"], &[("s1", "s2", w)]).unwrap()
    }

    #[test]
    fn label_set_basics() {
        let s: LabelSet = [0, 2].into_iter().collect();
        assert!(s.contains(2) && !s.contains(1));
        assert_eq!(s.len(), 2);
        assert_eq!(s.bound(), 3);
        assert_eq!(s.to_string(), "{0,2}");
        assert_eq!(LabelSet::full(3).without(1), s);
    }

    #[test]
    fn single_edge_two_terminals() {
        let inst = LabelingInstance::lifted(edge_graph(2.5), vec![0, 1], vec![LabelSet::single(0), LabelSet::single(1)])
            .unwrap();
        let lp = build_lift_lp(&inst).unwrap();
        let sol = solve_lp(&lp.program).unwrap();
        assert_eq!(sol.objective, 5.0);
        assert_eq!(solve_relaxation(&inst).unwrap().1, 2.5);
    }

    #[test]
    fn shared_label_gives_zero() {
        let g = Graph::from_named_edges(&["a", "b", "c"], &[("a", "b", 1.0), ("b", "c", 4.0)]).unwrap();
        let labels = vec![[0, 1].into_iter().collect(), [1, 2].into_iter().collect(), LabelSet::full(3)];
        let inst = LabelingInstance::uml(g, 3, labels).unwrap();
        assert!(solve_relaxation(&inst).unwrap().1.abs() < 1e-12);
    }

    #[test]
    fn star_with_free_center() {
        let g = Graph::from_named_edges(&["c", "s1", "s2"], &[("c", "s1", 1.0), ("c", "s2", 1.0)]).unwrap();
        let labels = vec![LabelSet::full(3), LabelSet::single(0), LabelSet::single(1)];
        let inst = LabelingInstance::lifted(g, vec![1, 2], labels).unwrap();
        let (emb, value) = solve_relaxation(&inst).unwrap();
        assert!((value - 1.0).abs() < 1e-9);
        assert_eq!(emb.points[1], vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn condition_violations_name_the_node() {
        let g = edge_graph(1.0);
        let bad_a = LabelingInstance::lifted(g.clone(), vec![0], vec![LabelSet::full(2), LabelSet::full(2)]);
        assert_eq!(
            bad_a.unwrap_err(),
            Error::LabelCondition {
                condition: LabelCondition::TerminalLabel,
                node: "s1".into()
            }
        );
        let bad_b = LabelingInstance::lifted(g, vec![0], vec![LabelSet::single(0), LabelSet::single(0)]);
        assert_eq!(
            bad_b.unwrap_err(),
            Error::LabelCondition {
                condition: LabelCondition::ExtraLabel,
                node: "s2".into()
            }
        );
    }

    #[test]
    fn extra_only_nodes_sit_on_the_extra_vertex() {
        let g = Graph::from_named_edges(&["s1", "v"], &[("s1", "v", 3.0)]).unwrap();
        let inst = LabelingInstance::lifted(g, vec![0], vec![LabelSet::single(0), LabelSet::single(1)]).unwrap();
        let (emb, value) = solve_relaxation(&inst).unwrap();
        assert_eq!(emb.points[1], vec![0.0, 1.0]);
        assert_eq!(value, 3.0);
    }

    #[test]
    fn canonical_route_examples() {
        let x = [0.5, 0.5, 0.0];
        let y = [0.5, 0.0, 0.5];
        assert!(canonical_route(&x, &y).is_empty());
        let x = [0.6, 0.2, 0.2];
        let y = [0.2, 0.5, 0.3];
        let route = canonical_route(&x, &y);
        assert_eq!(route.len(), 1);
        let mut total = l1(&x, &route[0]) + l1(&route[0], &y);
        assert!((total - l1(&x, &y)).abs() < 1e-12);
        for p in &route {
            assert!(differing_coordinates(&x, p) <= 2);
        }
        let y = [0.0, 0.0, 1.0];
        let x = [1.0, 0.0, 0.0];
        total = 0.0;
        let mut prev = x.to_vec();
        for p in canonical_route(&x, &y).into_iter().chain([y.to_vec()]) {
            assert!(differing_coordinates(&prev, &p) <= 2);
            total += l1(&prev, &p);
            prev = p;
        }
        assert_eq!(total, 2.0);
    }

    #[test]
    fn threshold_beyond_every_coordinate_gives_extra_label() {
        let g = Graph::from_named_edges(&["s1", "s2", "v"], &[("s1", "v", 1.0)]).unwrap();
        let labels = vec![LabelSet::single(0), LabelSet::single(1), LabelSet::full(3)];
        let inst = LabelingInstance::lifted(g, vec![0, 1], labels).unwrap();
        let emb = SimplexEmbedding {
            dim: 3,
            points: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.3, 0.3, 0.4]],
        };
        // all mass of phi above 0.5
        let phi = Density::new(vec![0.0, 0.5, 1.0], vec![0.0, 2.0]).unwrap();
        for seed in 0..50 {
            let a = round_single_threshold(&inst, &emb, &phi, seed).unwrap();
            assert_eq!(a, vec![0, 1, 2]);
        }
    }

    #[test]
    fn identical_points_never_separate() {
        let g = Graph::from_named_edges(&["a", "b"], &[("a", "b", 1.0)]).unwrap();
        let inst = LabelingInstance::uml(g, 3, vec![LabelSet::full(3); 2]).unwrap();
        let emb = SimplexEmbedding {
            dim: 3,
            points: vec![vec![0.0, 1.0, 0.0]; 2],
        };
        for seed in 0..20 {
            assert_eq!(round_kleinberg_tardos(&inst, &emb, seed).unwrap(), vec![1, 1]);
        }
    }

    #[test]
    fn density_sampling_stays_in_support() {
        let phi = Density::new(vec![0.0, 0.25, 1.0], vec![4.0, 0.0]).unwrap();
        let mut r = rng::stream(3, 0);
        for _ in 0..1000 {
            let x = phi.sample(&mut r);
            assert!((0.0..=0.25).contains(&x));
        }
        assert!(Density::from_bins(vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn two_terminal_multiway_is_min_cut() {
        let g = Graph::from_named_edges(
            &["s", "a", "b", "t"],
            &[("s", "a", 3.0), ("a", "b", 1.0), ("b", "t", 3.0), ("s", "b", 1.0), ("a", "t", 1.0)],
        )
        .unwrap();
        let r = solve_multiway_cut(&g, &[0, 3], &RoundingParams::default(), 50).unwrap();
        let mc = crate::mincut::min_st_cut(&g, 0, 3).unwrap();
        assert!(r.weight <= mc.weight + 1e-9);
    }

    #[test]
    fn star_with_three_terminal_leaves() {
        let g = Graph::from_named_edges(
            &["c", "a", "b", "d"],
            &[("c", "a", 1.0), ("c", "b", 2.0), ("c", "d", 3.0)],
        )
        .unwrap();
        let r = solve_multiway_cut(&g, &[1, 2, 3], &RoundingParams::default(), 100).unwrap();
        assert_eq!(r.weight, 3.0);
        assert!(r.lp_value <= r.weight + 1e-9);
    }

    #[test]
    fn density_precondition() {
        let p = RoundingParams::default();
        assert!(estimate_cut_density(Scheme::Independent, &[0.5, 0.5, 0.0], (0, 2), 1e-3, 10, &p).is_err());
        assert!(estimate_cut_density(Scheme::Independent, &[0.5, 0.5, 0.0], (1, 1), 1e-3, 10, &p).is_err());
        assert!(estimate_cut_density(Scheme::Independent, &[0.5, 0.5, 0.0], (0, 1), 1e-3, 10, &p).is_ok());
    }
}
