//! Seeded random instances for tests, audits and benchmarks.
//!
//! Weights are integers drawn uniformly from `1..=max_weight`, stored as
//! `f64`, so sums stay exact and optimal weights compare with `==`.

use rand::seq::index::sample;
use rand::Rng as _;

use crate::graph::Graph;
use crate::reductions::{HittingSetInstance, SteinerMulticutInstance};
use crate::rng::Rng;
use crate::variants::{CandidateFamily, Variant, VariantInstance};

fn weight(rng: &mut Rng, max_weight: u32) -> f64 {
    f64::from(rng.random_range(1..=max_weight.max(1)))
}

/// A simple graph on `n` nodes with `min(m, n(n-1)/2)` distinct edges.
pub fn random_graph(rng: &mut Rng, n: usize, m: usize, max_weight: u32) -> Graph {
    let mut g = Graph::numbered(n);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let m = m.min(pairs.len());
    let mut picked = sample(rng, pairs.len(), m).into_vec();
    picked.sort_unstable();
    for k in picked {
        let (u, v) = pairs[k];
        let w = weight(rng, max_weight);
        g.add_edge(u, v, w).expect("valid edge");
    }
    g
}

/// A uniformly attached random tree: node `v > 0` hangs off a random
/// earlier node.
pub fn random_tree(rng: &mut Rng, n: usize, max_weight: u32) -> Graph {
    let mut g = Graph::numbered(n);
    for v in 1..n {
        let u = rng.random_range(0..v);
        let w = weight(rng, max_weight);
        g.add_edge(u, v, w).expect("valid edge");
    }
    g
}

/// A random tree plus extra random edges, `m` edges in total when possible.
pub fn random_connected_graph(rng: &mut Rng, n: usize, m: usize, max_weight: u32) -> Graph {
    let mut g = random_tree(rng, n, max_weight);
    let free: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !g.neighbors(u).iter().any(|&(x, _)| x == v))
        .collect();
    let extra = m.saturating_sub(g.edge_count()).min(free.len());
    let mut picked = sample(rng, free.len(), extra).into_vec();
    picked.sort_unstable();
    for k in picked {
        let (u, v) = free[k];
        let w = weight(rng, max_weight);
        g.add_edge(u, v, w).expect("valid edge");
    }
    g
}

/// `q` random nonempty sets of at most `max_size` distinct nodes each.
pub fn random_family(rng: &mut Rng, n: usize, q: usize, max_size: usize) -> CandidateFamily {
    let sets = (0..q)
        .map(|_| {
            let size = rng.random_range(1..=max_size.clamp(1, n));
            sample(rng, n, size).into_vec()
        })
        .collect();
    CandidateFamily::new(sets).expect("nonempty sets")
}

/// Shape of a random variant instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceShape {
    pub nodes: usize,
    pub edges: usize,
    pub q: usize,
    pub max_set_size: usize,
    pub max_weight: u32,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            nodes: 6,
            edges: 9,
            q: 2,
            max_set_size: 3,
            max_weight: 10,
        }
    }
}

/// A random instance of `variant`; the fixed node of fixed-to-single is
/// drawn uniformly.
pub fn random_instance(rng: &mut Rng, variant: Variant, shape: &InstanceShape) -> VariantInstance {
    let g = random_graph(rng, shape.nodes, shape.edges, shape.max_weight);
    let fam = random_family(rng, shape.nodes, shape.q, shape.max_set_size);
    let fixed = (variant == Variant::FixedToSingle).then(|| rng.random_range(0..shape.nodes));
    VariantInstance::new(variant, g, fam, fixed).expect("generated instance is well formed")
}

/// A random hitting set instance over `ground` elements named `e1, e2, ...`.
pub fn random_hitting_set(rng: &mut Rng, ground: usize, sets: usize, max_size: usize) -> HittingSetInstance {
    let names = (1..=ground).map(|i| format!("e{i}")).collect();
    let sets = (0..sets)
        .map(|_| {
            let size = rng.random_range(1..=max_size.clamp(1, ground));
            sample(rng, ground, size).into_vec()
        })
        .collect();
    HittingSetInstance::new(names, sets).expect("generated instance is well formed")
}

/// A random Steiner multicut instance with groups of at least two nodes.
pub fn random_steiner(rng: &mut Rng, n: usize, m: usize, groups: usize, max_size: usize, max_weight: u32) -> SteinerMulticutInstance {
    let g = random_graph(rng, n, m, max_weight);
    let groups = (0..groups)
        .map(|_| {
            let size = rng.random_range(2..=max_size.clamp(2, n.max(2)));
            sample(rng, n, size.min(n)).into_vec()
        })
        .collect();
    SteinerMulticutInstance::new(g, groups).expect("generated instance is well formed")
}
