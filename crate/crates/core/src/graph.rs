//! Weighted undirected multigraphs and the cut primitives every solver shares.
//!
//! Nodes carry string names at the interface and dense `usize` indices
//! internally. Parallel edges are kept distinct so that contraction never has
//! to merge weights; self-loops are rejected.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// One undirected edge `{u, v}` of weight `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    /// The endpoint opposite to `x`.
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    // (neighbor, edge index) pairs in insertion order
    adj: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Creates an edgeless graph on the given node names.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Graph {
            names: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            adj: Vec::new(),
        };
        for name in names {
            g.add_node(name)?;
        }
        Ok(g)
    }

    /// Nodes named `"0"`, `"1"`, ... `"n-1"`.
    pub fn numbered(n: usize) -> Self {
        Graph::new((0..n).map(|i| i.to_string())).expect("numbered names are unique")
    }

    /// Builds a graph from named edges; every endpoint must be declared.
    pub fn from_named_edges<S: AsRef<str>>(nodes: &[S], edges: &[(S, S, f64)]) -> Result<Self> {
        let mut g = Graph::new(nodes.iter().map(|s| s.as_ref().to_string()))?;
        for (u, v, w) in edges {
            g.add_edge_named(u.as_ref(), v.as_ref(), *w)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> Result<usize> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::DuplicateNode(name));
        }
        let ix = self.names.len();
        self.index.insert(name.clone(), ix);
        self.names.push(name);
        self.adj.push(Vec::new());
        Ok(ix)
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: f64) -> Result<usize> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::SelfLoop(self.names[u].clone()));
        }
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::InvalidWeight(w));
        }
        let e = self.edges.len();
        self.edges.push(Edge { u, v, w });
        self.adj[u].push((v, e));
        self.adj[v].push((u, e));
        Ok(e)
    }

    pub fn add_edge_named(&mut self, u: &str, v: &str, w: f64) -> Result<usize> {
        let (u, v) = (self.node(u)?, self.node(v)?);
        self.add_edge(u, v, w)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Result<&Edge> {
        self.edges.get(e).ok_or(Error::InvalidEdge(e))
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Looks up a node index by name.
    pub fn node(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.names.len() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange(v))
        }
    }

    /// `(neighbor, edge index)` pairs incident to `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// All edge indices, as a cut.
    pub fn all_edges(&self) -> Cut {
        Cut::from_sorted((0..self.edges.len()).collect())
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() == 0 || components(self, &Cut::empty()).map_or(false, |p| p.count() == 1)
    }

    /// Connected with exactly `n - 1` edges (so no parallel edges either).
    pub fn is_tree(&self) -> bool {
        self.node_count() >= 1 && self.edge_count() + 1 == self.node_count() && self.is_connected()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph with {} nodes, {} edges", self.node_count(), self.edge_count())
    }
}

/// A set of edge indices into some [`Graph`], kept sorted and deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cut {
    edges: Vec<usize>,
}

impl Cut {
    pub fn empty() -> Self {
        Cut::default()
    }

    pub fn new(edges: impl IntoIterator<Item = usize>) -> Self {
        let mut edges: Vec<usize> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        Cut { edges }
    }

    fn from_sorted(edges: Vec<usize>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        Cut { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.edges
    }

    pub fn union(&self, other: &Cut) -> Cut {
        Cut::new(self.iter().chain(other.iter()))
    }

    pub fn is_subset(&self, other: &Cut) -> bool {
        self.iter().all(|e| other.contains(e))
    }

    /// Errors unless every referenced edge exists in `g`.
    pub fn check(&self, g: &Graph) -> Result<()> {
        match self.edges.last() {
            Some(&e) if e >= g.edge_count() => Err(Error::InvalidEdge(e)),
            _ => Ok(()),
        }
    }

    fn mask(&self, g: &Graph) -> Result<Vec<bool>> {
        self.check(g)?;
        let mut mask = vec![false; g.edge_count()];
        for e in self.iter() {
            mask[e] = true;
        }
        Ok(mask)
    }
}

impl FromIterator<usize> for Cut {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Cut::new(iter)
    }
}

/// Assignment of every node to a dense component id `0..count`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<usize>,
    count: usize,
}

impl Partition {
    /// Renumbers arbitrary class labels densely in order of first
    /// appearance, i.e. by ascending smallest member.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let assignment = labels
            .iter()
            .map(|&l| {
                let next = remap.len();
                *remap.entry(l).or_insert(next)
            })
            .collect();
        Partition {
            assignment,
            count: remap.len(),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.assignment[a] == self.assignment[b]
    }

    /// Members of each class, ascending.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.count];
        for (v, &c) in self.assignment.iter().enumerate() {
            classes[c].push(v);
        }
        classes
    }
}

/// Connected components of `g - c`.
pub fn components(g: &Graph, c: &Cut) -> Result<Partition> {
    let removed = c.mask(g)?;
    let n = g.node_count();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = count;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &(v, e) in g.neighbors(u) {
                if !removed[e] && comp[v] == usize::MAX {
                    comp[v] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    Ok(Partition {
        assignment: comp,
        count,
    })
}

/// Total weight of the referenced edges, summed in edge-index order.
pub fn cut_weight(g: &Graph, c: &Cut) -> Result<f64> {
    c.check(g)?;
    Ok(c.iter().map(|e| g.edges[e].w).sum())
}

/// Edges with exactly one endpoint in `s`.
pub fn boundary(g: &Graph, s: &[usize]) -> Result<Cut> {
    let mut inside = vec![false; g.node_count()];
    for &v in s {
        g.check_node(v)?;
        inside[v] = true;
    }
    Ok(boundary_of_mask(g, &inside))
}

pub(crate) fn boundary_of_mask(g: &Graph, inside: &[bool]) -> Cut {
    Cut::from_sorted(
        g.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| inside[e.u] != inside[e.v])
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Edges whose endpoints receive different labels.
pub fn dichromatic_edges(g: &Graph, labels: &[usize]) -> Cut {
    Cut::from_sorted(
        g.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| labels[e.u] != labels[e.v])
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Result of [`contract`].
#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    pub graph: Graph,
    /// Old node index to new node index.
    pub node_map: Vec<usize>,
    /// New edge index to the old edge it came from.
    pub edge_map: Vec<usize>,
}

impl Contraction {
    /// Maps a cut of the contracted graph back to the original edges.
    pub fn expand_cut(&self, c: &Cut) -> Cut {
        c.iter().map(|e| self.edge_map[e]).collect()
    }

    /// The contracted node that `v` was merged into.
    pub fn image(&self, v: usize) -> usize {
        self.node_map[v]
    }
}

/// Merges each group into a single node; edges inside a group disappear and
/// parallel edges survive unmerged. New nodes are ordered by their smallest
/// original member; a merged node is named by joining member names with `+`.
pub fn contract(g: &Graph, groups: &[Vec<usize>]) -> Result<Contraction> {
    let n = g.node_count();
    let mut group_of = vec![usize::MAX; n];
    for (gi, group) in groups.iter().enumerate() {
        for &v in group {
            g.check_node(v)?;
            if group_of[v] != usize::MAX {
                return Err(Error::Precondition(format!(
                    "contraction groups overlap at node `{}`",
                    g.name(v)
                )));
            }
            group_of[v] = gi;
        }
    }
    let mut node_map = vec![usize::MAX; n];
    let mut group_image = vec![usize::MAX; groups.len()];
    let mut new_names: Vec<String> = Vec::new();
    for v in 0..n {
        match group_of[v] {
            usize::MAX => {
                node_map[v] = new_names.len();
                new_names.push(g.name(v).to_string());
            }
            gi if group_image[gi] == usize::MAX => {
                group_image[gi] = new_names.len();
                node_map[v] = new_names.len();
                let mut members = groups[gi].clone();
                members.sort_unstable();
                members.dedup();
                let joined: Vec<&str> = members.iter().map(|&m| g.name(m)).collect();
                new_names.push(joined.join("+"));
            }
            gi => node_map[v] = group_image[gi],
        }
    }
    let mut seen: HashMap<String, usize> = HashMap::new();
    for name in &mut new_names {
        while seen.contains_key(name.as_str()) {
            name.push('\'');
        }
        seen.insert(name.clone(), 0);
    }
    let mut graph = Graph::new(new_names)?;
    let mut edge_map = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        let (a, b) = (node_map[e.u], node_map[e.v]);
        if a != b {
            graph.add_edge(a, b, e.w)?;
            edge_map.push(i);
        }
    }
    Ok(Contraction {
        graph,
        node_map,
        edge_map,
    })
}
