//! Maximum flow, minimum s-t cuts, isolating cuts and Gomory-Hu trees.
//!
//! The flow engine is a highest-label push-relabel with the gap heuristic.
//! It runs to a full flow (not just a maximum preflow), so the minimal
//! source side is simply the residual reachability set of the source.

use crate::error::{Error, Result};
use crate::graph::{boundary, boundary_of_mask, contract, cut_weight, Cut, Graph};

/// Residual capacities at or below this are treated as saturated.
const EPS: f64 = 1e-12;
/// Absolute tolerance for flow certificates.
pub const FLOW_TOL: f64 = 1e-9;

/// A flow network with paired arcs: arc `a` and `a ^ 1` are mutual reverses.
#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    head: Vec<usize>,
    cap: Vec<f64>,
    res: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            head: Vec::new(),
            cap: Vec::new(),
            res: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds `u -> v` with capacity `cap` and the reverse with `rev_cap`;
    /// returns the forward arc id.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: f64, rev_cap: f64) -> usize {
        let a = self.head.len();
        self.head.push(v);
        self.cap.push(cap);
        self.res.push(cap);
        self.adj[u].push(a);
        self.head.push(u);
        self.cap.push(rev_cap);
        self.res.push(rev_cap);
        self.adj[v].push(a + 1);
        a
    }

    /// Net flow on arc `a` (negative when flow runs the other way).
    pub fn flow(&self, a: usize) -> f64 {
        self.cap[a] - self.res[a]
    }

    /// Computes a maximum s-t flow and returns its value.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.node_count();
        let mut height = vec![0usize; n];
        let mut excess = vec![0.0f64; n];
        let mut current = vec![0usize; n];
        // buckets[h] holds active nodes at height h; count[h] all nodes at h
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 2];
        let mut count = vec![0usize; 2 * n + 2];
        let mut active = vec![false; n];

        self.initial_heights(t, &mut height);
        height[s] = n;
        for &h in &height {
            count[h] += 1;
        }
        for i in 0..self.adj[s].len() {
            let a = self.adj[s][i];
            let r = self.res[a];
            if r > EPS {
                let w = self.head[a];
                self.res[a] -= r;
                self.res[a ^ 1] += r;
                excess[w] += r;
                excess[s] -= r;
                if w != t && w != s && !active[w] {
                    active[w] = true;
                    buckets[height[w]].push(w);
                }
            }
        }

        let mut top = buckets.len() - 1;
        loop {
            while top > 0 && buckets[top].is_empty() {
                top -= 1;
            }
            let Some(v) = buckets[top].pop() else { break };
            active[v] = false;
            // discharge v
            while excess[v] > EPS {
                if current[v] == self.adj[v].len() {
                    let old = height[v];
                    let mut best = usize::MAX;
                    for &a in &self.adj[v] {
                        if self.res[a] > EPS {
                            best = best.min(height[self.head[a]] + 1);
                        }
                    }
                    if best == usize::MAX {
                        // only numerical dust can be stranded here
                        excess[v] = 0.0;
                        break;
                    }
                    let new = best.min(2 * n);
                    count[old] -= 1;
                    height[v] = new;
                    count[new] += 1;
                    current[v] = 0;
                    if old < n && count[old] == 0 {
                        for u in 0..n {
                            if height[u] > old && height[u] < n {
                                count[height[u]] -= 1;
                                height[u] = n + 1;
                                count[n + 1] += 1;
                                current[u] = 0;
                            }
                        }
                        if active.iter().any(|&x| x) {
                            for b in buckets.iter_mut() {
                                b.clear();
                            }
                            for u in 0..n {
                                if active[u] {
                                    buckets[height[u]].push(u);
                                }
                            }
                            top = buckets.len() - 1;
                        }
                    }
                    continue;
                }
                let a = self.adj[v][current[v]];
                let w = self.head[a];
                if self.res[a] > EPS && height[v] == height[w] + 1 {
                    let delta = excess[v].min(self.res[a]);
                    self.res[a] -= delta;
                    self.res[a ^ 1] += delta;
                    excess[v] -= delta;
                    excess[w] += delta;
                    if w != s && w != t && !active[w] && excess[w] > EPS {
                        active[w] = true;
                        buckets[height[w]].push(w);
                        top = top.max(height[w]);
                    }
                } else {
                    current[v] += 1;
                }
            }
        }
        excess[t]
    }

    /// Exact distance-to-sink labels in the residual network.
    fn initial_heights(&self, t: usize, height: &mut [usize]) {
        let n = self.node_count();
        height.iter_mut().for_each(|h| *h = n);
        height[t] = 0;
        let mut queue = std::collections::VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            for &a in &self.adj[v] {
                let u = self.head[a];
                if height[u] == n && self.res[a ^ 1] > EPS && u != t {
                    height[u] = height[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        for h in height.iter_mut() {
            if *h > n {
                *h = n;
            }
        }
    }

    /// Nodes reachable from `s` through arcs with positive residual capacity.
    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &a in &self.adj[v] {
                let w = self.head[a];
                if !seen[w] && self.res[a] > FLOW_TOL {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Checks capacity feasibility and conservation at every node other
    /// than `s` and `t`; returns the net outflow of `s`.
    pub fn certify(&self, s: usize, t: usize) -> Result<f64> {
        let scale = 1.0 + self.cap.iter().sum::<f64>();
        for a in 0..self.head.len() {
            let f = self.flow(a);
            if f > self.cap[a] + FLOW_TOL * scale {
                return Err(Error::Internal(format!("arc {a} carries {f} over capacity {}", self.cap[a])));
            }
        }
        let mut source_out = 0.0;
        for v in 0..self.node_count() {
            let net: f64 = self.adj[v].iter().map(|&a| self.flow(a)).sum();
            if v == s {
                source_out = net;
            } else if v != t && net.abs() > FLOW_TOL * scale {
                return Err(Error::Internal(format!("flow not conserved at node {v}: net {net}")));
            }
        }
        Ok(source_out)
    }
}

/// Minimum s-t cut with its certificate data.
#[derive(Debug, Clone, PartialEq)]
pub struct StCutResult {
    pub weight: f64,
    /// Minimal optimal source side, ascending.
    pub source_side: Vec<usize>,
    pub cut: Cut,
}

fn network_of(g: &Graph) -> FlowNetwork {
    let mut net = FlowNetwork::new(g.node_count());
    for e in g.edges() {
        net.add_arc(e.u, e.v, e.w, e.w);
    }
    net
}

/// Minimum-weight cut separating `s` from `t`. The returned source side is
/// the unique minimal one.
pub fn min_st_cut(g: &Graph, s: usize, t: usize) -> Result<StCutResult> {
    g.check_node(s)?;
    g.check_node(t)?;
    if s == t {
        return Err(Error::Precondition("source and sink coincide".into()));
    }
    let mut net = network_of(g);
    let value = net.max_flow(s, t);
    let out = net.certify(s, t)?;
    let side = net.residual_reachable(s);
    if side[t] {
        return Err(Error::Internal("sink reachable after max flow".into()));
    }
    let cut = boundary_of_mask(g, &side);
    let weight = cut_weight(g, &cut)?;
    let scale = 1.0 + g.total_weight();
    if (weight - value).abs() > FLOW_TOL * scale || (out - value).abs() > FLOW_TOL * scale {
        return Err(Error::Internal(format!(
            "flow value {value} (source outflow {out}) differs from cut weight {weight}"
        )));
    }
    Ok(StCutResult {
        weight,
        source_side: (0..g.node_count()).filter(|&v| side[v]).collect(),
        cut,
    })
}

/// Minimum-weight cut separating `v` from every node of `x`, computed by
/// contracting `x` into a single sink.
pub fn isolating_cut(g: &Graph, v: usize, x: &[usize]) -> Result<StCutResult> {
    g.check_node(v)?;
    if x.is_empty() {
        return Err(Error::Precondition("isolating cut needs a nonempty target set".into()));
    }
    if x.contains(&v) {
        return Err(Error::Precondition(format!("node `{}` lies in the set it must be isolated from", g.name(v))));
    }
    let c = contract(g, &[x.to_vec()])?;
    let r = min_st_cut(&c.graph, c.image(v), c.image(x[0]))?;
    let mut inside = vec![false; c.graph.node_count()];
    for &u in &r.source_side {
        inside[u] = true;
    }
    let source_side: Vec<usize> = (0..g.node_count()).filter(|&u| inside[c.image(u)]).collect();
    let cut = boundary(g, &source_side)?;
    let weight = cut_weight(g, &cut)?;
    Ok(StCutResult {
        weight,
        source_side,
        cut,
    })
}

/// A Gomory-Hu tree on the nodes of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GomoryHuTree {
    node_count: usize,
    /// `(u, v, w_T)`; edge `i` joins node `i + 1` to its parent in the
    /// construction order.
    edges: Vec<(usize, usize, f64)>,
}

/// Gusfield's construction: `n - 1` max-flow calls on the original graph.
/// The result is a genuine cut tree: removing any tree edge splits the
/// nodes into the two sides of a minimum cut for its endpoints.
pub fn gomory_hu(g: &Graph) -> Result<GomoryHuTree> {
    let n = g.node_count();
    let mut parent = vec![0usize; n];
    let mut weight = vec![0.0f64; n];
    for s in 1..n {
        let t = parent[s];
        let r = min_st_cut(g, s, t)?;
        let mut in_side = vec![false; n];
        for &u in &r.source_side {
            in_side[u] = true;
        }
        weight[s] = r.weight;
        for i in 0..n {
            if i != s && in_side[i] && parent[i] == t {
                parent[i] = s;
            }
        }
        if in_side[parent[t]] {
            parent[s] = parent[t];
            parent[t] = s;
            weight[s] = weight[t];
            weight[t] = r.weight;
        }
    }
    let edges = (1..n).map(|v| (v, parent[v], weight[v])).collect();
    Ok(GomoryHuTree { node_count: n, edges })
}

impl GomoryHuTree {
    /// Builds a tree from explicit edges, checking it spans `n` nodes.
    pub fn from_edges(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut g = Graph::numbered(n);
        for &(u, v, w) in &edges {
            g.add_edge(u, v, w)?;
        }
        if n > 0 && !g.is_tree() {
            return Err(Error::Precondition("edges do not form a spanning tree".into()));
        }
        Ok(GomoryHuTree { node_count: n, edges })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// The tree as a graph reusing the names of `g`; edge `i` of the result
    /// is tree edge `i`.
    pub fn as_graph(&self, g: &Graph) -> Result<Graph> {
        let mut t = Graph::new(g.names().iter().cloned())?;
        for &(u, v, w) in &self.edges {
            t.add_edge(u, v, w)?;
        }
        Ok(t)
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for (i, &(u, v, _)) in self.edges.iter().enumerate() {
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
        adj
    }

    /// Tree edge indices on the path from `s` to `u`, in order from `s`.
    fn path(&self, s: usize, u: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut via = vec![usize::MAX; self.node_count];
        let mut seen = vec![false; self.node_count];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &(y, e) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    via[y] = e;
                    stack.push(y);
                }
            }
        }
        let mut path = Vec::new();
        let mut x = u;
        while x != s {
            let e = via[x];
            path.push(e);
            x = self.edges[e].0 + self.edges[e].1 - x;
        }
        path.reverse();
        path
    }

    /// Nodes on the side of `v` once tree edge `e` is removed, ascending.
    pub fn side(&self, e: usize, v: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.node_count];
        seen[v] = true;
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for &(y, f) in &adj[x] {
                if f != e && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        (0..self.node_count).filter(|&x| seen[x]).collect()
    }

    /// The cut of `g` encoded by tree edge `e`.
    pub fn fundamental_cut(&self, g: &Graph, e: usize) -> Result<Cut> {
        let (u, _, _) = *self.edges.get(e).ok_or(Error::InvalidEdge(e))?;
        boundary(g, &self.side(e, u))
    }

    /// Minimum tree-path weight between `s` and `u`, and the side of `s`
    /// after removing the lightest path edge (the one nearest `s` on ties).
    pub fn query(&self, s: usize, u: usize) -> Result<(f64, Vec<usize>)> {
        for x in [s, u] {
            if x >= self.node_count {
                return Err(Error::NodeOutOfRange(x));
            }
        }
        if s == u {
            return Err(Error::Precondition("query endpoints coincide".into()));
        }
        let path = self.path(s, u);
        let mut best = path[0];
        for &e in &path[1..] {
            if self.edges[e].2 < self.edges[best].2 {
                best = e;
            }
        }
        Ok((self.edges[best].2, self.side(best, s)))
    }
}

/// Free-function form of [`GomoryHuTree::query`].
pub fn gh_query(t: &GomoryHuTree, s: usize, u: usize) -> Result<(f64, Vec<usize>)> {
    t.query(s, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_named_edges(
            &["u", "v", "x"],
            &[("u", "v", 1.0), ("v", "x", 2.0), ("u", "x", 3.0)],
        )
        .unwrap()
    }

    fn star() -> Graph {
        Graph::from_named_edges(
            &["r", "a", "b", "c"],
            &[("r", "a", 1.0), ("r", "b", 2.0), ("r", "c", 3.0)],
        )
        .unwrap()
    }

    /// Enumerates every node set containing `s` but not `t`.
    fn brute_min_cut(g: &Graph, s: usize, t: usize) -> f64 {
        let n = g.node_count();
        (0u32..1 << n)
            .filter(|m| m >> s & 1 == 1 && m >> t & 1 == 0)
            .map(|m| {
                let side: Vec<usize> = (0..n).filter(|v| m >> v & 1 == 1).collect();
                cut_weight(g, &boundary(g, &side).unwrap()).unwrap()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn single_edge() {
        let g = Graph::from_named_edges(&["s", "t"], &[("s", "t", 3.0)]).unwrap();
        let r = min_st_cut(&g, 0, 1).unwrap();
        assert_eq!(r.weight, 3.0);
        assert_eq!(r.source_side, vec![0]);
    }

    #[test]
    fn triangle_cut() {
        let r = min_st_cut(&triangle(), 0, 1).unwrap();
        assert_eq!(r.weight, 3.0);
        assert_eq!(r.source_side, vec![0, 2]);
        assert_eq!(brute_min_cut(&triangle(), 0, 1), 3.0);
    }

    #[test]
    fn disconnected_pair() {
        let g = Graph::numbered(2);
        let r = min_st_cut(&g, 0, 1).unwrap();
        assert_eq!(r.weight, 0.0);
        assert!(r.cut.is_empty());
    }

    #[test]
    fn same_endpoint_rejected() {
        assert!(matches!(min_st_cut(&triangle(), 1, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn isolating_leaf_of_star() {
        let g = star();
        let r = isolating_cut(&g, 1, &[2, 3]).unwrap();
        assert_eq!(r.weight, 1.0);
        assert_eq!(r.cut, Cut::new([0]));
        assert!(matches!(isolating_cut(&g, 1, &[1, 2]), Err(Error::Precondition(_))));
    }

    #[test]
    fn isolating_isolated_node() {
        let mut g = star();
        let z = g.add_node("z").unwrap();
        assert_eq!(isolating_cut(&g, z, &[0, 1]).unwrap().weight, 0.0);
    }

    #[test]
    fn gomory_hu_triangle() {
        let g = triangle();
        let t = gomory_hu(&g).unwrap();
        assert_eq!(t.query(0, 1).unwrap().0, 3.0);
        assert_eq!(t.query(1, 2).unwrap().0, 3.0);
        assert_eq!(t.query(0, 2).unwrap().0, 4.0);
    }

    #[test]
    fn gomory_hu_single_node() {
        assert!(gomory_hu(&Graph::numbered(1)).unwrap().edges().is_empty());
    }

    #[test]
    fn query_path_tree() {
        let t = GomoryHuTree::from_edges(3, vec![(0, 1, 5.0), (1, 2, 2.0)]).unwrap();
        assert_eq!(gh_query(&t, 0, 2).unwrap(), (2.0, vec![0, 1]));
        assert_eq!(gh_query(&t, 0, 1).unwrap(), (5.0, vec![0]));
    }

    #[test]
    fn query_tie_prefers_edge_near_source() {
        let t = GomoryHuTree::from_edges(3, vec![(0, 1, 2.0), (1, 2, 2.0)]).unwrap();
        assert_eq!(t.query(0, 2).unwrap().1, vec![0]);
        assert_eq!(t.query(2, 0).unwrap().1, vec![2]);
    }

    #[test]
    fn gomory_hu_of_tree_matches_tree() {
        let g = Graph::from_named_edges(
            &["a", "b", "c", "d"],
            &[("a", "b", 4.0), ("b", "c", 1.0), ("b", "d", 7.0)],
        )
        .unwrap();
        let t = gomory_hu(&g).unwrap();
        let tree = GomoryHuTree::from_edges(4, vec![(0, 1, 4.0), (1, 2, 1.0), (1, 3, 7.0)]).unwrap();
        for s in 0..4 {
            for u in 0..4 {
                if s != u {
                    assert_eq!(t.query(s, u).unwrap().0, tree.query(s, u).unwrap().0);
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_graph() -> impl Strategy<Value = Graph> {
            (2usize..9).prop_flat_map(|n| {
                proptest::collection::vec((0..n, 0..n, 1u32..11), 0..16).prop_map(move |es| {
                    let mut g = Graph::numbered(n);
                    for (u, v, w) in es {
                        if u != v {
                            g.add_edge(u, v, w as f64).unwrap();
                        }
                    }
                    g
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn flow_matches_brute_force(g in arb_graph()) {
                let n = g.node_count();
                for s in 0..n {
                    for t in 0..n {
                        if s != t {
                            let r = min_st_cut(&g, s, t).unwrap();
                            prop_assert_eq!(r.weight, brute_min_cut(&g, s, t));
                            prop_assert!(r.source_side.contains(&s) && !r.source_side.contains(&t));
                            prop_assert_eq!(isolating_cut(&g, s, &[t]).unwrap().weight, r.weight);
                        }
                    }
                }
            }

            #[test]
            fn source_side_is_minimal(g in arb_graph()) {
                let n = g.node_count();
                let r = min_st_cut(&g, 0, n - 1).unwrap();
                // every optimal side contains the returned one
                for m in 0u32..1 << n {
                    if m & 1 == 1 && m >> (n - 1) & 1 == 0 {
                        let side: Vec<usize> = (0..n).filter(|v| m >> v & 1 == 1).collect();
                        let w = cut_weight(&g, &boundary(&g, &side).unwrap()).unwrap();
                        if w == r.weight {
                            prop_assert!(r.source_side.iter().all(|v| side.contains(v)));
                        }
                    }
                }
            }

            #[test]
            fn gomory_hu_answers_all_pairs(g in arb_graph()) {
                let t = gomory_hu(&g).unwrap();
                prop_assert_eq!(t.edges().len(), g.node_count() - 1);
                let n = g.node_count();
                for s in 0..n {
                    for u in 0..n {
                        if s != u {
                            let (w, split) = t.query(s, u).unwrap();
                            prop_assert_eq!(w, brute_min_cut(&g, s, u));
                            prop_assert!(split.contains(&s) && !split.contains(&u));
                            let c = cut_weight(&g, &boundary(&g, &split).unwrap()).unwrap();
                            prop_assert_eq!(c, w);
                        }
                    }
                }
                for e in 0..t.edges().len() {
                    let c = cut_weight(&g, &t.fundamental_cut(&g, e).unwrap()).unwrap();
                    prop_assert_eq!(c, t.edges()[e].2);
                }
            }
        }
    }
}
