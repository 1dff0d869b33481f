//! Line-oriented text formats.
//!
//! Every file starts with a `repcut-<kind> v1` header. Blank lines and
//! anything after `#` are ignored; every other line is a keyword followed by
//! whitespace-separated fields. Node names are single tokens. Set indices
//! in files are 1-based.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use repcut::reductions::{HittingSetInstance, SteinerMulticutInstance};
use repcut::{CandidateFamily, Cut, CutSolution, Graph, RepresentativeChoice, Variant, VariantInstance};

pub const INSTANCE: &str = "repcut-instance";
pub const SOLUTION: &str = "repcut-solution";
pub const HITTING_SET: &str = "repcut-hitting-set";
pub const STEINER: &str = "repcut-steiner";
pub const MAP: &str = "repcut-map";
pub const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// 1-based line number, 0 when the problem concerns the whole file.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

type Line<'a> = (usize, &'a str, Vec<&'a str>);

/// Significant lines as (line number, keyword, fields).
fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let key = tokens.next()?;
        Some((k + 1, key, tokens.collect()))
    })
}

/// The kind named by the header of `text`, if it has one.
pub fn detect_kind(text: &str) -> Option<&str> {
    lines(text).next().map(|(_, key, _)| key)
}

fn body<'a>(text: &'a str, kind: &str) -> Result<impl Iterator<Item = Line<'a>>, ParseError> {
    let mut it = lines(text);
    match it.next() {
        Some((_, key, fields)) if key == kind => match fields.as_slice() {
            [VERSION] => Ok(it),
            [v] => err(1, format!("unsupported {kind} version `{v}` (expected {VERSION})")),
            _ => err(1, format!("malformed header, expected `{kind} {VERSION}`")),
        },
        Some((n, key, _)) => err(n, format!("expected header `{kind} {VERSION}`, found `{key}`")),
        None => err(0, format!("empty file, expected header `{kind} {VERSION}`")),
    }
}

fn number(n: usize, s: &str) -> Result<f64, ParseError> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(n, format!("`{s}` is not a finite number")),
    }
}

fn index(n: usize, s: &str, q: usize) -> Result<usize, ParseError> {
    match s.parse::<usize>() {
        Ok(i) if (1..=q).contains(&i) => Ok(i - 1),
        _ => err(n, format!("`{s}` is not a set index in 1..={q}")),
    }
}

fn node(n: usize, g: &Graph, name: &str) -> Result<usize, ParseError> {
    g.node(name).or_else(|_| err(n, format!("unknown node `{name}`")))
}

fn nodes(n: usize, g: &Graph, names: &[&str]) -> Result<Vec<usize>, ParseError> {
    names.iter().map(|s| node(n, g, s)).collect()
}

/// Handles the `nodes` and `edge` keywords shared by instance and Steiner
/// files; returns false for any other keyword.
fn graph_line(g: &mut Graph, (n, key, fields): &Line<'_>) -> Result<bool, ParseError> {
    match *key {
        "nodes" => {
            for name in fields {
                g.add_node(*name).or_else(|e| err(*n, e.to_string()))?;
            }
        }
        "edge" => {
            let [u, v, w] = fields.as_slice() else {
                return err(*n, "expected `edge <u> <v> <weight>`");
            };
            let (u, v, w) = (node(*n, g, u)?, node(*n, g, v)?, number(*n, w)?);
            g.add_edge(u, v, w).or_else(|e| err(*n, e.to_string()))?;
        }
        _ => return Ok(false),
    }
    Ok(true)
}

fn write_graph(out: &mut String, g: &Graph) {
    if g.node_count() > 0 {
        let _ = writeln!(out, "nodes {}", g.names().join(" "));
    }
    for e in g.edges() {
        let _ = writeln!(out, "edge {} {} {}", g.name(e.u), g.name(e.v), e.w);
    }
}

fn names(g: &Graph, vs: &[usize]) -> String {
    vs.iter().map(|&v| g.name(v)).collect::<Vec<_>>().join(" ")
}

/// A variant instance with free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub instance: VariantInstance,
    pub meta: Vec<(String, String)>,
}

impl InstanceFile {
    pub fn new(instance: VariantInstance) -> Self {
        InstanceFile {
            instance,
            meta: Vec::new(),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, ParseError> {
    let mut g = Graph::new(Vec::<String>::new()).expect("empty graph");
    let mut variant = None;
    let mut sets = Vec::new();
    let mut fixed = None;
    let mut meta = Vec::new();
    for line in body(text, INSTANCE)? {
        if graph_line(&mut g, &line)? {
            continue;
        }
        let (n, key, fields) = line;
        match key {
            "variant" => {
                let [name] = fields.as_slice() else {
                    return err(n, "expected `variant <name>`");
                };
                if variant.is_some() {
                    return err(n, "duplicate `variant`");
                }
                variant = Some(Variant::from_str(name).or_else(|e| err(n, e.to_string()))?);
            }
            "set" => {
                if fields.is_empty() {
                    return err(n, "a candidate set needs at least one node");
                }
                sets.push(nodes(n, &g, &fields)?);
            }
            "fixed" => {
                let [name] = fields.as_slice() else {
                    return err(n, "expected `fixed <node>`");
                };
                if fixed.is_some() {
                    return err(n, "duplicate `fixed`");
                }
                fixed = Some(node(n, &g, name)?);
            }
            "meta" => {
                let Some((k, rest)) = fields.split_first() else {
                    return err(n, "expected `meta <key> <value>`");
                };
                meta.push((k.to_string(), rest.join(" ")));
            }
            other => return err(n, format!("unknown key `{other}`")),
        }
    }
    let Some(variant) = variant else {
        return err(0, "missing `variant`");
    };
    let family = CandidateFamily::new(sets).or_else(|e| err(0, e.to_string()))?;
    let instance = VariantInstance::new(variant, g, family, fixed).or_else(|e| err(0, e.to_string()))?;
    Ok(InstanceFile { instance, meta })
}

pub fn emit_instance(file: &InstanceFile) -> String {
    let inst = &file.instance;
    let g = &inst.graph;
    let mut out = format!("{INSTANCE} {VERSION}\nvariant {}\n", inst.variant);
    for (k, v) in &file.meta {
        let _ = writeln!(out, "meta {k} {v}");
    }
    write_graph(&mut out, g);
    for s in inst.family.sets() {
        let _ = writeln!(out, "set {}", names(g, s));
    }
    if let Some(s) = inst.fixed {
        let _ = writeln!(out, "fixed {}", g.name(s));
    }
    out
}

/// Reads a solution of `inst`. Cut lines name edge endpoints; parallel
/// edges are matched in index order. The certificate is left empty since
/// the validator recomputes it.
pub fn parse_solution(text: &str, inst: &VariantInstance) -> Result<CutSolution, ParseError> {
    let g = &inst.graph;
    let q = inst.q();
    let mut weight = None;
    let mut lp_value = None;
    let mut singles: BTreeMap<usize, usize> = BTreeMap::new();
    let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut cut = Vec::new();
    for (n, key, fields) in body(text, SOLUTION)? {
        match (key, fields.as_slice()) {
            ("variant", [name]) => {
                let v = Variant::from_str(name).or_else(|e| err(n, e.to_string()))?;
                if v != inst.variant {
                    return err(n, format!("solution is for {v} but the instance is {}", inst.variant));
                }
            }
            ("weight", [w]) => weight = Some(number(n, w)?),
            ("lp", [w]) => lp_value = Some(number(n, w)?),
            ("rep", [i, v]) => {
                if singles.insert(index(n, i, q)?, node(n, g, v)?).is_some() {
                    return err(n, format!("duplicate representative t_{i}"));
                }
            }
            ("rep", [i, j, v]) => {
                if pairs.insert((index(n, i, q)?, index(n, j, q)?), node(n, g, v)?).is_some() {
                    return err(n, format!("duplicate representative t_{i}^{j}"));
                }
            }
            ("cut", [u, v]) => {
                let (u, v) = (node(n, g, u)?, node(n, g, v)?);
                let e = (0..g.edge_count())
                    .find(|&e| {
                        let x = g.edges()[e];
                        ((x.u, x.v) == (u, v) || (x.u, x.v) == (v, u)) && !cut.contains(&e)
                    })
                    .map_or_else(|| err(n, format!("no remaining edge between `{}` and `{}`", g.name(u), g.name(v))), Ok)?;
                cut.push(e);
            }
            ("variant" | "weight" | "lp" | "rep" | "cut", _) => return err(n, format!("wrong number of fields for `{key}`")),
            (other, _) => return err(n, format!("unknown key `{other}`")),
        }
    }
    let Some(weight) = weight else {
        return err(0, "missing `weight`");
    };
    let single = if singles.is_empty() {
        None
    } else if singles.keys().copied().eq(0..singles.len()) {
        Some(singles.into_values().collect())
    } else {
        return err(0, "single representatives must be given for sets 1..k without gaps");
    };
    Ok(CutSolution {
        cut: Cut::new(cut),
        reps: RepresentativeChoice {
            single,
            pair: (!pairs.is_empty()).then_some(pairs),
        },
        weight,
        certificate: Vec::new(),
        lp_value,
    })
}

pub fn emit_solution(inst: &VariantInstance, sol: &CutSolution) -> String {
    let g = &inst.graph;
    let mut out = format!("{SOLUTION} {VERSION}\nvariant {}\nweight {}\n", inst.variant, sol.weight);
    if let Some(lp) = sol.lp_value {
        let _ = writeln!(out, "lp {lp}");
    }
    for (i, &t) in sol.reps.single.iter().flatten().enumerate() {
        let _ = writeln!(out, "rep {} {}", i + 1, g.name(t));
    }
    for (&(i, j), &t) in sol.reps.pair.iter().flatten() {
        let _ = writeln!(out, "rep {} {} {}", i + 1, j + 1, g.name(t));
    }
    for e in sol.cut.iter() {
        let x = g.edges()[e];
        let _ = writeln!(out, "cut {} {}", g.name(x.u), g.name(x.v));
    }
    out
}

pub fn parse_hitting_set(text: &str) -> Result<HittingSetInstance, ParseError> {
    let mut ground: Option<Vec<String>> = None;
    let mut sets = Vec::new();
    for (n, key, fields) in body(text, HITTING_SET)? {
        match key {
            "ground" => {
                if ground.is_some() {
                    return err(n, "duplicate `ground`");
                }
                ground = Some(fields.iter().map(|s| s.to_string()).collect());
            }
            "set" => {
                let Some(g) = &ground else {
                    return err(n, "`set` before `ground`");
                };
                let set = fields
                    .iter()
                    .map(|x| g.iter().position(|y| y == x).map_or_else(|| err(n, format!("unknown element `{x}`")), Ok))
                    .collect::<Result<Vec<_>, _>>()?;
                sets.push(set);
            }
            other => return err(n, format!("unknown key `{other}`")),
        }
    }
    HittingSetInstance::new(ground.unwrap_or_default(), sets).or_else(|e| err(0, e.to_string()))
}

pub fn emit_hitting_set(h: &HittingSetInstance) -> String {
    let mut out = format!("{HITTING_SET} {VERSION}\nground {}\n", h.ground.join(" "));
    for s in &h.sets {
        let names: Vec<&str> = s.iter().map(|&x| h.ground[x].as_str()).collect();
        let _ = writeln!(out, "set {}", names.join(" "));
    }
    out
}

pub fn parse_steiner(text: &str) -> Result<SteinerMulticutInstance, ParseError> {
    let mut g = Graph::new(Vec::<String>::new()).expect("empty graph");
    let mut groups = Vec::new();
    for line in body(text, STEINER)? {
        if graph_line(&mut g, &line)? {
            continue;
        }
        match line {
            (n, "group", fields) => groups.push(nodes(n, &g, &fields)?),
            (n, other, _) => return err(n, format!("unknown key `{other}`")),
        }
    }
    SteinerMulticutInstance::new(g, groups).or_else(|e| err(0, e.to_string()))
}

pub fn emit_steiner(sm: &SteinerMulticutInstance) -> String {
    let mut out = format!("{STEINER} {VERSION}\n");
    write_graph(&mut out, &sm.graph);
    for x in &sm.groups {
        let _ = writeln!(out, "group {}", names(&sm.graph, x));
    }
    out
}

/// Emits a Steiner cut as `cut` lines.
pub fn emit_steiner_cut(sm: &SteinerMulticutInstance, cut: &Cut, weight: f64) -> String {
    let g = &sm.graph;
    let mut out = format!("{SOLUTION} {VERSION}\nweight {weight}\n");
    for e in cut.iter() {
        let x = g.edges()[e];
        let _ = writeln!(out, "cut {} {}", g.name(x.u), g.name(x.v));
    }
    out
}

/// One line of a reduction map sidecar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapEntry {
    /// A target node and the source node or element it copies, if any.
    Node { target: String, source: Option<String> },
    /// A target set or group and the 1-based source index it comes from.
    Set { target: usize, source: Option<usize> },
    /// A target group standing for the source pair `(i, j)`, 1-based.
    Pair { target: usize, i: usize, j: usize },
}

pub fn emit_map(from: &str, to: &str, entries: &[MapEntry]) -> String {
    let mut out = format!("{MAP} {VERSION}\nreduction {from} {to}\n");
    for e in entries {
        let _ = match e {
            MapEntry::Node { target, source } => writeln!(out, "node {target} {}", source.as_deref().unwrap_or("-")),
            MapEntry::Set { target, source } => match source {
                Some(s) => writeln!(out, "set {target} {s}"),
                None => writeln!(out, "set {target} -"),
            },
            MapEntry::Pair { target, i, j } => writeln!(out, "pair {target} {i} {j}"),
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const STAR: &str = "repcut-instance v1\n# two leaves\nvariant single-to-all\nmeta name stress\nnodes r a b\nedge r a 1\nedge r b 2.5\nset a\nset b\n";

    #[test]
    fn instance_round_trip() {
        let f = parse_instance(STAR).unwrap();
        assert_eq!(f.instance.variant, Variant::SingleToAll);
        assert_eq!(f.meta, [("name".to_string(), "stress".to_string())]);
        assert_eq!(f.instance.graph.edges()[1].w, 2.5);
        assert_eq!(parse_instance(&emit_instance(&f)).unwrap(), f);
    }

    #[test]
    fn instance_errors_carry_line_numbers() {
        let bad = STAR.replace("edge r b 2.5", "edge r z 2.5");
        assert_eq!(parse_instance(&bad).unwrap_err().line, 7);
        let bad = STAR.replace("meta", "colour");
        assert!(parse_instance(&bad).unwrap_err().message.contains("unknown key"));
        assert!(parse_instance("repcut-instance v2\n").unwrap_err().message.contains("version"));
        assert!(parse_instance("").is_err());
        assert!(parse_instance("repcut-instance v1\nnodes a\nset a\n").unwrap_err().message.contains("variant"));
    }

    #[test]
    fn solution_round_trip() {
        let inst = parse_instance(STAR).unwrap().instance;
        let text = "repcut-solution v1\nvariant single-to-all\nweight 1\nrep 1 a\nrep 2 b\ncut a r\n";
        let sol = parse_solution(text, &inst).unwrap();
        assert_eq!(sol.cut.as_slice(), [0]);
        assert_eq!(sol.reps.single, Some(vec![1, 2]));
        assert_eq!(parse_solution(&emit_solution(&inst, &sol), &inst).unwrap(), sol);
    }

    #[test]
    fn solution_rejects_missing_edges() {
        let inst = parse_instance(STAR).unwrap().instance;
        let text = "repcut-solution v1\nweight 1\ncut a b\n";
        assert_eq!(parse_solution(text, &inst).unwrap_err().line, 3);
        let text = "repcut-solution v1\nweight 1\ncut a r\ncut r a\n";
        assert!(parse_solution(text, &inst).is_err());
    }

    #[test]
    fn hitting_set_and_steiner_round_trip() {
        let h = parse_hitting_set("repcut-hitting-set v1\nground x y z\nset x y\nset z\n").unwrap();
        assert_eq!(h.sets, [vec![0, 1], vec![2]]);
        assert_eq!(parse_hitting_set(&emit_hitting_set(&h)).unwrap(), h);
        let sm = parse_steiner("repcut-steiner v1\nnodes a b c\nedge a b 1\nedge b c 2\ngroup a c\n").unwrap();
        assert_eq!(sm.groups, [vec![0, 2]]);
        assert_eq!(parse_steiner(&emit_steiner(&sm)).unwrap(), sm);
    }
}
