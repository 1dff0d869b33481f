//! Subcommand implementations. Each returns the text for standard output
//! or a [`Failure`] that determines the exit code.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use repcut::graph::contract;
use repcut::lifted::{build_lift_lp, Density, LabelingInstance, RoundingParams};
use repcut::oracle::OracleLimits;
use repcut::reductions::{
    fixed_to_single_to_some_to_all, fixed_to_single_to_some_to_single, hitting_set_to_fixed_to_single, some_to_some_to_steiner,
    steiner_to_some_to_some,
};
use repcut::variants::{single_to_all_labels, validate_solution, Verdict};
use repcut::{CutSolution, Error, Variant, VariantInstance};
use serde::Deserialize;

use crate::algorithms::{self, Algorithm, SolveConfig};
use crate::format::{self, InstanceFile, MapEntry, ParseError};

/// A failed command and its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    /// Bad arguments or an input file that does not parse (exit 2).
    Usage(String),
    /// A solution failed validation, or a solver failed (exit 1).
    Rejected(String),
    /// The instance has no feasible solution (exit 3).
    Infeasible(String),
    /// A size cap or oracle budget refused the instance (exit 4).
    Refused(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Rejected(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Refused(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Rejected(m) | Failure::Infeasible(m) | Failure::Refused(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::Infeasible(_) => Failure::Infeasible(m),
            Error::CapExceeded { .. } | Error::Budget(_) => Failure::Refused(m),
            Error::Precondition(_) | Error::Params(_) => Failure::Usage(m),
            _ => Failure::Rejected(m),
        }
    }
}

pub type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Rejected(format!("cannot write {}: {e}", path.display())))
}

fn parsed<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn load_instance(path: &Path) -> Result<InstanceFile, Failure> {
    parsed(path, format::parse_instance(&read(path)?))
}

/// Optional rounding settings read from a TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub b: Option<f64>,
    pub p: Option<[f64; 4]>,
    /// Single-threshold density as equal-width bin heights on `[0, 1)`.
    pub phi: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

/// Rounding parameters from an optional params file; a seed given on the
/// command line wins over the file, and the default seed is 0.
pub fn rounding_params(file: Option<&Path>, seed: Option<u64>) -> Result<RoundingParams, Failure> {
    let pf: ParamsFile = match file {
        Some(path) => toml::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => ParamsFile::default(),
    };
    let mut p = RoundingParams::default();
    if let Some(b) = pf.b {
        p.b = b;
    }
    if let Some(probs) = pf.p {
        p.p = probs;
    }
    if let Some(bins) = pf.phi {
        p.phi = Density::from_bins(bins)?;
    }
    p.seed = seed.or(pf.seed).unwrap_or(0);
    p.validate()?;
    Ok(p)
}

fn reps_line(inst: &VariantInstance, sol: &CutSolution) -> String {
    let g = &inst.graph;
    let mut parts = Vec::new();
    for (i, &t) in sol.reps.single.iter().flatten().enumerate() {
        parts.push(format!("t_{}={}", i + 1, g.name(t)));
    }
    for (&(i, j), &t) in sol.reps.pair.iter().flatten() {
        parts.push(format!("t_{}^{}={}", i + 1, j + 1, g.name(t)));
    }
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join(" ")
    }
}

/// The human-readable solve report. It depends only on the inputs, so
/// repeated runs with one seed print identical text.
pub fn report(inst: &VariantInstance, alg: Algorithm, sol: &CutSolution, verdict: &Verdict) -> String {
    let g = &inst.graph;
    let mut out = String::new();
    let _ = writeln!(out, "variant: {}", inst.variant);
    let _ = writeln!(out, "algorithm: {alg}");
    let _ = writeln!(out, "weight: {}", sol.weight);
    if let Some(lp) = sol.lp_value {
        let _ = writeln!(out, "lp-value: {lp}");
    }
    let _ = writeln!(out, "representatives: {}", reps_line(inst, sol));
    let cut: Vec<String> = sol.cut.iter().map(|e| format!("{}-{}", g.name(g.edges()[e].u), g.name(g.edges()[e].v))).collect();
    let _ = writeln!(out, "cut: {}", if cut.is_empty() { "-".into() } else { cut.join(" ") });
    match verdict {
        Verdict::Accept => out.push_str("verdict: accept\n"),
        Verdict::Reject(why) => {
            let _ = writeln!(out, "verdict: reject ({why})");
        }
    }
    out
}

/// Arguments of `solve` and `oracle`.
#[derive(Debug, Clone)]
pub struct SolveArgs {
    pub instance: PathBuf,
    pub algorithm: Algorithm,
    pub config: SolveConfig,
    pub output: Option<PathBuf>,
}

pub fn solve(args: &SolveArgs) -> Outcome {
    let file = load_instance(&args.instance)?;
    let inst = &file.instance;
    let alg = algorithms::resolve(args.algorithm, inst, &args.config).map_err(Failure::Usage)?;
    let start = Instant::now();
    let sol = algorithms::run(alg, inst, &args.config)?;
    let elapsed = start.elapsed();
    let verdict = validate_solution(inst, &sol)?;
    eprintln!("time: {:.3}s", elapsed.as_secs_f64());
    let text = report(inst, alg, &sol, &verdict);
    if let Verdict::Reject(why) = verdict {
        return Err(Failure::Rejected(format!("{text}solver output failed validation: {why}")));
    }
    if let Some(path) = &args.output {
        write(path, &format::emit_solution(inst, &sol))?;
    }
    Ok(text)
}

pub fn validate(instance: &Path, solution: &Path) -> Outcome {
    let inst = load_instance(instance)?.instance;
    let sol = parsed(solution, format::parse_solution(&read(solution)?, &inst))?;
    match validate_solution(&inst, &sol)? {
        Verdict::Accept => Ok(format!("accept: weight {}\n", sol.weight)),
        Verdict::Reject(why) => Err(Failure::Rejected(format!("reject: {why}"))),
    }
}

/// Targets of the `reduce` subcommand.
pub const REDUCE_TARGETS: [&str; 5] = ["fixed-to-single", "some-to-single", "some-to-all", "some-to-some", "steiner"];

fn node_map(names: &[String], kept: usize) -> Vec<MapEntry> {
    names
        .iter()
        .enumerate()
        .map(|(v, name)| MapEntry::Node {
            target: name.clone(),
            source: (v < kept).then(|| name.clone()),
        })
        .collect()
}

/// The reduced instance and its map sidecar.
pub fn reduce_text(input: &Path, target: &str) -> Result<(String, String), Failure> {
    if !REDUCE_TARGETS.contains(&target) {
        return Err(Failure::Usage(format!("unknown target `{target}`; expected one of {}", REDUCE_TARGETS.join(", "))));
    }
    let text = read(input)?;
    let kind = format::detect_kind(&text).unwrap_or("").to_string();
    let no_route = || Failure::Usage(format!("no reduction from this input to `{target}`"));
    let with_meta = |inst: VariantInstance, from: &str| {
        let mut f = InstanceFile::new(inst);
        f.meta.push(("reduced-from".into(), from.into()));
        format::emit_instance(&f)
    };
    match kind.as_str() {
        format::HITTING_SET if target == "fixed-to-single" => {
            let h = parsed(input, format::parse_hitting_set(&text))?;
            let red = hitting_set_to_fixed_to_single(&h)?;
            let g = &red.target.graph;
            let mut map = vec![MapEntry::Node {
                target: g.name(0).into(),
                source: None,
            }];
            map.extend(h.ground.iter().enumerate().map(|(x, name)| MapEntry::Node {
                target: g.name(x + 1).into(),
                source: Some(name.clone()),
            }));
            map.extend((1..=h.sets.len()).map(|i| MapEntry::Set { target: i, source: Some(i) }));
            Ok((with_meta(red.target, "hitting-set"), format::emit_map("hitting-set", target, &map)))
        }
        format::STEINER if target == "some-to-some" => {
            let sm = parsed(input, format::parse_steiner(&text))?;
            let red = steiner_to_some_to_some(&sm)?;
            let mut map = node_map(red.target.graph.names(), sm.graph.node_count());
            map.extend((0..red.target.q()).map(|i| MapEntry::Set {
                target: i + 1,
                source: Some(i / 2 + 1),
            }));
            Ok((with_meta(red.target, "steiner"), format::emit_map("steiner", target, &map)))
        }
        format::INSTANCE => {
            let inst = parsed(input, format::parse_instance(&text))?.instance;
            let from = inst.variant.name();
            match (inst.variant, target) {
                (Variant::FixedToSingle, "some-to-single" | "some-to-all") => {
                    let red = if target == "some-to-single" {
                        fixed_to_single_to_some_to_single(&inst)?
                    } else {
                        fixed_to_single_to_some_to_all(&inst)?
                    };
                    let q = inst.q();
                    let mut map = node_map(red.target.graph.names(), inst.graph.node_count());
                    map.extend((0..=q).map(|i| MapEntry::Set {
                        target: i + 1,
                        source: (i < q).then_some(i + 1),
                    }));
                    Ok((with_meta(red.target, from), format::emit_map(from, target, &map)))
                }
                (Variant::SomeToSome, "steiner") => {
                    let red = some_to_some_to_steiner(&inst)?;
                    let mut map = node_map(red.target.graph.names(), inst.graph.node_count());
                    map.extend(red.pairs.iter().enumerate().map(|(k, &(i, j))| MapEntry::Pair {
                        target: k + 1,
                        i: i + 1,
                        j: j + 1,
                    }));
                    Ok((format::emit_steiner(&red.target), format::emit_map(from, target, &map)))
                }
                _ => Err(no_route()),
            }
        }
        _ => Err(no_route()),
    }
}

pub fn reduce(input: &Path, target: &str, output: Option<&Path>, map: Option<&Path>) -> Outcome {
    let (reduced, sidecar) = reduce_text(input, target)?;
    let map_path = map.map(Path::to_path_buf).or_else(|| output.map(|o| {
        let mut p = o.as_os_str().to_owned();
        p.push(".map");
        PathBuf::from(p)
    }));
    if let Some(m) = &map_path {
        write(m, &sidecar)?;
    }
    match output {
        Some(o) => {
            write(o, &reduced)?;
            let mut msg = format!("wrote {}\n", o.display());
            if let Some(m) = &map_path {
                let _ = writeln!(msg, "wrote {}", m.display());
            }
            Ok(msg)
        }
        None => Ok(reduced),
    }
}

/// Oracle limits from command-line flags.
pub fn oracle_limits(max_nodes: usize, time_budget: Option<f64>) -> Result<OracleLimits, Failure> {
    if max_nodes == 0 {
        return Err(Failure::Usage("--max-nodes must be positive".into()));
    }
    let time_budget = match time_budget {
        Some(s) if s.is_finite() && s > 0.0 => Some(Duration::from_secs_f64(s)),
        Some(_) => return Err(Failure::Usage("--time-budget must be a positive number of seconds".into())),
        None => None,
    };
    Ok(OracleLimits {
        max_nodes,
        time_budget,
        ..OracleLimits::default()
    })
}

#[derive(Debug, Default)]
struct AuditRow {
    runs: usize,
    worst: f64,
    over_bound: usize,
    refused: usize,
    invalid: usize,
}

/// Runs every applicable algorithm on every instance file in `dir` and
/// tabulates the worst ratio to the oracle optimum.
pub fn audit(dir: &Path, cfg: &SolveConfig) -> Outcome {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    let mut rows: BTreeMap<(usize, Algorithm), AuditRow> = BTreeMap::new();
    let (mut infeasible, mut skipped) = (Vec::new(), Vec::new());
    let mut audited = 0;
    for path in &files {
        let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let text = read(path)?;
        if format::detect_kind(&text) != Some(format::INSTANCE) {
            skipped.push(format!("{name}: not an instance file"));
            continue;
        }
        let inst = parsed(path, format::parse_instance(&text))?.instance;
        let opt = match algorithms::run(Algorithm::Oracle, &inst, cfg) {
            Ok(sol) => sol.weight,
            Err(Error::Infeasible(v)) => {
                infeasible.push(format!("{name}: {v}"));
                continue;
            }
            Err(e) => {
                skipped.push(format!("{name}: {e}"));
                continue;
            }
        };
        audited += 1;
        let vix = Variant::ALL.iter().position(|&v| v == inst.variant).expect("known variant");
        for alg in algorithms::applicable(&inst) {
            if alg == Algorithm::Oracle {
                continue;
            }
            let row = rows.entry((vix, alg)).or_default();
            match algorithms::run(alg, &inst, cfg) {
                Ok(sol) => {
                    row.runs += 1;
                    if !validate_solution(&inst, &sol)?.is_accept() {
                        row.invalid += 1;
                        continue;
                    }
                    let ratio = if opt > 0.0 {
                        sol.weight / opt
                    } else if sol.weight > 0.0 {
                        f64::INFINITY
                    } else {
                        1.0
                    };
                    row.worst = row.worst.max(ratio);
                    if alg.bound(inst.variant, inst.q()).is_some_and(|b| ratio > b + 1e-9) {
                        row.over_bound += 1;
                    }
                }
                Err(Error::CapExceeded { .. }) => row.refused += 1,
                Err(e) => return Err(Failure::Rejected(format!("{name}: {alg} failed: {e}"))),
            }
        }
    }
    let mut out = format!("audited {audited} instances from {}\n\n", dir.display());
    let _ = writeln!(out, "{:<17} {:<15} {:>5} {:>12} {:>6} {:>11} {:>8} {:>8}", "variant", "algorithm", "runs", "worst-ratio", "bound", "over-bound", "refused", "invalid");
    let mut bad = false;
    for (&(vix, alg), row) in &rows {
        let v = Variant::ALL[vix];
        let worst = if row.runs > row.invalid { format!("{:.4}", row.worst) } else { "-".into() };
        let _ = writeln!(
            out,
            "{:<17} {:<15} {:>5} {:>12} {:>6} {:>11} {:>8} {:>8}",
            v.name(),
            alg.name(),
            row.runs,
            worst,
            alg.bound_label(v),
            row.over_bound,
            row.refused,
            row.invalid
        );
        bad |= row.over_bound > 0 || row.invalid > 0;
    }
    if !infeasible.is_empty() {
        let _ = writeln!(out, "\ninfeasible instances:");
        for line in &infeasible {
            let _ = writeln!(out, "  {line}");
        }
    }
    if !skipped.is_empty() {
        let _ = writeln!(out, "\nskipped:");
        for line in &skipped {
            let _ = writeln!(out, "  {line}");
        }
    }
    if bad {
        Err(Failure::Rejected(format!("{out}\nsome solutions were invalid or exceeded their proven bound")))
    } else {
        Ok(out)
    }
}

/// The relaxation LP behind the LP-based solvers, in LP file format.
/// All-to-all needs no representatives; single-to-all and single-to-single
/// take one representative per set.
pub fn lp_dump(instance: &Path, reps: &[String]) -> Outcome {
    let inst = load_instance(instance)?.instance;
    let g = &inst.graph;
    let reps: Vec<usize> = reps.iter().map(|r| g.node(r)).collect::<Result<_, _>>()?;
    let need_reps = || {
        if reps.len() == inst.q() {
            Ok(())
        } else {
            Err(Failure::Usage(format!("{} needs --reps with one node per candidate set ({} sets)", inst.variant, inst.q())))
        }
    };
    let li = match inst.variant {
        Variant::AllToAll => {
            let c = contract(g, inst.family.sets())?;
            let terminals = (0..inst.q()).map(|i| c.image(inst.family.set(i)[0])).collect();
            LabelingInstance::multiway(c.graph, terminals)?
        }
        Variant::SingleToAll => {
            need_reps()?;
            LabelingInstance::lifted(g.clone(), reps.clone(), single_to_all_labels(&inst, &reps))?
        }
        Variant::SingleToSingle => {
            need_reps()?;
            LabelingInstance::multiway(g.clone(), reps)?
        }
        v => return Err(Failure::Usage(format!("lp-dump supports all-to-all, single-to-all and single-to-single, not {v}"))),
    };
    Ok(build_lift_lp(&li)?.program.to_lp_format())
}
