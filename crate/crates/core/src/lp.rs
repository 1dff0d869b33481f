//! A small dense linear-program solver (two-phase revised simplex).
//!
//! Programs are stated as `minimize c·x + offset` over sparse linear rows
//! with per-variable bounds. The basis inverse is kept explicitly and
//! updated by elementary row operations; it is refactored from scratch at a
//! fixed cadence. Pricing is Dantzig's rule until a long run of degenerate
//! pivots, after which Bland's rule takes over for the rest of the phase.

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Feasibility and optimality tolerance.
pub const LP_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse `(variable, coefficient)` terms.
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub offset: f64,
    pub constraints: Vec<Constraint>,
    /// Per-variable `[lo, hi]`; `lo` may be `-inf`, `hi` may be `+inf`.
    pub bounds: Vec<(f64, f64)>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    /// The values, or an error if the program was not solved to optimality.
    pub fn optimal_values(&self) -> Result<&[f64]> {
        match self.status {
            LpStatus::Optimal => Ok(&self.values),
            s => Err(Error::LpNotOptimal(s)),
        }
    }
}

impl LinearProgram {
    /// `n` variables with zero cost and bounds `[0, +inf)`.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n],
            offset: 0.0,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
            names: (0..n).map(|i| format!("x{i}")).collect(),
        }
    }

    pub fn variable_count(&self) -> usize {
        self.objective.len()
    }

    /// Appends a variable and returns its index.
    pub fn add_variable(&mut self, name: impl Into<String>, cost: f64, lo: f64, hi: f64) -> usize {
        self.objective.push(cost);
        self.bounds.push((lo, hi));
        self.names.push(name.into());
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { terms, relation, rhs });
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n || self.names.len() != n {
            return Err(Error::Dimension(format!(
                "{n} objective coefficients but {} bounds and {} names",
                self.bounds.len(),
                self.names.len()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) || !self.offset.is_finite() {
            return Err(Error::Dimension("objective must be finite".into()));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::Dimension(format!("variable {i} has bounds [{lo}, {hi}]")));
            }
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(Error::Dimension(format!("row {r} has non-finite rhs")));
            }
            for &(j, a) in &c.terms {
                if j >= n || !a.is_finite() {
                    return Err(Error::Dimension(format!("row {r} references variable {j} with coefficient {a}")));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            worst = worst.max(lo - x[j]).max(x[j] - hi);
        }
        worst
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Renders the program in the CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        fn term(out: &mut String, first: &mut bool, a: f64, name: &str) {
            if a == 0.0 {
                return;
            }
            if *first {
                if a < 0.0 {
                    out.push_str(" -");
                }
            } else {
                out.push_str(if a < 0.0 { " -" } else { " +" });
            }
            let m = a.abs();
            if m == 1.0 {
                let _ = write!(out, " {name}");
            } else {
                let _ = write!(out, " {m} {name}");
            }
            *first = false;
        }
        let mut out = String::from("Minimize\n obj:");
        let mut first = true;
        for (j, &c) in self.objective.iter().enumerate() {
            term(&mut out, &mut first, c, &self.names[j]);
        }
        if first {
            out.push_str(" 0");
        }
        if self.offset != 0.0 {
            let _ = write!(out, " {} {}", if self.offset < 0.0 { "-" } else { "+" }, self.offset.abs());
        }
        out.push_str("\nSubject To\n");
        for (r, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{r}:");
            let mut first = true;
            for &(j, a) in &c.terms {
                term(&mut out, &mut first, a, &self.names[j]);
            }
            if first {
                let _ = write!(out, " 0 {}", self.names.first().map_or("x0", |s| s.as_str()));
            }
            let _ = writeln!(out, " {} {}", c.relation, c.rhs);
        }
        out.push_str("Bounds\n");
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            let name = &self.names[j];
            match (lo == f64::NEG_INFINITY, hi == f64::INFINITY) {
                (true, true) => {
                    let _ = writeln!(out, " {name} free");
                }
                (true, false) => {
                    let _ = writeln!(out, " -inf <= {name} <= {hi}");
                }
                (false, true) if lo == 0.0 => {}
                (false, true) => {
                    let _ = writeln!(out, " {name} >= {lo}");
                }
                (false, false) if lo == hi => {
                    let _ = writeln!(out, " {name} = {lo}");
                }
                (false, false) => {
                    let _ = writeln!(out, " {lo} <= {name} <= {hi}");
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

/// How an original variable is expressed through standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lo + y`
    Shift(usize, f64),
    /// `x = hi - y`
    Flip(usize, f64),
    /// `x = y+ - y-`
    Split(usize, usize),
    /// `x = value`
    Fixed(f64),
}

/// Standard form: minimize `c·y` subject to `A y = b`, `y >= 0`, `b >= 0`.
struct Standard {
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    /// Column index of the initial basic variable of each row, if a slack
    /// fits; otherwise an artificial is created.
    slack_basis: Vec<Option<usize>>,
    maps: Vec<VarMap>,
    offset: f64,
}

fn standardize(p: &LinearProgram) -> Standard {
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut cost = Vec::new();
    let mut offset = p.offset;
    let mut maps = Vec::with_capacity(p.variable_count());
    // Each original variable maps to (column, sign) pieces plus a constant.
    let mut pieces: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let mut extra_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for (j, &(lo, hi)) in p.bounds.iter().enumerate() {
        let c = p.objective[j];
        if lo.is_finite() && hi.is_finite() && lo == hi {
            maps.push(VarMap::Fixed(lo));
            offset += c * lo;
            pieces.push((Vec::new(), lo));
        } else if lo.is_finite() {
            let y = cols.len();
            cols.push(Vec::new());
            cost.push(c);
            offset += c * lo;
            maps.push(VarMap::Shift(y, lo));
            pieces.push((vec![(y, 1.0)], lo));
            if hi.is_finite() {
                extra_rows.push((vec![(y, 1.0)], hi - lo));
            }
        } else if hi.is_finite() {
            let y = cols.len();
            cols.push(Vec::new());
            cost.push(-c);
            offset += c * hi;
            maps.push(VarMap::Flip(y, hi));
            pieces.push((vec![(y, -1.0)], hi));
        } else {
            let (yp, ym) = (cols.len(), cols.len() + 1);
            cols.push(Vec::new());
            cols.push(Vec::new());
            cost.push(c);
            cost.push(-c);
            maps.push(VarMap::Split(yp, ym));
            pieces.push((vec![(yp, 1.0), (ym, -1.0)], 0.0));
        }
    }

    let mut rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = Vec::new();
    for con in &p.constraints {
        let mut terms: Vec<(usize, f64)> = Vec::new();
        let mut rhs = con.rhs;
        for &(j, a) in &con.terms {
            let (ref ps, constant) = pieces[j];
            rhs -= a * constant;
            for &(y, s) in ps {
                terms.push((y, a * s));
            }
        }
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (y, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == y => last.1 += a,
                _ => merged.push((y, a)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        rows.push((merged, con.relation, rhs));
    }
    for (terms, rhs) in extra_rows {
        rows.push((terms, Relation::Le, rhs));
    }

    let mut rhs_out = Vec::with_capacity(rows.len());
    let mut slack_basis = Vec::with_capacity(rows.len());
    for (r, (terms, rel, rhs)) in rows.into_iter().enumerate() {
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        for (y, a) in terms {
            cols[y].push((r, sign * a));
        }
        let slack = match rel {
            Relation::Le => Some(1.0),
            Relation::Ge => Some(-1.0),
            Relation::Eq => None,
        };
        let basic = slack.and_then(|s| {
            let y = cols.len();
            cols.push(vec![(r, sign * s)]);
            cost.push(0.0);
            (sign * s > 0.0).then_some(y)
        });
        slack_basis.push(basic);
        rhs_out.push(sign * rhs);
    }
    Standard {
        cols,
        cost,
        rhs: rhs_out,
        slack_basis,
        maps,
        offset,
    }
}

struct Simplex<'a> {
    m: usize,
    cols: &'a [Vec<(usize, f64)>],
    rhs: &'a [f64],
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl<'a> Simplex<'a> {
    fn binv_row(&self, r: usize) -> &[f64] {
        &self.binv[r * self.m..(r + 1) * self.m]
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination with partial
    /// pivoting, then recomputes the basic solution.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (k, &col) in self.basis.iter().enumerate() {
            for &(r, v) in &self.cols[col] {
                a[r * m + k] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()))
                .unwrap_or(c);
            if a[p * m + c].abs() < 1e-12 {
                return Err(Error::LpNumerical("singular basis".into()));
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r != c {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        // `a` is now I, so `inv` is B^{-1} with rows in basis order
        self.binv = inv;
        for r in 0..m {
            let row = self.binv_row(r);
            self.xb[r] = (0..m).map(|k| row[k] * self.rhs[k]).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(k, v) in &self.cols[j] {
            for (r, a) in alpha.iter_mut().enumerate() {
                *a += self.binv[r * m + k] * v;
            }
        }
        alpha
    }

    fn pivot(&mut self, r: usize, j: usize, alpha: &[f64]) -> Result<()> {
        let m = self.m;
        let p = alpha[r];
        let theta = self.xb[r] / p;
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * alpha[i];
            }
        }
        self.xb[r] = theta;
        for k in 0..m {
            self.binv[r * m + k] /= p;
        }
        for i in 0..m {
            if i != r && alpha[i] != 0.0 {
                let f = alpha[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[r * m + k];
                }
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = j;
        self.is_basic[j] = true;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    /// Runs primal simplex with the given costs; columns with
    /// `allowed[j] == false` never enter.
    fn run(&mut self, cost: &[f64], allowed: &[bool]) -> Result<PhaseEnd> {
        let m = self.m;
        let ncols = self.cols.len();
        let degenerate_limit = 10 * (ncols + m);
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::LpNumerical(format!("no convergence after {} pivots", self.max_iterations)));
            }
            // duals y = c_B B^{-1}
            let mut y = vec![0.0; m];
            for r in 0..m {
                let cb = cost[self.basis[r]];
                if cb != 0.0 {
                    let row = self.binv_row(r);
                    for k in 0..m {
                        y[k] += cb * row[k];
                    }
                }
            }
            let mut entering = None;
            let mut best = -LP_TOL;
            for j in 0..ncols {
                if self.is_basic[j] || !allowed[j] {
                    continue;
                }
                let d = cost[j] - self.cols[j].iter().map(|&(k, v)| y[k] * v).sum::<f64>();
                if bland {
                    if d < -LP_TOL {
                        entering = Some(j);
                        break;
                    }
                } else if d < best {
                    best = d;
                    entering = Some(j);
                }
            }
            let Some(j) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let alpha = self.column(j);
            let mut leave: Option<usize> = None;
            let mut ratio = f64::INFINITY;
            for r in 0..m {
                if alpha[r] > PIVOT_TOL {
                    let t = self.xb[r].max(0.0) / alpha[r];
                    match leave {
                        None => {
                            leave = Some(r);
                            ratio = t;
                        }
                        Some(l) => {
                            if t < ratio - 1e-12 {
                                leave = Some(r);
                                ratio = t;
                            } else if t <= ratio + 1e-12 && self.basis[r] < self.basis[l] {
                                leave = Some(r);
                                ratio = ratio.min(t);
                            }
                        }
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(PhaseEnd::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, j, &alpha)?;
        }
    }
}

/// Solves `p`. Infeasible and unbounded programs are reported through the
/// status; errors are reserved for malformed input and numerical failure.
pub fn solve_lp(p: &LinearProgram) -> Result<LpSolution> {
    p.validate()?;
    let st = standardize(p);
    let m = st.rhs.len();
    let structural = st.cols.len();
    let mut cols = st.cols.clone();
    let mut basis = Vec::with_capacity(m);
    for r in 0..m {
        match st.slack_basis[r] {
            Some(y) => basis.push(y),
            None => {
                basis.push(cols.len());
                cols.push(vec![(r, 1.0)]);
            }
        }
    }
    let total = cols.len();
    let mut is_basic = vec![false; total];
    for &b in &basis {
        is_basic[b] = true;
    }
    let mut sx = Simplex {
        m,
        cols: &cols,
        rhs: &st.rhs,
        basis,
        is_basic,
        binv: Vec::new(),
        xb: vec![0.0; m],
        since_refactor: 0,
        iterations: 0,
        max_iterations: 50_000 + 200 * (total + m),
    };
    sx.refactor()?;

    let scale = 1.0 + st.rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if total > structural {
        let cost1: Vec<f64> = (0..total).map(|j| if j >= structural { 1.0 } else { 0.0 }).collect();
        let allowed = vec![true; total];
        sx.run(&cost1, &allowed)?;
        let infeas: f64 = (0..m).filter(|&r| sx.basis[r] >= structural).map(|r| sx.xb[r]).sum();
        if infeas > LP_TOL * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: Vec::new(),
                objective: f64::NAN,
            });
        }
        // drive zero-valued artificials out of the basis where possible
        for r in 0..m {
            if sx.basis[r] < structural {
                continue;
            }
            let row: Vec<f64> = sx.binv_row(r).to_vec();
            let candidate = (0..structural).find(|&j| {
                !sx.is_basic[j] && cols[j].iter().map(|&(k, v)| row[k] * v).sum::<f64>().abs() > 1e-7
            });
            if let Some(j) = candidate {
                let alpha = sx.column(j);
                sx.pivot(r, j, &alpha)?;
            }
        }
    }
    let mut cost2 = st.cost.clone();
    cost2.resize(total, 0.0);
    let allowed: Vec<bool> = (0..total).map(|j| j < structural).collect();
    sx.iterations = 0;
    if let PhaseEnd::Unbounded = sx.run(&cost2, &allowed)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective: f64::NEG_INFINITY,
        });
    }
    sx.refactor()?;

    let mut y = vec![0.0; total];
    for r in 0..m {
        y[sx.basis[r]] = sx.xb[r].max(0.0);
    }
    let values: Vec<f64> = st
        .maps
        .iter()
        .map(|&map| match map {
            VarMap::Shift(c, lo) => lo + y[c],
            VarMap::Flip(c, hi) => hi - y[c],
            VarMap::Split(a, b) => y[a] - y[b],
            VarMap::Fixed(v) => v,
        })
        .collect();
    let viol = p.max_violation(&values);
    if viol > 1e-7 * scale {
        return Err(Error::LpNumerical(format!("solution violates constraints by {viol}")));
    }
    let objective = p.evaluate(&values);
    debug_assert!((objective - (st.offset + cost2.iter().zip(&y).map(|(c, v)| c * v).sum::<f64>())).abs() < 1e-6 * scale);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
    })
}
