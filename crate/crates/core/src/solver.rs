//! Finite-domain constraint solver over bounded integer variables.
//!
//! Atoms are normalised to `p = 0`, `p != 0` or `p <= 0` for a polynomial
//! `p` and propagated with bounds reasoning; a monomial takes part in
//! pruning once all but one of its variable occurrences are fixed.
//! Disjunctions are checked for entailment and committed when a single
//! disjunct remains. Search is depth-first over variables in registration
//! order with ascending values, bisecting wide domains lower half first,
//! so the first solution found is the lexicographically smallest one.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Term, VarId};
use crate::model::CmpOp;

/// Domains at most this wide are enumerated value by value.
const SPLIT_WIDTH: i128 = 16;

/// Bound magnitudes beyond this are treated as unbounded.
const HUGE: i128 = 1 << 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub domains: Vec<(i64, i64)>,
    pub formula: Formula,
    /// Forbidden partial assignments; each one is the clause
    /// `v1 != a1 \/ ... \/ vk != ak`.
    pub blocked: Vec<Vec<(VarId, i64)>>,
}

impl Problem {
    pub fn new(domains: Vec<(i64, i64)>, formula: Formula) -> Problem {
        Problem { domains, formula, blocked: Vec::new() }
    }

    pub fn restrict(&mut self, var: VarId, lo: i64, hi: i64) {
        let d = &mut self.domains[var];
        *d = (d.0.max(lo), d.1.min(hi));
    }

    pub fn pin(&mut self, var: VarId, value: i64) {
        self.restrict(var, value, value);
    }

    pub fn block(&mut self, clause: Vec<(VarId, i64)>) {
        self.blocked.push(clause);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    NodeBudget,
    Timeout,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitKind::NodeBudget => "node budget exhausted",
            LimitKind::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("solver resource limit: {0}")]
    ResourceLimit(LimitKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Search nodes allowed per solve call.
    pub node_budget: u64,
    /// Wall-clock limit per solve call.
    pub timeout: Option<Duration>,
    /// Absolute deadline shared by all calls.
    pub deadline: Option<Instant>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { node_budget: 1_000_000, timeout: Some(Duration::from_secs(10)), deadline: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub solve_calls: u64,
    pub nodes: u64,
    pub backtracks: u64,
    pub time_secs: f64,
}

impl SolverStats {
    pub fn add(&mut self, other: &SolverStats) {
        self.solve_calls += other.solve_calls;
        self.nodes += other.nodes;
        self.backtracks += other.backtracks;
        self.time_secs += other.time_secs;
    }
}

#[derive(Debug, Default)]
pub struct Solver {
    pub config: SolverConfig,
    pub stats: SolverStats,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Solver {
        Solver { config, stats: SolverStats::default() }
    }

    /// Lexicographically smallest solution, or `None` if unsatisfiable.
    pub fn solve(&mut self, p: &Problem) -> Result<Option<Vec<i64>>, SolverError> {
        let compiled = Compiled::new(&p.formula);
        self.solve_compiled(&compiled, p, &p.blocked)
    }

    /// All distinct solutions projected on `projection`, in ascending
    /// lexicographic order. Stops after `limit` solutions if given.
    pub fn enumerate(
        &mut self,
        p: &Problem,
        projection: &[VarId],
        limit: Option<usize>,
    ) -> Result<Vec<Vec<i64>>, SolverError> {
        let compiled = Compiled::new(&p.formula);
        let mut blocked = p.blocked.clone();
        let mut out = Vec::new();
        while limit.is_none_or(|l| out.len() < l) {
            let Some(sol) = self.solve_compiled(&compiled, p, &blocked)? else { break };
            let proj: Vec<i64> = projection.iter().map(|&v| sol[v]).collect();
            blocked.push(projection.iter().copied().zip(proj.iter().copied()).collect());
            out.push(proj);
        }
        out.sort();
        Ok(out)
    }

    fn solve_compiled(
        &mut self,
        compiled: &Compiled,
        p: &Problem,
        blocked: &[Vec<(VarId, i64)>],
    ) -> Result<Option<Vec<i64>>, SolverError> {
        let start = Instant::now();
        let deadline = match (self.config.timeout.map(|t| start + t), self.config.deadline) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let mut search = Search {
            c: compiled,
            formula: &p.formula,
            blocked,
            nodes: 0,
            backtracks: 0,
            budget: self.config.node_budget,
            deadline,
        };
        let result = if p.domains.iter().any(|d| d.0 > d.1) { Ok(None) } else { search.dfs(p.domains.clone()) };
        self.stats.solve_calls += 1;
        self.stats.nodes += search.nodes;
        self.stats.backtracks += search.backtracks;
        self.stats.time_secs += start.elapsed().as_secs_f64();
        result
    }
}

/// Domains after root propagation, or `None` if propagation fails.
pub fn propagate_domains(p: &Problem) -> Option<Vec<(i64, i64)>> {
    let compiled = Compiled::new(&p.formula);
    let search = Search {
        c: &compiled,
        formula: &p.formula,
        blocked: &p.blocked,
        nodes: 0,
        backtracks: 0,
        budget: 0,
        deadline: None,
    };
    let mut dom = p.domains.clone();
    if dom.iter().any(|d| d.0 > d.1) {
        return None;
    }
    search.propagate(&mut dom).then_some(dom)
}

// ----- compiled representation ------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rel {
    Eq,
    Ne,
    Le,
}

/// `coef * vars[0] * vars[1] * ...` with sorted variables.
#[derive(Debug, Clone)]
struct Monomial {
    coef: i128,
    vars: Vec<VarId>,
}

#[derive(Debug, Clone, Default)]
struct Poly {
    terms: BTreeMap<Vec<VarId>, i128>,
}

impl Poly {
    fn constant(c: i128) -> Poly {
        let mut p = Poly::default();
        p.add_term(Vec::new(), c);
        p
    }

    fn add_term(&mut self, vars: Vec<VarId>, coef: i128) {
        let e = self.terms.entry(vars).or_insert(0);
        *e = e.saturating_add(coef);
    }

    fn from_term(t: &Term) -> Poly {
        match t {
            Term::Var(v) => {
                let mut p = Poly::default();
                p.add_term(vec![*v], 1);
                p
            }
            Term::Const(c) => Poly::constant(*c as i128),
            Term::Add(l, r) => Poly::from_term(l).plus(&Poly::from_term(r), 1),
            Term::Sub(l, r) => Poly::from_term(l).plus(&Poly::from_term(r), -1),
            Term::Mul(l, r) => Poly::from_term(l).times(&Poly::from_term(r)),
        }
    }

    fn plus(mut self, other: &Poly, sign: i128) -> Poly {
        for (vars, c) in &other.terms {
            self.add_term(vars.clone(), c.saturating_mul(sign));
        }
        self
    }

    fn times(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (va, ca) in &self.terms {
            for (vb, cb) in &other.terms {
                let mut vars = va.clone();
                vars.extend(vb);
                vars.sort_unstable();
                out.add_term(vars, ca.saturating_mul(*cb));
            }
        }
        out
    }

    fn split(self) -> (Vec<Monomial>, i128) {
        let mut constant = 0;
        let mut monos = Vec::new();
        for (vars, coef) in self.terms {
            if coef == 0 {
                continue;
            }
            if vars.is_empty() {
                constant = coef;
            } else {
                monos.push(Monomial { coef, vars });
            }
        }
        (monos, constant)
    }
}

/// `sum(monos) + constant rel 0`.
#[derive(Debug, Clone)]
struct CAtom {
    rel: Rel,
    monos: Vec<Monomial>,
    constant: i128,
}

impl CAtom {
    fn new(op: CmpOp, lhs: &Term, rhs: &Term) -> CAtom {
        let diff = Poly::from_term(lhs).plus(&Poly::from_term(rhs), -1);
        let (rel, poly) = match op {
            CmpOp::Eq => (Rel::Eq, diff),
            CmpOp::Ne => (Rel::Ne, diff),
            CmpOp::Le => (Rel::Le, diff),
            // l < r  <=>  l - r + 1 <= 0
            CmpOp::Lt => (Rel::Le, diff.plus(&Poly::constant(1), 1)),
            CmpOp::Ge => (Rel::Le, Poly::default().plus(&diff, -1)),
            // l > r  <=>  r - l + 1 <= 0
            CmpOp::Gt => (Rel::Le, Poly::default().plus(&diff, -1).plus(&Poly::constant(1), 1)),
        };
        let (monos, constant) = poly.split();
        CAtom { rel, monos, constant }
    }
}

#[derive(Debug, Clone)]
enum Node {
    True,
    False,
    Atom(usize),
    And(Vec<Node>),
    Or(Vec<Node>),
}

struct Compiled {
    atoms: Vec<CAtom>,
    root: Node,
}

impl Compiled {
    fn new(f: &Formula) -> Compiled {
        let mut atoms = Vec::new();
        let root = Compiled::node(f, &mut atoms);
        Compiled { atoms, root }
    }

    fn node(f: &Formula, atoms: &mut Vec<CAtom>) -> Node {
        match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Atom(a) => {
                atoms.push(CAtom::new(a.op, &a.lhs, &a.rhs));
                Node::Atom(atoms.len() - 1)
            }
            Formula::And(ps) => Node::And(ps.iter().map(|p| Compiled::node(p, atoms)).collect()),
            Formula::Or(ps) => Node::Or(ps.iter().map(|p| Compiled::node(p, atoms)).collect()),
        }
    }
}

// ----- propagation and search -------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    True,
    False,
    Unknown,
}

/// Interval of a monomial and, when exactly one variable occurrence is
/// unfixed, that variable with its effective coefficient.
struct MonoInfo {
    min: i128,
    max: i128,
    linear: Option<(VarId, i128)>,
}

fn mono_info(m: &Monomial, dom: &[(i64, i64)]) -> MonoInfo {
    let (mut lo, mut hi) = (1i128, 1i128);
    let mut fixed_product = m.coef;
    let mut unfixed = None;
    let mut n_unfixed = 0;
    for &v in &m.vars {
        let (a, b) = (dom[v].0 as i128, dom[v].1 as i128);
        let c = [lo.saturating_mul(a), lo.saturating_mul(b), hi.saturating_mul(a), hi.saturating_mul(b)];
        lo = *c.iter().min().unwrap();
        hi = *c.iter().max().unwrap();
        if a == b {
            fixed_product = fixed_product.saturating_mul(a);
        } else {
            n_unfixed += 1;
            unfixed = Some(v);
        }
    }
    let (min, max) = if m.coef >= 0 {
        (lo.saturating_mul(m.coef), hi.saturating_mul(m.coef))
    } else {
        (hi.saturating_mul(m.coef), lo.saturating_mul(m.coef))
    };
    let linear = match (n_unfixed, unfixed) {
        (1, Some(v)) if fixed_product.abs() < HUGE => Some((v, fixed_product)),
        _ => None,
    };
    MonoInfo { min, max, linear }
}

fn floor_div(n: i128, d: i128) -> i128 {
    let q = n / d;
    if n % d != 0 && ((n < 0) != (d < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(n: i128, d: i128) -> i128 {
    -floor_div(-n, d)
}

struct Search<'a> {
    c: &'a Compiled,
    formula: &'a Formula,
    blocked: &'a [Vec<(VarId, i64)>],
    nodes: u64,
    backtracks: u64,
    budget: u64,
    deadline: Option<Instant>,
}

impl Search<'_> {
    fn dfs(&mut self, mut dom: Vec<(i64, i64)>) -> Result<Option<Vec<i64>>, SolverError> {
        if !self.propagate(&mut dom) {
            self.backtracks += 1;
            return Ok(None);
        }
        let Some(v) = dom.iter().position(|d| d.0 < d.1) else {
            let values: Vec<i64> = dom.iter().map(|d| d.0).collect();
            if self.formula.eval(&values) && self.blocked_ok(&values) {
                return Ok(Some(values));
            }
            self.backtracks += 1;
            return Ok(None);
        };
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(SolverError::ResourceLimit(LimitKind::NodeBudget));
        }
        if self.nodes.is_multiple_of(256) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(SolverError::ResourceLimit(LimitKind::Timeout));
        }
        let (lo, hi) = dom[v];
        if (hi as i128 - lo as i128) < SPLIT_WIDTH {
            for x in lo..=hi {
                let mut d = dom.clone();
                d[v] = (x, x);
                if let Some(s) = self.dfs(d)? {
                    return Ok(Some(s));
                }
            }
        } else {
            let mid = (lo as i128 + hi as i128).div_euclid(2) as i64;
            for half in [(lo, mid), (mid + 1, hi)] {
                let mut d = dom.clone();
                d[v] = half;
                if let Some(s) = self.dfs(d)? {
                    return Ok(Some(s));
                }
            }
        }
        Ok(None)
    }

    fn blocked_ok(&self, values: &[i64]) -> bool {
        self.blocked.iter().all(|clause| clause.iter().any(|&(v, x)| values[v] != x))
    }

    /// Runs propagation to a fixpoint; `false` means the domains admit no
    /// solution.
    fn propagate(&self, dom: &mut [(i64, i64)]) -> bool {
        loop {
            let mut changed = false;
            if !self.prop_node(&self.c.root, dom, &mut changed) || !self.prop_blocked(dom, &mut changed) {
                return false;
            }
            if !changed {
                return true;
            }
        }
    }

    fn prop_blocked(&self, dom: &mut [(i64, i64)], changed: &mut bool) -> bool {
        'clauses: for clause in self.blocked {
            let mut open = None;
            let mut n_open = 0;
            for &(v, x) in clause {
                let (lo, hi) = dom[v];
                if x < lo || x > hi {
                    continue 'clauses;
                }
                if lo < hi {
                    n_open += 1;
                    open = Some((v, x));
                }
            }
            match (n_open, open) {
                (0, _) => return false,
                (1, Some((v, x))) if !exclude_value(dom, v, x, changed) => return false,
                _ => {}
            }
        }
        true
    }

    fn status(&self, n: &Node, dom: &[(i64, i64)]) -> Status {
        match n {
            Node::True => Status::True,
            Node::False => Status::False,
            Node::Atom(i) => atom_status(&self.c.atoms[*i], dom),
            Node::And(cs) => {
                let mut all = true;
                for c in cs {
                    match self.status(c, dom) {
                        Status::False => return Status::False,
                        Status::Unknown => all = false,
                        Status::True => {}
                    }
                }
                if all {
                    Status::True
                } else {
                    Status::Unknown
                }
            }
            Node::Or(cs) => {
                let mut none = true;
                for c in cs {
                    match self.status(c, dom) {
                        Status::True => return Status::True,
                        Status::Unknown => none = false,
                        Status::False => {}
                    }
                }
                if none {
                    Status::False
                } else {
                    Status::Unknown
                }
            }
        }
    }

    fn prop_node(&self, n: &Node, dom: &mut [(i64, i64)], changed: &mut bool) -> bool {
        match n {
            Node::True => true,
            Node::False => false,
            Node::Atom(i) => prop_atom(&self.c.atoms[*i], dom, changed),
            Node::And(cs) => cs.iter().all(|c| self.prop_node(c, dom, changed)),
            Node::Or(cs) => {
                let mut alive = None;
                let mut n_alive = 0;
                for c in cs {
                    match self.status(c, dom) {
                        Status::True => return true,
                        Status::False => {}
                        Status::Unknown => {
                            n_alive += 1;
                            alive = Some(c);
                        }
                    }
                }
                match (n_alive, alive) {
                    (0, _) => false,
                    (1, Some(c)) => self.prop_node(c, dom, changed),
                    _ => true,
                }
            }
        }
    }
}

fn exclude_value(dom: &mut [(i64, i64)], v: VarId, x: i64, changed: &mut bool) -> bool {
    let d = &mut dom[v];
    if d.0 == x {
        d.0 += 1;
        *changed = true;
    } else if d.1 == x {
        d.1 -= 1;
        *changed = true;
    }
    d.0 <= d.1
}

/// Bounds of the atom's polynomial, `None` when they overflow.
fn poly_bounds(a: &CAtom, dom: &[(i64, i64)]) -> Option<(i128, i128)> {
    let (mut lo, mut hi) = (a.constant, a.constant);
    for m in &a.monos {
        let info = mono_info(m, dom);
        lo = lo.saturating_add(info.min);
        hi = hi.saturating_add(info.max);
    }
    (lo.abs() < HUGE && hi.abs() < HUGE).then_some((lo, hi))
}

fn atom_status(a: &CAtom, dom: &[(i64, i64)]) -> Status {
    let Some((lo, hi)) = poly_bounds(a, dom) else { return Status::Unknown };
    let eq = if lo == 0 && hi == 0 {
        Status::True
    } else if lo > 0 || hi < 0 {
        Status::False
    } else {
        Status::Unknown
    };
    match a.rel {
        Rel::Eq => eq,
        Rel::Ne => match eq {
            Status::True => Status::False,
            Status::False => Status::True,
            Status::Unknown => Status::Unknown,
        },
        Rel::Le if hi <= 0 => Status::True,
        Rel::Le if lo > 0 => Status::False,
        Rel::Le => Status::Unknown,
    }
}

fn prop_atom(a: &CAtom, dom: &mut [(i64, i64)], changed: &mut bool) -> bool {
    match a.rel {
        Rel::Le => prop_le(a, 1, dom, changed),
        Rel::Eq => prop_le(a, 1, dom, changed) && prop_le(a, -1, dom, changed),
        Rel::Ne => prop_ne(a, dom, changed),
    }
}

/// Prunes for `sign * (sum + constant) <= 0`.
fn prop_le(a: &CAtom, sign: i128, dom: &mut [(i64, i64)], changed: &mut bool) -> bool {
    let infos: Vec<MonoInfo> = a
        .monos
        .iter()
        .map(|m| {
            let i = mono_info(m, dom);
            if sign > 0 {
                i
            } else {
                MonoInfo { min: -i.max, max: -i.min, linear: i.linear.map(|(v, c)| (v, -c)) }
            }
        })
        .collect();
    let mut min_sum = sign * a.constant;
    for i in &infos {
        min_sum = min_sum.saturating_add(i.min);
    }
    if min_sum.abs() >= HUGE || infos.iter().any(|i| i.min.abs() >= HUGE) {
        return true;
    }
    if min_sum > 0 {
        return false;
    }
    for info in &infos {
        let Some((v, coef)) = info.linear else { continue };
        if coef == 0 {
            continue;
        }
        // coef * x <= bound
        let bound = -(min_sum - info.min);
        let (lo, hi) = (dom[v].0 as i128, dom[v].1 as i128);
        if coef > 0 {
            let ub = floor_div(bound, coef);
            if ub < hi {
                if ub < lo {
                    return false;
                }
                dom[v].1 = ub as i64;
                *changed = true;
            }
        } else {
            let lb = ceil_div(bound, coef);
            if lb > lo {
                if lb > hi {
                    return false;
                }
                dom[v].0 = lb as i64;
                *changed = true;
            }
        }
    }
    true
}

fn prop_ne(a: &CAtom, dom: &mut [(i64, i64)], changed: &mut bool) -> bool {
    let mut rest = a.constant;
    let mut open = None;
    for m in &a.monos {
        let info = mono_info(m, dom);
        if info.min == info.max {
            rest = rest.saturating_add(info.min);
        } else if open.is_some() || info.linear.is_none() {
            return true;
        } else {
            open = info.linear;
        }
    }
    match open {
        None => rest != 0,
        Some((v, coef)) => {
            if coef == 0 || rest % coef != 0 {
                return true;
            }
            let x = -rest / coef;
            match i64::try_from(x) {
                Ok(x) => exclude_value(dom, v, x, changed),
                Err(_) => true,
            }
        }
    }
}
