//! Quantifier-free constraint formulas over integer variables in negation
//! normal form.

use std::fmt;

use crate::model::{BinOp, CmpOp};

pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(VarId),
    Const(i64),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

impl Term {
    pub fn bin(op: BinOp, lhs: Term, rhs: Term) -> Term {
        match (op, &lhs, &rhs) {
            (BinOp::Add, Term::Const(a), Term::Const(b)) => Term::Const(a.saturating_add(*b)),
            (BinOp::Sub, Term::Const(a), Term::Const(b)) => Term::Const(a.saturating_sub(*b)),
            (BinOp::Mul, Term::Const(a), Term::Const(b)) => Term::Const(a.saturating_mul(*b)),
            (BinOp::Add, _, _) => Term::Add(Box::new(lhs), Box::new(rhs)),
            (BinOp::Sub, _, _) => Term::Sub(Box::new(lhs), Box::new(rhs)),
            (BinOp::Mul, _, _) => Term::Mul(Box::new(lhs), Box::new(rhs)),
        }
    }

    pub fn eval(&self, env: &[i64]) -> i128 {
        match self {
            Term::Var(v) => env[*v] as i128,
            Term::Const(c) => *c as i128,
            Term::Add(l, r) => l.eval(env).saturating_add(r.eval(env)),
            Term::Sub(l, r) => l.eval(env).saturating_sub(r.eval(env)),
            Term::Mul(l, r) => l.eval(env).saturating_mul(r.eval(env)),
        }
    }

    pub fn vars(&self, out: &mut Vec<VarId>) {
        match self {
            Term::Var(v) => out.push(*v),
            Term::Const(_) => {}
            Term::Add(l, r) | Term::Sub(l, r) | Term::Mul(l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }

    fn sexpr(&self, name: &dyn Fn(VarId) -> String) -> String {
        match self {
            Term::Var(v) => name(*v),
            Term::Const(c) => c.to_string(),
            Term::Add(l, r) => format!("(+ {} {})", l.sexpr(name), r.sexpr(name)),
            Term::Sub(l, r) => format!("(- {} {})", l.sexpr(name), r.sexpr(name)),
            Term::Mul(l, r) => format!("(* {} {})", l.sexpr(name), r.sexpr(name)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub op: CmpOp,
    pub lhs: Term,
    pub rhs: Term,
}

impl Atom {
    pub fn holds(&self, env: &[i64]) -> bool {
        self.op.holds(self.lhs.eval(env), self.rhs.eval(env))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    /// Atom with constant folding.
    pub fn cmp(op: CmpOp, lhs: Term, rhs: Term) -> Formula {
        if let (Term::Const(a), Term::Const(b)) = (&lhs, &rhs) {
            return Formula::from(op.holds(*a as i128, *b as i128));
        }
        if lhs == rhs {
            return Formula::from(matches!(op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge));
        }
        Formula::Atom(Atom { op, lhs, rhs })
    }

    pub fn eq_const(var: VarId, value: i64) -> Formula {
        Formula::Atom(Atom { op: CmpOp::Eq, lhs: Term::Var(var), rhs: Term::Const(value) })
    }

    /// `lo <= t <= hi`.
    pub fn within(t: Term, lo: i64, hi: i64) -> Formula {
        Formula::and(vec![
            Formula::cmp(CmpOp::Ge, t.clone(), Term::Const(lo)),
            Formula::cmp(CmpOp::Le, t, Term::Const(hi)),
        ])
    }

    /// Conjunction with flattening; `True` parts vanish and any `False`
    /// part makes the whole conjunction `False`. So does a disjunction
    /// each of whose disjuncts is the negation of another conjunct, which
    /// catches `p ∧ ¬p`.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        let contradicted = |f: &Formula| match f {
            Formula::Or(ds) => ds.iter().all(|d| out.contains(&d.negate())),
            Formula::Atom(_) => out.contains(&f.negate()),
            _ => false,
        };
        if out.iter().any(contradicted) {
            return Formula::False;
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    /// Negation pushed to the atoms by De Morgan and operator flipping.
    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(a) => Formula::Atom(Atom { op: a.op.negated(), lhs: a.lhs.clone(), rhs: a.rhs.clone() }),
            Formula::And(ps) => Formula::or(ps.iter().map(Formula::negate)),
            Formula::Or(ps) => Formula::and(ps.iter().map(Formula::negate)),
        }
    }

    pub fn eval(&self, env: &[i64]) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => a.holds(env),
            Formula::And(ps) => ps.iter().all(|p| p.eval(env)),
            Formula::Or(ps) => ps.iter().any(|p| p.eval(env)),
        }
    }

    /// Every variable mentioned, sorted and deduplicated.
    pub fn vars(&self) -> Vec<VarId> {
        fn go(f: &Formula, out: &mut Vec<VarId>) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Atom(a) => {
                    a.lhs.vars(out);
                    a.rhs.vars(out);
                }
                Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| go(p, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Number of atoms.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False => 0,
            Formula::Atom(_) => 1,
            Formula::And(ps) | Formula::Or(ps) => ps.iter().map(Formula::size).sum(),
        }
    }

    pub fn to_sexpr(&self, name: &dyn Fn(VarId) -> String) -> String {
        match self {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::Atom(a) => format!("({} {} {})", a.op.symbol(), a.lhs.sexpr(name), a.rhs.sexpr(name)),
            Formula::And(ps) | Formula::Or(ps) => {
                let head = if matches!(self, Formula::And(_)) { "and" } else { "or" };
                let parts: Vec<String> = ps.iter().map(|p| p.to_sexpr(name)).collect();
                format!("({head} {})", parts.join(" "))
            }
        }
    }
}

impl From<bool> for Formula {
    fn from(b: bool) -> Self {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr(&|v| format!("v{v}")))
    }
}
