//! First-order mutation operators: guard to true, `=`/`!=` inversion and
//! integer constant increment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BodyKind, CmpOp, ExprKind, Guard, GuardKind, Model, NodeMut, NodePath, NodeRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operator {
    #[serde(rename = "guard_true")]
    GuardTrue,
    #[serde(rename = "comp_invert")]
    CompOpInvert,
    #[serde(rename = "int_inc")]
    IntConstIncrement,
}

impl Operator {
    pub const ALL: [Operator; 3] = [Operator::GuardTrue, Operator::CompOpInvert, Operator::IntConstIncrement];

    pub fn name(self) -> &'static str {
        match self {
            Operator::GuardTrue => "guard_true",
            Operator::CompOpInvert => "comp_invert",
            Operator::IntConstIncrement => "int_inc",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Operator::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown mutation operator `{s}` (expected guard_true, comp_invert or int_inc)"))
    }
}

/// One syntactic change: operator, node location and the token text
/// before and after.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MutantSpec {
    pub operator: Operator,
    pub location: NodePath,
    pub original: String,
    pub replacement: String,
}

impl fmt::Display for MutantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: `{}` -> `{}`", self.operator, self.location, self.original, self.replacement)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    pub spec: MutantSpec,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("invalid mutation location {path}: {reason}")]
    InvalidLocation { path: NodePath, reason: String },
}

/// Every first-order mutant of `m` for the given operators, grouped by
/// operator in [`Operator::ALL`] order and in document order within each.
pub fn enumerate_mutants(m: &Model, ops: &[Operator]) -> Vec<Mutant> {
    let mut out = Vec::new();
    for op in Operator::ALL.into_iter().filter(|o| ops.contains(o)) {
        for spec in sites(m, op) {
            let model = apply(m, &spec).expect("generated spec applies");
            out.push(Mutant { spec, model });
        }
    }
    out
}

fn sites(m: &Model, op: Operator) -> Vec<MutantSpec> {
    let mut out = Vec::new();
    m.walk(|path, node| {
        let spec = |original: String, replacement: String| MutantSpec {
            operator: op,
            location: path.clone(),
            original,
            replacement,
        };
        match (op, node) {
            (Operator::GuardTrue, NodeRef::Guard(g)) if is_guard_site(m, path) && !g.is_true_literal() => {
                out.push(spec(g.to_string(), "true".into()));
            }
            (Operator::CompOpInvert, NodeRef::Guard(Guard { kind: GuardKind::Cmp(cmp, ..), .. })) => {
                if let Some(inv) = invert(*cmp) {
                    out.push(spec(cmp.token().into(), inv.token().into()));
                }
            }
            (Operator::IntConstIncrement, NodeRef::Expr(e)) => {
                if let ExprKind::Const(c) = e.kind {
                    let (lo, hi) = const_domain(m, path);
                    let next = if c >= hi { lo } else { c + 1 };
                    out.push(spec(c.to_string(), next.to_string()));
                }
            }
            _ => {}
        }
    });
    out
}

fn invert(op: CmpOp) -> Option<CmpOp> {
    match op {
        CmpOp::Eq => Some(CmpOp::Ne),
        CmpOp::Ne => Some(CmpOp::Eq),
        _ => None,
    }
}

/// Action guards and the guards of guarded commands.
fn is_guard_site(m: &Model, path: &NodePath) -> bool {
    if path.0.len() == 2 {
        return path.0[1] == 0;
    }
    let (&last, parent) = path.0.split_last().expect("non-empty path");
    last == 0 && matches!(m.node(&NodePath(parent.to_vec())), Some(NodeRef::Body(b)) if matches!(b.kind, BodyKind::Guarded(..)))
}

/// Domain that bounds the wrap-around of a constant at `path`: the
/// assignment target's type, else the type of the variable on the other
/// side of a comparison or of a binary operation, else the widest type.
fn const_domain(m: &Model, path: &NodePath) -> (i64, i64) {
    let action = &m.actions[path.0[0]];
    let var_domain = |name: &str| -> Option<(i64, i64)> {
        if let Some(p) = action.param(name) {
            return Some((p.lo, p.hi));
        }
        m.var_type(name).map(|t| (t.lo, t.hi))
    };
    let ancestors: Vec<(NodeRef<'_>, usize)> = (2..path.0.len())
        .rev()
        .map(|k| (m.node(&NodePath(path.0[..k].to_vec())).expect("valid prefix"), path.0[k]))
        .collect();

    for (node, _) in &ancestors {
        if let NodeRef::Body(b) = node {
            if let BodyKind::Assign { target, .. } = &b.kind {
                return var_domain(target).expect("validated target");
            }
        }
    }
    if let Some((NodeRef::Guard(Guard { kind: GuardKind::Cmp(_, l, r), .. }), side)) = ancestors.first() {
        let other = if *side == 0 { r } else { l };
        if let Some(d) = other.as_var().and_then(var_domain) {
            return d;
        }
    }
    if let Some((NodeRef::Expr(e), side)) = ancestors.first() {
        if let ExprKind::Bin(_, l, r) = &e.kind {
            let sibling = if *side == 0 { r } else { l };
            if let Some(d) = sibling.as_var().and_then(var_domain) {
                return d;
            }
        }
    }
    m.widest_type().map(|t| (t.lo, t.hi)).unwrap_or((i64::MIN, i64::MAX))
}

/// Returns a copy of `m` with the node at `spec.location` replaced.
pub fn apply(m: &Model, spec: &MutantSpec) -> Result<Model, MutationError> {
    let invalid = |reason: &str| MutationError::InvalidLocation { path: spec.location.clone(), reason: reason.into() };
    let mut out = m.clone();
    let node = out.node_mut(&spec.location).ok_or_else(|| invalid("path does not resolve"))?;
    match (spec.operator, node) {
        (Operator::GuardTrue, NodeMut::Guard(g)) => {
            g.kind = GuardKind::Lit(true);
        }
        (Operator::CompOpInvert, NodeMut::Guard(g)) => match &mut g.kind {
            GuardKind::Cmp(op, ..) if op.token() == spec.original => {
                *op = invert(*op).ok_or_else(|| invalid("only = and != can be inverted"))?;
            }
            _ => return Err(invalid("expected an = or != comparison")),
        },
        (Operator::IntConstIncrement, NodeMut::Expr(e)) => match &mut e.kind {
            ExprKind::Const(c) if c.to_string() == spec.original => {
                *c = spec.replacement.parse().map_err(|_| invalid("replacement is not an integer"))?;
            }
            _ => return Err(invalid("expected the integer constant of the spec")),
        },
        (op, _) => return Err(invalid(&format!("node kind does not match operator {op}"))),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::Fixture;
    use crate::model::{parse_model, Body};

    fn cas() -> Model {
        parse_model(&Fixture::Cas1.source()).unwrap()
    }

    fn find<'a>(ms: &'a [Mutant], op: Operator, original: &str) -> &'a Mutant {
        ms.iter().find(|m| m.spec.operator == op && m.spec.original == original).unwrap()
    }

    #[test]
    fn guard_true_on_a_branch_guard() {
        let ms = enumerate_mutants(&cas(), &[Operator::GuardTrue]);
        let m = find(&ms, Operator::GuardTrue, "Wait_time #= 20 /\\ aState #= 3");
        assert_eq!(m.spec.replacement, "true");
        assert_eq!(m.spec.location.to_string(), "0.1.0.0");
        assert!(ms.iter().all(|m| m.spec.location.0.len() > 2), "action guards are all literal true");
    }

    #[test]
    fn inequality_becomes_equality() {
        let ms = enumerate_mutants(&cas(), &[Operator::CompOpInvert]);
        let m = find(&ms, Operator::CompOpInvert, "#\\=");
        assert_eq!(m.spec.replacement, "#=");
        let lock = m.model.action("Lock").unwrap();
        assert!(lock.body.to_string().contains("fromArmed #= 1"));
    }

    #[test]
    fn constant_at_the_upper_bound_wraps_to_the_lower_bound() {
        let ms = enumerate_mutants(&cas(), &[Operator::IntConstIncrement]);
        let m = find(&ms, Operator::IntConstIncrement, "270");
        assert_eq!(m.spec.replacement, "0");
        let m = find(&ms, Operator::IntConstIncrement, "20");
        assert_eq!(m.spec.replacement, "21");
    }

    #[test]
    fn constant_domains() {
        let m = parse_model(
            "type(small, X) :- X in 0..3.\ntype(big, X) :- X in -5..9.\nvar([x], small).\nvar([y], big).\n\
             state_def([x, y]).\ninit([0, 0]).\n\
             as :- actions('a'(P)::(3 #= x) => (y := 9 [] x := P * 3; y := 1 + 3), 'b'::(x + 3 #> 1) => (y := y)), \
             dood([Q:small]:'a'(Q) [] 'b').",
        )
        .unwrap();
        let ms = enumerate_mutants(&m, &[Operator::IntConstIncrement]);
        let got: Vec<(String, String)> =
            ms.iter().map(|m| (m.spec.original.clone(), m.spec.replacement.clone())).collect();
        let expected = [("3", "0"), ("9", "-5"), ("3", "0"), ("1", "2"), ("3", "4"), ("3", "0"), ("1", "2")];
        let expected: Vec<(String, String)> = expected.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn apply_guard_true_to_the_first_lock_branch() {
        let orig = cas();
        let i = orig.action_index("Lock").unwrap();
        let spec = MutantSpec {
            operator: Operator::GuardTrue,
            location: NodePath(vec![i, 1, 0, 0]),
            original: "aState #= 6 /\\ fromAlarm #= 0".into(),
            replacement: "true".into(),
        };
        let m = apply(&orig, &spec).unwrap();
        let BodyKind::Choice(bs) = &m.actions[i].body.kind else { panic!() };
        assert_eq!(bs[0], Body::guarded(Guard::lit(true), Body::assign("aState", crate::model::Expr::constant(5))));
        assert_ne!(orig, m);
    }

    #[test]
    fn apply_increment_to_an_assignment() {
        let orig = cas();
        let ms = enumerate_mutants(&orig, &[Operator::IntConstIncrement]);
        let m = ms.iter().find(|m| m.spec.location.to_string() == "0.1.0.1.0.0").unwrap();
        assert_eq!((m.spec.original.as_str(), m.spec.replacement.as_str()), ("2", "3"));
        assert!(m.model.actions[0].body.to_string().contains("aState := 3"));
    }

    #[test]
    fn apply_rejects_mismatched_locations() {
        let orig = cas();
        let spec = MutantSpec {
            operator: Operator::GuardTrue,
            location: NodePath(vec![1, 1, 0, 1]),
            original: "aState := 5".into(),
            replacement: "true".into(),
        };
        assert!(matches!(apply(&orig, &spec), Err(MutationError::InvalidLocation { .. })));
        let spec = MutantSpec { location: NodePath(vec![40, 0]), ..spec };
        assert!(apply(&orig, &spec).is_err());
    }

    #[test]
    fn mutants_differ_in_one_region_and_reparse() {
        let orig = cas();
        let text = orig.to_string();
        for m in enumerate_mutants(&orig, &Operator::ALL) {
            let mt = m.model.to_string();
            let again = parse_model(&mt).unwrap_or_else(|e| panic!("{}: {e}", m.spec));
            assert_eq!(again, m.model);
            let prefix = text.bytes().zip(mt.bytes()).take_while(|(a, b)| a == b).count();
            let suffix = text[prefix..].bytes().rev().zip(mt[prefix..].bytes().rev()).take_while(|(a, b)| a == b).count();
            let old = text[prefix..text.len() - suffix].trim_matches(|c| c == '(' || c == ')');
            let new = &mt[prefix..mt.len() - suffix];
            assert!(m.spec.original.contains(old), "{}: `{old}`", m.spec);
            assert!(m.spec.replacement.contains(new), "{}: `{new}`", m.spec);
        }
    }

    #[test]
    fn operators_round_trip_through_names() {
        for op in Operator::ALL {
            assert_eq!(op.name().parse::<Operator>().unwrap(), op);
            assert_eq!(serde_json::to_string(&op).unwrap(), format!("\"{}\"", op.name()));
        }
    }
}
