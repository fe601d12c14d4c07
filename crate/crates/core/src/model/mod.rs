//! Front-end for textual action-system models: lexing, parsing, validation,
//! pretty printing, node addressing and the normal-form check.

mod ast;
mod error;
mod lexer;
mod parser;
mod printer;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ast::*;
pub use error::{Diagnostic, ModelError, ParseError, Severity};
pub use printer::print_model;

/// Parses and validates a model. The result satisfies every model invariant
/// or is an error; partially valid models are never returned.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let (model, as_span) = parser::parse_unvalidated(text)?;
    validate::validate(model, as_span)
}

/// Location of a node as child indices from the model root.
///
/// The first index selects the action, the second its guard (0) or body (1).
/// Below that, children are numbered in source order: the operands of a
/// comparison or binary expression, the parts of `/\`, `\/`, `;` and `[]`,
/// the guard (0) and body (1) of a guarded command, and the value (0) of an
/// assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn child(&self, idx: usize) -> NodePath {
        let mut v = self.0.clone();
        v.push(idx);
        NodePath(v)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

impl FromStr for NodePath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(NodePath(Vec::new()));
        }
        s.split('.')
            .map(|p| p.parse::<usize>().map_err(|_| format!("invalid node path `{s}`")))
            .collect::<Result<Vec<_>, _>>()
            .map(NodePath)
    }
}

impl From<NodePath> for String {
    fn from(p: NodePath) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for NodePath {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum NodeRef<'a> {
    Guard(&'a Guard),
    Expr(&'a Expr),
    Body(&'a Body),
}

impl<'a> NodeRef<'a> {
    pub fn span(&self) -> Span {
        match self {
            NodeRef::Guard(g) => g.span,
            NodeRef::Expr(e) => e.span,
            NodeRef::Body(b) => b.span,
        }
    }

    pub fn children(&self) -> Vec<NodeRef<'a>> {
        match *self {
            NodeRef::Guard(g) => match &g.kind {
                GuardKind::Lit(_) => vec![],
                GuardKind::Cmp(_, l, r) => vec![NodeRef::Expr(l), NodeRef::Expr(r)],
                GuardKind::And(ps) | GuardKind::Or(ps) => ps.iter().map(NodeRef::Guard).collect(),
                GuardKind::Not(inner) => vec![NodeRef::Guard(inner)],
            },
            NodeRef::Expr(e) => match &e.kind {
                ExprKind::Bin(_, l, r) => vec![NodeRef::Expr(l), NodeRef::Expr(r)],
                _ => vec![],
            },
            NodeRef::Body(b) => match &b.kind {
                BodyKind::Assign { value, .. } => vec![NodeRef::Expr(value)],
                BodyKind::Guarded(g, inner) => vec![NodeRef::Guard(g), NodeRef::Body(inner)],
                BodyKind::Seq(ps) | BodyKind::Choice(ps) => ps.iter().map(NodeRef::Body).collect(),
            },
        }
    }
}

pub enum NodeMut<'a> {
    Guard(&'a mut Guard),
    Expr(&'a mut Expr),
    Body(&'a mut Body),
}

impl Model {
    pub fn node(&self, path: &NodePath) -> Option<NodeRef<'_>> {
        let (&action, rest) = path.0.split_first()?;
        let action = self.actions.get(action)?;
        let (&part, rest) = rest.split_first()?;
        let mut node = match part {
            0 => NodeRef::Guard(&action.guard),
            1 => NodeRef::Body(&action.body),
            _ => return None,
        };
        for &idx in rest {
            node = node.children().into_iter().nth(idx)?;
        }
        Some(node)
    }

    pub fn node_mut(&mut self, path: &NodePath) -> Option<NodeMut<'_>> {
        let (&action, rest) = path.0.split_first()?;
        let action = self.actions.get_mut(action)?;
        let (&part, rest) = rest.split_first()?;
        let mut node = match part {
            0 => NodeMut::Guard(&mut action.guard),
            1 => NodeMut::Body(&mut action.body),
            _ => return None,
        };
        for &idx in rest {
            node = match node {
                NodeMut::Guard(g) => match &mut g.kind {
                    GuardKind::Cmp(_, l, r) => match idx {
                        0 => NodeMut::Expr(l),
                        1 => NodeMut::Expr(r),
                        _ => return None,
                    },
                    GuardKind::And(ps) | GuardKind::Or(ps) => NodeMut::Guard(ps.get_mut(idx)?),
                    GuardKind::Not(inner) if idx == 0 => NodeMut::Guard(inner),
                    _ => return None,
                },
                NodeMut::Expr(e) => match &mut e.kind {
                    ExprKind::Bin(_, l, r) => match idx {
                        0 => NodeMut::Expr(l),
                        1 => NodeMut::Expr(r),
                        _ => return None,
                    },
                    _ => return None,
                },
                NodeMut::Body(b) => match &mut b.kind {
                    BodyKind::Assign { value, .. } if idx == 0 => NodeMut::Expr(value),
                    BodyKind::Guarded(g, inner) => match idx {
                        0 => NodeMut::Guard(g),
                        1 => NodeMut::Body(inner),
                        _ => return None,
                    },
                    BodyKind::Seq(ps) | BodyKind::Choice(ps) => NodeMut::Body(ps.get_mut(idx)?),
                    _ => return None,
                },
            };
        }
        Some(node)
    }

    /// Pre-order walk over every guard, expression and body node.
    pub fn walk<'a>(&'a self, mut visit: impl FnMut(&NodePath, NodeRef<'a>)) {
        fn go<'a>(path: &NodePath, node: NodeRef<'a>, visit: &mut dyn FnMut(&NodePath, NodeRef<'a>)) {
            visit(path, node);
            for (i, child) in node.children().into_iter().enumerate() {
                go(&path.child(i), child, visit);
            }
        }
        for (i, a) in self.actions.iter().enumerate() {
            let base = NodePath(vec![i]);
            go(&base.child(0), NodeRef::Guard(&a.guard), &mut visit);
            go(&base.child(1), NodeRef::Body(&a.body), &mut visit);
        }
    }
}

/// Reports every non-deterministic choice that is not at the root of an
/// action body or directly under another choice. Each diagnostic points at
/// the node that encloses the offending choice.
pub fn check_normal_form(model: &Model) -> Vec<Diagnostic> {
    fn visit(b: &Body, path: &NodePath, label: &str, out: &mut Vec<Diagnostic>) {
        let children: Vec<&Body> = match &b.kind {
            BodyKind::Assign { .. } => return,
            BodyKind::Guarded(_, inner) => vec![inner],
            BodyKind::Seq(ps) | BodyKind::Choice(ps) => ps.iter().collect(),
        };
        let is_choice = matches!(b.kind, BodyKind::Choice(_));
        for (i, child) in children.into_iter().enumerate() {
            let child_path = match b.kind {
                BodyKind::Guarded(..) => path.child(1),
                _ => path.child(i),
            };
            if matches!(child.kind, BodyKind::Choice(_)) && !is_choice {
                let context = match b.kind {
                    BodyKind::Seq(ref ps) if i + 1 < ps.len() => "the left operand of a sequential composition",
                    BodyKind::Seq(_) => "a sequential composition",
                    _ => "a guarded command",
                };
                out.push(Diagnostic {
                    severity: Severity::Error,
                    span: b.span,
                    path: path.clone(),
                    message: format!(
                        "action `{label}`: non-deterministic choice nested in {context}; choice must be the outermost operator"
                    ),
                });
            }
            visit(child, &child_path, label, out);
        }
    }
    let mut out = Vec::new();
    for (i, a) in model.actions.iter().enumerate() {
        visit(&a.body, &NodePath(vec![i, 1]), &a.label, &mut out);
    }
    out
}
