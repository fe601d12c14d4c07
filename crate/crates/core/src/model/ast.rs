//! Typed syntax tree of an action system.
//!
//! Every guard, expression and body node carries the [`Span`] it was parsed
//! from. Spans never take part in equality, so two trees compare equal iff
//! they are structurally identical.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Source location of a node: 1-based line/column plus byte range.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub offset: usize,
    pub len: usize,
}

impl Span {
    pub fn new(line: u32, col: u32, offset: usize, len: usize) -> Self {
        Self { line, col, offset, len }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(self, other: Span) -> Span {
        if other.offset + other.len <= self.offset {
            return self;
        }
        Span {
            len: other.offset + other.len - self.offset,
            ..self
        }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDef {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub span: Span,
}

impl TypeDef {
    pub fn contains(&self, value: i64) -> bool {
        self.lo <= value && value <= self.hi
    }

    pub fn width(&self) -> i128 {
        self.hi as i128 - self.lo as i128
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: String,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    pub fn apply(self, lhs: i128, rhs: i128) -> i128 {
        match self {
            BinOp::Add => lhs.saturating_add(rhs),
            BinOp::Sub => lhs.saturating_sub(rhs),
            BinOp::Mul => lhs.saturating_mul(rhs),
        }
    }
}

/// Comparison operators of guards and of constraint atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    /// The operator `op'` with `!(a op b) == (a op' b)`.
    pub fn negated(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn holds(self, lhs: i128, rhs: i128) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    /// Concrete syntax token.
    pub fn token(self) -> &'static str {
        match self {
            CmpOp::Eq => "#=",
            CmpOp::Ne => "#\\=",
            CmpOp::Lt => "#<",
            CmpOp::Le => "#=<",
            CmpOp::Gt => "#>",
            CmpOp::Ge => "#>=",
        }
    }

    /// Mathematical symbol, used in formula dumps.
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    /// State variable or action parameter.
    Var(String),
    Const(i64),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr { kind: ExprKind::Var(name.into()), span: Span::default() }
    }

    pub fn constant(value: i64) -> Self {
        Expr { kind: ExprKind::Const(value), span: Span::default() }
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span: Span::default() }
    }

    pub fn as_var(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Var(name) => Some(name),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub kind: GuardKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardKind {
    Lit(bool),
    Cmp(CmpOp, Expr, Expr),
    And(Vec<Guard>),
    Or(Vec<Guard>),
    Not(Box<Guard>),
}

impl Guard {
    pub fn lit(value: bool) -> Self {
        Guard { kind: GuardKind::Lit(value), span: Span::default() }
    }

    pub fn cmp(op: CmpOp, lhs: Expr, rhs: Expr) -> Self {
        Guard { kind: GuardKind::Cmp(op, lhs, rhs), span: Span::default() }
    }

    pub fn and(parts: Vec<Guard>) -> Self {
        Guard { kind: GuardKind::And(parts), span: Span::default() }
    }

    pub fn is_true_literal(&self) -> bool {
        matches!(self.kind, GuardKind::Lit(true))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Body {
    pub kind: BodyKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyKind {
    Assign { target: String, value: Expr },
    Guarded(Guard, Box<Body>),
    /// Sequential composition; every operand but the last is a left operand.
    Seq(Vec<Body>),
    /// Non-deterministic choice.
    Choice(Vec<Body>),
}

impl Body {
    pub fn assign(target: impl Into<String>, value: Expr) -> Self {
        Body { kind: BodyKind::Assign { target: target.into(), value }, span: Span::default() }
    }

    pub fn guarded(guard: Guard, body: Body) -> Self {
        Body { kind: BodyKind::Guarded(guard, Box::new(body)), span: Span::default() }
    }

    pub fn seq(parts: Vec<Body>) -> Self {
        Body { kind: BodyKind::Seq(parts), span: Span::default() }
    }

    pub fn choice(parts: Vec<Body>) -> Self {
        Body { kind: BodyKind::Choice(parts), span: Span::default() }
    }
}

/// Action parameter; its domain comes from the do-od binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: String,
    pub lo: i64,
    pub hi: i64,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub label: String,
    pub params: Vec<Param>,
    pub guard: Guard,
    pub body: Body,
    pub span: Span,
}

impl Action {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// One do-od entry: `'Lock'` or `[X:int]:'after'(X)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoodEntry {
    pub label: String,
    /// `(binder, type)` pairs in binder order.
    pub bindings: Vec<(String, String)>,
    /// Binder names in argument order.
    pub args: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub types: Vec<TypeDef>,
    pub vars: Vec<VarDecl>,
    pub state_def: Vec<String>,
    pub init: Vec<i64>,
    pub actions: Vec<Action>,
    pub dood: Vec<DoodEntry>,
}

impl Model {
    pub fn type_named(&self, name: &str) -> Option<&TypeDef> {
        self.types.iter().find(|t| t.name == name)
    }

    pub fn var_type(&self, var: &str) -> Option<&TypeDef> {
        let decl = self.vars.iter().find(|v| v.name == var)?;
        self.type_named(&decl.ty)
    }

    pub fn state_index(&self, var: &str) -> Option<usize> {
        self.state_def.iter().position(|v| v == var)
    }

    /// Domain of every state variable, aligned with `state_def`.
    pub fn state_domains(&self) -> Vec<(i64, i64)> {
        self.state_def
            .iter()
            .map(|v| {
                let ty = self.var_type(v).expect("validated model");
                (ty.lo, ty.hi)
            })
            .collect()
    }

    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.label == label)
    }

    pub fn action(&self, label: &str) -> Option<&Action> {
        self.actions.iter().find(|a| a.label == label)
    }

    /// Actions that take part in the do-od loop, in declaration order.
    pub fn system_actions(&self) -> impl Iterator<Item = (usize, &Action)> {
        self.actions
            .iter()
            .enumerate()
            .filter(|(_, a)| self.dood.iter().any(|e| e.label == a.label))
    }

    /// Declared type with the largest range; first one wins ties.
    pub fn widest_type(&self) -> Option<&TypeDef> {
        self.types.iter().fold(None, |best: Option<&TypeDef>, t| match best {
            Some(b) if b.width() >= t.width() => Some(b),
            _ => Some(t),
        })
    }
}
