use std::fmt;

use thiserror::Error;

use super::ast::Span;

/// Syntax error with the set of tokens that would have been accepted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expected.as_slice() {
            [] => write!(f, "unexpected {}", self.found),
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(f, "expected one of {}, found {}", many.join(", "), self.found),
        }
    }
}

impl std::error::Error for ParseError {}

/// Everything that can make `parse_model` reject its input.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("{0}")]
    Parse(ParseError),
    #[error("duplicate {kind} `{name}`")]
    DuplicateName { kind: &'static str, name: String, span: Span },
    #[error("undeclared variable `{name}`{note}")]
    UndeclaredVariable { name: String, note: &'static str, span: Span },
    #[error("unknown type `{name}`")]
    UndeclaredType { name: String, span: Span },
    #[error("type `{name}` has empty domain {lo}..{hi}")]
    InvalidDomain { name: String, lo: i64, hi: i64, span: Span },
    #[error("do-od entry `{label}` names no defined action")]
    UndefinedAction { label: String, span: Span },
    #[error("arity mismatch: {message}")]
    ArityMismatch { message: String, span: Span },
    #[error("initial value {value} of `{var}` outside {lo}..{hi}")]
    InitOutOfBounds { var: String, value: i64, lo: i64, hi: i64, span: Span },
    #[error("`{name}` is not a state variable and cannot be assigned")]
    InvalidAssignment { name: String, span: Span },
    #[error("parameter `{name}` shadows a state variable")]
    ShadowedVariable { name: String, span: Span },
    #[error("missing `{clause}` clause")]
    MissingClause { clause: &'static str, span: Span },
}

impl ModelError {
    pub fn span(&self) -> Span {
        match self {
            ModelError::Parse(e) => e.span,
            ModelError::DuplicateName { span, .. }
            | ModelError::UndeclaredVariable { span, .. }
            | ModelError::UndeclaredType { span, .. }
            | ModelError::InvalidDomain { span, .. }
            | ModelError::UndefinedAction { span, .. }
            | ModelError::ArityMismatch { span, .. }
            | ModelError::InitOutOfBounds { span, .. }
            | ModelError::InvalidAssignment { span, .. }
            | ModelError::ShadowedVariable { span, .. }
            | ModelError::MissingClause { span, .. } => *span,
        }
    }

    /// `file:line:col: error: message`
    pub fn render(&self, file: &str) -> String {
        let span = self.span();
        format!("{file}:{}:{}: error: {self}", span.line, span.col)
    }
}

impl From<ParseError> for ModelError {
    fn from(e: ParseError) -> Self {
        ModelError::Parse(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A located finding about a model that parsed and validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub path: super::NodePath,
    pub message: String,
}

impl Diagnostic {
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}:{}: {}: {}", self.span.line, self.span.col, self.severity, self.message)
    }
}
