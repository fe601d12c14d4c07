//! Pretty printer producing `.as` text that parses back to the same tree.

use std::fmt::{self, Write};

use super::ast::*;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&expr(self, 0))
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&guard(self, 0))
    }
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&body(self, 0))
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_model(self))
    }
}

fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Add | BinOp::Sub => 1,
        BinOp::Mul => 2,
    }
}

/// `min` is the weakest operator precedence that may appear unparenthesized.
fn expr(e: &Expr, min: u8) -> String {
    match &e.kind {
        ExprKind::Var(name) => name.clone(),
        ExprKind::Const(c) => c.to_string(),
        ExprKind::Bin(op, l, r) => {
            let p = precedence(*op);
            // Left associative: the right operand needs strictly higher precedence.
            let text = format!("{} {} {}", expr(l, p), op.symbol(), expr(r, p + 1));
            if p < min {
                format!("({text})")
            } else {
                text
            }
        }
    }
}

/// Guard precedence: or = 1, and = 2, not/atoms = 3.
fn guard(g: &Guard, min: u8) -> String {
    let (text, p) = match &g.kind {
        GuardKind::Lit(v) => (v.to_string(), 3),
        GuardKind::Cmp(op, l, r) => (format!("{} {} {}", expr(l, 0), op.token(), expr(r, 0)), 3),
        GuardKind::And(parts) => {
            (parts.iter().map(|p| guard(p, 3)).collect::<Vec<_>>().join(" /\\ "), 2)
        }
        GuardKind::Or(parts) => {
            (parts.iter().map(|p| guard(p, 2)).collect::<Vec<_>>().join(" \\/ "), 1)
        }
        GuardKind::Not(inner) => (format!("\\+ {}", guard(inner, 3)), 3),
    };
    if p < min {
        format!("({text})")
    } else {
        text
    }
}

/// Renders a body so that it parses as a single `unit`.
fn unit(b: &Body, indent: usize) -> String {
    format!("({})", body(b, indent))
}

fn body(b: &Body, indent: usize) -> String {
    match &b.kind {
        BodyKind::Assign { target, value } => format!("{target} := {}", expr(value, 0)),
        BodyKind::Guarded(g, inner) => format!("({}) => {}", guard(g, 0), unit(inner, indent)),
        BodyKind::Seq(parts) => parts
            .iter()
            .map(|p| match &p.kind {
                BodyKind::Assign { .. } | BodyKind::Guarded(..) => body(p, indent),
                _ => format!("({})", body(p, indent)),
            })
            .collect::<Vec<_>>()
            .join("; "),
        BodyKind::Choice(parts) => {
            let pad = " ".repeat(indent + 2);
            let mut out = String::new();
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    let _ = write!(out, "\n{}[]\n", " ".repeat(indent));
                }
                let _ = write!(out, "{pad}({})", body(p, indent + 4));
            }
            out
        }
    }
}

fn label(name: &str) -> String {
    format!("'{}'", name.replace('\'', ""))
}

pub fn print_model(m: &Model) -> String {
    let mut out = String::new();
    for t in &m.types {
        let _ = writeln!(out, "type({}, X) :- X in {}..{}.", t.name, t.lo, t.hi);
    }
    // Consecutive declarations of one type share a clause.
    let mut i = 0;
    while i < m.vars.len() {
        let ty = &m.vars[i].ty;
        let mut j = i;
        while j < m.vars.len() && &m.vars[j].ty == ty {
            j += 1;
        }
        let names: Vec<&str> = m.vars[i..j].iter().map(|v| v.name.as_str()).collect();
        let _ = writeln!(out, "var([{}], {ty}).", names.join(", "));
        i = j;
    }
    let _ = writeln!(out, "state_def([{}]).", m.state_def.join(", "));
    let init: Vec<String> = m.init.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "\ninit([{}]).\n", init.join(", "));
    out.push_str("as :-\n  actions (\n");
    for (i, a) in m.actions.iter().enumerate() {
        let params = if a.params.is_empty() {
            String::new()
        } else {
            let names: Vec<&str> = a.params.iter().map(|p| p.name.as_str()).collect();
            format!("({})", names.join(", "))
        };
        let _ = write!(out, "    {}{params}::({}) =>\n    (\n", label(&a.label), guard(&a.guard, 0));
        match &a.body.kind {
            BodyKind::Choice(_) => {
                let _ = writeln!(out, "{}", body(&a.body, 6));
            }
            _ => {
                let _ = writeln!(out, "        {}", body(&a.body, 8));
            }
        }
        out.push_str("    )");
        out.push_str(if i + 1 < m.actions.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ),\n  dood (\n");
    for (i, e) in m.dood.iter().enumerate() {
        out.push_str(if i == 0 { "     " } else { "  [] " });
        if e.bindings.is_empty() {
            out.push_str(&label(&e.label));
        } else {
            let binds: Vec<String> = e.bindings.iter().map(|(b, t)| format!("{b}:{t}")).collect();
            let _ = write!(out, "[{}]:{}({})", binds.join(", "), label(&e.label), e.args.join(", "));
        }
        out.push('\n');
    }
    out.push_str("  ).\n");
    out
}
