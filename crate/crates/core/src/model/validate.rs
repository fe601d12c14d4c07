use std::collections::HashSet;

use super::ast::*;
use super::error::ModelError;

/// Checks every model invariant and resolves action parameter domains from
/// the do-od bindings.
pub(crate) fn validate(mut model: Model, as_span: Span) -> Result<Model, ModelError> {
    let mut seen = HashSet::new();
    for t in &model.types {
        if !seen.insert(t.name.as_str()) {
            return Err(ModelError::DuplicateName { kind: "type", name: t.name.clone(), span: t.span });
        }
        if t.lo > t.hi {
            return Err(ModelError::InvalidDomain { name: t.name.clone(), lo: t.lo, hi: t.hi, span: t.span });
        }
    }

    let mut seen = HashSet::new();
    for v in &model.vars {
        if !seen.insert(v.name.as_str()) {
            return Err(ModelError::DuplicateName { kind: "variable", name: v.name.clone(), span: v.span });
        }
        if model.type_named(&v.ty).is_none() {
            return Err(ModelError::UndeclaredType { name: v.ty.clone(), span: v.span });
        }
    }

    let mut seen = HashSet::new();
    for name in &model.state_def {
        if !model.vars.iter().any(|v| &v.name == name) {
            return Err(ModelError::UndeclaredVariable { name: name.clone(), note: " in state_def", span: as_span });
        }
        if !seen.insert(name.as_str()) {
            return Err(ModelError::DuplicateName { kind: "state_def entry", name: name.clone(), span: as_span });
        }
    }

    if model.init.len() != model.state_def.len() {
        return Err(ModelError::ArityMismatch {
            message: format!(
                "init has {} values but state_def has {} variables",
                model.init.len(),
                model.state_def.len()
            ),
            span: as_span,
        });
    }
    for (name, &value) in model.state_def.iter().zip(&model.init) {
        let ty = model.var_type(name).expect("checked above");
        if !ty.contains(value) {
            return Err(ModelError::InitOutOfBounds {
                var: name.clone(),
                value,
                lo: ty.lo,
                hi: ty.hi,
                span: as_span,
            });
        }
    }

    let mut seen = HashSet::new();
    for a in &model.actions {
        if !seen.insert(a.label.as_str()) {
            return Err(ModelError::DuplicateName { kind: "action", name: a.label.clone(), span: a.span });
        }
        let mut params = HashSet::new();
        for p in &a.params {
            if !params.insert(p.name.as_str()) {
                return Err(ModelError::DuplicateName { kind: "parameter", name: p.name.clone(), span: p.span });
            }
            if model.vars.iter().any(|v| v.name == p.name) {
                return Err(ModelError::ShadowedVariable { name: p.name.clone(), span: p.span });
            }
        }
    }

    resolve_dood(&mut model)?;

    for a in &model.actions {
        check_guard(&model, a, &a.guard)?;
        check_body(&model, a, &a.body)?;
    }
    Ok(model)
}

fn resolve_dood(model: &mut Model) -> Result<(), ModelError> {
    let mut seen = HashSet::new();
    let mut resolved: Vec<(usize, Vec<(String, i64, i64)>)> = Vec::new();
    for entry in &model.dood {
        let Some(idx) = model.action_index(&entry.label) else {
            return Err(ModelError::UndefinedAction { label: entry.label.clone(), span: entry.span });
        };
        if !seen.insert(entry.label.as_str()) {
            return Err(ModelError::DuplicateName { kind: "do-od entry", name: entry.label.clone(), span: entry.span });
        }
        let action = &model.actions[idx];
        if entry.args.len() != action.params.len() {
            return Err(ModelError::ArityMismatch {
                message: format!(
                    "action `{}` takes {} parameter(s) but the do-od entry supplies {}",
                    action.label,
                    action.params.len(),
                    entry.args.len()
                ),
                span: entry.span,
            });
        }
        let mut binders = HashSet::new();
        for (binder, _) in &entry.bindings {
            if !binders.insert(binder.as_str()) {
                return Err(ModelError::DuplicateName { kind: "binder", name: binder.clone(), span: entry.span });
            }
        }
        let mut used = HashSet::new();
        let mut domains = Vec::new();
        for arg in &entry.args {
            let Some((_, ty)) = entry.bindings.iter().find(|(b, _)| b == arg) else {
                return Err(ModelError::UndeclaredVariable {
                    name: arg.clone(),
                    note: " (unbound in do-od entry)",
                    span: entry.span,
                });
            };
            if !used.insert(arg.as_str()) {
                return Err(ModelError::ArityMismatch {
                    message: format!("binder `{arg}` used twice in `{}`", entry.label),
                    span: entry.span,
                });
            }
            let Some(td) = model.type_named(ty) else {
                return Err(ModelError::UndeclaredType { name: ty.clone(), span: entry.span });
            };
            domains.push((td.name.clone(), td.lo, td.hi));
        }
        resolved.push((idx, domains));
    }
    for (idx, domains) in resolved {
        for (param, (ty, lo, hi)) in model.actions[idx].params.iter_mut().zip(domains) {
            param.ty = ty;
            param.lo = lo;
            param.hi = hi;
        }
    }
    for a in &model.actions {
        if !a.params.is_empty() && !model.dood.iter().any(|e| e.label == a.label) {
            return Err(ModelError::ArityMismatch {
                message: format!("parameters of `{}` are never bound by the do-od block", a.label),
                span: a.span,
            });
        }
    }
    Ok(())
}

fn check_expr(model: &Model, action: &Action, e: &Expr) -> Result<(), ModelError> {
    match &e.kind {
        ExprKind::Const(_) => Ok(()),
        ExprKind::Var(name) => {
            if action.param(name).is_some() || model.state_index(name).is_some() {
                Ok(())
            } else if model.vars.iter().any(|v| &v.name == name) {
                Err(ModelError::UndeclaredVariable {
                    name: name.clone(),
                    note: " (declared but not part of state_def)",
                    span: e.span,
                })
            } else {
                Err(ModelError::UndeclaredVariable { name: name.clone(), note: "", span: e.span })
            }
        }
        ExprKind::Bin(_, l, r) => {
            check_expr(model, action, l)?;
            check_expr(model, action, r)
        }
    }
}

fn check_guard(model: &Model, action: &Action, g: &Guard) -> Result<(), ModelError> {
    match &g.kind {
        GuardKind::Lit(_) => Ok(()),
        GuardKind::Cmp(_, l, r) => {
            check_expr(model, action, l)?;
            check_expr(model, action, r)
        }
        GuardKind::And(parts) | GuardKind::Or(parts) => {
            parts.iter().try_for_each(|p| check_guard(model, action, p))
        }
        GuardKind::Not(inner) => check_guard(model, action, inner),
    }
}

fn check_body(model: &Model, action: &Action, b: &Body) -> Result<(), ModelError> {
    match &b.kind {
        BodyKind::Assign { target, value } => {
            if model.state_index(target).is_none() {
                if action.param(target).is_some() {
                    return Err(ModelError::InvalidAssignment { name: target.clone(), span: b.span });
                }
                return Err(ModelError::UndeclaredVariable { name: target.clone(), note: "", span: b.span });
            }
            check_expr(model, action, value)
        }
        BodyKind::Guarded(g, inner) => {
            check_guard(model, action, g)?;
            check_body(model, action, inner)
        }
        BodyKind::Seq(parts) | BodyKind::Choice(parts) => {
            parts.iter().try_for_each(|p| check_body(model, action, p))
        }
    }
}
