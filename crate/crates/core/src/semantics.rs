//! Translation of actions into one-step formulas over pre-state, event and
//! post-state variables.
//!
//! Sequential composition is eliminated by substitution: each execution
//! path through a body yields a path condition and a map from state
//! variables to terms over the pre-state and event arguments. This needs
//! the left operand of every `;` to be deterministic, which the normal form
//! guarantees.

use thiserror::Error;

use crate::formula::{Formula, Term, VarId};
use crate::model::{Action, Body, BodyKind, CmpOp, Expr, ExprKind, Guard, GuardKind, Model, Span};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("{span}: action `{action}`: non-deterministic choice in the left operand of a sequential composition")]
    NormalFormViolation { action: String, span: Span },
    #[error("state spaces differ: {0}")]
    StateMismatch(String),
    #[error("action `{0}` has no label code in this variable space")]
    UnknownLabel(String),
}

/// Variable layout of a step formula.
///
/// Ids are assigned as: pre-state `0..n`, event label `n`, event arguments
/// `n+1..n+1+w`, post-state after that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepVarSpace {
    pub state_names: Vec<String>,
    pub state_domains: Vec<(i64, i64)>,
    /// Label of every code, in code order.
    pub labels: Vec<String>,
    pub arg_domains: Vec<(i64, i64)>,
}

impl StepVarSpace {
    pub fn new(model: &Model) -> StepVarSpace {
        let mut space = StepVarSpace {
            state_names: model.state_def.clone(),
            state_domains: model.state_domains(),
            labels: Vec::new(),
            arg_domains: Vec::new(),
        };
        space.add_actions(model);
        space
    }

    /// Shared space of an original and a mutant. Labels of the original
    /// keep their codes; labels only the mutant defines come after them.
    pub fn for_pair(orig: &Model, mutant: &Model) -> Result<StepVarSpace, SemanticsError> {
        if orig.state_def != mutant.state_def {
            return Err(SemanticsError::StateMismatch(format!(
                "state_def [{}] vs [{}]",
                orig.state_def.join(", "),
                mutant.state_def.join(", ")
            )));
        }
        if orig.state_domains() != mutant.state_domains() {
            return Err(SemanticsError::StateMismatch("state variable types differ".into()));
        }
        let mut space = StepVarSpace::new(orig);
        space.add_actions(mutant);
        Ok(space)
    }

    fn add_actions(&mut self, model: &Model) {
        for a in &model.actions {
            if !self.labels.contains(&a.label) {
                self.labels.push(a.label.clone());
            }
            for (k, p) in a.params.iter().enumerate() {
                match self.arg_domains.get_mut(k) {
                    Some(d) => *d = (d.0.min(p.lo), d.1.max(p.hi)),
                    None => self.arg_domains.push((p.lo.min(0), p.hi.max(0))),
                }
            }
        }
    }

    pub fn n_state(&self) -> usize {
        self.state_names.len()
    }

    pub fn n_args(&self) -> usize {
        self.arg_domains.len()
    }

    pub fn num_vars(&self) -> usize {
        2 * self.n_state() + 1 + self.n_args()
    }

    pub fn pre(&self, i: usize) -> VarId {
        i
    }

    pub fn label_var(&self) -> VarId {
        self.n_state()
    }

    pub fn arg(&self, k: usize) -> VarId {
        self.n_state() + 1 + k
    }

    pub fn post(&self, i: usize) -> VarId {
        self.n_state() + 1 + self.n_args() + i
    }

    pub fn label_code(&self, label: &str) -> Option<i64> {
        self.labels.iter().position(|l| l == label).map(|c| c as i64)
    }

    /// Domain of every variable, indexed by id.
    pub fn domains(&self) -> Vec<(i64, i64)> {
        let mut d = self.state_domains.clone();
        d.push((0, self.labels.len().saturating_sub(1) as i64));
        d.extend(&self.arg_domains);
        d.extend(&self.state_domains);
        d
    }

    /// Event variables followed by post-state variables.
    pub fn event_and_post(&self) -> Vec<VarId> {
        (self.label_var()..self.num_vars()).collect()
    }

    pub fn var_name(&self, v: VarId) -> String {
        let n = self.n_state();
        if v < n {
            self.state_names[v].clone()
        } else if v == n {
            "label".into()
        } else if v < n + 1 + self.n_args() {
            format!("arg{}", v - n - 1)
        } else {
            format!("{}'", self.state_names[v - n - 1 - self.n_args()])
        }
    }

    pub fn dump(&self, f: &Formula) -> String {
        f.to_sexpr(&|v| self.var_name(v))
    }
}

struct Ctx<'a> {
    action: &'a Action,
    space: &'a StepVarSpace,
}

impl Ctx<'_> {
    fn term(&self, e: &Expr, sigma: &[Term]) -> Term {
        match &e.kind {
            ExprKind::Const(c) => Term::Const(*c),
            ExprKind::Var(name) => {
                if let Some(k) = self.action.params.iter().position(|p| &p.name == name) {
                    Term::Var(self.space.arg(k))
                } else {
                    let i = self.space.state_names.iter().position(|s| s == name).expect("validated model");
                    sigma[i].clone()
                }
            }
            ExprKind::Bin(op, l, r) => Term::bin(*op, self.term(l, sigma), self.term(r, sigma)),
        }
    }

    fn guard(&self, g: &Guard, sigma: &[Term], positive: bool) -> Formula {
        match &g.kind {
            GuardKind::Lit(b) => Formula::from(*b == positive),
            GuardKind::Cmp(op, l, r) => {
                let op = if positive { *op } else { op.negated() };
                Formula::cmp(op, self.term(l, sigma), self.term(r, sigma))
            }
            GuardKind::And(ps) | GuardKind::Or(ps) => {
                let parts = ps.iter().map(|p| self.guard(p, sigma, positive));
                if matches!(g.kind, GuardKind::And(_)) == positive {
                    Formula::and(parts)
                } else {
                    Formula::or(parts)
                }
            }
            GuardKind::Not(inner) => self.guard(inner, sigma, !positive),
        }
    }

    /// Range condition for an assignment: the branch is infeasible when the
    /// value leaves the target's type.
    fn in_range(&self, target: usize, t: &Term) -> Formula {
        let (lo, hi) = self.space.state_domains[target];
        if let Term::Var(v) = t {
            if *v < self.space.n_state() {
                let (vlo, vhi) = self.space.state_domains[*v];
                if lo <= vlo && vhi <= hi {
                    return Formula::True;
                }
            }
        }
        Formula::within(t.clone(), lo, hi)
    }

    fn paths(&self, b: &Body, sigma: Vec<Term>) -> Result<Vec<(Formula, Vec<Term>)>, SemanticsError> {
        match &b.kind {
            BodyKind::Assign { target, value } => {
                let i = self.space.state_names.iter().position(|s| s == target).expect("validated model");
                let t = self.term(value, &sigma);
                let cond = self.in_range(i, &t);
                let mut next = sigma;
                next[i] = t;
                Ok(vec![(cond, next)])
            }
            BodyKind::Guarded(g, inner) => {
                let cond = self.guard(g, &sigma, true);
                if cond == Formula::False {
                    return Ok(Vec::new());
                }
                Ok(self
                    .paths(inner, sigma)?
                    .into_iter()
                    .map(|(c, s)| (Formula::and(vec![cond.clone(), c]), s))
                    .collect())
            }
            BodyKind::Choice(ps) => {
                let mut out = Vec::new();
                for p in ps {
                    out.extend(self.paths(p, sigma.clone())?);
                }
                Ok(out)
            }
            BodyKind::Seq(ps) => {
                let mut acc = vec![(Formula::True, sigma)];
                for (i, p) in ps.iter().enumerate() {
                    if i + 1 < ps.len() && contains_choice(p) {
                        return Err(SemanticsError::NormalFormViolation {
                            action: self.action.label.clone(),
                            span: b.span,
                        });
                    }
                    let mut next = Vec::new();
                    for (cond, s) in acc {
                        for (c, s2) in self.paths(p, s)? {
                            let joined = Formula::and(vec![cond.clone(), c]);
                            if joined != Formula::False {
                                next.push((joined, s2));
                            }
                        }
                    }
                    acc = next;
                }
                Ok(acc)
            }
        }
    }
}

fn contains_choice(b: &Body) -> bool {
    match &b.kind {
        BodyKind::Assign { .. } => false,
        BodyKind::Guarded(_, inner) => contains_choice(inner),
        BodyKind::Seq(ps) => ps.iter().any(contains_choice),
        BodyKind::Choice(_) => true,
    }
}

/// Step formula of one action: event label and arguments, guard, and the
/// disjunction of its execution paths with frame equalities.
pub fn translate_action(action: &Action, space: &StepVarSpace) -> Result<Formula, SemanticsError> {
    let code = space.label_code(&action.label).ok_or_else(|| SemanticsError::UnknownLabel(action.label.clone()))?;
    let ctx = Ctx { action, space };
    let sigma0: Vec<Term> = (0..space.n_state()).map(|i| Term::Var(space.pre(i))).collect();

    let mut parts = vec![Formula::eq_const(space.label_var(), code)];
    for k in 0..space.n_args() {
        match action.params.get(k) {
            Some(p) if (p.lo, p.hi) == space.arg_domains[k] => {}
            Some(p) => parts.push(Formula::within(Term::Var(space.arg(k)), p.lo, p.hi)),
            None => parts.push(Formula::eq_const(space.arg(k), 0)),
        }
    }
    parts.push(ctx.guard(&action.guard, &sigma0, true));

    let branches = ctx.paths(&action.body, sigma0)?.into_iter().map(|(cond, sigma)| {
        let frame = sigma
            .into_iter()
            .enumerate()
            .map(|(i, t)| Formula::cmp(CmpOp::Eq, Term::Var(space.post(i)), t));
        Formula::and(std::iter::once(cond).chain(frame))
    });
    parts.push(Formula::or(branches.collect::<Vec<_>>()));
    Ok(Formula::and(parts))
}

/// Disjunction of the step formulas of every action in the do-od block.
pub fn translate_system(model: &Model, space: &StepVarSpace) -> Result<Formula, SemanticsError> {
    let parts = model
        .system_actions()
        .map(|(_, a)| translate_action(a, space))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Formula::or(parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::Fixture;
    use crate::formula::Atom;
    use crate::model::parse_model;

    fn cas() -> Model {
        parse_model(&Fixture::Cas1.source()).unwrap()
    }

    fn conj_atoms(f: &Formula) -> Vec<String> {
        match f {
            Formula::And(ps) => ps.iter().map(|p| p.to_string()).collect(),
            other => vec![other.to_string()],
        }
    }

    #[test]
    fn variable_layout() {
        let m = cas();
        let s = StepVarSpace::new(&m);
        assert_eq!(s.num_vars(), 6 + 1 + 1 + 6);
        assert_eq!(s.label_code("after"), Some(0));
        assert_eq!(s.label_code("Lock"), Some(1));
        assert_eq!(s.arg_domains, vec![(0, 270)]);
        assert_eq!(s.var_name(s.post(0)), "aState'");
        assert_eq!(s.domains()[s.label_var()], (0, 10));
    }

    #[test]
    fn lock_first_branch() {
        let m = cas();
        let s = StepVarSpace::new(&m);
        let f = translate_action(m.action("Lock").unwrap(), &s).unwrap();
        let Formula::And(parts) = &f else { panic!("{f}") };
        assert_eq!(parts[0], Formula::eq_const(s.label_var(), 1));
        assert_eq!(parts[1], Formula::eq_const(s.arg(0), 0));
        let Formula::Or(branches) = &parts[2] else { panic!("{f}") };
        assert_eq!(branches.len(), 2);
        assert_eq!(
            s.dump(&branches[0]),
            "(and (= aState 6) (= fromAlarm 0) (= aState' 5) (= fromAlarm' fromAlarm) (= fromArmed' fromArmed) \
             (= fromClosedAndLocked_OR_fromSilentAndOpen' fromClosedAndLocked_OR_fromSilentAndOpen) \
             (= flashOn' flashOn) (= soundOn' soundOn))"
        );
    }

    #[test]
    fn assignment_with_frame() {
        let m = parse_model(
            "type(t, X) :- X in 0..3.\nvar([x, y], t).\nstate_def([x, y]).\ninit([0, 0]).\n\
             as :- actions('a'::(true) => (x := y + 1)), dood('a').",
        )
        .unwrap();
        let s = StepVarSpace::new(&m);
        let f = translate_action(&m.actions[0], &s).unwrap();
        assert_eq!(s.dump(&f), "(and (= label 0) (>= (+ y 1) 0) (<= (+ y 1) 3) (= x' (+ y 1)) (= y' y))");
    }

    #[test]
    fn after_twenty_branch() {
        let m = cas();
        let s = StepVarSpace::new(&m);
        let f = translate_action(m.action("after").unwrap(), &s).unwrap();
        let atoms = conj_atoms(&f);
        assert_eq!(atoms[0], "(= v6 0)");
        let Formula::And(parts) = &f else { panic!() };
        let Formula::Or(branches) = parts.last().unwrap() else { panic!() };
        let b0 = s.dump(&branches[0]);
        assert!(b0.starts_with("(and (= arg0 20) (= aState 3) (= aState' 2) (= fromAlarm' fromAlarm) (= fromArmed' fromArmed) (= fromClosedAndLocked_OR_fromSilentAndOpen' 1)"), "{b0}");
        assert_eq!(parts.len(), 2, "the parameter range equals the argument domain");
    }

    #[test]
    fn system_of_one_action_is_that_action() {
        let m = parse_model(
            "type(t, X) :- X in 0..3.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
             as :- actions('a'::(x #< 3) => (x := x + 1)), dood('a').",
        )
        .unwrap();
        let s = StepVarSpace::new(&m);
        assert_eq!(translate_system(&m, &s).unwrap(), translate_action(&m.actions[0], &s).unwrap());
    }

    #[test]
    fn false_guard_gives_an_unsatisfiable_system() {
        let m = parse_model(
            "type(t, X) :- X in 0..3.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
             as :- actions('a'::(false) => (x := 1)), dood('a').",
        )
        .unwrap();
        let s = StepVarSpace::new(&m);
        assert_eq!(translate_system(&m, &s).unwrap(), Formula::False);
    }

    #[test]
    fn choice_left_of_sequence_is_rejected() {
        let m = parse_model(
            "type(t, X) :- X in 0..3.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
             as :- actions('a'::(true) => ((x := 1 [] x := 2); x := x + 1)), dood('a').",
        )
        .unwrap();
        let s = StepVarSpace::new(&m);
        assert!(matches!(translate_action(&m.actions[0], &s), Err(SemanticsError::NormalFormViolation { .. })));
    }

    #[test]
    fn overwritten_assignment_keeps_its_range_condition() {
        let m = parse_model(
            "type(t, X) :- X in 0..3.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
             as :- actions('a'::(true) => (x := x + 3; x := 0)), dood('a').",
        )
        .unwrap();
        let s = StepVarSpace::new(&m);
        let f = translate_action(&m.actions[0], &s).unwrap();
        for x in 0..=3 {
            let env = [x, 0, 0];
            assert_eq!(f.eval(&env), x == 0, "x = {x}");
        }
    }

    #[test]
    fn frame_completeness_on_the_fixture() {
        // Post-equality counts along every conjunctive path of `f`.
        fn paths(f: &Formula, post: &std::ops::Range<usize>) -> Vec<Vec<usize>> {
            let n = post.len();
            match f {
                Formula::Atom(Atom { op: CmpOp::Eq, lhs: Term::Var(v), .. }) if post.contains(v) => {
                    let mut c = vec![0; n];
                    c[*v - post.start] = 1;
                    vec![c]
                }
                Formula::And(ps) => ps.iter().fold(vec![vec![0; n]], |acc, p| {
                    let sub = paths(p, post);
                    acc.iter()
                        .flat_map(|a| sub.iter().map(move |b| a.iter().zip(b).map(|(x, y)| x + y).collect()))
                        .collect()
                }),
                Formula::Or(ps) => ps.iter().flat_map(|p| paths(p, post)).collect(),
                _ => vec![vec![0; n]],
            }
        }
        let m = cas();
        let s = StepVarSpace::new(&m);
        let post = s.post(0)..s.num_vars();
        for a in &m.actions {
            for counts in paths(&translate_action(a, &s).unwrap(), &post) {
                assert!(counts.iter().all(|&c| c == 1), "{}: {counts:?}", a.label);
            }
        }
    }

    #[test]
    fn pair_space_appends_mutant_only_labels() {
        let orig = cas();
        let mut mutant = orig.clone();
        mutant.actions[1].label = "Relock".into();
        mutant.dood[0].label = "Relock".into();
        let s = StepVarSpace::for_pair(&orig, &mutant).unwrap();
        assert_eq!(s.labels.len(), 12);
        assert_eq!(s.label_code("Relock"), Some(11));
        let mut other = orig.clone();
        other.state_def.swap(0, 1);
        assert!(StepVarSpace::for_pair(&orig, &other).is_err());
    }
}
