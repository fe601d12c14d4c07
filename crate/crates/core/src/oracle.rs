//! Reference interpreter and explicit-state conformance checker.
//!
//! Steps are computed by evaluating the syntax tree directly, trying every
//! value of every action parameter. This is the enumeration that grows
//! with the parameter domains, so the checker doubles as the baseline the
//! symbolic engine is compared against.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::model::{Action, Body, BodyKind, Expr, ExprKind, Guard, GuardKind, Model};
use crate::reachability::{Event, Exploration, State, Verdict};
use crate::semantics::StepVarSpace;

/// Default limit on evaluated `(action, parameter tuple)` pairs.
pub const DEFAULT_TRANSITION_BUDGET: u64 = 1_000_000;

struct Env<'a> {
    model: &'a Model,
    action: &'a Action,
    state: &'a [i64],
    args: &'a [i64],
}

impl Env<'_> {
    fn lookup(&self, name: &str) -> i128 {
        if let Some(k) = self.action.params.iter().position(|p| p.name == name) {
            return self.args[k] as i128;
        }
        self.state[self.model.state_index(name).expect("validated model")] as i128
    }
}

fn eval(e: &Expr, env: &Env<'_>) -> i128 {
    match &e.kind {
        ExprKind::Const(c) => *c as i128,
        ExprKind::Var(name) => env.lookup(name),
        ExprKind::Bin(op, l, r) => op.apply(eval(l, env), eval(r, env)),
    }
}

fn holds(g: &Guard, env: &Env<'_>) -> bool {
    match &g.kind {
        GuardKind::Lit(b) => *b,
        GuardKind::Cmp(op, l, r) => op.holds(eval(l, env), eval(r, env)),
        GuardKind::And(ps) => ps.iter().all(|p| holds(p, env)),
        GuardKind::Or(ps) => ps.iter().any(|p| holds(p, env)),
        GuardKind::Not(inner) => !holds(inner, env),
    }
}

/// All post-states of a body; assignments leaving the target's type make
/// their branch infeasible.
fn exec(b: &Body, model: &Model, action: &Action, state: Vec<i64>, args: &[i64], out: &mut Vec<Vec<i64>>) {
    match &b.kind {
        BodyKind::Assign { target, value } => {
            let env = Env { model, action, state: &state, args };
            let v = eval(value, &env);
            let ty = model.var_type(target).expect("validated model");
            if (ty.lo as i128..=ty.hi as i128).contains(&v) {
                let mut next = state;
                next[model.state_index(target).expect("validated model")] = v as i64;
                out.push(next);
            }
        }
        BodyKind::Guarded(g, inner) => {
            if holds(g, &Env { model, action, state: &state, args }) {
                exec(inner, model, action, state, args, out);
            }
        }
        BodyKind::Choice(ps) => {
            for p in ps {
                exec(p, model, action, state.clone(), args, out);
            }
        }
        BodyKind::Seq(ps) => {
            let mut current = vec![state];
            for p in ps {
                let mut next = Vec::new();
                for s in current {
                    exec(p, model, action, s, args, &mut next);
                }
                current = next;
            }
            out.extend(current);
        }
    }
}

/// Successors of `s` with the number of `(action, parameter tuple)` pairs
/// evaluated, ordered by action index, arguments and post-state.
pub fn interpret_step_counted(m: &Model, s: &State) -> (Vec<(Event, State)>, u64) {
    let mut out: Vec<(usize, Event, State)> = Vec::new();
    let mut evaluated = 0;
    for (idx, action) in m.system_actions() {
        let mut args: Vec<i64> = action.params.iter().map(|p| p.lo).collect();
        loop {
            evaluated += 1;
            let env = Env { model: m, action, state: &s.0, args: &args };
            if holds(&action.guard, &env) {
                let mut posts = Vec::new();
                exec(&action.body, m, action, s.0.clone(), &args, &mut posts);
                for p in posts {
                    out.push((idx, Event { label: action.label.clone(), args: args.clone() }, State(p)));
                }
            }
            if !next_tuple(&mut args, action) {
                break;
            }
        }
    }
    out.sort();
    out.dedup();
    (out.into_iter().map(|(_, e, s)| (e, s)).collect(), evaluated)
}

pub fn interpret_step(m: &Model, s: &State) -> Vec<(Event, State)> {
    interpret_step_counted(m, s).0
}

/// Advances `args` to the next parameter tuple in ascending order.
fn next_tuple(args: &mut [i64], action: &Action) -> bool {
    for k in (0..args.len()).rev() {
        if args[k] < action.params[k].hi {
            args[k] += 1;
            return true;
        }
        args[k] = action.params[k].lo;
    }
    false
}

/// Explicit exploration statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExplicitStats {
    pub states_expanded: u64,
    pub transitions_evaluated: u64,
}

/// Breadth-first search of the original's state graph, reporting the
/// first visited state where the mutant can take a step the original
/// cannot. The search order matches the symbolic engine's.
pub fn explicit_check(orig: &Model, mutant: &Model, max: usize, budget: u64) -> (Exploration, ExplicitStats) {
    let space = StepVarSpace::for_pair(orig, mutant).ok();
    let key = |e: &Event| space.as_ref().and_then(|s| s.label_code(&e.label)).unwrap_or(i64::MAX);
    let mut stats = ExplicitStats::default();
    let mut exploration = Exploration { verdict: Verdict::Conforming { depth: max }, states_expanded: 0, states_visited: 1 };
    if orig.state_def != mutant.state_def {
        exploration.verdict = Verdict::Inconclusive { reason: "state spaces differ".into() };
        return (exploration, stats);
    }

    let unsafe_witness = |s: &State, stats: &mut ExplicitStats| -> Option<(Event, State)> {
        let (o, n1) = interpret_step_counted(orig, s);
        let (m, n2) = interpret_step_counted(mutant, s);
        stats.transitions_evaluated += n1 + n2;
        let allowed: HashSet<&(Event, State)> = o.iter().collect();
        m.into_iter().filter(|step| !allowed.contains(step)).min_by(|a, b| {
            (key(&a.0), &a.0.args, &a.1).cmp(&(key(&b.0), &b.0.args, &b.1))
        })
    };
    let over_budget = |stats: &ExplicitStats| stats.transitions_evaluated > budget;

    let init = State(orig.init.clone());
    if let Some(w) = unsafe_witness(&init, &mut stats) {
        exploration.verdict = Verdict::NonConforming { unsafe_state: init, trace: vec![], witness: w };
        return (exploration, stats);
    }
    let mut visited: HashSet<State> = HashSet::from([init.clone()]);
    let mut queue: VecDeque<(State, Vec<Event>)> = VecDeque::from([(init, Vec::new())]);
    while let Some((s0, trace)) = queue.pop_front() {
        if trace.len() >= max {
            continue;
        }
        if over_budget(&stats) {
            exploration.verdict = Verdict::Inconclusive { reason: format!("explicit transition budget {budget} exhausted") };
            break;
        }
        stats.states_expanded += 1;
        let (next, n) = interpret_step_counted(orig, &s0);
        stats.transitions_evaluated += n;
        for (event, s1) in next {
            if !visited.insert(s1.clone()) {
                continue;
            }
            exploration.states_visited += 1;
            let mut t1 = trace.clone();
            t1.push(event);
            if let Some(w) = unsafe_witness(&s1, &mut stats) {
                exploration.verdict = Verdict::NonConforming { unsafe_state: s1, trace: t1, witness: w };
                exploration.states_expanded = stats.states_expanded;
                return (exploration, stats);
            }
            queue.push_back((s1, t1));
        }
    }
    exploration.states_expanded = stats.states_expanded;
    (exploration, stats)
}

/// Every state the trace can end in when replayed from the initial state.
/// Empty if some event is not executable.
pub fn replay(m: &Model, trace: &[Event]) -> BTreeSet<State> {
    let mut current = BTreeSet::from([State(m.init.clone())]);
    for e in trace {
        current = current
            .iter()
            .flat_map(|s| interpret_step(m, s))
            .filter(|(ev, _)| ev == e)
            .map(|(_, s)| s)
            .collect();
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::Fixture;
    use crate::model::parse_model;

    fn cas() -> Model {
        parse_model(&Fixture::Cas1.source()).unwrap()
    }

    #[test]
    fn after_tries_every_wait_time() {
        let m = cas();
        let (steps, evaluated) = interpret_step_counted(&m, &State(vec![3, 0, 0, 0, 0, 0]));
        let after: Vec<_> = steps.iter().filter(|(e, _)| e.label == "after").collect();
        assert_eq!(after.len(), 1);
        assert_eq!(after[0].0.args, vec![20]);
        assert_eq!(evaluated, 271 + 10);
    }

    #[test]
    fn init_steps() {
        let m = cas();
        let steps = interpret_step(&m, &State(m.init.clone()));
        let labels: Vec<String> = steps.iter().map(|(e, _)| e.to_string()).collect();
        assert_eq!(labels, vec!["Lock", "Close"]);
    }

    #[test]
    fn no_enabled_action() {
        let m = parse_model(
            "type(t, X) :- X in 0..3.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
             as :- actions('a'::(x #< 2) => (x := x + 1)), dood('a').",
        )
        .unwrap();
        assert!(interpret_step(&m, &State(vec![3])).is_empty());
    }

    #[test]
    fn out_of_range_assignment_is_infeasible() {
        let m = parse_model(
            "type(t, X) :- X in 0..3.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
             as :- actions('a'::(true) => (x := x + 2 [] x := 0)), dood('a').",
        )
        .unwrap();
        let posts: Vec<i64> = interpret_step(&m, &State(vec![2])).into_iter().map(|(_, s)| s.0[0]).collect();
        assert_eq!(posts, vec![0]);
    }

    #[test]
    fn self_check_conforms() {
        let m = cas();
        let (r, stats) = explicit_check(&m, &m, 20, DEFAULT_TRANSITION_BUDGET);
        assert_eq!(r.verdict, Verdict::Conforming { depth: 20 });
        assert!(stats.states_expanded > 10);
    }

    #[test]
    fn budget_exhaustion_is_inconclusive() {
        let m = cas();
        let (r, _) = explicit_check(&m, &m, 20, 1000);
        assert!(matches!(r.verdict, Verdict::Inconclusive { .. }));
    }

    #[test]
    fn replay_follows_a_trace() {
        let m = cas();
        let trace = vec![
            Event { label: "Close".into(), args: vec![] },
            Event { label: "Lock".into(), args: vec![] },
            Event { label: "after".into(), args: vec![20] },
        ];
        assert_eq!(replay(&m, &trace), BTreeSet::from([State(vec![2, 0, 0, 1, 0, 0])]));
        assert_eq!(replay(&m, &trace[1..2]), BTreeSet::from([State(vec![5, 0, 0, 0, 0, 0])]));
        assert!(replay(&m, &trace[2..]).is_empty());
    }
}
