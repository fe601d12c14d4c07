//! Bounded breadth-first search of the original system for a reachable
//! unsafe state.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::Formula;
use crate::model::Model;
use crate::refinement::NonRefinementConstraint;
use crate::semantics::{translate_system, SemanticsError, StepVarSpace};
use crate::solver::{Problem, Solver, SolverError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(pub Vec<i64>);

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub label: String,
    pub args: Vec<i64>,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return f.write_str(&self.label);
        }
        let parts: Vec<String> = self.args.iter().map(|v| v.to_string()).collect();
        write!(f, "{}({})", self.label, parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    NonConforming { unsafe_state: State, trace: Vec<Event>, witness: (Event, State) },
    /// No unsafe state within `depth` steps of the initial state.
    Conforming { depth: usize },
    Inconclusive { reason: String },
}

/// Verdict plus search statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    pub verdict: Verdict,
    pub states_expanded: u64,
    pub states_visited: u64,
}

/// Turns a solution over `space` into the event and post-state it
/// describes. `arity` strips unused argument slots.
pub fn decode_step(space: &StepVarSpace, solution: &[i64], arity: impl Fn(&str) -> usize) -> (Event, State) {
    let label = space.labels[solution[space.label_var()] as usize].clone();
    let n = arity(&label);
    let args = (0..n).map(|k| solution[space.arg(k)]).collect();
    let post = (0..space.n_state()).map(|i| solution[space.post(i)]).collect();
    (Event { label, args }, State(post))
}

/// One-step successors of the original system from a fixed state.
pub struct SuccessorOracle<'a> {
    model: &'a Model,
    space: StepVarSpace,
    problem: Problem,
}

impl<'a> SuccessorOracle<'a> {
    pub fn new(model: &'a Model, space: &StepVarSpace) -> Result<Self, SemanticsError> {
        let formula = translate_system(model, space)?;
        Ok(SuccessorOracle { model, space: space.clone(), problem: Problem::new(space.domains(), formula) })
    }

    pub fn formula(&self) -> &Formula {
        &self.problem.formula
    }

    /// Every `(event, post)` pair, ordered by label code, arguments and
    /// post-state.
    pub fn successors(&self, s: &State, solver: &mut Solver) -> Result<Vec<(Event, State)>, SolverError> {
        let mut p = self.problem.clone();
        for (i, v) in s.0.iter().enumerate() {
            p.pin(self.space.pre(i), *v);
        }
        let projection = self.space.event_and_post();
        let offset = self.space.label_var();
        let rows = solver.enumerate(&p, &projection, None)?;
        Ok(rows
            .into_iter()
            .map(|row| {
                let mut full = vec![0; self.space.num_vars()];
                full[offset..].copy_from_slice(&row);
                decode_step(&self.space, &full, |l| self.model.action(l).map_or(0, |a| a.params.len()))
            })
            .collect())
    }
}

pub fn successors(orig: &Model, s: &State, solver: &mut Solver) -> Result<Vec<(Event, State)>, SolverError> {
    let space = StepVarSpace::new(orig);
    SuccessorOracle::new(orig, &space).expect("normal-form model").successors(s, solver)
}

/// Witness step from `s` if `s` is unsafe for the constraint.
pub fn check_unsafe(
    c: &NonRefinementConstraint,
    s: &State,
    solver: &mut Solver,
) -> Result<Option<(Event, State)>, SolverError> {
    if c.formula == Formula::False {
        return Ok(None);
    }
    let mut p = c.problem();
    for (i, v) in s.0.iter().enumerate() {
        p.pin(c.space.pre(i), *v);
    }
    Ok(solver.solve(&p)?.map(|sol| decode_step(&c.space, &sol, |_| c.arity)))
}

/// Breadth-first search from `init` through the original system. A node
/// is expanded only while its trace is shorter than `max`; a state is
/// tested for unsafety when it is first visited.
pub fn reach_non_refine(
    orig: &Model,
    c: &NonRefinementConstraint,
    max: usize,
    init: &State,
    solver: &mut Solver,
) -> Result<Exploration, SemanticsError> {
    let succ = SuccessorOracle::new(orig, &c.space)?;
    let mut stats = Exploration { verdict: Verdict::Conforming { depth: max }, states_expanded: 0, states_visited: 1 };
    let inconclusive = |e: SolverError| Verdict::Inconclusive { reason: e.to_string() };

    match check_unsafe(c, init, solver) {
        Err(e) => return Ok(Exploration { verdict: inconclusive(e), ..stats }),
        Ok(Some(witness)) => {
            stats.verdict = Verdict::NonConforming { unsafe_state: init.clone(), trace: Vec::new(), witness };
            return Ok(stats);
        }
        Ok(None) => {}
    }

    let mut visited: HashSet<State> = HashSet::from([init.clone()]);
    let mut queue: VecDeque<(State, Vec<Event>)> = VecDeque::from([(init.clone(), Vec::new())]);
    while let Some((s0, trace)) = queue.pop_front() {
        if trace.len() >= max {
            continue;
        }
        stats.states_expanded += 1;
        let next = match succ.successors(&s0, solver) {
            Ok(n) => n,
            Err(e) => return Ok(Exploration { verdict: inconclusive(e), ..stats }),
        };
        for (event, s1) in next {
            if !visited.insert(s1.clone()) {
                continue;
            }
            stats.states_visited += 1;
            let mut t1 = trace.clone();
            t1.push(event);
            match check_unsafe(c, &s1, solver) {
                Err(e) => return Ok(Exploration { verdict: inconclusive(e), ..stats }),
                Ok(Some(witness)) => {
                    stats.verdict = Verdict::NonConforming { unsafe_state: s1, trace: t1, witness };
                    return Ok(stats);
                }
                Ok(None) => queue.push_back((s1, t1)),
            }
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::Fixture;
    use crate::model::{parse_model, NodePath};
    use crate::mutation::{apply, MutantSpec, Operator};
    use crate::refinement::{build_nonrefinement_constraint, find_mutated_action, FindResult};

    fn cas() -> Model {
        parse_model(&Fixture::Cas1.source()).unwrap()
    }

    fn ev(label: &str, args: &[i64]) -> Event {
        Event { label: label.into(), args: args.to_vec() }
    }

    #[test]
    fn init_can_lock() {
        let m = cas();
        let s = successors(&m, &State(m.init.clone()), &mut Solver::default()).unwrap();
        assert!(s.contains(&(ev("Lock", &[]), State(vec![5, 0, 0, 0, 0, 0]))), "{s:?}");
    }

    #[test]
    fn closed_and_locked_waits_twenty() {
        let m = cas();
        let s = successors(&m, &State(vec![3, 0, 0, 0, 0, 0]), &mut Solver::default()).unwrap();
        assert_eq!(s[0], (ev("after", &[20]), State(vec![2, 0, 0, 1, 0, 0])));
        assert_eq!(s.iter().filter(|(e, _)| e.label == "after").count(), 1);
    }

    #[test]
    fn dead_state_has_no_successors() {
        let m = parse_model(
            "type(t, X) :- X in 0..3.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
             as :- actions('a'::(x #< 2) => (x := x + 1)), dood('a').",
        )
        .unwrap();
        assert!(successors(&m, &State(vec![2]), &mut Solver::default()).unwrap().is_empty());
    }

    fn lock_mutant(orig: &Model) -> Model {
        let spec = MutantSpec {
            operator: Operator::GuardTrue,
            location: NodePath(vec![orig.action_index("Lock").unwrap(), 1, 1, 0]),
            original: "aState #= 4 /\\ fromArmed #\\= 1".into(),
            replacement: "true".into(),
        };
        apply(orig, &spec).unwrap()
    }

    #[test]
    fn init_is_unsafe_for_the_lock_mutant() {
        let orig = cas();
        let mutant = lock_mutant(&orig);
        let FindResult::Found(c) = find_mutated_action(&orig, &mutant, &mut Solver::default()).unwrap() else {
            panic!()
        };
        let init = State(orig.init.clone());
        let w = check_unsafe(&c, &init, &mut Solver::default()).unwrap();
        assert_eq!(w, Some((ev("Lock", &[]), State(vec![3, 0, 0, 0, 0, 0]))));
        let r = reach_non_refine(&orig, &c, 20, &init, &mut Solver::default()).unwrap();
        assert_eq!(
            r.verdict,
            Verdict::NonConforming {
                unsafe_state: init,
                trace: vec![],
                witness: (ev("Lock", &[]), State(vec![3, 0, 0, 0, 0, 0]))
            }
        );
    }

    #[test]
    fn identical_constraint_is_safe_everywhere() {
        let m = cas();
        let space = StepVarSpace::new(&m);
        let i = m.action_index("Unlock").unwrap();
        let c = build_nonrefinement_constraint(&m, &m.actions[i], i, &space).unwrap();
        let r = reach_non_refine(&m, &c, 20, &State(m.init.clone()), &mut Solver::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Conforming { depth: 20 });
        assert!(r.states_visited > 10);
    }

    #[test]
    fn depth_bound_masks_a_deeper_fault() {
        let orig = parse_model(
            "type(t, X) :- X in 0..5.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
             as :- actions('inc'::(x #< 5) => (x := x + 1), 'reset'::(x #= 5) => (x := 0)), dood('inc' [] 'reset').",
        )
        .unwrap();
        let mutant = parse_model(&orig.to_string().replace("x #= 5", "x #= 1")).unwrap();
        let FindResult::Found(c) = find_mutated_action(&orig, &mutant, &mut Solver::default()).unwrap() else {
            panic!()
        };
        let init = State(vec![0]);
        let r0 = reach_non_refine(&orig, &c, 0, &init, &mut Solver::default()).unwrap();
        assert_eq!(r0.verdict, Verdict::Conforming { depth: 0 });
        let r1 = reach_non_refine(&orig, &c, 1, &init, &mut Solver::default()).unwrap();
        let Verdict::NonConforming { unsafe_state, trace, witness } = r1.verdict else { panic!() };
        assert_eq!((unsafe_state, trace), (State(vec![1]), vec![ev("inc", &[])]));
        assert_eq!(witness, (ev("reset", &[]), State(vec![0])));
    }

    #[test]
    fn display_forms() {
        assert_eq!(ev("after", &[20]).to_string(), "after(20)");
        assert_eq!(ev("Lock", &[]).to_string(), "Lock");
        assert_eq!(State(vec![6, 0]).to_string(), "[6,0]");
        let v = Verdict::Conforming { depth: 3 };
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"kind":"conforming","depth":3}"#);
    }
}
