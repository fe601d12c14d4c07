//! Non-refinement constraints and the search for a mutated action.
//!
//! For a mutant action `A` the constraint is `A ∧ ¬O_1 ∧ ... ∧ ¬O_m` over
//! the original's do-od actions `O_j`. Its solutions are exactly the steps
//! the mutant can take and the original cannot. Negated original actions
//! whose label differs from `A`'s are left out: the event label fixed by
//! `A` already falsifies them.

use crate::formula::Formula;
use crate::model::{Action, Model};
use crate::semantics::{translate_action, SemanticsError, StepVarSpace};
use crate::solver::{LimitKind, Problem, Solver, SolverError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonRefinementConstraint {
    pub space: StepVarSpace,
    pub formula: Formula,
    /// Index of the mutant action in the mutant model.
    pub action_index: usize,
    pub label: String,
    pub arity: usize,
}

impl NonRefinementConstraint {
    pub fn problem(&self) -> Problem {
        Problem::new(self.space.domains(), self.formula.clone())
    }
}

pub fn build_nonrefinement_constraint(
    orig: &Model,
    mut_action: &Action,
    action_index: usize,
    space: &StepVarSpace,
) -> Result<NonRefinementConstraint, SemanticsError> {
    let mut parts = vec![translate_action(mut_action, space)?];
    for (_, o) in orig.system_actions() {
        if o.label == mut_action.label {
            parts.push(translate_action(o, space)?.negate());
        }
    }
    Ok(NonRefinementConstraint {
        space: space.clone(),
        formula: Formula::and(parts),
        action_index,
        label: mut_action.label.clone(),
        arity: mut_action.params.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Candidate {
    /// A mutant action with a satisfiable constraint, and the smallest
    /// solution over the whole variable space.
    Found { constraint: NonRefinementConstraint, solution: Vec<i64> },
    /// The solver gave up on this action.
    Inconclusive { action_index: usize, label: String, reason: LimitKind },
}

/// Resumable iteration over the mutant's do-od actions in declaration
/// order, yielding those whose non-refinement constraint is satisfiable.
#[derive(Debug, Clone)]
pub struct CandidateSearch<'a> {
    orig: &'a Model,
    mutant: &'a Model,
    space: StepVarSpace,
    next: usize,
}

impl<'a> CandidateSearch<'a> {
    pub fn new(orig: &'a Model, mutant: &'a Model) -> Result<Self, SemanticsError> {
        Ok(CandidateSearch { orig, mutant, space: StepVarSpace::for_pair(orig, mutant)?, next: 0 })
    }

    pub fn space(&self) -> &StepVarSpace {
        &self.space
    }

    /// Next candidate action, or `None` once every action is processed.
    pub fn next_candidate(&mut self, solver: &mut Solver) -> Result<Option<Candidate>, SemanticsError> {
        while self.next < self.mutant.actions.len() {
            let i = self.next;
            self.next += 1;
            let action = &self.mutant.actions[i];
            if !self.mutant.dood.iter().any(|e| e.label == action.label) {
                continue;
            }
            let constraint = build_nonrefinement_constraint(self.orig, action, i, &self.space)?;
            if constraint.formula == Formula::False {
                continue;
            }
            match solver.solve(&constraint.problem()) {
                Ok(Some(solution)) => return Ok(Some(Candidate::Found { constraint, solution })),
                Ok(None) => {}
                Err(SolverError::ResourceLimit(reason)) => {
                    log::warn!("solver limit ({reason}) on action `{}`; skipping it", action.label);
                    return Ok(Some(Candidate::Inconclusive { action_index: i, label: action.label.clone(), reason }));
                }
            }
        }
        Ok(None)
    }
}

/// Result of looking for the first mutated action.
#[derive(Debug, Clone, PartialEq)]
pub enum FindResult {
    Found(NonRefinementConstraint),
    /// No mutant action can step outside the original: the mutant refines
    /// the original outright.
    NoneFound,
    Inconclusive { action_index: usize },
}

pub fn find_mutated_action(orig: &Model, mutant: &Model, solver: &mut Solver) -> Result<FindResult, SemanticsError> {
    let mut search = CandidateSearch::new(orig, mutant)?;
    Ok(match search.next_candidate(solver)? {
        Some(Candidate::Found { constraint, .. }) => FindResult::Found(constraint),
        Some(Candidate::Inconclusive { action_index, .. }) => FindResult::Inconclusive { action_index },
        None => FindResult::NoneFound,
    })
}
