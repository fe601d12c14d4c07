//! Mutant checking driver and batch reports.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::Model;
use crate::mutation::{enumerate_mutants, MutantSpec, Operator};
use crate::oracle::{explicit_check, DEFAULT_TRANSITION_BUDGET};
use crate::reachability::{reach_non_refine, Event, State, Verdict};
use crate::refinement::{Candidate, CandidateSearch};
use crate::semantics::SemanticsError;
use crate::solver::{Solver, SolverConfig, SolverStats};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Symbolic,
    Explicit,
    Both,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symbolic" => Ok(Engine::Symbolic),
            "explicit" => Ok(Engine::Explicit),
            "both" => Ok(Engine::Both),
            _ => Err(format!("unknown engine `{s}` (expected symbolic, explicit or both)")),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Symbolic => "symbolic",
            Engine::Explicit => "explicit",
            Engine::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Nonconforming,
    /// No mutant action can leave the original's behaviour anywhere.
    EquivProved,
    /// Unsafe states exist but none is reachable within the depth bound.
    EquivBounded,
    Inconclusive,
}

impl VerdictKind {
    pub const ALL: [VerdictKind; 4] =
        [VerdictKind::Nonconforming, VerdictKind::EquivProved, VerdictKind::EquivBounded, VerdictKind::Inconclusive];

    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Nonconforming => "nonconforming",
            VerdictKind::EquivProved => "equiv_proved",
            VerdictKind::EquivBounded => "equiv_bounded",
            VerdictKind::Inconclusive => "inconclusive",
        }
    }

    pub fn is_conforming(self) -> bool {
        matches!(self, VerdictKind::EquivProved | VerdictKind::EquivBounded)
    }

    /// Process exit code of a single check.
    pub fn exit_code(self) -> i32 {
        match self {
            VerdictKind::EquivProved | VerdictKind::EquivBounded => 0,
            VerdictKind::Nonconforming => 1,
            VerdictKind::Inconclusive => 2,
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub max_depth: usize,
    pub node_budget: u64,
    /// Wall-clock limit per solver call.
    pub solve_timeout: Duration,
    /// Wall-clock limit for the whole check of one mutant.
    pub mutant_timeout: Option<Duration>,
    pub explicit_budget: u64,
    pub engine: Engine,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            max_depth: 20,
            node_budget: 1_000_000,
            solve_timeout: Duration::from_secs(10),
            mutant_timeout: None,
            explicit_budget: DEFAULT_TRANSITION_BUDGET,
            engine: Engine::Symbolic,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub find_secs: f64,
    pub reach_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub unsafe_state: State,
    pub trace: Vec<Event>,
    pub witness: (Event, State),
}

/// Outcome of the symbolic pipeline for one mutant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicResult {
    pub verdict: VerdictKind,
    pub mutated_action: Option<String>,
    pub counterexample: Option<Counterexample>,
    pub detail: Option<String>,
    pub timings: Timings,
    pub solver: SolverStats,
    pub candidates: usize,
    /// Actions whose constraint check hit a solver limit.
    pub skipped_actions: Vec<String>,
    pub states_visited: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitResult {
    pub verdict: VerdictKind,
    pub counterexample: Option<Counterexample>,
    pub detail: Option<String>,
    pub states_expanded: u64,
    pub transitions_evaluated: u64,
    pub secs: f64,
}

/// Runs the symbolic pipeline: find a mutated action, search for a
/// reachable unsafe state, and move on to the next candidate action when
/// none is reachable.
pub fn check_symbolic(orig: &Model, mutant: &Model, cfg: &CheckConfig) -> Result<SymbolicResult, SemanticsError> {
    let start = Instant::now();
    let mut solver = Solver::new(SolverConfig {
        node_budget: cfg.node_budget,
        timeout: Some(cfg.solve_timeout),
        deadline: cfg.mutant_timeout.map(|t| start + t),
    });
    let mut result = SymbolicResult {
        verdict: VerdictKind::EquivProved,
        mutated_action: None,
        counterexample: None,
        detail: None,
        timings: Timings::default(),
        solver: SolverStats::default(),
        candidates: 0,
        skipped_actions: Vec::new(),
        states_visited: 0,
    };
    let mut search = CandidateSearch::new(orig, mutant)?;
    let init = State(orig.init.clone());
    let mut find = Duration::ZERO;
    let mut reach = Duration::ZERO;
    let mut bounded = false;
    let mut reach_failure = None;
    loop {
        let t = Instant::now();
        let candidate = search.next_candidate(&mut solver)?;
        find += t.elapsed();
        let constraint = match candidate {
            None => break,
            Some(Candidate::Inconclusive { label, reason, .. }) => {
                result.skipped_actions.push(label.clone());
                reach_failure.get_or_insert(format!("action `{label}`: {reason}"));
                continue;
            }
            Some(Candidate::Found { constraint, .. }) => constraint,
        };
        result.candidates += 1;
        result.mutated_action.get_or_insert_with(|| constraint.label.clone());
        let t = Instant::now();
        let exploration = reach_non_refine(orig, &constraint, cfg.max_depth, &init, &mut solver)?;
        reach += t.elapsed();
        result.states_visited += exploration.states_visited;
        match exploration.verdict {
            Verdict::NonConforming { unsafe_state, trace, witness } => {
                result.verdict = VerdictKind::Nonconforming;
                result.mutated_action = Some(constraint.label.clone());
                result.counterexample = Some(Counterexample { unsafe_state, trace, witness });
                reach_failure = None;
                break;
            }
            Verdict::Conforming { .. } => bounded = true,
            Verdict::Inconclusive { reason } => {
                reach_failure.get_or_insert(format!("action `{}`: {reason}", constraint.label));
            }
        }
    }
    if result.verdict != VerdictKind::Nonconforming {
        result.verdict = if let Some(reason) = reach_failure {
            result.detail = Some(reason);
            VerdictKind::Inconclusive
        } else if bounded {
            VerdictKind::EquivBounded
        } else {
            VerdictKind::EquivProved
        };
    }
    result.timings = Timings {
        find_secs: find.as_secs_f64(),
        reach_secs: reach.as_secs_f64(),
        total_secs: start.elapsed().as_secs_f64(),
    };
    result.solver = solver.stats;
    Ok(result)
}

pub fn check_explicit(orig: &Model, mutant: &Model, cfg: &CheckConfig) -> ExplicitResult {
    let start = Instant::now();
    let (exploration, stats) = explicit_check(orig, mutant, cfg.max_depth, cfg.explicit_budget);
    let (verdict, counterexample, detail) = match exploration.verdict {
        Verdict::NonConforming { unsafe_state, trace, witness } => {
            (VerdictKind::Nonconforming, Some(Counterexample { unsafe_state, trace, witness }), None)
        }
        Verdict::Conforming { .. } => (VerdictKind::EquivBounded, None, None),
        Verdict::Inconclusive { reason } => (VerdictKind::Inconclusive, None, Some(reason)),
    };
    ExplicitResult {
        verdict,
        counterexample,
        detail,
        states_expanded: stats.states_expanded,
        transitions_evaluated: stats.transitions_evaluated,
        secs: start.elapsed().as_secs_f64(),
    }
}

/// Whether two conclusive results agree on conformance and, for
/// non-conforming ones, on the unsafe state and trace length. `None` if
/// either side is inconclusive.
pub fn agree(symbolic: &SymbolicResult, explicit: &ExplicitResult) -> Option<bool> {
    if symbolic.verdict == VerdictKind::Inconclusive || explicit.verdict == VerdictKind::Inconclusive {
        return None;
    }
    Some(match (&symbolic.counterexample, &explicit.counterexample) {
        (None, None) => true,
        (Some(a), Some(b)) => a.unsafe_state == b.unsafe_state && a.trace.len() == b.trace.len(),
        _ => false,
    })
}

/// One mutant to check. `model` holds the load error if the file did not
/// parse.
#[derive(Debug, Clone)]
pub struct MutantInput {
    pub id: usize,
    pub file: Option<String>,
    pub spec: Option<MutantSpec>,
    pub model: Result<Model, String>,
}

/// The original as mutant 0 followed by every generated mutant.
pub fn generate_inputs(orig: &Model, ops: &[Operator]) -> Vec<MutantInput> {
    let mut out = vec![MutantInput { id: 0, file: None, spec: None, model: Ok(orig.clone()) }];
    for (i, m) in enumerate_mutants(orig, ops).into_iter().enumerate() {
        out.push(MutantInput { id: i + 1, file: None, spec: Some(m.spec), model: Ok(m.model) });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutantReport {
    pub id: usize,
    pub file: Option<String>,
    pub spec: Option<MutantSpec>,
    /// Symbolic verdict, or the explicit one when only that engine ran.
    pub verdict: VerdictKind,
    pub detail: Option<String>,
    pub mutated_action: Option<String>,
    pub counterexample: Option<Counterexample>,
    pub timings: Timings,
    pub symbolic: Option<SymbolicResult>,
    pub explicit: Option<ExplicitResult>,
    pub agreement: Option<bool>,
}

pub fn check_one(orig: &Model, input: &MutantInput, cfg: &CheckConfig) -> MutantReport {
    let mut report = MutantReport {
        id: input.id,
        file: input.file.clone(),
        spec: input.spec.clone(),
        verdict: VerdictKind::Inconclusive,
        detail: None,
        mutated_action: None,
        counterexample: None,
        timings: Timings::default(),
        symbolic: None,
        explicit: None,
        agreement: None,
    };
    let mutant = match &input.model {
        Ok(m) => m,
        Err(e) => {
            report.detail = Some(e.clone());
            return report;
        }
    };
    if cfg.engine != Engine::Explicit {
        match check_symbolic(orig, mutant, cfg) {
            Ok(s) => {
                report.verdict = s.verdict;
                report.detail = s.detail.clone();
                report.mutated_action = s.mutated_action.clone();
                report.counterexample = s.counterexample.clone();
                report.timings = s.timings;
                report.symbolic = Some(s);
            }
            Err(e) => report.detail = Some(e.to_string()),
        }
    }
    if cfg.engine != Engine::Symbolic {
        let e = check_explicit(orig, mutant, cfg);
        if cfg.engine == Engine::Explicit {
            report.verdict = e.verdict;
            report.detail = e.detail.clone();
            report.counterexample = e.counterexample.clone();
            report.timings = Timings { find_secs: 0.0, reach_secs: e.secs, total_secs: e.secs };
        }
        report.agreement = report.symbolic.as_ref().and_then(|s| agree(s, &e));
        report.explicit = Some(e);
    }
    report
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub total: f64,
    pub avg: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Aggregate {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Aggregate::default();
        }
        let total: f64 = v.iter().sum();
        Aggregate {
            total,
            avg: total / v.len() as f64,
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mutants: usize,
    pub verdicts: BTreeMap<VerdictKind, usize>,
    pub find: Aggregate,
    pub reach: Aggregate,
    pub total: Aggregate,
    pub wall_secs: f64,
    pub solver_calls: u64,
    pub solver_nodes: u64,
    pub explicit_transitions: u64,
    pub explicit_states: u64,
    pub disagreements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub schema_version: u32,
    pub model: String,
    pub engine: Engine,
    pub max_depth: usize,
    pub node_budget: u64,
    pub mutants: Vec<MutantReport>,
    pub summary: Summary,
}

/// Checks every input on a pool of `jobs` threads; report order follows
/// input order.
pub fn run_batch(model_name: &str, orig: &Model, inputs: &[MutantInput], cfg: &CheckConfig, jobs: usize) -> BatchReport {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    let mutants: Vec<MutantReport> = pool.install(|| inputs.par_iter().map(|i| check_one(orig, i, cfg)).collect());
    let mut summary = summarize(&mutants);
    summary.wall_secs = start.elapsed().as_secs_f64();
    BatchReport {
        schema_version: SCHEMA_VERSION,
        model: model_name.to_string(),
        engine: cfg.engine,
        max_depth: cfg.max_depth,
        node_budget: cfg.node_budget,
        mutants,
        summary,
    }
}

pub fn summarize(mutants: &[MutantReport]) -> Summary {
    let mut verdicts: BTreeMap<VerdictKind, usize> = VerdictKind::ALL.iter().map(|&v| (v, 0)).collect();
    for m in mutants {
        *verdicts.entry(m.verdict).or_default() += 1;
    }
    let sym = mutants.iter().filter_map(|m| m.symbolic.as_ref());
    let exp = mutants.iter().filter_map(|m| m.explicit.as_ref());
    Summary {
        mutants: mutants.len(),
        verdicts,
        find: Aggregate::of(mutants.iter().map(|m| m.timings.find_secs)),
        reach: Aggregate::of(mutants.iter().map(|m| m.timings.reach_secs)),
        total: Aggregate::of(mutants.iter().map(|m| m.timings.total_secs)),
        wall_secs: 0.0,
        solver_calls: sym.clone().map(|s| s.solver.solve_calls).sum(),
        solver_nodes: sym.map(|s| s.solver.nodes).sum(),
        explicit_transitions: exp.clone().map(|e| e.transitions_evaluated).sum(),
        explicit_states: exp.map(|e| e.states_expanded).sum(),
        disagreements: mutants.iter().filter(|m| m.agreement == Some(false)).count(),
    }
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
    fn self_check_is_proved_without_reachability() {
        let m = cas();
        let r = check_symbolic(&m, &m, &CheckConfig::default()).unwrap();
        assert_eq!(r.verdict, VerdictKind::EquivProved);
        assert_eq!(r.candidates, 0);
        assert_eq!(r.timings.reach_secs, 0.0);
    }

    #[test]
    fn unreachable_fault_is_bounded_equivalent() {
        let orig = parse_model(
            "type(t, X) :- X in 0..5.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
             as :- actions('inc'::(x #< 2) => (x := x + 1), 'dec'::(x #= 4) => (x := 3)), dood('inc' [] 'dec').",
        )
        .unwrap();
        let mutant = parse_model(&orig.to_string().replace("x := 3", "x := 2")).unwrap();
        let r = check_symbolic(&orig, &mutant, &CheckConfig::default()).unwrap();
        assert_eq!(r.verdict, VerdictKind::EquivBounded);
        assert_eq!(r.mutated_action.as_deref(), Some("dec"));
        let e = check_explicit(&orig, &mutant, &CheckConfig::default());
        assert_eq!(e.verdict, VerdictKind::EquivBounded);
        assert_eq!(agree(&r, &e), Some(true));
    }

    #[test]
    fn higher_order_mutant_resumes_to_the_reachable_fault() {
        let orig = parse_model(
            "type(t, X) :- X in 0..5.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
             as :- actions('dec'::(x #= 4) => (x := 3), 'inc'::(x #< 2) => (x := x + 1)), dood('dec' [] 'inc').",
        )
        .unwrap();
        let mutant = parse_model(&orig.to_string().replace("x := 3", "x := 2").replace("x + 1", "x + 2")).unwrap();
        let r = check_symbolic(&orig, &mutant, &CheckConfig::default()).unwrap();
        assert_eq!(r.verdict, VerdictKind::Nonconforming);
        assert_eq!(r.candidates, 2);
        assert_eq!(r.mutated_action.as_deref(), Some("inc"));
        assert!(r.counterexample.unwrap().trace.is_empty());
    }

    #[test]
    fn batch_report_is_order_stable() {
        let m = parse_model(&Fixture::CasReduced.source()).unwrap();
        let inputs: Vec<MutantInput> = generate_inputs(&m, &[Operator::CompOpInvert]).into_iter().take(6).collect();
        let cfg = CheckConfig { engine: Engine::Both, ..CheckConfig::default() };
        let a = run_batch("cas_reduced", &m, &inputs, &cfg, 4);
        let b = run_batch("cas_reduced", &m, &inputs, &cfg, 1);
        let ids: Vec<usize> = a.mutants.iter().map(|r| r.id).collect();
        assert_eq!(ids, (0..6).collect::<Vec<_>>());
        let strip = |r: &BatchReport| {
            r.mutants.iter().map(|m| (m.verdict, m.counterexample.clone())).collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.mutants[0].verdict, VerdictKind::EquivProved);
        assert_eq!(a.summary.disagreements, 0);
        let json = serde_json::to_string(&a).unwrap();
        let back: BatchReport = serde_json::from_str(&json).unwrap();
        assert_eq!(strip(&back), strip(&a));
    }

    #[test]
    fn load_errors_are_recorded() {
        let m = cas();
        let input = MutantInput { id: 3, file: Some("x.as".into()), spec: None, model: Err("x.as:1:1: error: boom".into()) };
        let r = check_one(&m, &input, &CheckConfig::default());
        assert_eq!(r.verdict, VerdictKind::Inconclusive);
        assert!(r.detail.unwrap().contains("boom"));
    }

    #[test]
    fn aggregate_of_nothing_is_zero() {
        assert_eq!(Aggregate::of([]), Aggregate::default());
        let a = Aggregate::of([1.0, 3.0]);
        assert_eq!((a.total, a.avg, a.min, a.max), (4.0, 2.0, 1.0, 3.0));
    }
}
