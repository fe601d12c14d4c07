//! Symbolic refinement checking of action systems.
//!
//! Given an original model and a mutant, the checker first looks for a
//! mutant action that can take a step no original action allows (an unsafe
//! state anywhere in the state space), then explores the original's
//! reachable states breadth-first to find such a state together with the
//! shortest event trace leading to it. Both phases are driven by a
//! finite-domain constraint solver over one-step formulas; an explicit
//! enumerating checker is included as a reference oracle.

pub mod campaign;
pub mod fixture;
pub mod formula;
pub mod model;
pub mod mutation;
pub mod oracle;
pub mod reachability;
pub mod refinement;
pub mod semantics;
pub mod solver;

pub use model::{check_normal_form, parse_model, Model, ModelError};
