//! Minimal abstract state machine kernel.
//!
//! States are interpretations of a fixed signature; rules stage updates into
//! an [`UpdateSet`] which is fired atomically when consistent.

mod choose;
mod signature;
mod state;
mod step;
mod update;
mod value;

use thiserror::Error;

pub use choose::{mix3, mix64, ChooseMode, ChoosePolicy, Chooser};
pub use signature::{Codomain, FunctionDecl, Signature, RESERVE};
pub use state::GridState;
pub use step::{
    step, Agent, AppliedUpdate, AttributedConflict, FiredRule, Firing, Note, StepContext, StepLog,
    KERNEL_AGENT,
};
pub use update::{Conflict, Update, UpdateSet};
pub use value::{Elem, Location, Real, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AsmError {
    #[error("undeclared function '{0}'")]
    UndeclaredFunction(String),
    #[error("function '{function}' has arity {expected}, got {got} arguments")]
    ArityMismatch { function: String, expected: usize, got: usize },
    #[error("value {value} does not fit the codomain of {location}")]
    CodomainMismatch { location: String, value: String },
    #[error("'{0}' is not a universe")]
    NotAUniverse(String),
    #[error("inconsistent update set: {}", join(.0))]
    Inconsistent(Vec<Conflict>),
    #[error("inconsistent update set at step {step}: {}", join(.conflicts))]
    AgentConflict { step: u64, conflicts: Vec<AttributedConflict> },
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
