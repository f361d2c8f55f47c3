//! Scenario files: the model, a strict parser, a validator and a writer.

mod parse;
mod types;
mod validate;
mod write;

pub use parse::{parse_scenario, ParseError};
pub use types::*;
pub use validate::*;
