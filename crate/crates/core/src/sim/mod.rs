//! Simulation driver: agents, the step loop, traces, reports and trace checks.

mod agents;
pub mod check;
mod report;
mod run;
mod trace;

pub use agents::{lrm_agent_name, EnvAgent, JobAgent, LrmAgent, ENV_AGENT};
pub use report::{compute_metrics, JobReport, Metrics, Outcome, RunReport};
pub use run::{run, SimError, Simulation};
pub use trace::{emit_trace, Trace, TraceEvent};
