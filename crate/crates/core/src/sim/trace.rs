use std::io::{self, Write};

use crate::asm::{AppliedUpdate, StepLog};

/// One rule firing with its applied updates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: u64,
    pub agent: String,
    pub rule: &'static str,
    pub updates: Vec<AppliedUpdate>,
}

/// Every firing of a run, in step order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn record(&mut self, log: &StepLog) {
        for f in &log.fired {
            self.events.push(TraceEvent {
                step: log.step,
                agent: f.agent.clone(),
                rule: f.rule,
                updates: f.updates.clone(),
            });
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events of one step, in firing order.
    pub fn step(&self, step: u64) -> impl Iterator<Item = &TraceEvent> + '_ {
        self.events.iter().filter(move |e| e.step == step)
    }

    /// `(step, agent, rule, update)` for every applied update.
    pub fn updates(&self) -> impl Iterator<Item = (&TraceEvent, &AppliedUpdate)> + '_ {
        self.events
            .iter()
            .flat_map(|e| e.updates.iter().map(move |u| (e, u)))
    }
}

/// Writes the trace as tab-separated lines `step agent rule location old new`,
/// one per applied update, in firing order.
pub fn emit_trace(trace: &Trace, sink: &mut impl Write) -> io::Result<()> {
    for (e, u) in trace.updates() {
        writeln!(
            sink,
            "{}\t{}\t{}\t{}\t{}\t{}",
            e.step, e.agent, e.rule, u.location, u.old, u.new
        )?;
    }
    Ok(())
}
