//! Post-hoc checks over traces and states.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::asm::{AsmError, Elem, GridState, StepLog, UpdateSet, Value};
use crate::model::signature::*;
use crate::model::{check_subset_invariants, init_state, InitError, JobState, View};
use crate::scenario::{Mode, Scenario};

use super::trace::Trace;

fn rank(s: Option<JobState>) -> u8 {
    match s {
        None => 0,
        Some(JobState::Submitted) => 1,
        Some(JobState::Waiting) => 2,
        Some(JobState::Running) => 3,
        Some(JobState::Done | JobState::Failed) => 4,
    }
}

/// Whether a job may move from `from` to `to` in one change.
pub fn valid_transition(from: Option<JobState>, to: Option<JobState>) -> bool {
    match (from, to) {
        (_, None) => false,
        (Some(f), _) if f.is_terminal() => false,
        (f, Some(JobState::Done)) => f == Some(JobState::Running),
        (_, Some(JobState::Failed)) => true,
        (Some(JobState::Running), Some(JobState::Waiting)) => true,
        (f, t) => rank(t) > rank(f),
    }
}

/// The distinct jobState values of each job over the trace, starting from undef.
pub fn job_trajectories(trace: &Trace) -> BTreeMap<Elem, Vec<Option<JobState>>> {
    let mut out: BTreeMap<Elem, Vec<Option<JobState>>> = BTreeMap::new();
    for (_, u) in trace.updates() {
        if u.location.function != JOB_STATE || u.old == u.new {
            continue;
        }
        let seq = out.entry(u.location.args[0].clone()).or_insert_with(|| vec![None]);
        let next = u.new.as_keyword().and_then(JobState::from_keyword);
        if seq.last() != Some(&next) {
            seq.push(next);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadTransition {
    pub job: Elem,
    pub from: Option<JobState>,
    pub to: Option<JobState>,
}

pub fn check_trajectories(trace: &Trace) -> Vec<BadTransition> {
    let mut bad = Vec::new();
    for (job, seq) in job_trajectories(trace) {
        for w in seq.windows(2) {
            if !valid_transition(w[0], w[1]) {
                bad.push(BadTransition { job: job.clone(), from: w[0], to: w[1] });
            }
        }
    }
    bad
}

/// State invariants: running processes occupy everything they use, occupants
/// are live users of their resource, done jobs have no live process, and the universe subset relations hold.
pub fn check_state_invariants(scenario: &Scenario, state: &GridState) -> Vec<String> {
    let view = View::new(scenario, state);
    let mut out = Vec::new();
    for p in scenario.processes.keys().filter(|p| view.is_live(p)) {
        if view.is_running(p) {
            for pr in view.used_resources(p) {
                if view.occupant(pr).as_ref() != Some(p) {
                    out.push(format!("running {p} uses {pr} without occupying it"));
                }
            }
        }
    }
    for pr in scenario.resources.keys() {
        if let Some(p) = view.occupant(pr) {
            if !view.is_live(&p) || !view.uses(&p, pr) {
                out.push(format!("{pr} is occupied by {p}, which is not a live user of it"));
            }
        }
    }
    for j in scenario.jobs.keys() {
        if view.job_state(j) == Some(JobState::Done) && !view.live_processes(j).is_empty() {
            out.push(format!("{j} is done but has live processes"));
        }
    }
    for v in check_subset_invariants(state) {
        out.push(v.to_string());
    }
    out
}

/// Flags updates whose arguments are members of no universe before or after the step.
pub fn lint_step(pre: &GridState, post: &GridState, log: &StepLog) -> Vec<String> {
    let mut out = Vec::new();
    for f in &log.fired {
        for u in &f.updates {
            for a in &u.location.args {
                if !pre.in_any_universe(a) && !post.in_any_universe(a) {
                    out.push(format!(
                        "step {}: {}/{} writes {} with non-member {a}",
                        log.step, f.agent, f.rule, u.location
                    ));
                }
            }
        }
    }
    out
}

/// In meta mode: mappedBroker, then submitted(j,b), then mappedHost, then
/// submitted(j,h), each strictly after the previous and never without it.
pub fn check_layer_ordering(scenario: &Scenario, trace: &Trace) -> Vec<String> {
    if scenario.config.mode != Mode::Meta {
        return Vec::new();
    }
    let mut firsts: BTreeMap<&Elem, [Option<u64>; 4]> = BTreeMap::new();
    for (e, u) in trace.updates() {
        let Some(j) = u.location.args.first() else { continue };
        let layer = match u.location.function {
            MAPPED_BROKER => 0,
            MAPPED_HOST => 2,
            SUBMITTED if u.new.is_true() => {
                let target = &u.location.args[1];
                if scenario.brokers.contains_key(target) {
                    1
                } else {
                    3
                }
            }
            _ => continue,
        };
        let slot = &mut firsts.entry(j).or_default()[layer];
        slot.get_or_insert(e.step);
    }
    let mut out = Vec::new();
    for (j, steps) in firsts {
        for i in 1..4 {
            match (steps[i - 1], steps[i]) {
                (Some(a), Some(b)) if a >= b => {
                    out.push(format!("{j}: layer {i} at step {b} is not after layer {} at {a}", i - 1))
                }
                (None, Some(b)) => out.push(format!("{j}: layer {i} at step {b} without layer {}", i - 1)),
                _ => {}
            }
        }
    }
    out
}

/// Handled resources that received more than one handler.
pub fn check_handler_uniqueness(trace: &Trace) -> Vec<Elem> {
    let mut count: BTreeMap<&Elem, usize> = BTreeMap::new();
    for (_, u) in trace.updates() {
        if u.location.function == HANDLER && !u.new.is_undef() && u.old != u.new {
            *count.entry(&u.location.args[0]).or_default() += 1;
        }
    }
    count
        .into_iter()
        .filter(|(_, n)| *n > 1)
        .map(|(pr, _)| pr.clone())
        .collect()
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Asm(#[from] AsmError),
    #[error("step {step}: trace says {location} was {recorded}, replay has {actual}")]
    OldValue { step: u64, location: String, recorded: Value, actual: Value },
}

/// Rebuilds the final state from the initial state and the trace alone.
pub fn replay(scenario: &Scenario, trace: &Trace) -> Result<GridState, ReplayError> {
    let mut state = init_state(scenario)?;
    let mut i = 0;
    let events = &trace.events;
    while i < events.len() {
        let step = events[i].step;
        let mut set = UpdateSet::new();
        while i < events.len() && events[i].step == step {
            for u in &events[i].updates {
                let actual = state.read(&u.location)?;
                if actual != u.old {
                    return Err(ReplayError::OldValue {
                        step,
                        location: u.location.to_string(),
                        recorded: u.old.clone(),
                        actual,
                    });
                }
                set.stage(state.signature(), u.location.clone(), u.new.clone())?;
            }
            i += 1;
        }
        state.fire(&set)?;
    }
    Ok(state)
}
