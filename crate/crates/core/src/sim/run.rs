use std::collections::BTreeMap;

use thiserror::Error;

use crate::asm::{step, Agent, AsmError, Elem, GridState, Note, StepLog};
use crate::brokering::get_broker_perf;
use crate::model::{init_state, InitError, JobState, View};
use crate::scenario::Scenario;

use super::agents::{EnvAgent, JobAgent, LrmAgent};
use super::report::{JobReport, Outcome, RunReport};
use super::trace::Trace;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Init(#[from] InitError),
    /// The agents' combined update set was inconsistent; `trace` holds every earlier step.
    #[error("engine fault: {error}")]
    Engine { error: AsmError, trace: Trace },
}

/// A scenario being simulated step by step.
pub struct Simulation<'s> {
    scenario: &'s Scenario,
    state: GridState,
    next_step: u64,
    agents: Vec<Box<dyn Agent + 's>>,
    trace: Trace,
    notes: Vec<Note>,
    steps_in: BTreeMap<Elem, BTreeMap<&'static str, u64>>,
    submitted_at: BTreeMap<Elem, u64>,
    finished_at: BTreeMap<Elem, u64>,
    perf_history: BTreeMap<Elem, Vec<(u64, f64)>>,
}

impl<'s> Simulation<'s> {
    pub fn new(scenario: &'s Scenario) -> Result<Self, InitError> {
        let state = init_state(scenario)?;
        let mut agents: Vec<Box<dyn Agent + 's>> = vec![Box::new(EnvAgent { scenario })];
        for j in scenario.jobs.keys() {
            agents.push(Box::new(JobAgent { scenario, job: j.clone() }));
        }
        for h in scenario.hosts.keys() {
            agents.push(Box::new(LrmAgent::new(scenario, h.clone())));
        }
        let perf_history = scenario
            .brokers
            .keys()
            .map(|b| (b.clone(), vec![(0, get_broker_perf(scenario, &state, b))]))
            .collect();
        Ok(Simulation {
            scenario,
            state,
            next_step: 0,
            agents,
            trace: Trace::default(),
            notes: Vec::new(),
            steps_in: BTreeMap::new(),
            submitted_at: BTreeMap::new(),
            finished_at: BTreeMap::new(),
            perf_history,
        })
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    /// Number of the step `step_once` runs next.
    pub fn next_step(&self) -> u64 {
        self.next_step
    }

    /// All jobs are done or failed and none of their processes is still live.
    pub fn is_finished(&self) -> bool {
        let view = View::new(self.scenario, &self.state);
        self.scenario
            .jobs
            .keys()
            .all(|j| view.is_terminal(j) && view.live_processes(j).is_empty())
    }

    pub fn step_once(&mut self) -> Result<StepLog, AsmError> {
        let n = self.next_step;
        {
            let view = View::new(self.scenario, &self.state);
            for j in self.scenario.jobs.keys() {
                let key = view.job_state(j).map_or("undef", JobState::keyword);
                *self.steps_in.entry(j.clone()).or_default().entry(key).or_default() += 1;
            }
        }
        let agents: Vec<&dyn Agent> = self.agents.iter().map(|a| a.as_ref()).collect();
        let log = step(&mut self.state, &agents, self.scenario.config.choose, n)?;
        self.next_step += 1;
        self.trace.record(&log);
        self.notes.extend(log.notes.iter().cloned());

        for f in &log.fired {
            if let Some((j, _)) = self.scenario.jobs.get_key_value(f.agent.as_str()) {
                self.submitted_at.entry(j.clone()).or_insert(n);
            }
        }
        let view = View::new(self.scenario, &self.state);
        for j in self.scenario.jobs.keys() {
            if let Some(s) = view.job_state(j) {
                if s.is_terminal() {
                    self.finished_at.entry(j.clone()).or_insert(n);
                }
            }
        }
        for (b, history) in self.perf_history.iter_mut() {
            let v = get_broker_perf(self.scenario, &self.state, b);
            if history.last().map(|(_, last)| *last) != Some(v) {
                history.push((n, v));
            }
        }
        Ok(log)
    }

    /// Steps until finished or the step budget is spent.
    pub fn run_to_end(&mut self) -> Result<(), AsmError> {
        while !self.is_finished() && self.next_step < self.scenario.config.max_steps {
            self.step_once()?;
        }
        Ok(())
    }

    pub fn report(&self) -> RunReport {
        let view = View::new(self.scenario, &self.state);
        let jobs: BTreeMap<Elem, JobReport> = self
            .scenario
            .jobs
            .keys()
            .map(|j| {
                let report = JobReport {
                    id: j.clone(),
                    state: view.job_state(j),
                    reason: view.fail_reason(j),
                    broker: view.submitted_to_any_broker(j).cloned(),
                    host: view.mapped_host(j),
                    submitted_at: self.submitted_at.get(j).copied(),
                    finished_at: self.finished_at.get(j).copied(),
                    steps_in: self.steps_in.get(j).cloned().unwrap_or_default(),
                };
                (j.clone(), report)
            })
            .collect();
        let outcome = if !self.is_finished() {
            Outcome::InFlight
        } else if jobs.values().all(|j| j.state == Some(JobState::Done)) {
            Outcome::AllDone
        } else {
            Outcome::SomeFailed
        };
        RunReport {
            steps: self.next_step,
            outcome,
            jobs,
            perf_history: self.perf_history.clone(),
            notes: self.notes.clone(),
        }
    }

    pub fn into_parts(self) -> (GridState, Trace) {
        (self.state, self.trace)
    }
}

/// Runs a validated scenario to completion (or its step budget).
pub fn run(scenario: &Scenario) -> Result<(RunReport, Trace), SimError> {
    let mut sim = Simulation::new(scenario)?;
    if let Err(error) = sim.run_to_end() {
        return Err(SimError::Engine { error, trace: sim.trace.clone() });
    }
    let report = sim.report();
    Ok((report, sim.trace))
}
