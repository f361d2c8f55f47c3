use crate::asm::{Elem, GridState, Value};
use crate::scenario::{task_id, Scenario};

use super::entities::{EventKind, FailReason, JobState};
use super::signature::*;

/// Typed reads over a state, resolved against the scenario's static records.
#[derive(Clone, Copy)]
pub struct View<'a> {
    pub scenario: &'a Scenario,
    pub state: &'a GridState,
}

impl<'a> View<'a> {
    pub fn new(scenario: &'a Scenario, state: &'a GridState) -> Self {
        View { scenario, state }
    }

    fn elem(&self, f: &'static str, args: &[&Elem]) -> Option<Elem> {
        match self.state.get(f, args) {
            Value::Elem(e) => Some(e),
            _ => None,
        }
    }

    pub fn job_state(&self, j: &Elem) -> Option<JobState> {
        self.state
            .get(JOB_STATE, &[j])
            .as_keyword()
            .and_then(JobState::from_keyword)
    }

    pub fn is_terminal(&self, j: &Elem) -> bool {
        self.job_state(j).is_some_and(JobState::is_terminal)
    }

    pub fn is_live(&self, p: &Elem) -> bool {
        self.state.is_member(PROCESS, p)
    }

    pub fn live_processes(&self, j: &Elem) -> Vec<&'a Elem> {
        let state = self.state;
        self.scenario
            .jobs
            .get(j)
            .map(|job| {
                job.processes
                    .iter()
                    .filter(|p| state.is_member(PROCESS, p))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn mapped_host(&self, j: &Elem) -> Option<Elem> {
        self.elem(MAPPED_HOST, &[j])
    }

    pub fn mapped_broker(&self, j: &Elem) -> Option<Elem> {
        self.elem(MAPPED_BROKER, &[j])
    }

    pub fn mapped_resource(&self, p: &Elem, ar: &Elem) -> Option<Elem> {
        self.elem(MAPPED_RESOURCE, &[p, ar])
    }

    pub fn mapped(&self, p: &Elem) -> Option<Elem> {
        self.elem(MAPPED, &[p])
    }

    pub fn handler(&self, pr: &Elem) -> Option<Elem> {
        self.elem(HANDLER, &[pr])
    }

    pub fn occupant(&self, pr: &Elem) -> Option<Elem> {
        self.elem(OCCUPANT, &[pr])
    }

    pub fn submitted(&self, j: &Elem, target: &Elem) -> bool {
        self.state.get(SUBMITTED, &[j, target]).is_true()
    }

    pub fn submitted_to_any_host(&self, j: &Elem) -> Option<&'a Elem> {
        self.scenario.hosts.keys().find(|h| self.submitted(j, h))
    }

    pub fn submitted_to_any_broker(&self, j: &Elem) -> Option<&'a Elem> {
        self.scenario.brokers.keys().find(|b| self.submitted(j, b))
    }

    pub fn proc_request(&self, p: &Elem, ar: &Elem) -> bool {
        self.state.get(PROC_REQUEST, &[p, ar]).is_true()
    }

    pub fn uses(&self, p: &Elem, pr: &Elem) -> bool {
        self.state.get(USES, &[p, pr]).is_true()
    }

    pub fn can_use(&self, user: &Elem, pr: &Elem) -> bool {
        self.state.get(CAN_USE, &[user, pr]).is_true()
    }

    pub fn proc_state(&self, p: &Elem) -> Option<&'static str> {
        self.state.get(PROC_STATE, &[p]).as_keyword()
    }

    pub fn is_running(&self, p: &Elem) -> bool {
        self.proc_state(p) == Some("running")
    }

    pub fn event(&self, p: &Elem) -> Option<EventKind> {
        match self.state.get(EVENT, &[&task_id(p)]).as_keyword()? {
            "start" => Some(EventKind::Start),
            "abort" => Some(EventKind::Abort),
            "terminate" => Some(EventKind::Terminate),
            _ => None,
        }
    }

    pub fn fail_reason(&self, j: &Elem) -> Option<FailReason> {
        self.state
            .get(FAIL_REASON, &[j])
            .as_keyword()
            .and_then(FailReason::from_keyword)
    }

    pub fn stall(&self, j: &Elem) -> i64 {
        self.state.get(STALL, &[j]).as_int().unwrap_or(0)
    }

    pub fn started_at(&self, p: &Elem) -> Option<i64> {
        self.state.get(STARTED_AT, &[p]).as_int()
    }

    /// Resources `p` currently uses, in id order.
    pub fn used_resources(&self, p: &Elem) -> Vec<&'a Elem> {
        self.scenario
            .resources
            .keys()
            .filter(|pr| self.uses(p, pr))
            .collect()
    }

    /// Live processes waiting for `pr` in FIFO order `(queuedAt, id)`, excluding the occupant.
    pub fn wait_queue(&self, pr: &Elem) -> Vec<&'a Elem> {
        let occupant = self.occupant(pr);
        let mut queue: Vec<(i64, &'a Elem)> = self
            .scenario
            .processes
            .keys()
            .filter(|p| self.is_live(p) && self.uses(p, pr) && occupant.as_ref() != Some(*p))
            .map(|p| {
                let at = self.state.get(QUEUED_AT, &[p, pr]).as_int().unwrap_or(i64::MAX);
                (at, p)
            })
            .collect();
        queue.sort();
        queue.into_iter().map(|(_, p)| p).collect()
    }

    /// Whether `p` is removed by this step's rules: its job failed, it carries
    /// an abort, or it is running with a terminate.
    pub fn leaving(&self, p: &Elem) -> bool {
        let Some(job) = self.scenario.processes.get(p).map(|q| &q.job) else {
            return false;
        };
        match self.job_state(job) {
            Some(JobState::Failed) => true,
            Some(JobState::Done) => false,
            _ => match self.event(p) {
                Some(EventKind::Abort) => self.fail_reason(job).is_none(),
                Some(EventKind::Terminate) => self.is_running(p),
                _ => false,
            },
        }
    }

    /// A process may run once all its requests are installed and it holds every resource it uses.
    pub fn holds_all(&self, p: &Elem) -> bool {
        let Some(proc_) = self.scenario.processes.get(p) else {
            return false;
        };
        if proc_.requests.iter().any(|ar| self.proc_request(p, ar)) {
            return false;
        }
        let used = self.used_resources(p);
        !used.is_empty() && used.iter().all(|pr| self.occupant(pr).as_ref() == Some(p))
    }
}
