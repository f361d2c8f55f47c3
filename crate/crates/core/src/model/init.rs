//! Initial-state construction and the clauses it must satisfy.

use std::fmt;

use thiserror::Error;

use crate::asm::{AsmError, Elem, GridState, Location, UpdateSet, Value};
use crate::scenario::{host_location, task_id, Scenario};

use super::signature::*;

/// One violated initial-state clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseViolation {
    pub clause: &'static str,
    pub subject: Elem,
}

impl fmt::Display for ClauseViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clause '{}' violated for {}", self.clause, self.subject)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InitError {
    #[error("initial state violates: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Clauses(Vec<ClauseViolation>),
    #[error(transparent)]
    Asm(#[from] AsmError),
}

pub const CLAUSE_JOB_HAS_PROCESS: &str = "exists p: job(p) = j";
pub const CLAUSE_PROC_HAS_JOB: &str = "job(p) != undef";
pub const CLAUSE_JOB_USER: &str = "user(p) = u in USER";
pub const CLAUSE_PROC_REQUEST: &str = "exists ar: procRequest(p, ar) = true";
pub const CLAUSE_USES_FALSE: &str = "exists pr: uses(p, pr) = false";
pub const CLAUSE_TASK_UNDEF: &str = "task(p) = undef";
pub const CLAUSE_MAPPED_UNDEF: &str = "mapped(p) = undef";
pub const CLAUSE_PROC_STATE_UNDEF: &str = "procState(p) = undef";
pub const CLAUSE_MAPPED_HOST_UNDEF: &str = "mappedHost(j) = undef";
pub const CLAUSE_JOB_STATE_UNDEF: &str = "jobState(j) = undef";
pub const CLAUSE_MAPPED_BROKER_UNDEF: &str = "mappedBroker(j) = undef";
pub const CLAUSE_JOB_REQUEST: &str = "exists r: request(j, r) = true";
pub const CLAUSE_USER_CAN_USE: &str = "exists pr: canUse(u, pr) = true";

/// Loads every scenario entity into its universe and interprets the static
/// relations; all job and process state starts undefined.
pub fn init_state(scenario: &Scenario) -> Result<GridState, InitError> {
    let mut state = GridState::new(grid_signature());
    let sig = grid_signature();
    let mut u = UpdateSet::new();
    let member = |u: &mut UpdateSet, universe: &'static str, e: &Elem| {
        u.stage(&sig, Location::unary(universe, e), true).map(|_| ())
    };

    for user in scenario.users.values() {
        member(&mut u, USER, &user.id)?;
        for h in &user.can_login {
            u.stage(&sig, Location::binary(CAN_LOGIN, &user.id, h), true)?;
        }
        for pr in &user.can_use {
            u.stage(&sig, Location::binary(CAN_USE, &user.id, pr), true)?;
        }
    }
    for host in scenario.hosts.values() {
        member(&mut u, HOST, &host.id)?;
        member(&mut u, LOCATION, &host_location(&host.id))?;
    }
    for pr in scenario.resources.values() {
        member(&mut u, PRESOURCE, &pr.id)?;
        member(&mut u, PROPERTY, &pr.id)?;
        u.stage(&sig, Location::binary(BELONGS_TO, &pr.id, &pr.host), true)?;
        u.stage(&sig, Location::unary(LOCATION_OF, &pr.id), host_location(&pr.host))?;
        u.stage(&sig, Location::unary(TYPE, &pr.id), Value::Keyword(pr.kind.keyword()))?;
    }
    for prop in scenario.properties.values() {
        member(&mut u, PROPERTY, &prop.id)?;
    }
    for b in scenario.brokers.values() {
        member(&mut u, BROKER, &b.id)?;
        for h in &b.hosts {
            u.stage(&sig, Location::binary(MANAGES, h, &b.id), true)?;
        }
        for p in &b.properties {
            u.stage(&sig, Location::binary(HAVE, &b.id, p), true)?;
        }
    }
    for ar in scenario.abstract_resources.values() {
        member(&mut u, ARESOURCE, &ar.id)?;
        member(&mut u, REQUIREMENT, &ar.id)?;
    }
    for r in scenario.requirements.values() {
        member(&mut u, REQUIREMENT, &r.id)?;
    }
    for j in scenario.jobs.values() {
        member(&mut u, JOB, &j.id)?;
        u.stage(&sig, Location::unary(USER_OF, &j.id), j.owner.clone())?;
        for r in scenario.job_requirements(&j.id) {
            u.stage(&sig, Location::binary(REQUEST, &j.id, &r), true)?;
        }
    }
    for p in scenario.processes.values() {
        member(&mut u, PROCESS, &p.id)?;
        member(&mut u, TASK, &task_id(&p.id))?;
        u.stage(&sig, Location::unary(JOB_OF, &p.id), p.job.clone())?;
        for ar in &p.requests {
            u.stage(&sig, Location::binary(PROC_REQUEST, &p.id, ar), true)?;
        }
        for pr in scenario.resources.keys() {
            u.stage(&sig, Location::binary(USES, &p.id, pr), false)?;
        }
    }
    state.fire(&u)?;

    let violations = check_initial_state(&state);
    if violations.is_empty() {
        Ok(state)
    } else {
        Err(InitError::Clauses(violations))
    }
}

/// Enumerates every universally quantified initial-state clause over the state.
pub fn check_initial_state(state: &GridState) -> Vec<ClauseViolation> {
    let mut out = Vec::new();
    let mut fail = |clause, subject: &Elem| {
        out.push(ClauseViolation { clause, subject: subject.clone() })
    };
    let processes: Vec<&Elem> = state.members(PROCESS).collect();

    for p in &processes {
        let job = state.get(JOB_OF, &[p]);
        match job.as_elem() {
            Some(j) if state.is_member(JOB, j) => {
                let owner = state.get(USER_OF, &[j]);
                if !owner.as_elem().is_some_and(|u| state.is_member(USER, u)) {
                    fail(CLAUSE_JOB_USER, p);
                }
            }
            _ => fail(CLAUSE_PROC_HAS_JOB, p),
        }
        if !state
            .members(ARESOURCE)
            .any(|ar| state.get(PROC_REQUEST, &[p, ar]).is_true())
        {
            fail(CLAUSE_PROC_REQUEST, p);
        }
        if !state
            .members(PRESOURCE)
            .any(|pr| state.get(USES, &[p, pr]) == Value::Bool(false))
        {
            fail(CLAUSE_USES_FALSE, p);
        }
        if !state.get(TASK_OF, &[p]).is_undef() {
            fail(CLAUSE_TASK_UNDEF, p);
        }
        if !state.get(MAPPED, &[p]).is_undef() {
            fail(CLAUSE_MAPPED_UNDEF, p);
        }
        if !state.get(PROC_STATE, &[p]).is_undef() {
            fail(CLAUSE_PROC_STATE_UNDEF, p);
        }
    }

    for j in state.members(JOB) {
        if !processes
            .iter()
            .any(|p| state.get(JOB_OF, &[p]).as_elem() == Some(j))
        {
            fail(CLAUSE_JOB_HAS_PROCESS, j);
        }
        if !state.get(MAPPED_HOST, &[j]).is_undef() {
            fail(CLAUSE_MAPPED_HOST_UNDEF, j);
        }
        if !state.get(JOB_STATE, &[j]).is_undef() {
            fail(CLAUSE_JOB_STATE_UNDEF, j);
        }
        if !state.get(MAPPED_BROKER, &[j]).is_undef() {
            fail(CLAUSE_MAPPED_BROKER_UNDEF, j);
        }
        if !state
            .members(REQUIREMENT)
            .any(|r| state.get(REQUEST, &[j, r]).is_true())
        {
            fail(CLAUSE_JOB_REQUEST, j);
        }
    }

    for u in state.members(USER) {
        if !state
            .members(PRESOURCE)
            .any(|pr| state.get(CAN_USE, &[u, pr]).is_true())
        {
            fail(CLAUSE_USER_CAN_USE, u);
        }
    }
    out
}

/// Structural subset relations: ARESOURCE within REQUIREMENT, PRESOURCE within PROPERTY.
pub fn check_subset_invariants(state: &GridState) -> Vec<ClauseViolation> {
    let mut out = Vec::new();
    for ar in state.members(ARESOURCE) {
        if !state.is_member(REQUIREMENT, ar) {
            out.push(ClauseViolation { clause: "ARESOURCE subset of REQUIREMENT", subject: ar.clone() });
        }
    }
    for pr in state.members(PRESOURCE) {
        if !state.is_member(PROPERTY, pr) {
            out.push(ClauseViolation { clause: "PRESOURCE subset of PROPERTY", subject: pr.clone() });
        }
    }
    out
}
