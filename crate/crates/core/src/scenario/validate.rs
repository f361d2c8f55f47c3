use std::fmt;

use crate::model::PerfConfig;

use super::types::*;

/// One violated scenario constraint: a stable code plus a readable message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationError {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

pub const JOB_NO_PROCESS: &str = "JOB_NO_PROCESS";
pub const PROC_NO_REQUEST: &str = "PROC_NO_REQUEST";
pub const USER_NO_RESOURCE: &str = "USER_NO_RESOURCE";
pub const UNKNOWN_POLICY: &str = "UNKNOWN_POLICY";
pub const HOST_NO_RESOURCE: &str = "HOST_NO_RESOURCE";
pub const FAULT_UNKNOWN_PROCESS: &str = "FAULT_UNKNOWN_PROCESS";
pub const JOB_NO_HOST: &str = "JOB_NO_HOST";
pub const UNKNOWN_USER: &str = "UNKNOWN_USER";
pub const UNKNOWN_HOST: &str = "UNKNOWN_HOST";
pub const UNKNOWN_RESOURCE: &str = "UNKNOWN_RESOURCE";
pub const USER_LOCAL_NOT_LOGIN: &str = "USER_LOCAL_NOT_LOGIN";
pub const POLICY_ZERO_WEIGHTS: &str = "POLICY_ZERO_WEIGHTS";
pub const POLICY_NEGATIVE_WEIGHT: &str = "POLICY_NEGATIVE_WEIGHT";
pub const BAD_PERF: &str = "BAD_PERF";
pub const BAD_ATTR: &str = "BAD_ATTR";
pub const BAD_ID: &str = "BAD_ID";

/// Checks every constraint and reports all violations, never just the first.
pub fn validate_scenario(s: &Scenario) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();
    let mut err = |code, message: String| errors.push(ValidationError { code, message });

    let ids = s
        .users
        .keys()
        .chain(s.brokers.keys())
        .chain(s.hosts.keys())
        .chain(s.resources.keys())
        .chain(s.jobs.keys())
        .chain(s.processes.keys());
    for id in ids {
        if !valid_id(id.as_str()) {
            err(BAD_ID, format!("invalid identifier '{id}'"));
        }
    }

    for u in s.users.values() {
        if u.can_use.is_empty() {
            err(USER_NO_RESOURCE, format!("user '{}' may use no resource", u.id));
        }
        for pr in &u.can_use {
            if !s.resources.contains_key(pr) {
                err(UNKNOWN_RESOURCE, format!("user '{}' may use unknown resource '{pr}'", u.id));
            }
        }
        for h in &u.can_login {
            if !s.hosts.contains_key(h) {
                err(UNKNOWN_HOST, format!("user '{}' may log in to unknown host '{h}'", u.id));
            }
        }
        for h in u.local_ids.keys() {
            if !u.can_login.contains(h) {
                err(
                    USER_LOCAL_NOT_LOGIN,
                    format!("user '{}' has a local name on '{h}' but cannot log in there", u.id),
                );
            }
        }
    }

    for b in s.brokers.values() {
        for h in &b.hosts {
            if !s.hosts.contains_key(h) {
                err(UNKNOWN_HOST, format!("broker '{}' manages unknown host '{h}'", b.id));
            }
        }
        if let PerfConfig::Static(v) = b.perf {
            if !v.is_finite() || v < 0.0 {
                err(BAD_PERF, format!("broker '{}' has perf {v}; expected a finite value >= 0", b.id));
            }
        }
    }

    for h in s.hosts.values() {
        if h.resources.is_empty() {
            err(HOST_NO_RESOURCE, format!("host '{}' has no resource", h.id));
        }
    }
    for pr in s.resources.values() {
        if !pr.attr.well_formed() {
            err(BAD_ATTR, format!("resource '{}' has a malformed attribute {}", pr.id, pr.attr));
        }
    }
    for ar in s.abstract_resources.values() {
        if !ar.attr.well_formed() {
            err(BAD_ATTR, format!("request '{}' has a malformed attribute {}", ar.id, ar.attr));
        }
    }

    for j in s.jobs.values() {
        if !s.users.contains_key(&j.owner) {
            err(UNKNOWN_USER, format!("job '{}' belongs to unknown user '{}'", j.id, j.owner));
        }
        if j.processes.is_empty() {
            err(JOB_NO_PROCESS, format!("job '{}' has no process", j.id));
        }
        match &j.host {
            Some(h) if !s.hosts.contains_key(h) => {
                err(UNKNOWN_HOST, format!("job '{}' names unknown host '{h}'", j.id));
            }
            None if s.config.mode == Mode::Local => {
                err(JOB_NO_HOST, format!("job '{}' names no host, required in local mode", j.id));
            }
            _ => {}
        }
        if j.policy_requirement.is_some() && s.job_policy(&j.id).is_none() {
            err(UNKNOWN_POLICY, format!("job '{}' requires an undeclared rank policy", j.id));
        }
    }
    for p in s.processes.values() {
        if p.requests.is_empty() {
            err(PROC_NO_REQUEST, format!("process '{}' requests no resource", p.id));
        }
    }

    for policy in s.policies.values() {
        if policy.weights.iter().all(|(_, w)| *w == 0.0) {
            err(POLICY_ZERO_WEIGHTS, format!("policy '{}' has no nonzero weight", policy.name));
        }
        for (key, w) in &policy.weights {
            if *w < 0.0 {
                err(
                    POLICY_NEGATIVE_WEIGHT,
                    format!("policy '{}' gives '{key}' negative weight {w}", policy.name),
                );
            }
        }
    }

    for f in &s.faults {
        if !s.processes.contains_key(&f.process) {
            err(FAULT_UNKNOWN_PROCESS, format!("fault targets unknown process '{}'", f.process));
        }
    }

    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
