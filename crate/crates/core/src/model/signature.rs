//! Universes and dynamic functions of the brokering model.

use crate::asm::{Codomain, Signature};

pub const USER: &str = "USER";
pub const JOB: &str = "JOB";
pub const PROCESS: &str = "PROCESS";
pub const TASK: &str = "TASK";
pub const HOST: &str = "HOST";
pub const PRESOURCE: &str = "PRESOURCE";
pub const ARESOURCE: &str = "ARESOURCE";
pub const LOCATION: &str = "LOCATION";
pub const BROKER: &str = "BROKER";
pub const PROPERTY: &str = "PROPERTY";
pub const REQUIREMENT: &str = "REQUIREMENT";

pub const UNIVERSES: [&str; 11] = [
    USER, JOB, PROCESS, TASK, HOST, PRESOURCE, ARESOURCE, LOCATION, BROKER, PROPERTY, REQUIREMENT,
];

// Static relations, written once at initialization.
pub const JOB_OF: &str = "job";
pub const USER_OF: &str = "user";
pub const BELONGS_TO: &str = "belongsTo";
pub const LOCATION_OF: &str = "location";
pub const TYPE: &str = "type";
pub const CAN_LOGIN: &str = "canLogin";
pub const CAN_USE: &str = "canUse";
pub const MANAGES: &str = "manages";
pub const HAVE: &str = "have";
pub const REQUEST: &str = "request";

// Dynamic functions of the rules.
pub const PROC_REQUEST: &str = "procRequest";
pub const SUBMITTED: &str = "submitted";
pub const USES: &str = "uses";
pub const MAPPED: &str = "mapped";
pub const INSTALLED: &str = "installed";
pub const HANDLER: &str = "handler";
pub const TASK_OF: &str = "task";
pub const JOB_STATE: &str = "jobState";
pub const PROC_STATE: &str = "procState";
pub const EVENT: &str = "event";
pub const MAPPED_HOST: &str = "mappedHost";
pub const MAPPED_RESOURCE: &str = "mappedResource";
pub const MAPPED_BROKER: &str = "mappedBroker";

// Simulator bookkeeping.
pub const OCCUPANT: &str = "occupant";
pub const QUEUED_AT: &str = "queuedAt";
pub const STARTED_AT: &str = "startedAt";
pub const STALL: &str = "stall";
pub const FAIL_REASON: &str = "failReason";

pub const JOB_STATES: &[&str] = &["submitted", "waiting", "running", "done", "failed"];
pub const PROC_STATES: &[&str] = &["waiting", "running"];
pub const EVENTS: &[&str] = &["start", "abort", "terminate"];
pub const RESOURCE_TYPES: &[&str] = &["direct", "handled"];
pub const FAIL_REASONS: &[&str] = &["unsatisfiable", "unauthorized", "aborted"];

pub fn grid_signature() -> Signature {
    let mut sig = Signature::new();
    for u in UNIVERSES {
        sig = sig.universe(u);
    }
    sig.function(JOB_OF, 1, Codomain::Element)
        .function(USER_OF, 1, Codomain::Element)
        .function(BELONGS_TO, 2, Codomain::Bool)
        .function(LOCATION_OF, 1, Codomain::Element)
        .function(TYPE, 1, Codomain::Keyword(RESOURCE_TYPES))
        .function(CAN_LOGIN, 2, Codomain::Bool)
        .function(CAN_USE, 2, Codomain::Bool)
        .function(MANAGES, 2, Codomain::Bool)
        .function(HAVE, 2, Codomain::Bool)
        .function(REQUEST, 2, Codomain::Bool)
        .function(PROC_REQUEST, 2, Codomain::Bool)
        .function(SUBMITTED, 2, Codomain::Bool)
        .function(USES, 2, Codomain::Bool)
        .function(MAPPED, 1, Codomain::Element)
        .function(INSTALLED, 2, Codomain::Bool)
        .function(HANDLER, 1, Codomain::Element)
        .function(TASK_OF, 1, Codomain::Element)
        .function(JOB_STATE, 1, Codomain::Keyword(JOB_STATES))
        .function(PROC_STATE, 1, Codomain::Keyword(PROC_STATES))
        .function(EVENT, 1, Codomain::Keyword(EVENTS))
        .function(MAPPED_HOST, 1, Codomain::Element)
        .function(MAPPED_RESOURCE, 2, Codomain::Element)
        .function(MAPPED_BROKER, 1, Codomain::Element)
        .function(OCCUPANT, 1, Codomain::Element)
        .function(QUEUED_AT, 2, Codomain::Int)
        .function(STARTED_AT, 1, Codomain::Int)
        .function(STALL, 1, Codomain::Int)
        .function(FAIL_REASON, 1, Codomain::Keyword(FAIL_REASONS))
}
