//! Static records of universe members, loaded once from a scenario.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::asm::Elem;

use super::attr::Attr;

#[derive(Clone, Debug, PartialEq)]
pub struct User {
    pub id: Elem,
    /// Static global-to-local account mapping per host.
    pub local_ids: BTreeMap<Elem, String>,
    pub can_login: BTreeSet<Elem>,
    pub can_use: BTreeSet<Elem>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub id: Elem,
    pub owner: Elem,
    /// Broker-property requirement ids, in declaration order.
    pub broker_requirements: Vec<Elem>,
    /// Id of the policy requirement, if the job names a rank policy.
    pub policy_requirement: Option<Elem>,
    pub processes: Vec<Elem>,
    /// Host picked by hand; only used in local mode.
    pub host: Option<Elem>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Process {
    pub id: Elem,
    pub job: Elem,
    /// Abstract resource ids, in declaration order.
    pub requests: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbstractResource {
    pub id: Elem,
    pub attr: Attr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResourceType {
    /// Directly accessible by the process.
    Direct,
    /// Needs a local handler process.
    Handled,
}

impl ResourceType {
    pub fn keyword(self) -> &'static str {
        match self {
            ResourceType::Direct => "direct",
            ResourceType::Handled => "handled",
        }
    }
}

impl FromStr for ResourceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(ResourceType::Direct),
            "handled" => Ok(ResourceType::Handled),
            other => Err(format!("unknown resource type '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalResource {
    pub id: Elem,
    pub host: Elem,
    pub attr: Attr,
    pub kind: ResourceType,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Host {
    pub id: Elem,
    pub resources: Vec<Elem>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PerfConfig {
    Static(f64),
    /// Success ratio of finished jobs, 1.0 before any job finishes.
    Dynamic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Broker {
    pub id: Elem,
    pub properties: Vec<Elem>,
    pub hosts: BTreeSet<Elem>,
    pub perf: PerfConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RequirementRole {
    BrokerProperty,
    AbstractResource,
    Policy,
}

/// A job requirement (broker property or policy). Abstract resources are
/// requirements too and are kept in their own table.
#[derive(Clone, Debug, PartialEq)]
pub struct Requirement {
    pub id: Elem,
    pub attr: Attr,
    pub role: RequirementRole,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Property {
    pub id: Elem,
    pub attr: Attr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankPolicy {
    pub name: String,
    /// Weight per attribute key, in declaration order.
    pub weights: Vec<(String, f64)>,
}

impl RankPolicy {
    pub fn weight(&self, key: &str) -> f64 {
        self.weights
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, w)| *w)
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Start,
    Abort,
    Terminate,
}

impl EventKind {
    pub fn keyword(self) -> &'static str {
        match self {
            EventKind::Start => "start",
            EventKind::Abort => "abort",
            EventKind::Terminate => "terminate",
        }
    }
}

/// A scripted event delivered to a process's task at a given step.
#[derive(Clone, Debug, PartialEq)]
pub struct Fault {
    pub kind: EventKind,
    pub process: Elem,
    pub at: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum JobState {
    Submitted,
    Waiting,
    Running,
    Done,
    Failed,
}

impl JobState {
    pub const ALL: [JobState; 5] = [
        JobState::Submitted,
        JobState::Waiting,
        JobState::Running,
        JobState::Done,
        JobState::Failed,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            JobState::Submitted => "submitted",
            JobState::Waiting => "waiting",
            JobState::Running => "running",
            JobState::Done => "done",
            JobState::Failed => "failed",
        }
    }

    pub fn from_keyword(k: &str) -> Option<Self> {
        JobState::ALL.into_iter().find(|s| s.keyword() == k)
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }
}

impl fmt::Display for JobState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProcState {
    Waiting,
    Running,
}

impl ProcState {
    pub fn keyword(self) -> &'static str {
        match self {
            ProcState::Waiting => "waiting",
            ProcState::Running => "running",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailReason {
    Unsatisfiable,
    Unauthorized,
    Aborted,
}

impl FailReason {
    pub const ALL: [FailReason; 3] =
        [FailReason::Unsatisfiable, FailReason::Unauthorized, FailReason::Aborted];

    pub fn keyword(self) -> &'static str {
        match self {
            FailReason::Unsatisfiable => "unsatisfiable",
            FailReason::Unauthorized => "unauthorized",
            FailReason::Aborted => "aborted",
        }
    }

    pub fn from_keyword(k: &str) -> Option<Self> {
        FailReason::ALL.into_iter().find(|r| r.keyword() == k)
    }
}
