use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::asm::{ChoosePolicy, Elem};
use crate::model::{
    AbstractResource, Broker, Fault, Host, Job, PhysicalResource, Process, Property, RankPolicy,
    Requirement, User,
};

/// Which brokering layers are automated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Jobs name their host; only resource mapping runs.
    Local,
    /// Host mapping plus resource mapping.
    Broker,
    /// Broker mapping, host mapping and resource mapping.
    Meta,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Local => "local",
            Mode::Broker => "broker",
            Mode::Meta => "meta",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(Mode::Local),
            "broker" => Ok(Mode::Broker),
            "meta" => Ok(Mode::Meta),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

/// Matchmaker variant for one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Base,
    Refined,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Base => "base",
            Variant::Refined => "refined",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(Variant::Base),
            "refined" => Ok(Variant::Refined),
            other => Err(format!("unknown matchmaking '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Matchmaking {
    pub broker: Variant,
    pub host: Variant,
}

impl Matchmaking {
    pub fn both(v: Variant) -> Self {
        Matchmaking { broker: v, host: v }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub choose: ChoosePolicy,
    pub mode: Mode,
    pub matchmaking: Matchmaking,
    pub stall_limit: u64,
    pub max_steps: u64,
    /// Steps a process runs before it is sent `terminate`; 0 disables.
    pub runtime: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            choose: ChoosePolicy::lowest_id(),
            mode: Mode::Meta,
            matchmaking: Matchmaking::both(Variant::Base),
            stall_limit: 100,
            max_steps: 1000,
            runtime: 1,
        }
    }
}

/// A complete simulation input.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scenario {
    pub users: BTreeMap<Elem, User>,
    pub brokers: BTreeMap<Elem, Broker>,
    pub properties: BTreeMap<Elem, Property>,
    pub hosts: BTreeMap<Elem, Host>,
    pub resources: BTreeMap<Elem, PhysicalResource>,
    pub jobs: BTreeMap<Elem, Job>,
    pub processes: BTreeMap<Elem, Process>,
    pub abstract_resources: BTreeMap<Elem, AbstractResource>,
    /// Broker-property and policy requirements.
    pub requirements: BTreeMap<Elem, Requirement>,
    pub policies: BTreeMap<String, RankPolicy>,
    pub faults: Vec<Fault>,
    pub config: Config,
}

pub fn task_id(process: &Elem) -> Elem {
    Elem::new(format!("{process}/task"))
}

pub fn host_location(host: &Elem) -> Elem {
    Elem::new(format!("@{host}"))
}

pub fn abstract_resource_id(process: &Elem, key: &str) -> Elem {
    Elem::new(format!("{process}/{key}"))
}

pub fn broker_requirement_id(job: &Elem, key: &str) -> Elem {
    Elem::new(format!("{job}/broker/{key}"))
}

pub fn policy_requirement_id(job: &Elem) -> Elem {
    Elem::new(format!("{job}/policy"))
}

pub fn property_id(broker: &Elem, key: &str) -> Elem {
    Elem::new(format!("{broker}/{key}"))
}

/// Identifier syntax for scenario-declared ids.
pub fn valid_id(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

impl Scenario {
    /// Abstract resources requested by any process of `job`, in declaration order.
    pub fn job_requests(&self, job: &Elem) -> Vec<&Elem> {
        self.jobs
            .get(job)
            .map(|j| {
                j.processes
                    .iter()
                    .filter_map(|p| self.processes.get(p))
                    .flat_map(|p| p.requests.iter())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Every requirement id of `job`: abstract resources, broker properties, policy.
    pub fn job_requirements(&self, job: &Elem) -> Vec<Elem> {
        let Some(j) = self.jobs.get(job) else {
            return Vec::new();
        };
        let mut out: Vec<Elem> = self.job_requests(job).into_iter().cloned().collect();
        out.extend(j.broker_requirements.iter().cloned());
        out.extend(j.policy_requirement.iter().cloned());
        out
    }

    /// Rank policy named by the job's policy requirement.
    pub fn job_policy(&self, job: &Elem) -> Option<&RankPolicy> {
        let req = self.jobs.get(job)?.policy_requirement.as_ref()?;
        match &self.requirements.get(req)?.attr {
            crate::model::Attr::Keyword { value, .. } => self.policies.get(value),
            crate::model::Attr::Capacity { .. } => None,
        }
    }

    pub fn owner_of(&self, job: &Elem) -> Option<&Elem> {
        self.jobs.get(job).map(|j| &j.owner)
    }

    pub fn brokers_managing(&self, host: &Elem) -> impl Iterator<Item = &Elem> + '_ {
        let host = host.clone();
        self.brokers
            .values()
            .filter(move |b| b.hosts.contains(&host))
            .map(|b| &b.id)
    }

    pub fn process_of_task(&self, task: &Elem) -> Option<&Elem> {
        let p = task.as_str().strip_suffix("/task")?;
        self.processes.get_key_value(p).map(|(k, _)| k)
    }
}
