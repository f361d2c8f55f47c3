use std::collections::BTreeMap;

use thiserror::Error;

use crate::asm::{ChooseMode, Elem};
use crate::model::{
    AbstractResource, Attr, Broker, EventKind, Fault, Host, Job, PerfConfig, PhysicalResource,
    Process, Property, RankPolicy, Requirement, RequirementRole, ResourceType, User,
};

use super::types::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    User,
    Broker,
    Host,
    Job,
    Policy,
    Fault,
    Config,
}

struct Line<'a> {
    no: usize,
    raw: &'a str,
}

impl<'a> Line<'a> {
    fn col(&self, part: &str) -> usize {
        let base = self.raw.as_ptr() as usize;
        let at = part.as_ptr() as usize;
        if at >= base && at <= base + self.raw.len() {
            at - base + 1
        } else {
            1
        }
    }

    fn err(&self, part: &str, message: impl Into<String>) -> ParseError {
        ParseError { line: self.no, column: self.col(part), message: message.into() }
    }
}

struct Parser {
    scenario: Scenario,
    /// First declaration line of every scenario-level id.
    declared: BTreeMap<String, usize>,
    section: Section,
    current: Option<Elem>,
    current_line: usize,
    job_users: BTreeMap<Elem, usize>,
}

/// Parses the section-based scenario format. Unknown sections and keys are errors.
pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let mut p = Parser {
        scenario: Scenario::default(),
        declared: BTreeMap::new(),
        section: Section::None,
        current: None,
        current_line: 0,
        job_users: BTreeMap::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = Line { no: i + 1, raw };
        let content = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            p.header(&line, content)?;
        } else {
            p.entry(&line, content)?;
        }
    }
    p.finish()
}

fn split_kv<'a>(line: &Line<'a>, content: &'a str) -> Result<(&'a str, &'a str), ParseError> {
    let Some(eq) = content.find('=') else {
        return Err(line.err(content, "expected 'key = value'"));
    };
    Ok((content[..eq].trim(), content[eq + 1..].trim()))
}

fn id<'a>(line: &Line<'a>, s: &'a str) -> Result<Elem, ParseError> {
    if valid_id(s) {
        Ok(Elem::new(s))
    } else {
        Err(line.err(s, format!("invalid identifier '{s}'")))
    }
}

fn id_list<'a>(line: &Line<'a>, s: &'a str) -> Result<Vec<Elem>, ParseError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|part| id(line, part.trim())).collect()
}

fn token<'a>(line: &Line<'a>, s: &'a str, what: &str) -> Result<String, ParseError> {
    let bad = s.is_empty() || s.chars().any(|c| c.is_whitespace() || matches!(c, '=' | ',' | '[' | ']'));
    if bad {
        Err(line.err(s, format!("invalid {what} '{s}'")))
    } else {
        Ok(s.to_string())
    }
}

fn real<'a>(line: &Line<'a>, s: &'a str) -> Result<f64, ParseError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(line.err(s, format!("expected a number, found '{s}'"))),
    }
}

fn integer<'a>(line: &Line<'a>, s: &'a str) -> Result<u64, ParseError> {
    s.parse::<u64>()
        .map_err(|_| line.err(s, format!("expected a non-negative integer, found '{s}'")))
}

/// Splits `a=b c=d` style tokens into ordered `(key, value)` pairs.
fn pairs<'a>(line: &Line<'a>, rest: &'a str) -> Result<Vec<(&'a str, &'a str)>, ParseError> {
    rest.split_whitespace()
        .map(|tok| match tok.split_once('=') {
            Some((k, v)) if !k.is_empty() => Ok((k, v)),
            _ => Err(line.err(tok, format!("expected 'key=value', found '{tok}'"))),
        })
        .collect()
}

impl Parser {
    fn declare(&mut self, line: &Line<'_>, part: &str, id: &Elem) -> Result<(), ParseError> {
        if let Some(first) = self.declared.get(id.as_str()) {
            return Err(line.err(
                part,
                format!("duplicate identifier '{id}' (lines {first} and {})", line.no),
            ));
        }
        self.declared.insert(id.as_str().to_string(), line.no);
        Ok(())
    }

    fn header(&mut self, line: &Line<'_>, content: &str) -> Result<(), ParseError> {
        let Some(inner) = content.strip_prefix('[').and_then(|c| c.strip_suffix(']')) else {
            return Err(line.err(content, "malformed section header"));
        };
        let mut words = inner.split_whitespace();
        let kind = words.next().unwrap_or("");
        let name = words.next();
        if let Some(extra) = words.next() {
            return Err(line.err(extra, "unexpected text in section header"));
        }
        self.current_line = line.no;
        let section = match kind {
            "user" => Section::User,
            "broker" => Section::Broker,
            "host" => Section::Host,
            "job" => Section::Job,
            "policy" => Section::Policy,
            "fault" => Section::Fault,
            "config" => Section::Config,
            other => return Err(line.err(kind, format!("unknown section '{other}'"))),
        };
        self.section = section;
        self.current = None;
        match (section, name) {
            (Section::Fault | Section::Config, None) => Ok(()),
            (Section::Fault | Section::Config, Some(n)) => {
                Err(line.err(n, format!("section '{kind}' takes no identifier")))
            }
            (_, None) => Err(line.err(kind, format!("section '{kind}' needs an identifier"))),
            (Section::Policy, Some(n)) => {
                let name = id(line, n)?.as_str().to_string();
                if self.scenario.policies.contains_key(&name) {
                    return Err(line.err(n, format!("duplicate policy '{name}'")));
                }
                self.scenario
                    .policies
                    .insert(name.clone(), RankPolicy { name: name.clone(), weights: Vec::new() });
                self.current = Some(Elem::new(name));
                Ok(())
            }
            (_, Some(n)) => {
                let e = id(line, n)?;
                self.declare(line, n, &e)?;
                match section {
                    Section::User => {
                        self.scenario.users.insert(
                            e.clone(),
                            User {
                                id: e.clone(),
                                local_ids: BTreeMap::new(),
                                can_login: Default::default(),
                                can_use: Default::default(),
                            },
                        );
                    }
                    Section::Broker => {
                        self.scenario.brokers.insert(
                            e.clone(),
                            Broker {
                                id: e.clone(),
                                properties: Vec::new(),
                                hosts: Default::default(),
                                perf: PerfConfig::Dynamic,
                            },
                        );
                    }
                    Section::Host => {
                        self.scenario
                            .hosts
                            .insert(e.clone(), Host { id: e.clone(), resources: Vec::new() });
                    }
                    Section::Job => {
                        self.scenario.jobs.insert(
                            e.clone(),
                            Job {
                                id: e.clone(),
                                owner: Elem::new(""),
                                broker_requirements: Vec::new(),
                                policy_requirement: None,
                                processes: Vec::new(),
                                host: None,
                            },
                        );
                    }
                    _ => unreachable!(),
                }
                self.current = Some(e);
                Ok(())
            }
        }
    }

    fn entry(&mut self, line: &Line<'_>, content: &str) -> Result<(), ParseError> {
        let current = self.current.clone();
        match self.section {
            Section::None => Err(line.err(content, "entry outside any section")),
            Section::User => self.user_entry(line, content, &current.unwrap()),
            Section::Broker => self.broker_entry(line, content, &current.unwrap()),
            Section::Host => self.host_entry(line, content, &current.unwrap()),
            Section::Job => self.job_entry(line, content, &current.unwrap()),
            Section::Policy => self.policy_entry(line, content, current.unwrap().as_str()),
            Section::Fault => self.fault_entry(line, content),
            Section::Config => self.config_entry(line, content),
        }
    }

    fn user_entry(&mut self, line: &Line<'_>, content: &str, u: &Elem) -> Result<(), ParseError> {
        let (key, value) = split_kv(line, content)?;
        let user = self.scenario.users.get_mut(u).unwrap();
        if let Some(host) = key.strip_prefix("local ") {
            let host = id(line, host.trim())?;
            let name = token(line, value, "local name")?;
            if user.local_ids.insert(host.clone(), name).is_some() {
                return Err(line.err(key, format!("duplicate local name for host '{host}'")));
            }
            return Ok(());
        }
        match key {
            "can_login" => user.can_login = id_list(line, value)?.into_iter().collect(),
            "can_use" => user.can_use = id_list(line, value)?.into_iter().collect(),
            other => return Err(line.err(key, format!("unknown key '{other}' in user section"))),
        }
        Ok(())
    }

    fn broker_entry(&mut self, line: &Line<'_>, content: &str, b: &Elem) -> Result<(), ParseError> {
        if let Some(rest) = content.strip_prefix("property ") {
            let (key, value) = split_kv(line, rest)?;
            let key = token(line, key, "property key")?;
            let value = token(line, value, "property value")?;
            let pid = property_id(b, &key);
            if self.scenario.properties.contains_key(&pid) {
                return Err(line.err(rest, format!("duplicate property '{key}' on broker '{b}'")));
            }
            self.scenario
                .properties
                .insert(pid.clone(), Property { id: pid.clone(), attr: Attr::keyword(key, value) });
            self.scenario.brokers.get_mut(b).unwrap().properties.push(pid);
            return Ok(());
        }
        let (key, value) = split_kv(line, content)?;
        let broker = self.scenario.brokers.get_mut(b).unwrap();
        match key {
            "hosts" => broker.hosts = id_list(line, value)?.into_iter().collect(),
            "perf" if value == "dynamic" => broker.perf = PerfConfig::Dynamic,
            "perf" => broker.perf = PerfConfig::Static(real(line, value)?),
            other => return Err(line.err(key, format!("unknown key '{other}' in broker section"))),
        }
        Ok(())
    }

    fn host_entry(&mut self, line: &Line<'_>, content: &str, h: &Elem) -> Result<(), ParseError> {
        let Some(rest) = content.strip_prefix("resource ") else {
            let word = content.split_whitespace().next().unwrap_or(content);
            return Err(line.err(word, format!("unknown key '{word}' in host section")));
        };
        let rest = rest.trim_start();
        let (rid, attrs) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let pr = id(line, rid)?;
        self.declare(line, rid, &pr)?;
        let mut key = None;
        let mut keyword = None;
        let mut capacity = None;
        let mut unit = None;
        let mut kind = ResourceType::Direct;
        for (k, v) in pairs(line, attrs)? {
            match k {
                "key" => key = Some(token(line, v, "attribute key")?),
                "keyword" => keyword = Some(token(line, v, "keyword value")?),
                "capacity" => capacity = Some(real(line, v)?),
                "unit" => unit = Some(token(line, v, "unit")?),
                "type" => {
                    kind = v.parse().map_err(|e: String| line.err(v, e))?;
                }
                other => {
                    return Err(line.err(k, format!("unknown resource field '{other}'")));
                }
            }
        }
        let Some(key) = key else {
            return Err(line.err(rid, format!("resource '{pr}' has no key")));
        };
        let attr = match (keyword, capacity, unit) {
            (Some(v), None, None) => Attr::keyword(key, v),
            (None, Some(c), Some(u)) => Attr::capacity(key, c, u),
            (None, Some(_), None) => {
                return Err(line.err(rid, format!("capacity of '{pr}' needs a unit")));
            }
            _ => {
                return Err(line.err(
                    rid,
                    format!("resource '{pr}' needs exactly one of keyword= or capacity= unit="),
                ));
            }
        };
        self.scenario.resources.insert(
            pr.clone(),
            PhysicalResource { id: pr.clone(), host: h.clone(), attr, kind },
        );
        self.scenario.hosts.get_mut(h).unwrap().resources.push(pr);
        Ok(())
    }

    fn job_entry(&mut self, line: &Line<'_>, content: &str, j: &Elem) -> Result<(), ParseError> {
        if let Some(rest) = content.strip_prefix("require ") {
            return self.job_requirement(line, rest.trim_start(), j);
        }
        if let Some(rest) = content.strip_prefix("process ") {
            return self.job_process(line, rest.trim_start(), j);
        }
        if content == "process" {
            return Err(line.err(content, "process needs an identifier"));
        }
        let (key, value) = split_kv(line, content)?;
        match key {
            "user" => {
                let owner = id(line, value)?;
                if self.job_users.insert(j.clone(), line.no).is_some() {
                    return Err(line.err(key, format!("job '{j}' declares its user twice")));
                }
                self.scenario.jobs.get_mut(j).unwrap().owner = owner;
            }
            "host" => {
                let host = id(line, value)?;
                self.scenario.jobs.get_mut(j).unwrap().host = Some(host);
            }
            other => return Err(line.err(key, format!("unknown key '{other}' in job section"))),
        }
        Ok(())
    }

    fn job_requirement(&mut self, line: &Line<'_>, rest: &str, j: &Elem) -> Result<(), ParseError> {
        if let Some(kv) = rest.strip_prefix("broker ") {
            let (key, value) = split_kv(line, kv)?;
            let key = token(line, key, "requirement key")?;
            let value = token(line, value, "requirement value")?;
            let rid = broker_requirement_id(j, &key);
            if self.scenario.requirements.contains_key(&rid) {
                return Err(line.err(kv, format!("duplicate broker requirement '{key}'")));
            }
            self.scenario.requirements.insert(
                rid.clone(),
                Requirement {
                    id: rid.clone(),
                    attr: Attr::keyword(key, value),
                    role: RequirementRole::BrokerProperty,
                },
            );
            self.scenario.jobs.get_mut(j).unwrap().broker_requirements.push(rid);
            return Ok(());
        }
        if let Some(name) = rest.strip_prefix("policy ") {
            let name = id(line, name.trim())?;
            let rid = policy_requirement_id(j);
            if self.scenario.requirements.contains_key(&rid) {
                return Err(line.err(rest, format!("job '{j}' requires a policy twice")));
            }
            self.scenario.requirements.insert(
                rid.clone(),
                Requirement {
                    id: rid.clone(),
                    attr: Attr::keyword("policy", name.as_str()),
                    role: RequirementRole::Policy,
                },
            );
            self.scenario.jobs.get_mut(j).unwrap().policy_requirement = Some(rid);
            return Ok(());
        }
        let word = rest.split_whitespace().next().unwrap_or(rest);
        Err(line.err(word, format!("unknown requirement kind '{word}'")))
    }

    fn job_process(&mut self, line: &Line<'_>, rest: &str, j: &Elem) -> Result<(), ParseError> {
        let (pid, tail) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let p = id(line, pid)?;
        match self.scenario.processes.get(&p) {
            Some(existing) if &existing.job == j => {}
            Some(_) => {
                let first = self.declared[p.as_str()];
                return Err(line.err(
                    pid,
                    format!("duplicate identifier '{p}' (lines {first} and {})", line.no),
                ));
            }
            None => {
                self.declare(line, pid, &p)?;
                self.scenario
                    .processes
                    .insert(p.clone(), Process { id: p.clone(), job: j.clone(), requests: Vec::new() });
                self.scenario.jobs.get_mut(j).unwrap().processes.push(p.clone());
            }
        }
        let tail = tail.trim();
        if tail.is_empty() {
            return Ok(());
        }
        let Some(need) = tail.strip_prefix("needs ") else {
            return Err(line.err(tail, "expected 'needs <requirement>'"));
        };
        let need = need.trim();
        let attr = if let Some((key, rhs)) = need.split_once(">=") {
            let key = token(line, key.trim(), "attribute key")?;
            let rhs = rhs.trim();
            let (amount, unit) = rhs.split_once(char::is_whitespace).unwrap_or((rhs, ""));
            let amount = real(line, amount)?;
            let unit = match pairs(line, unit.trim())?.as_slice() {
                [("unit", u)] => token(line, u, "unit")?,
                [] => return Err(line.err(rhs, "capacity requirement needs a unit")),
                _ => return Err(line.err(unit, "expected 'unit=<u>'")),
            };
            Attr::capacity(key, amount, unit)
        } else {
            let (key, value) = split_kv(line, need)?;
            Attr::keyword(token(line, key, "attribute key")?, token(line, value, "keyword value")?)
        };
        let ar = abstract_resource_id(&p, attr.key());
        if self.scenario.abstract_resources.contains_key(&ar) {
            return Err(line.err(need, format!("process '{p}' already requests '{}'", attr.key())));
        }
        self.scenario
            .abstract_resources
            .insert(ar.clone(), AbstractResource { id: ar.clone(), attr });
        self.scenario.processes.get_mut(&p).unwrap().requests.push(ar);
        Ok(())
    }

    fn policy_entry(&mut self, line: &Line<'_>, content: &str, name: &str) -> Result<(), ParseError> {
        let Some(rest) = content.strip_prefix("weight ") else {
            let word = content.split_whitespace().next().unwrap_or(content);
            return Err(line.err(word, format!("unknown key '{word}' in policy section")));
        };
        let (key, value) = split_kv(line, rest)?;
        let key = token(line, key, "attribute key")?;
        let w = real(line, value)?;
        let policy = self.scenario.policies.get_mut(name).unwrap();
        if policy.weights.iter().any(|(k, _)| *k == key) {
            return Err(line.err(rest, format!("duplicate weight for '{key}'")));
        }
        policy.weights.push((key, w));
        Ok(())
    }

    fn fault_entry(&mut self, line: &Line<'_>, content: &str) -> Result<(), ParseError> {
        let (kind, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let kind = match kind {
            "abort" => EventKind::Abort,
            "terminate" => EventKind::Terminate,
            other => return Err(line.err(kind, format!("unknown fault kind '{other}'"))),
        };
        let mut process = None;
        let mut at = None;
        for (k, v) in pairs(line, rest)? {
            match k {
                "process" => process = Some(id(line, v)?),
                "at" => at = Some(integer(line, v)?),
                other => return Err(line.err(k, format!("unknown fault field '{other}'"))),
            }
        }
        match (process, at) {
            (Some(process), Some(at)) => {
                self.scenario.faults.push(Fault { kind, process, at });
                Ok(())
            }
            _ => Err(line.err(content, "fault needs process= and at=")),
        }
    }

    fn config_entry(&mut self, line: &Line<'_>, content: &str) -> Result<(), ParseError> {
        let (key, value) = split_kv(line, content)?;
        let cfg = &mut self.scenario.config;
        let bad = |e: String| line.err(value, e);
        match key {
            "choose" => cfg.choose.mode = value.parse::<ChooseMode>().map_err(bad)?,
            "seed" => cfg.choose.seed = integer(line, value)?,
            "mode" => cfg.mode = value.parse().map_err(bad)?,
            "matchmaking" => cfg.matchmaking = Matchmaking::both(value.parse().map_err(bad)?),
            "matchmaking.broker" => cfg.matchmaking.broker = value.parse().map_err(bad)?,
            "matchmaking.host" => cfg.matchmaking.host = value.parse().map_err(bad)?,
            "stall_limit" => cfg.stall_limit = integer(line, value)?,
            "max_steps" => cfg.max_steps = integer(line, value)?,
            "runtime" => cfg.runtime = integer(line, value)?,
            other => return Err(line.err(key, format!("unknown key '{other}' in config section"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<Scenario, ParseError> {
        if self.scenario.jobs.is_empty() {
            return Err(ParseError { line: 1, column: 1, message: "no jobs declared".into() });
        }
        for (j, job) in &self.scenario.jobs {
            if !self.job_users.contains_key(j) {
                let line = self.declared[j.as_str()];
                return Err(ParseError {
                    line,
                    column: 1,
                    message: format!("job '{}' has no user", job.id),
                });
            }
        }
        Ok(self.scenario)
    }
}
