use std::fmt::{self, Write};

use crate::model::{Attr, EventKind, PerfConfig};

use super::types::*;

fn list<'a>(items: impl IntoIterator<Item = &'a crate::asm::Elem>) -> String {
    items
        .into_iter()
        .map(|e| e.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes the scenario back in the text format `parse_scenario` reads.
impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "[config]")?;
        writeln!(f, "choose = {}", c.choose.mode)?;
        writeln!(f, "seed = {}", c.choose.seed)?;
        writeln!(f, "mode = {}", c.mode)?;
        writeln!(f, "matchmaking.broker = {}", c.matchmaking.broker)?;
        writeln!(f, "matchmaking.host = {}", c.matchmaking.host)?;
        writeln!(f, "stall_limit = {}", c.stall_limit)?;
        writeln!(f, "max_steps = {}", c.max_steps)?;
        writeln!(f, "runtime = {}", c.runtime)?;

        for u in self.users.values() {
            writeln!(f, "\n[user {}]", u.id)?;
            writeln!(f, "can_login = {}", list(&u.can_login))?;
            writeln!(f, "can_use = {}", list(&u.can_use))?;
            for (h, name) in &u.local_ids {
                writeln!(f, "local {h} = {name}")?;
            }
        }

        for p in self.policies.values() {
            writeln!(f, "\n[policy {}]", p.name)?;
            for (key, w) in &p.weights {
                writeln!(f, "weight {key} = {w}")?;
            }
        }

        for b in self.brokers.values() {
            writeln!(f, "\n[broker {}]", b.id)?;
            for pid in &b.properties {
                if let Some(Attr::Keyword { key, value }) = self.properties.get(pid).map(|p| &p.attr) {
                    writeln!(f, "property {key}={value}")?;
                }
            }
            writeln!(f, "hosts = {}", list(&b.hosts))?;
            match b.perf {
                PerfConfig::Static(v) => writeln!(f, "perf = {v}")?,
                PerfConfig::Dynamic => writeln!(f, "perf = dynamic")?,
            }
        }

        for h in self.hosts.values() {
            writeln!(f, "\n[host {}]", h.id)?;
            for rid in &h.resources {
                let Some(pr) = self.resources.get(rid) else { continue };
                let mut line = format!("resource {} key={}", pr.id, pr.attr.key());
                match &pr.attr {
                    Attr::Keyword { value, .. } => write!(line, " keyword={value}")?,
                    Attr::Capacity { value, unit, .. } => write!(line, " capacity={value} unit={unit}")?,
                }
                writeln!(f, "{line} type={}", pr.kind.keyword())?;
            }
        }

        for j in self.jobs.values() {
            writeln!(f, "\n[job {}]", j.id)?;
            writeln!(f, "user = {}", j.owner)?;
            if let Some(h) = &j.host {
                writeln!(f, "host = {h}")?;
            }
            for rid in &j.broker_requirements {
                if let Some(Attr::Keyword { key, value }) = self.requirements.get(rid).map(|r| &r.attr) {
                    writeln!(f, "require broker {key}={value}")?;
                }
            }
            if let Some(policy) = j
                .policy_requirement
                .as_ref()
                .and_then(|r| self.requirements.get(r))
            {
                if let Attr::Keyword { value, .. } = &policy.attr {
                    writeln!(f, "require policy {value}")?;
                }
            }
            for pid in &j.processes {
                let Some(p) = self.processes.get(pid) else { continue };
                if p.requests.is_empty() {
                    writeln!(f, "process {pid}")?;
                }
                for ar in &p.requests {
                    match self.abstract_resources.get(ar).map(|a| &a.attr) {
                        Some(Attr::Keyword { key, value }) => {
                            writeln!(f, "process {pid} needs {key}={value}")?
                        }
                        Some(Attr::Capacity { key, value, unit }) => {
                            writeln!(f, "process {pid} needs {key}>={value} unit={unit}")?
                        }
                        None => {}
                    }
                }
            }
        }

        if !self.faults.is_empty() {
            writeln!(f, "\n[fault]")?;
            for fault in &self.faults {
                let kind = match fault.kind {
                    EventKind::Abort => "abort",
                    EventKind::Terminate => "terminate",
                    EventKind::Start => "start",
                };
                writeln!(f, "{kind} process={} at={}", fault.process, fault.at)?;
            }
        }
        Ok(())
    }
}
