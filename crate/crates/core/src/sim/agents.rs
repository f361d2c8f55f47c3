use std::collections::BTreeMap;

use crate::asm::{Agent, AsmError, Elem, Firing, StepContext, Value};
use crate::brokering::{
    agent_broker_mapping, agent_host_mapping, refined_broker_mapping, refined_host_mapping,
    rule_broker_selection, rule_host_selection,
};
use crate::model::signature::*;
use crate::model::{EventKind, FailReason, View};
use crate::rules::{
    agent_resource_mapping, rule_resource_selection, rule_state_transition, rule_termination,
    rule_user_submission, Contribution, Stager,
};
use crate::scenario::{task_id, Mode, Scenario, Variant};

pub const ENV_AGENT: &str = "env";

/// Name of the resource manager agent of `host`.
pub fn lrm_agent_name(host: &Elem) -> String {
    format!("lrm@{host}")
}

/// Runs every module of one job for the configured mode.
pub struct JobAgent<'s> {
    pub scenario: &'s Scenario,
    pub job: Elem,
}

impl Agent for JobAgent<'_> {
    fn name(&self) -> &str {
        self.job.as_str()
    }

    fn evaluate(&self, ctx: &mut StepContext<'_>) -> Result<Vec<Firing>, AsmError> {
        let scn = self.scenario;
        let j = &self.job;
        let cfg = &scn.config;
        let mut firings = Vec::new();
        let mut stall: Option<FailReason> = None;
        let mut push = |rule: &'static str, c: Contribution| {
            if let Some(reason) = c.stall {
                if stall != Some(FailReason::Unsatisfiable) {
                    stall = Some(reason);
                }
            }
            firings.push(Firing::new(rule, c.updates));
        };

        match cfg.mode {
            Mode::Meta => {
                match cfg.matchmaking.broker {
                    Variant::Base => push("broker_mapping", agent_broker_mapping(scn, ctx, j)?),
                    Variant::Refined => {
                        push("refined_broker_mapping", refined_broker_mapping(scn, ctx, j)?)
                    }
                }
                push("broker_selection", rule_broker_selection(scn, ctx, j)?);
            }
            Mode::Local => push("user_submission", rule_user_submission(scn, ctx, j)?),
            Mode::Broker => {}
        }
        if cfg.mode != Mode::Local {
            match cfg.matchmaking.host {
                Variant::Base => push("host_mapping", agent_host_mapping(scn, ctx, j, cfg.mode)?),
                Variant::Refined => {
                    push("refined_host_mapping", refined_host_mapping(scn, ctx, j, cfg.mode)?)
                }
            }
            push("host_selection", rule_host_selection(scn, ctx, j)?);
        }
        push("resource_mapping", agent_resource_mapping(scn, ctx, j)?);
        push("resource_selection", rule_resource_selection(scn, ctx, j)?);
        push("state_transition", rule_state_transition(scn, ctx, j)?);
        push("termination", rule_termination(scn, ctx, j)?);

        if let Some(reason) = stall {
            let view = View::new(scn, ctx.state());
            // An abort already fails the job this step and owns failReason.
            let aborting = view
                .live_processes(j)
                .iter()
                .any(|p| view.event(p) == Some(EventKind::Abort));
            if !view.is_terminal(j) && view.fail_reason(j).is_none() && !aborting {
                let count = view.stall(j) + 1;
                let mut s = Stager::new(ctx);
                s.set(STALL, &[j], count)?;
                if count >= cfg.stall_limit.max(1) as i64 {
                    s.ctx.note(format!("{j}: stalled {count} steps, failing ({})", reason.keyword()));
                    s.set(FAIL_REASON, &[j], Value::Keyword(reason.keyword()))?;
                }
                firings.push(Firing::new("stall", s.finish().updates));
            }
        }
        Ok(firings)
    }
}

/// Delivers scripted fault events and runtime-expiry terminates.
pub struct EnvAgent<'s> {
    pub scenario: &'s Scenario,
}

impl Agent for EnvAgent<'_> {
    fn name(&self) -> &str {
        ENV_AGENT
    }

    fn evaluate(&self, ctx: &mut StepContext<'_>) -> Result<Vec<Firing>, AsmError> {
        let scn = self.scenario;
        let view = View::new(scn, ctx.state());
        let step = ctx.step();
        let mut due: BTreeMap<&Elem, EventKind> = BTreeMap::new();

        for f in scn.faults.iter().filter(|f| f.at == step) {
            if !view.is_live(&f.process) || view.event(&f.process) == Some(EventKind::Abort) {
                continue;
            }
            let slot = due.entry(&f.process).or_insert(f.kind);
            if f.kind == EventKind::Abort {
                *slot = EventKind::Abort;
            }
        }

        let runtime = scn.config.runtime as i64;
        if runtime > 0 {
            for p in scn.processes.keys() {
                let scripted = scn
                    .faults
                    .iter()
                    .any(|f| &f.process == p && f.kind == EventKind::Terminate);
                let expired = view
                    .started_at(p)
                    .is_some_and(|t| step as i64 - t >= runtime);
                if view.is_live(p) && view.is_running(p) && view.event(p).is_none() && !scripted && expired {
                    due.entry(p).or_insert(EventKind::Terminate);
                }
            }
        }

        let mut s = Stager::new(ctx);
        for (p, kind) in due {
            if view.event(p) != Some(kind) {
                s.set(EVENT, &[&task_id(p)], Value::Keyword(kind.keyword()))?;
            }
        }
        Ok(vec![Firing::new("event", s.finish().updates)])
    }
}

/// Local resource manager of one host: grants each free resource to the head
/// of its FIFO queue, skipping processes removed in this step.
pub struct LrmAgent<'s> {
    pub scenario: &'s Scenario,
    pub host: Elem,
    name: String,
}

impl<'s> LrmAgent<'s> {
    pub fn new(scenario: &'s Scenario, host: Elem) -> Self {
        let name = lrm_agent_name(&host);
        LrmAgent { scenario, host, name }
    }
}

impl Agent for LrmAgent<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, ctx: &mut StepContext<'_>) -> Result<Vec<Firing>, AsmError> {
        let view = View::new(self.scenario, ctx.state());
        let mut s = Stager::new(ctx);
        let Some(host) = self.scenario.hosts.get(&self.host) else {
            return Ok(Vec::new());
        };
        for pr in &host.resources {
            let occupant = view.occupant(pr);
            if occupant.as_ref().is_some_and(|p| view.is_live(p)) {
                continue;
            }
            match view.wait_queue(pr).into_iter().find(|q| !view.leaving(q)) {
                Some(head) => s.set(OCCUPANT, &[pr], head)?,
                None if occupant.is_some() => s.set(OCCUPANT, &[pr], Value::Undef)?,
                None => {}
            }
        }
        Ok(vec![Firing::new("grant", s.finish().updates)])
    }
}
