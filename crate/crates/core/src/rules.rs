//! Job-level rules: resource mapping, resource selection, state
//! transition and termination.
//!
//! Every function reads the step's pre-state through the [`StepContext`] and
//! returns the updates it would stage; nothing here mutates state.

use std::collections::BTreeSet;

use crate::asm::{AsmError, Elem, Location, StepContext, UpdateSet, Value};
use crate::model::signature::*;
use crate::model::{compatible, EventKind, FailReason, JobState, ProcState, ResourceType, View};
use crate::scenario::{host_location, task_id, Scenario};

/// Updates staged by one rule for one job, plus the stall it observed, if any.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Contribution {
    pub updates: UpdateSet,
    pub stall: Option<FailReason>,
}

impl Contribution {
    pub fn is_empty(&self) -> bool {
        self.updates.is_empty() && self.stall.is_none()
    }

    pub(crate) fn stalled(&mut self, reason: FailReason) {
        self.stall = match (self.stall, reason) {
            (Some(FailReason::Unsatisfiable), _) => Some(FailReason::Unsatisfiable),
            _ => Some(reason),
        };
    }
}

pub(crate) struct Stager<'c, 's> {
    pub ctx: &'c mut StepContext<'s>,
    pub out: Contribution,
}

impl<'c, 's> Stager<'c, 's> {
    pub fn new(ctx: &'c mut StepContext<'s>) -> Self {
        Stager { ctx, out: Contribution::default() }
    }

    pub fn set(
        &mut self,
        function: &'static str,
        args: &[&Elem],
        value: impl Into<Value>,
    ) -> Result<(), AsmError> {
        let loc = Location::new(function, args.iter().map(|e| (*e).clone()).collect());
        self.out
            .updates
            .stage(self.ctx.state().signature(), loc, value)?;
        Ok(())
    }

    pub fn finish(self) -> Contribution {
        self.out
    }
}

/// Stages the release of every resource `p` occupies, promoting the next
/// waiting process in FIFO order that is not itself leaving this step (or
/// clearing the occupant).
pub(crate) fn stage_release(view: &View<'_>, s: &mut Stager<'_, '_>, p: &Elem) -> Result<(), AsmError> {
    for pr in view.used_resources(p) {
        if view.occupant(pr).as_ref() == Some(p) {
            match view.wait_queue(pr).into_iter().find(|q| !view.leaving(q)) {
                Some(next) => s.set(OCCUPANT, &[pr], next)?,
                None => s.set(OCCUPANT, &[pr], Value::Undef)?,
            }
        }
    }
    Ok(())
}

fn stage_removal(view: &View<'_>, s: &mut Stager<'_, '_>, p: &Elem) -> Result<(), AsmError> {
    s.set(PROCESS, &[p], false)?;
    stage_release(view, s, p)
}

/// Candidate physical resources on `host` for abstract resource `ar`, in id order.
pub fn resource_candidates<'a>(scenario: &'a Scenario, host: &Elem, ar: &Elem) -> Vec<&'a Elem> {
    let Some(ar) = scenario.abstract_resources.get(ar) else {
        return Vec::new();
    };
    scenario
        .resources
        .values()
        .filter(|pr| &pr.host == host && compatible(&ar.attr, &pr.attr))
        .map(|pr| &pr.id)
        .collect()
}

/// Resource mapping: choose a compatible resource on the mapped host for every
/// pending `(p, ar)` request without one.
pub fn agent_resource_mapping(
    scenario: &Scenario,
    ctx: &mut StepContext<'_>,
    j: &Elem,
) -> Result<Contribution, AsmError> {
    let view = View::new(scenario, ctx.state());
    let mut s = Stager::new(ctx);
    if view.is_terminal(j) {
        return Ok(s.finish());
    }
    let Some(h) = view.mapped_host(j) else {
        return Ok(s.finish());
    };
    if !view.submitted(j, &h) {
        return Ok(s.finish());
    }
    for p in view.live_processes(j) {
        for ar in &scenario.processes[p].requests {
            if !view.proc_request(p, ar) || view.mapped_resource(p, ar).is_some() {
                continue;
            }
            let candidates = resource_candidates(scenario, &h, ar);
            match s.ctx.choose(&candidates) {
                Some(pr) => s.set(MAPPED_RESOURCE, &[p, ar], *pr)?,
                None => {
                    s.ctx.note(format!("{j}: no resource on {h} satisfies {ar}"));
                    s.out.stalled(FailReason::Unsatisfiable);
                }
            }
        }
    }
    Ok(s.finish())
}

/// Whether `p` is the lowest-id process about to install on handled resource `pr`
/// this step. Only that process spawns the handler.
fn first_installer(view: &View<'_>, pr: &Elem, p: &Elem) -> bool {
    let scenario = view.scenario;
    let first = scenario.processes.values().find(|q| {
        view.is_live(&q.id)
            && q.requests.iter().any(|ar| {
                view.proc_request(&q.id, ar)
                    && view.mapped_resource(&q.id, ar).as_ref() == Some(pr)
                    && scenario
                        .owner_of(&q.job)
                        .is_some_and(|u| view.can_use(u, pr))
            })
    });
    first.is_some_and(|q| &q.id == p)
}

/// Resource selection: install processes on their mapped resources. Direct resources get
/// the process's task; handled resources without a handler spawn one from the
/// reserve.
pub fn rule_resource_selection(
    scenario: &Scenario,
    ctx: &mut StepContext<'_>,
    j: &Elem,
) -> Result<Contribution, AsmError> {
    let view = View::new(scenario, ctx.state());
    let step = ctx.step() as i64;
    let mut s = Stager::new(ctx);
    if view.is_terminal(j) || view.mapped_host(j).is_none() {
        return Ok(s.finish());
    }
    let Some(user) = scenario.owner_of(j) else {
        return Ok(s.finish());
    };
    let mut spawned: BTreeSet<Elem> = BTreeSet::new();
    for p in view.live_processes(j) {
        for ar in &scenario.processes[p].requests {
            if !view.proc_request(p, ar) {
                continue;
            }
            let Some(pr) = view.mapped_resource(p, ar) else {
                continue;
            };
            if !view.can_use(user, &pr) {
                s.ctx.note(format!("{j}: {user} may not use {pr} (authorization stall)"));
                s.out.stalled(FailReason::Unauthorized);
                continue;
            }
            let resource = &scenario.resources[&pr];
            let loc = host_location(&resource.host);
            match resource.kind {
                ResourceType::Direct => {
                    let t = task_id(p);
                    s.set(MAPPED, &[p], &loc)?;
                    s.set(TASK_OF, &[p], &t)?;
                    s.set(INSTALLED, &[&t, &loc], true)?;
                }
                ResourceType::Handled => {
                    if view.handler(&pr).is_none()
                        && !spawned.contains(&pr)
                        && first_installer(&view, &pr, p)
                    {
                        let mut ext = UpdateSet::new();
                        let handler = s.ctx.extend(PROCESS, &mut ext)?;
                        let t = s.ctx.extend(TASK, &mut ext)?;
                        s.out.updates.extend_from(&ext);
                        s.set(MAPPED, &[&handler], &loc)?;
                        s.set(TASK_OF, &[&handler], &t)?;
                        s.set(INSTALLED, &[&t, &loc], true)?;
                        s.set(HANDLER, &[&pr], &handler)?;
                        for any_ar in view.state.members(ARESOURCE) {
                            s.set(PROC_REQUEST, &[&handler, any_ar], false)?;
                        }
                        spawned.insert(pr.clone());
                    }
                }
            }
            s.set(PROC_REQUEST, &[p, ar], false)?;
            if !view.uses(p, &pr) {
                s.set(USES, &[p, &pr], true)?;
                s.set(QUEUED_AT, &[p, &pr], step)?;
            }
        }
    }
    Ok(s.finish())
}

/// State transition: job and process state transitions.
///
/// A job has one target state per step, by priority: failed (stall limit or
/// abort) > running (some process holds all its resources) > waiting (some
/// process installed, or the job was submitted to a host) > submitted (the job
/// was submitted to a broker). Only changes are staged.
pub fn rule_state_transition(
    scenario: &Scenario,
    ctx: &mut StepContext<'_>,
    j: &Elem,
) -> Result<Contribution, AsmError> {
    let view = View::new(scenario, ctx.state());
    let step = ctx.step() as i64;
    let mut s = Stager::new(ctx);
    let current = view.job_state(j);
    if current.is_some_and(JobState::is_terminal) {
        return Ok(s.finish());
    }
    let failed = Value::Keyword(JobState::Failed.keyword());

    if view.fail_reason(j).is_some() {
        s.set(JOB_STATE, &[j], failed)?;
        return Ok(s.finish());
    }

    let live = view.live_processes(j);
    let aborted: Vec<&Elem> = live
        .iter()
        .copied()
        .filter(|p| view.event(p) == Some(EventKind::Abort))
        .collect();
    if !aborted.is_empty() {
        s.set(JOB_STATE, &[j], failed)?;
        s.set(FAIL_REASON, &[j], Value::Keyword(FailReason::Aborted.keyword()))?;
        for p in aborted {
            stage_removal(&view, &mut s, p)?;
        }
        return Ok(s.finish());
    }

    let mut any_running = false;
    let mut any_waiting = false;
    for p in &live {
        if view.holds_all(p) {
            any_running = true;
            if !view.is_running(p) {
                s.set(PROC_STATE, &[p], Value::Keyword(ProcState::Running.keyword()))?;
                s.set(STARTED_AT, &[p], step)?;
            }
        } else if view.mapped(p).is_some() {
            any_waiting = true;
            if view.proc_state(p) != Some(ProcState::Waiting.keyword()) {
                s.set(PROC_STATE, &[p], Value::Keyword(ProcState::Waiting.keyword()))?;
            }
        }
    }

    let early = matches!(current, None | Some(JobState::Submitted));
    let target = if any_running {
        Some(JobState::Running)
    } else if any_waiting || (early && view.submitted_to_any_host(j).is_some()) {
        Some(JobState::Waiting)
    } else if current.is_none() && view.submitted_to_any_broker(j).is_some() {
        Some(JobState::Submitted)
    } else {
        None
    };
    if let Some(target) = target {
        if Some(target) != current {
            s.set(JOB_STATE, &[j], Value::Keyword(target.keyword()))?;
        }
    }
    Ok(s.finish())
}

/// Termination: terminate processes, sweep processes of failed jobs, and mark a
/// running job done once it has no live process.
pub fn rule_termination(
    scenario: &Scenario,
    ctx: &mut StepContext<'_>,
    j: &Elem,
) -> Result<Contribution, AsmError> {
    let view = View::new(scenario, ctx.state());
    let mut s = Stager::new(ctx);
    let live = view.live_processes(j);
    match view.job_state(j) {
        Some(JobState::Done) => {}
        Some(JobState::Failed) => {
            for p in live {
                stage_removal(&view, &mut s, p)?;
            }
        }
        current => {
            for p in &live {
                if view.is_running(p) && view.event(p) == Some(EventKind::Terminate) {
                    stage_removal(&view, &mut s, p)?;
                }
            }
            if live.is_empty() && current == Some(JobState::Running) {
                s.set(JOB_STATE, &[j], Value::Keyword(JobState::Done.keyword()))?;
            }
        }
    }
    Ok(s.finish())
}

/// Local mode: the user submits the job straight to the host it names.
pub fn rule_user_submission(
    scenario: &Scenario,
    ctx: &mut StepContext<'_>,
    j: &Elem,
) -> Result<Contribution, AsmError> {
    let view = View::new(scenario, ctx.state());
    let mut s = Stager::new(ctx);
    if view.is_terminal(j) || view.mapped_host(j).is_some() {
        return Ok(s.finish());
    }
    if let Some(h) = scenario.jobs.get(j).and_then(|job| job.host.as_ref()) {
        s.set(MAPPED_HOST, &[j], h)?;
        s.set(SUBMITTED, &[j, h], true)?;
    }
    Ok(s.finish())
}
