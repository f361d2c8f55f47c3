//! Host and broker selection (Rules 4 and 5), the base matchmakers, and the
//! ranked matchmakers driven by broker performance and host rank.

use crate::asm::{AsmError, Elem, GridState, StepContext};
use crate::model::signature::*;
use crate::model::{compatible, compatible_keyword, FailReason, JobState, PerfConfig, RankPolicy, View};
use crate::rules::{resource_candidates, Contribution, Stager};
use crate::scenario::{Mode, Scenario};

/// One score per subject (broker or host), in subject id order.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreVector {
    pub subjects: Vec<Elem>,
    pub scores: Vec<f64>,
}

impl ScoreVector {
    pub fn get(&self, subject: &Elem) -> Option<f64> {
        let i = self.subjects.iter().position(|s| s == subject)?;
        Some(self.scores[i])
    }

    pub fn max(&self) -> f64 {
        self.scores.iter().copied().fold(0.0, f64::max)
    }

    /// Subjects scoring the positive maximum; empty when every score is zero.
    pub fn argmax(&self) -> Vec<&Elem> {
        let max = self.max();
        if max <= 0.0 {
            return Vec::new();
        }
        self.subjects
            .iter()
            .zip(&self.scores)
            .filter(|(_, s)| **s == max)
            .map(|(b, _)| b)
            .collect()
    }
}

/// Whether every abstract resource requested by `j` has a compatible resource on `h`.
pub fn host_satisfies(scenario: &Scenario, j: &Elem, h: &Elem) -> bool {
    scenario
        .job_requests(j)
        .into_iter()
        .all(|ar| !resource_candidates(scenario, h, ar).is_empty())
}

/// Whether `b` holds a compatible property for every broker-property requirement of `j`.
pub fn broker_satisfies(scenario: &Scenario, state: &GridState, j: &Elem, b: &Elem) -> bool {
    let Some(job) = scenario.jobs.get(j) else {
        return false;
    };
    job.broker_requirements.iter().all(|r| {
        let Some(req) = scenario.requirements.get(r) else {
            return false;
        };
        scenario.properties.values().any(|p| {
            state.get(HAVE, &[b, &p.id]).is_true() && compatible(&req.attr, &p.attr)
        })
    })
}

/// Like [`broker_satisfies`] but with exact keyword equality only.
fn broker_matches_exactly(scenario: &Scenario, state: &GridState, j: &Elem, b: &Elem) -> bool {
    let Some(job) = scenario.jobs.get(j) else {
        return false;
    };
    job.broker_requirements.iter().all(|r| {
        let Some(req) = scenario.requirements.get(r) else {
            return false;
        };
        scenario.properties.values().any(|p| {
            state.get(HAVE, &[b, &p.id]).is_true()
                && compatible_keyword(&req.attr, &p.attr) == Ok(true)
        })
    })
}

/// Hosts the job may be placed on: the mapped broker's hosts in meta mode, every host otherwise.
pub fn hosts_in_scope<'a>(scenario: &'a Scenario, state: &GridState, j: &Elem, mode: Mode) -> Vec<&'a Elem> {
    let broker = View::new(scenario, state).mapped_broker(j);
    scenario
        .hosts
        .keys()
        .filter(|h| match (mode, &broker) {
            (Mode::Meta, Some(b)) => state.get(MANAGES, &[h, b]).is_true(),
            (Mode::Meta, None) => false,
            _ => true,
        })
        .collect()
}

/// Host mapping is enabled for non-terminal jobs without a host; in meta mode
/// the job must first be submitted to its broker.
fn host_mapping_enabled(view: &View<'_>, j: &Elem, mode: Mode) -> bool {
    if view.is_terminal(j) || view.mapped_host(j).is_some() {
        return false;
    }
    match mode {
        Mode::Meta => view.mapped_broker(j).is_some_and(|b| view.submitted(j, &b)),
        Mode::Broker => true,
        Mode::Local => false,
    }
}

/// Base host mapping: choose among the in-scope hosts covering every request.
pub fn agent_host_mapping(
    scenario: &Scenario,
    ctx: &mut StepContext<'_>,
    j: &Elem,
    mode: Mode,
) -> Result<Contribution, AsmError> {
    let view = View::new(scenario, ctx.state());
    let mut s = Stager::new(ctx);
    if !host_mapping_enabled(&view, j, mode) {
        return Ok(s.finish());
    }
    let candidates: Vec<&Elem> = hosts_in_scope(scenario, view.state, j, mode)
        .into_iter()
        .filter(|h| host_satisfies(scenario, j, h))
        .collect();
    match s.ctx.choose(&candidates) {
        Some(h) => s.set(MAPPED_HOST, &[j], *h)?,
        None => {
            s.ctx.note(format!("{j}: no host covers every request"));
            s.out.stalled(FailReason::Unsatisfiable);
        }
    }
    Ok(s.finish())
}

/// Weighted sum of the host's capacities; keyword attributes contribute nothing.
pub fn count_rank(policy: &RankPolicy, scenario: &Scenario, h: &Elem) -> f64 {
    let Some(host) = scenario.hosts.get(h) else {
        return 0.0;
    };
    host.resources
        .iter()
        .filter_map(|r| scenario.resources.get(r))
        .filter_map(|pr| Some(policy.weight(pr.attr.key()) * pr.attr.amount()?))
        .sum::<f64>()
        .max(0.0)
}

/// Rank of every in-scope host, zeroed where some request has no compatible resource.
pub fn host_scores(scenario: &Scenario, state: &GridState, j: &Elem, policy: &RankPolicy, mode: Mode) -> ScoreVector {
    let subjects: Vec<Elem> = hosts_in_scope(scenario, state, j, mode)
        .into_iter()
        .cloned()
        .collect();
    let scores = subjects
        .iter()
        .map(|h| {
            if host_satisfies(scenario, j, h) {
                count_rank(policy, scenario, h)
            } else {
                0.0
            }
        })
        .collect();
    ScoreVector { subjects, scores }
}

/// Ranked host mapping: the highest-ranked host wins; ties go through the choose policy.
/// A job without a rank policy falls back to [`agent_host_mapping`].
pub fn refined_host_mapping(
    scenario: &Scenario,
    ctx: &mut StepContext<'_>,
    j: &Elem,
    mode: Mode,
) -> Result<Contribution, AsmError> {
    let view = View::new(scenario, ctx.state());
    if !host_mapping_enabled(&view, j, mode) {
        return Ok(Contribution::default());
    }
    let Some(policy) = scenario.job_policy(j) else {
        ctx.note(format!("{j}: no rank policy, using base host mapping"));
        return agent_host_mapping(scenario, ctx, j, mode);
    };
    let scores = host_scores(scenario, view.state, j, policy, mode);
    let mut s = Stager::new(ctx);
    let best = scores.argmax();
    match s.ctx.choose(&best) {
        Some(h) => s.set(MAPPED_HOST, &[j], *h)?,
        None => {
            s.ctx.note(format!("{j}: every host ranks zero"));
            s.out.stalled(FailReason::Unsatisfiable);
        }
    }
    Ok(s.finish())
}

/// Host selection: submit the job to its mapped host once the user may use a
/// compatible resource there for every request.
pub fn rule_host_selection(
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
    if view.submitted(j, &h) {
        return Ok(s.finish());
    }
    let Some(user) = scenario.owner_of(j) else {
        return Ok(s.finish());
    };
    let authorized = scenario.job_requests(j).into_iter().all(|ar| {
        resource_candidates(scenario, &h, ar)
            .into_iter()
            .any(|pr| view.can_use(user, pr))
    });
    if authorized {
        s.set(SUBMITTED, &[j, &h], true)?;
    } else {
        s.ctx.note(format!("{j}: {user} lacks a usable resource on {h} (authorization stall)"));
        s.out.stalled(FailReason::Unauthorized);
    }
    Ok(s.finish())
}

/// Base broker mapping: choose among brokers holding every required property.
pub fn agent_broker_mapping(
    scenario: &Scenario,
    ctx: &mut StepContext<'_>,
    j: &Elem,
) -> Result<Contribution, AsmError> {
    let view = View::new(scenario, ctx.state());
    let mut s = Stager::new(ctx);
    if view.is_terminal(j) || view.mapped_broker(j).is_some() {
        return Ok(s.finish());
    }
    let candidates: Vec<&Elem> = scenario
        .brokers
        .keys()
        .filter(|b| broker_satisfies(scenario, view.state, j, b))
        .collect();
    match s.ctx.choose(&candidates) {
        Some(b) => s.set(MAPPED_BROKER, &[j], *b)?,
        None => {
            s.ctx.note(format!("{j}: no broker holds every required property"));
            s.out.stalled(FailReason::Unsatisfiable);
        }
    }
    Ok(s.finish())
}

/// Broker performance: the configured constant, or the success ratio of the
/// jobs submitted to the broker that have finished (1.0 when none has).
pub fn get_broker_perf(scenario: &Scenario, state: &GridState, b: &Elem) -> f64 {
    match scenario.brokers.get(b).map(|broker| broker.perf) {
        Some(PerfConfig::Static(v)) => v,
        Some(PerfConfig::Dynamic) => {
            let view = View::new(scenario, state);
            let (mut done, mut failed) = (0u64, 0u64);
            for j in scenario.jobs.keys().filter(|j| view.submitted(j, b)) {
                match view.job_state(j) {
                    Some(JobState::Done) => done += 1,
                    Some(JobState::Failed) => failed += 1,
                    _ => {}
                }
            }
            if done + failed == 0 {
                1.0
            } else {
                done as f64 / (done + failed) as f64
            }
        }
        None => 0.0,
    }
}

/// Performance of every broker, zeroed where a requirement has no exact keyword match.
pub fn broker_scores(scenario: &Scenario, state: &GridState, j: &Elem) -> ScoreVector {
    let subjects: Vec<Elem> = scenario.brokers.keys().cloned().collect();
    let scores = subjects
        .iter()
        .map(|b| {
            if broker_matches_exactly(scenario, state, j, b) {
                get_broker_perf(scenario, state, b).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    ScoreVector { subjects, scores }
}

/// Ranked broker mapping: the best-performing compatible broker wins.
pub fn refined_broker_mapping(
    scenario: &Scenario,
    ctx: &mut StepContext<'_>,
    j: &Elem,
) -> Result<Contribution, AsmError> {
    let view = View::new(scenario, ctx.state());
    let mut s = Stager::new(ctx);
    if view.is_terminal(j) || view.mapped_broker(j).is_some() {
        return Ok(s.finish());
    }
    let scores = broker_scores(scenario, view.state, j);
    let best = scores.argmax();
    match s.ctx.choose(&best) {
        Some(b) => s.set(MAPPED_BROKER, &[j], *b)?,
        None => {
            s.ctx.note(format!("{j}: every broker scores zero"));
            s.out.stalled(FailReason::Unsatisfiable);
        }
    }
    Ok(s.finish())
}

/// Broker selection: submit the job to its mapped broker once the user may use some
/// resource on a host the broker manages.
pub fn rule_broker_selection(
    scenario: &Scenario,
    ctx: &mut StepContext<'_>,
    j: &Elem,
) -> Result<Contribution, AsmError> {
    let view = View::new(scenario, ctx.state());
    let mut s = Stager::new(ctx);
    if view.is_terminal(j) {
        return Ok(s.finish());
    }
    let Some(b) = view.mapped_broker(j) else {
        return Ok(s.finish());
    };
    if view.submitted(j, &b) {
        return Ok(s.finish());
    }
    let Some(user) = scenario.owner_of(j) else {
        return Ok(s.finish());
    };
    let usable = scenario.resources.values().any(|pr| {
        view.state.get(MANAGES, &[&pr.host, &b]).is_true() && view.can_use(user, &pr.id)
    });
    if usable {
        s.set(SUBMITTED, &[j, &b], true)?;
    } else {
        s.ctx.note(format!("{j}: {user} may use nothing {b} manages (authorization stall)"));
        s.out.stalled(FailReason::Unauthorized);
    }
    Ok(s.finish())
}
