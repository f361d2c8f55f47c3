use std::collections::BTreeMap;
use std::fmt;

use crate::asm::{Elem, Note};
use crate::model::{FailReason, JobState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    AllDone,
    /// Every job finished and at least one failed.
    SomeFailed,
    /// The step budget ran out with jobs still in flight.
    InFlight,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::AllDone => "all-done",
            Outcome::SomeFailed => "some-failed",
            Outcome::InFlight => "in-flight",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobReport {
    pub id: Elem,
    pub state: Option<JobState>,
    pub reason: Option<FailReason>,
    /// Broker the job was submitted to, if any.
    pub broker: Option<Elem>,
    pub host: Option<Elem>,
    /// First step in which the job's agent fired, i.e. the step the grid took the job on.
    pub submitted_at: Option<u64>,
    /// Step whose firing made the job done or failed.
    pub finished_at: Option<u64>,
    /// Steps spent in each state, keyed by state keyword ("undef" before submission).
    pub steps_in: BTreeMap<&'static str, u64>,
}

impl JobReport {
    pub fn makespan(&self) -> Option<u64> {
        Some(self.finished_at? - self.submitted_at?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub steps: u64,
    pub outcome: Outcome,
    pub jobs: BTreeMap<Elem, JobReport>,
    /// `(step, perf)` every time a broker's performance changed, starting at step 0.
    pub perf_history: BTreeMap<Elem, Vec<(u64, f64)>>,
    pub notes: Vec<Note>,
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), |v| v.to_string())
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let metrics = compute_metrics(self);
        writeln!(f, "steps = {}", self.steps)?;
        writeln!(f, "outcome = {}", self.outcome)?;
        writeln!(f, "done_fraction = {}", metrics.done_fraction)?;
        for (id, j) in &self.jobs {
            writeln!(f, "job.{id}.state = {}", opt(&j.state.map(|s| s.keyword())))?;
            writeln!(f, "job.{id}.reason = {}", opt(&j.reason.map(|r| r.keyword())))?;
            writeln!(f, "job.{id}.broker = {}", opt(&j.broker))?;
            writeln!(f, "job.{id}.host = {}", opt(&j.host))?;
            writeln!(f, "job.{id}.submitted_at = {}", opt(&j.submitted_at))?;
            writeln!(f, "job.{id}.finished_at = {}", opt(&j.finished_at))?;
            writeln!(f, "job.{id}.makespan = {}", opt(&j.makespan()))?;
            let steps: Vec<String> = j.steps_in.iter().map(|(s, n)| format!("{s}:{n}")).collect();
            writeln!(f, "job.{id}.steps = {}", steps.join(" "))?;
        }
        for (b, history) in &self.perf_history {
            let h: Vec<String> = history.iter().map(|(s, v)| format!("{s}:{v}")).collect();
            writeln!(f, "broker.{b}.perf = {}", h.join(" "))?;
            let ratio = metrics.broker_success.get(b).copied().flatten();
            writeln!(f, "broker.{b}.success_ratio = {}", opt(&ratio))?;
        }
        for n in &self.notes {
            writeln!(f, "note = {} {} {}", n.step, n.agent, n.message)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub makespan: BTreeMap<Elem, Option<u64>>,
    /// done / (done + failed) over jobs submitted to each broker; `None` before any finish.
    pub broker_success: BTreeMap<Elem, Option<f64>>,
    pub done_fraction: f64,
}

pub fn compute_metrics(report: &RunReport) -> Metrics {
    let makespan = report
        .jobs
        .iter()
        .map(|(id, j)| (id.clone(), j.makespan()))
        .collect();
    let broker_success = report
        .perf_history
        .keys()
        .map(|b| {
            let (mut done, mut failed) = (0u64, 0u64);
            for j in report.jobs.values().filter(|j| j.broker.as_ref() == Some(b)) {
                match j.state {
                    Some(JobState::Done) => done += 1,
                    Some(JobState::Failed) => failed += 1,
                    _ => {}
                }
            }
            let ratio = (done + failed > 0).then(|| done as f64 / (done + failed) as f64);
            (b.clone(), ratio)
        })
        .collect();
    let done = report
        .jobs
        .values()
        .filter(|j| j.state == Some(JobState::Done))
        .count();
    let done_fraction = if report.jobs.is_empty() {
        0.0
    } else {
        done as f64 / report.jobs.len() as f64
    };
    Metrics { makespan, broker_success, done_fraction }
}
