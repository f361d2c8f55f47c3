mod common;

use common::*;
use gridasm::model::{FailReason, JobState};
use gridasm::scenario::Mode;
use gridasm::sim::check::{job_trajectories, replay};
use gridasm::sim::{compute_metrics, emit_trace, run, Outcome, Simulation, Trace};
use gridasm::brokering::get_broker_perf;
use proptest::prelude::*;

const MINIMAL: &str = include_str!("../../../scenarios/minimal.scn");
const WALKTHROUGH: &str = include_str!("../../../scenarios/walkthrough.scn");
const ABORT: &str = include_str!("../../../scenarios/abort.scn");
const UNSATISFIABLE: &str = include_str!("../../../scenarios/unsatisfiable.scn");

fn bytes(trace: &Trace) -> Vec<u8> {
    let mut out = Vec::new();
    emit_trace(trace, &mut out).unwrap();
    out
}

#[test]
fn minimal_job_walks_the_full_path() {
    let s = load(MINIMAL);
    let (report, trace) = run(&s).unwrap();
    let path: Vec<JobState> = job_trajectories(&trace)[&e("j1")].iter().flatten().copied().collect();
    assert_eq!(path, vec![JobState::Submitted, JobState::Waiting, JobState::Running, JobState::Done]);
    assert_eq!(report.outcome, Outcome::AllDone);
    let j1 = &report.jobs[&e("j1")];
    assert_eq!(j1.broker, Some(e("b1")));
    assert_eq!(j1.host, Some(e("h1")));
    for state in ["submitted", "waiting", "running"] {
        assert!(j1.steps_in.get(state).copied().unwrap_or(0) >= 1, "{state}");
    }
}

#[test]
fn abort_fault_fails_the_job() {
    let s = load(ABORT);
    let (report, _) = run(&s).unwrap();
    let j1 = &report.jobs[&e("j1")];
    assert_eq!(j1.state, Some(JobState::Failed));
    assert_eq!(j1.reason, Some(FailReason::Aborted));
    assert_eq!(report.outcome, Outcome::SomeFailed);
}

#[test]
fn unsatisfiable_job_fails_within_stall_limit() {
    let s = load(UNSATISFIABLE);
    assert_eq!(s.config.stall_limit, 5);
    let (report, trace) = run(&s).unwrap();
    let j1 = &report.jobs[&e("j1")];
    assert_eq!(j1.state, Some(JobState::Failed));
    assert_eq!(j1.reason, Some(FailReason::Unsatisfiable));
    let onset = trace
        .events
        .iter()
        .find(|ev| ev.agent == "j1" && ev.rule == "stall")
        .map(|ev| ev.step)
        .unwrap();
    assert!(j1.finished_at.unwrap() <= onset + 5, "{j1:?}, onset {onset}");
}

#[test]
fn step_budget_leaves_jobs_in_flight() {
    let mut s = load(WALKTHROUGH);
    s.config.max_steps = 3;
    let (report, _) = run(&s).unwrap();
    assert_eq!(report.steps, 3);
    assert_eq!(report.outcome, Outcome::InFlight);
}

#[test]
fn empty_trace_emits_nothing() {
    assert!(bytes(&Trace::default()).is_empty());
}

#[test]
fn one_update_emits_one_line() {
    let s = load(MINIMAL);
    let mut sim = Simulation::new(&s).unwrap();
    sim.step_once().unwrap();
    let (_, trace) = sim.into_parts();
    assert_eq!(trace.updates().count(), 1);
    let text = String::from_utf8(bytes(&trace)).unwrap();
    assert_eq!(text, "0\tj1\tbroker_mapping\tmappedBroker(j1)\tundef\tb1\n");
}

#[test]
fn repeated_runs_emit_identical_bytes() {
    for text in [WALKTHROUGH, ABORT] {
        let mut s = load(text);
        for seed in [None, Some(7), Some(8)] {
            if let Some(seed) = seed {
                s.config.choose = gridasm::asm::ChoosePolicy::seeded(seed);
            }
            let a = bytes(&run(&s).unwrap().1);
            let b = bytes(&run(&s).unwrap().1);
            assert!(!a.is_empty());
            assert_eq!(a, b);
        }
    }
}

#[test]
fn trace_old_values_match_pre_states() {
    let s = load(WALKTHROUGH);
    let mut sim = Simulation::new(&s).unwrap();
    while !sim.is_finished() {
        let pre = sim.state().clone();
        let log = sim.step_once().unwrap();
        for f in &log.fired {
            for u in &f.updates {
                assert_eq!(pre.read(&u.location).unwrap(), u.old, "{}", u.location);
            }
        }
    }
    let (state, trace) = sim.into_parts();
    let steps: Vec<u64> = trace.events.iter().map(|ev| ev.step).collect();
    assert!(steps.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(replay(&s, &trace).unwrap(), state);
}

const FOUR_JOBS_ONE_ABORT: &str = "
[config]
mode = meta
runtime = 2

[user u]
can_login = h1
can_use = r1

[broker b1]
hosts = h1
perf = dynamic

[host h1]
resource r1 key=cpu keyword=x86 type=direct

[job j1]
user = u
process p1 needs cpu=x86

[job j2]
user = u
process p2 needs cpu=x86

[job j3]
user = u
process p3 needs cpu=x86

[job j4]
user = u
process p4 needs cpu=x86

[fault]
abort process=p4 at=2
";

#[test]
fn metrics_for_all_done() {
    let s = load(WALKTHROUGH);
    let (report, _) = run(&s).unwrap();
    let m = compute_metrics(&report);
    assert_eq!(m.done_fraction, 1.0);
    assert_eq!(m.broker_success[&e("b1")], Some(1.0));
    for (j, span) in &m.makespan {
        let r = &report.jobs[j];
        assert_eq!(*span, Some(r.finished_at.unwrap() - r.submitted_at.unwrap()));
    }
}

#[test]
fn broker_success_ratio_matches_dynamic_perf() {
    let s = load(FOUR_JOBS_ONE_ABORT);
    let mut sim = Simulation::new(&s).unwrap();
    sim.run_to_end().unwrap();
    let report = sim.report();
    let states: Vec<Option<JobState>> = report.jobs.values().map(|j| j.state).collect();
    assert_eq!(
        states,
        vec![Some(JobState::Done), Some(JobState::Done), Some(JobState::Done), Some(JobState::Failed)]
    );
    let m = compute_metrics(&report);
    assert_eq!(m.broker_success[&e("b1")], Some(0.75));
    assert_eq!(m.done_fraction, 0.75);
    assert_eq!(get_broker_perf(&s, sim.state(), &e("b1")), 0.75);
    assert_eq!(oracle_perf(&s, sim.state(), &e("b1")), 0.75);
    assert_eq!(report.perf_history[&e("b1")].last().unwrap().1, 0.75);

    // The aborted job's makespan runs to its failure step.
    let j4 = &report.jobs[&e("j4")];
    assert_eq!(m.makespan[&e("j4")], Some(j4.finished_at.unwrap() - j4.submitted_at.unwrap()));
}

#[test]
fn report_lists_every_job_once() {
    let s = load(WALKTHROUGH);
    let (report, _) = run(&s).unwrap();
    let text = report.to_string();
    for j in s.jobs.keys() {
        assert_eq!(text.matches(&format!("job.{j}.state = ")).count(), 1);
    }
    assert!(text.starts_with(&format!("steps = {}\noutcome = all-done\n", report.steps)));
}

const BROKER_RULES: [&str; 3] = ["broker_mapping", "refined_broker_mapping", "broker_selection"];
const HOST_RULES: [&str; 3] = ["host_mapping", "refined_host_mapping", "host_selection"];

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn modes_only_run_their_own_matchmakers(seed in any::<u64>()) {
        let mut s = gen_scenario(seed, GenOptions::default());
        let mut modes = vec![s.config.mode];
        if s.config.mode == Mode::Meta {
            modes.push(Mode::Broker);
        }
        for mode in modes {
            s.config.mode = mode;
            let (_, trace) = run(&s).unwrap();
            for ev in &trace.events {
                let broker_rule = BROKER_RULES.contains(&ev.rule);
                let host_rule = HOST_RULES.contains(&ev.rule);
                match mode {
                    Mode::Local => prop_assert!(!broker_rule && !host_rule, "{}", ev.rule),
                    Mode::Broker => prop_assert!(!broker_rule, "{}", ev.rule),
                    Mode::Meta => prop_assert!(ev.rule != "user_submission"),
                }
            }
        }
    }

    #[test]
    fn reports_cover_every_job(seed in any::<u64>()) {
        let s = gen_scenario(seed, GenOptions::default());
        let (report, _) = run(&s).unwrap();
        prop_assert_eq!(report.jobs.keys().collect::<Vec<_>>(), s.jobs.keys().collect::<Vec<_>>());
        let finished = report.jobs.values().all(|j| matches!(j.state, Some(JobState::Done | JobState::Failed)));
        prop_assert_eq!(finished, report.outcome != Outcome::InFlight);
    }
}
