use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn gridasm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridasm")).args(args).output().unwrap()
}

fn run(file: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--scenario", file.to_str().unwrap()];
    args.extend_from_slice(extra);
    gridasm(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn all_done_exits_zero_and_reports() {
    let out = run(&scenario("walkthrough.scn"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout(&out);
    assert!(report.contains("outcome = all-done"), "{report}");
    assert!(report.contains("job.j1.state = done"));
    assert!(report.contains("job.j2.host = h3"));
}

#[test]
fn failed_job_exits_two() {
    let out = run(&scenario("abort.scn"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("job.j1.reason = aborted"));

    let out = run(&scenario("unsatisfiable.scn"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("job.j1.reason = unsatisfiable"));
}

#[test]
fn step_budget_exits_two_in_flight() {
    let out = run(&scenario("walkthrough.scn"), &["--max-steps", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("outcome = in-flight"));
}

#[test]
fn scenario_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    std::fs::write(&bad, "[host h1]\nresource r1 key=cpu keyword=x86\n").unwrap();
    let out = run(&bad, &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no jobs declared"));

    let invalid = dir.path().join("invalid.scn");
    std::fs::write(&invalid, "[user u]\ncan_use = r1\n[host h1]\nresource r1 key=cpu keyword=x86\n[job j1]\nuser = u\nprocess p1\n").unwrap();
    let out = run(&invalid, &["--mode", "broker"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PROC_NO_REQUEST"));

    let out = run(&dir.path().join("missing.scn"), &[]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn trace_file_matches_golden_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.tsv"), dir.path().join("b.tsv"));
    run(&scenario("walkthrough.scn"), &["--trace", a.to_str().unwrap()]);
    run(&scenario("walkthrough.scn"), &["--trace", b.to_str().unwrap()]);
    let golden = std::fs::read(scenario("walkthrough.trace.tsv")).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), golden);
    assert_eq!(std::fs::read(&b).unwrap(), golden);
}

#[test]
fn seeded_runs_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.tsv"), dir.path().join("b.tsv"));
    for path in [&a, &b] {
        let out = run(&scenario("walkthrough.scn"), &["--seed", "42", "--trace", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn report_flag_writes_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let out = run(&scenario("minimal.scn"), &["--report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("job.j1.state = done"));
}

#[test]
fn mode_and_matchmaking_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.tsv");
    let out = run(
        &scenario("walkthrough.scn"),
        &["--mode", "broker", "--matchmaking", "refined", "--trace", path.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    let trace = std::fs::read_to_string(&path).unwrap();
    assert!(!trace.contains("broker_mapping"));
    assert!(!trace.contains("broker_selection"));
    assert!(trace.contains("\trefined_host_mapping\t"));
    assert!(stdout(&out).contains("job.j1.broker = -"));
}

#[test]
fn bad_flag_values_are_rejected() {
    let out = run(&scenario("minimal.scn"), &["--mode", "cluster"]);
    assert!(!out.status.success());
}
