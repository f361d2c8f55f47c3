//! Shared test support: a seeded random scenario generator and an exhaustive
//! matchmaking oracle that shares no code with the library's matchmakers.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write;

use gridasm::asm::{AsmError, ChoosePolicy, Elem, GridState, Location, StepContext, UpdateSet, Value};
use gridasm::model::{Attr, PerfConfig};
use gridasm::scenario::{parse_scenario, validate_scenario, Mode, Scenario};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn load(text: &str) -> Scenario {
    let s = parse_scenario(text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    if let Err(errors) = validate_scenario(&s) {
        panic!("{errors:?}\n{text}");
    }
    s
}

pub fn e(s: &str) -> Elem {
    Elem::new(s)
}

pub fn loc(function: &'static str, args: &[&str]) -> Location {
    Location::new(function, args.iter().map(|a| e(a)).collect())
}

/// `state` with the given locations overwritten.
pub fn with(state: &GridState, writes: Vec<(Location, Value)>) -> GridState {
    let mut set = UpdateSet::new();
    for (l, v) in writes {
        set.stage(state.signature(), l, v).unwrap();
    }
    state.fired(&set).unwrap()
}

/// Evaluates one rule against `state` at step 0 under lowest-id choose.
pub fn contribute<T>(
    state: &GridState,
    rule: impl FnOnce(&mut StepContext<'_>) -> Result<T, AsmError>,
) -> T {
    let mut ctx = StepContext::new(state, ChoosePolicy::lowest_id(), 0);
    rule(&mut ctx).unwrap()
}

/// Staged updates as a map; panics if the same location is staged twice.
pub fn staged(updates: &UpdateSet) -> std::collections::BTreeMap<Location, Value> {
    let mut out = std::collections::BTreeMap::new();
    for u in updates.iter() {
        assert!(out.insert(u.location.clone(), u.value.clone()).is_none(), "{} staged twice", u.location);
    }
    out
}

const CAPACITY_KEYS: [(&str, &str); 3] = [("cpu_speed", "GHz"), ("mem", "GB"), ("disk", "TB")];
const KEYWORD_KEYS: [(&str, [&str; 2]); 2] = [("arch", ["x86", "arm"]), ("os", ["linux", "bsd"])];
const SITES: [&str; 3] = ["eu", "us", "asia"];
const TIERS: [&str; 2] = ["gold", "silver"];

#[derive(Clone, Copy, Debug)]
pub struct GenOptions {
    pub max_brokers: usize,
    pub max_hosts: usize,
    pub max_resources_per_host: usize,
    pub max_jobs: usize,
    /// Probability of a random scripted fault per job.
    pub fault_rate: f64,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            max_brokers: 4,
            max_hosts: 6,
            max_resources_per_host: 5,
            max_jobs: 4,
            fault_rate: 0.3,
        }
    }
}

fn half(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> f64 {
    rng.gen_range(lo..=hi) as f64 / 2.0
}

/// Random scenario text. Capacities are half-integers and weights integers so
/// ranks are exact in binary floating point.
pub fn gen_scenario_text(seed: u64, opts: GenOptions) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();

    let n_hosts = rng.gen_range(1..=opts.max_hosts);
    let n_brokers = rng.gen_range(1..=opts.max_brokers);
    let n_users = rng.gen_range(1..=3);
    let n_jobs = rng.gen_range(1..=opts.max_jobs);
    let n_policies = rng.gen_range(1..=2);

    let mode = match rng.gen_range(0..10) {
        0 => Mode::Local,
        1 | 2 => Mode::Broker,
        _ => Mode::Meta,
    };
    writeln!(out, "[config]").unwrap();
    writeln!(out, "mode = {mode}").unwrap();
    let refined = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.8) { "refined" } else { "base" };
    writeln!(out, "matchmaking.broker = {}", refined(&mut rng)).unwrap();
    writeln!(out, "matchmaking.host = {}", refined(&mut rng)).unwrap();
    if rng.gen_bool(0.5) {
        writeln!(out, "choose = seeded\nseed = {}", rng.gen::<u32>()).unwrap();
    }
    writeln!(out, "stall_limit = {}", rng.gen_range(3..=12)).unwrap();
    writeln!(out, "max_steps = 400").unwrap();
    writeln!(out, "runtime = {}", rng.gen_range(1..=4)).unwrap();

    // Resources first so users can reference them.
    let mut hosts: Vec<(String, Vec<String>)> = Vec::new();
    let mut host_text = String::new();
    for h in 0..n_hosts {
        let hid = format!("h{h}");
        let mut rids = Vec::new();
        writeln!(host_text, "\n[host {hid}]").unwrap();
        for r in 0..rng.gen_range(1..=opts.max_resources_per_host) {
            let rid = format!("{hid}r{r}");
            let kind = if rng.gen_bool(0.2) { "handled" } else { "direct" };
            if rng.gen_bool(0.65) {
                let (key, unit) = *CAPACITY_KEYS.choose(&mut rng).unwrap();
                let cap = half(&mut rng, 1, 16);
                writeln!(host_text, "resource {rid} key={key} capacity={cap} unit={unit} type={kind}").unwrap();
            } else {
                let (key, values) = KEYWORD_KEYS.choose(&mut rng).unwrap();
                let v = values.choose(&mut rng).unwrap();
                writeln!(host_text, "resource {rid} key={key} keyword={v} type={kind}").unwrap();
            }
            rids.push(rid);
        }
        hosts.push((hid, rids));
    }
    let all_resources: Vec<&String> = hosts.iter().flat_map(|(_, r)| r).collect();
    let host_ids: Vec<&String> = hosts.iter().map(|(h, _)| h).collect();

    for u in 0..n_users {
        writeln!(out, "\n[user u{u}]").unwrap();
        let login: Vec<&str> = host_ids.iter().map(|h| h.as_str()).collect();
        writeln!(out, "can_login = {}", login.join(", ")).unwrap();
        let mut usable: Vec<&str> = all_resources
            .iter()
            .filter(|_| rng.gen_bool(0.85))
            .map(|r| r.as_str())
            .collect();
        if usable.is_empty() {
            usable.push(all_resources.choose(&mut rng).unwrap());
        }
        writeln!(out, "can_use = {}", usable.join(", ")).unwrap();
    }

    for p in 0..n_policies {
        writeln!(out, "\n[policy pol{p}]").unwrap();
        let mut any = false;
        for (key, _) in CAPACITY_KEYS {
            let w = rng.gen_range(0..=3);
            any |= w > 0;
            writeln!(out, "weight {key} = {w}").unwrap();
        }
        if !any {
            writeln!(out, "weight extra = 1").unwrap();
        }
    }

    for b in 0..n_brokers {
        writeln!(out, "\n[broker b{b}]").unwrap();
        writeln!(out, "property site={}", SITES.choose(&mut rng).unwrap()).unwrap();
        if rng.gen_bool(0.5) {
            writeln!(out, "property tier={}", TIERS.choose(&mut rng).unwrap()).unwrap();
        }
        let mut managed: Vec<&str> = host_ids
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .map(|h| h.as_str())
            .collect();
        if managed.is_empty() {
            managed.push(host_ids.choose(&mut rng).unwrap());
        }
        writeln!(out, "hosts = {}", managed.join(", ")).unwrap();
        if rng.gen_bool(0.3) {
            writeln!(out, "perf = dynamic").unwrap();
        } else {
            writeln!(out, "perf = {}", rng.gen_range(0..=10) as f64 / 10.0).unwrap();
        }
    }
    out.push_str(&host_text);

    let mut faults = String::new();
    for j in 0..n_jobs {
        let jid = format!("j{j}");
        writeln!(out, "\n[job {jid}]").unwrap();
        writeln!(out, "user = u{}", rng.gen_range(0..n_users)).unwrap();
        if mode == Mode::Local {
            writeln!(out, "host = {}", host_ids.choose(&mut rng).unwrap()).unwrap();
        }
        if rng.gen_bool(0.7) {
            writeln!(out, "require broker site={}", SITES.choose(&mut rng).unwrap()).unwrap();
        }
        if rng.gen_bool(0.25) {
            writeln!(out, "require broker tier={}", TIERS.choose(&mut rng).unwrap()).unwrap();
        }
        if rng.gen_bool(0.85) {
            writeln!(out, "require policy pol{}", rng.gen_range(0..n_policies)).unwrap();
        }
        let n_procs = rng.gen_range(1..=3);
        let mut pids = Vec::new();
        for p in 0..n_procs {
            let pid = format!("{jid}p{p}");
            let mut keys: BTreeSet<&str> = BTreeSet::new();
            for _ in 0..rng.gen_range(1..=2) {
                if rng.gen_bool(0.7) {
                    let (key, unit) = *CAPACITY_KEYS.choose(&mut rng).unwrap();
                    if keys.insert(key) {
                        let need = half(&mut rng, 1, 12);
                        writeln!(out, "process {pid} needs {key}>={need} unit={unit}").unwrap();
                    }
                } else {
                    let (key, values) = KEYWORD_KEYS.choose(&mut rng).unwrap();
                    if keys.insert(key) {
                        writeln!(out, "process {pid} needs {key}={}", values.choose(&mut rng).unwrap()).unwrap();
                    }
                }
            }
            pids.push(pid);
        }
        if rng.gen_bool(opts.fault_rate) {
            let kind = if rng.gen_bool(0.6) { "abort" } else { "terminate" };
            let pid = pids.choose(&mut rng).unwrap();
            writeln!(faults, "{kind} process={pid} at={}", rng.gen_range(0..=14)).unwrap();
        }
    }
    if !faults.is_empty() {
        writeln!(out, "\n[fault]\n{faults}").unwrap();
    }
    out
}

pub fn gen_scenario(seed: u64, opts: GenOptions) -> Scenario {
    load(&gen_scenario_text(seed, opts))
}

// ---- oracle -------------------------------------------------------------

fn truthy(state: &GridState, f: &'static str, args: &[&Elem]) -> bool {
    state.get(f, args) == Value::Bool(true)
}

/// Offered satisfies required: same key, and equal keyword or enough capacity in the same unit.
pub fn oracle_fits(required: &Attr, offered: &Attr) -> bool {
    match (required, offered) {
        (Attr::Keyword { key: k1, value: v1 }, Attr::Keyword { key: k2, value: v2 }) => {
            k1 == k2 && v1 == v2
        }
        (
            Attr::Capacity { key: k1, value: need, unit: u1 },
            Attr::Capacity { key: k2, value: have, unit: u2 },
        ) => k1 == k2 && u1 == u2 && have >= need,
        _ => false,
    }
}

/// Dynamic or static broker performance recomputed from raw state reads.
pub fn oracle_perf(s: &Scenario, state: &GridState, b: &Elem) -> f64 {
    match s.brokers[b].perf {
        PerfConfig::Static(v) => v,
        PerfConfig::Dynamic => {
            let mut done = 0;
            let mut failed = 0;
            for j in s.jobs.keys() {
                if !truthy(state, "submitted", &[j, b]) {
                    continue;
                }
                match state.get("jobState", &[j]).as_keyword() {
                    Some("done") => done += 1,
                    Some("failed") => failed += 1,
                    _ => {}
                }
            }
            if done + failed == 0 {
                1.0
            } else {
                done as f64 / (done + failed) as f64
            }
        }
    }
}

/// `(subject, score)` for every broker, zero where a requirement is unmet.
pub fn oracle_broker_scores(s: &Scenario, state: &GridState, j: &Elem) -> Vec<(Elem, f64)> {
    let job = &s.jobs[j];
    s.brokers
        .values()
        .map(|b| {
            let ok = job.broker_requirements.iter().all(|r| {
                let need = &s.requirements[r].attr;
                b.properties.iter().any(|p| oracle_fits(need, &s.properties[p].attr))
            });
            let v = if ok { oracle_perf(s, state, &b.id) } else { 0.0 };
            (b.id.clone(), v)
        })
        .collect()
}

fn host_covers(s: &Scenario, j: &Elem, h: &Elem) -> bool {
    s.jobs[j].processes.iter().all(|p| {
        s.processes[p].requests.iter().all(|ar| {
            let need = &s.abstract_resources[ar].attr;
            s.hosts[h]
                .resources
                .iter()
                .any(|r| oracle_fits(need, &s.resources[r].attr))
        })
    })
}

/// Hosts the job may be placed on given the state (its broker's hosts in meta mode).
pub fn oracle_host_scope(s: &Scenario, state: &GridState, j: &Elem) -> Vec<Elem> {
    let broker = state.get("mappedBroker", &[j]).as_elem().cloned();
    s.hosts
        .keys()
        .filter(|h| match s.config.mode {
            Mode::Meta => broker
                .as_ref()
                .is_some_and(|b| s.brokers[b].hosts.contains(*h)),
            _ => true,
        })
        .cloned()
        .collect()
}

pub fn oracle_rank(s: &Scenario, policy: &str, h: &Elem) -> f64 {
    let weights = &s.policies[policy].weights;
    let mut total = 0.0;
    for r in &s.hosts[h].resources {
        if let Attr::Capacity { key, value, .. } = &s.resources[r].attr {
            for (k, w) in weights {
                if k == key {
                    total += w * value;
                }
            }
        }
    }
    total
}

/// `(subject, score)` for every in-scope host. Jobs without a policy score
/// covering hosts 1.0 (the base matchmaker's candidate set).
pub fn oracle_host_scores(s: &Scenario, state: &GridState, j: &Elem) -> Vec<(Elem, f64)> {
    let policy = s.jobs[j].policy_requirement.as_ref().map(|r| match &s.requirements[r].attr {
        Attr::Keyword { value, .. } => value.clone(),
        Attr::Capacity { .. } => unreachable!(),
    });
    oracle_host_scope(s, state, j)
        .into_iter()
        .map(|h| {
            let v = if !host_covers(s, j, &h) {
                0.0
            } else {
                match &policy {
                    Some(p) => oracle_rank(s, p, &h),
                    None => 1.0,
                }
            };
            (h, v)
        })
        .collect()
}

/// Subjects tied at the positive maximum, in id order. Empty when all scores are zero.
pub fn oracle_argmax(scores: &[(Elem, f64)]) -> Vec<Elem> {
    let mut best = 0.0;
    for (_, v) in scores {
        if *v > best {
            best = *v;
        }
    }
    if best == 0.0 {
        return Vec::new();
    }
    let mut out: Vec<Elem> = scores
        .iter()
        .filter(|(_, v)| *v == best)
        .map(|(e, _)| e.clone())
        .collect();
    out.sort();
    out
}
