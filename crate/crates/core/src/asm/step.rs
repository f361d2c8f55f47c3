//! Multi-agent step: every agent reads the same snapshot, all firings are
//! merged into one update set, and that set is fired once.

use std::fmt;

use super::choose::{ChoosePolicy, Chooser};
use super::signature::RESERVE;
use super::state::{fresh_name, GridState};
use super::update::{Update, UpdateSet};
use super::value::{Elem, Location, Value};
use super::AsmError;

/// Agent name used for the reserve-counter firing.
pub const KERNEL_AGENT: &str = "kernel";

/// A rule program run by one agent.
pub trait Agent {
    fn name(&self) -> &str;

    /// Evaluates guards against `ctx.state()` and returns one firing per enabled rule.
    fn evaluate(&self, ctx: &mut StepContext<'_>) -> Result<Vec<Firing>, AsmError>;
}

/// Updates staged by one rule of one agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Firing {
    pub rule: &'static str,
    pub updates: UpdateSet,
}

impl Firing {
    pub fn new(rule: &'static str, updates: UpdateSet) -> Self {
        Firing { rule, updates }
    }
}

/// Free-form diagnostic emitted during guard evaluation (stalls, fallbacks).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Note {
    pub step: u64,
    pub agent: String,
    pub message: String,
}

/// Read-only view of the pre-state plus the step's choose and reserve services.
pub struct StepContext<'s> {
    state: &'s GridState,
    step: u64,
    chooser: Chooser,
    reserve_next: i64,
    allocated: Vec<Elem>,
    agent: String,
    notes: Vec<Note>,
}

impl<'s> StepContext<'s> {
    pub fn new(state: &'s GridState, policy: ChoosePolicy, step: u64) -> Self {
        StepContext {
            state,
            step,
            chooser: Chooser::new(policy, step),
            reserve_next: state.reserve_counter(),
            allocated: Vec::new(),
            agent: String::new(),
            notes: Vec::new(),
        }
    }

    pub fn state(&self) -> &'s GridState {
        self.state
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn choose<'a, T>(&mut self, candidates: &'a [T]) -> Option<&'a T> {
        self.chooser.choose(candidates)
    }

    /// `extend universe by e`: allocates a fresh element and stages its membership.
    pub fn extend(
        &mut self,
        universe: &'static str,
        updates: &mut UpdateSet,
    ) -> Result<Elem, AsmError> {
        if !self.state.signature().is_universe(universe) {
            return Err(AsmError::NotAUniverse(universe.to_string()));
        }
        let fresh = loop {
            let candidate = fresh_name(universe, self.reserve_next);
            self.reserve_next += 1;
            if !self.state.in_any_universe(&candidate) && !self.allocated.contains(&candidate) {
                break candidate;
            }
        };
        self.allocated.push(fresh.clone());
        updates.stage(self.state.signature(), Location::unary(universe, &fresh), true)?;
        Ok(fresh)
    }

    pub fn note(&mut self, message: impl Into<String>) {
        self.notes.push(Note {
            step: self.step,
            agent: self.agent.clone(),
            message: message.into(),
        });
    }

    fn set_agent(&mut self, name: &str) {
        self.agent.clear();
        self.agent.push_str(name);
    }
}

/// One update as applied: location with its pre- and post-step value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppliedUpdate {
    pub location: Location,
    pub old: Value,
    pub new: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiredRule {
    pub agent: String,
    pub rule: &'static str,
    pub updates: Vec<AppliedUpdate>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepLog {
    pub step: u64,
    pub fired: Vec<FiredRule>,
    pub notes: Vec<Note>,
}

impl StepLog {
    pub fn is_quiescent(&self) -> bool {
        self.fired.iter().all(|f| f.updates.is_empty())
    }

    pub fn update_set(&self) -> UpdateSet {
        let mut set = UpdateSet::new();
        for f in &self.fired {
            for u in &f.updates {
                set.push_unchecked(Update { location: u.location.clone(), value: u.new.clone() });
            }
        }
        set
    }
}

/// A conflicting location together with every agent/rule that proposed a value for it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributedConflict {
    pub location: Location,
    pub proposals: Vec<(String, &'static str, Value)>,
}

impl fmt::Display for AttributedConflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.location)?;
        for (agent, rule, value) in &self.proposals {
            write!(f, " {agent}/{rule}={value}")?;
        }
        Ok(())
    }
}

/// Runs one step of all `agents` on `state`. On an inconsistent combined
/// update set the state is left unchanged and the conflicts are reported.
pub fn step(
    state: &mut GridState,
    agents: &[&dyn Agent],
    policy: ChoosePolicy,
    step_no: u64,
) -> Result<StepLog, AsmError> {
    let (firings, reserve_next, notes) = {
        let snapshot: &GridState = state;
        let mut ctx = StepContext::new(snapshot, policy, step_no);
        let mut firings: Vec<(String, Firing)> = Vec::new();
        for agent in agents {
            ctx.set_agent(agent.name());
            for f in agent.evaluate(&mut ctx)? {
                if !f.updates.is_empty() {
                    firings.push((agent.name().to_string(), f));
                }
            }
        }
        (firings, ctx.reserve_next, ctx.notes)
    };

    let mut firings = firings;
    if reserve_next != state.reserve_counter() {
        let mut u = UpdateSet::new();
        u.stage(state.signature(), Location::nullary(RESERVE), reserve_next)?;
        firings.push((KERNEL_AGENT.to_string(), Firing::new("extend", u)));
    }

    let mut combined = UpdateSet::new();
    for (_, f) in &firings {
        combined.extend_from(&f.updates);
    }
    if let Err(conflicts) = combined.check_consistency() {
        let attributed = conflicts
            .into_iter()
            .map(|c| AttributedConflict {
                proposals: firings
                    .iter()
                    .flat_map(|(agent, f)| {
                        f.updates
                            .iter()
                            .filter(|u| u.location == c.location)
                            .map(move |u| (agent.clone(), f.rule, u.value.clone()))
                    })
                    .collect(),
                location: c.location,
            })
            .collect();
        return Err(AsmError::AgentConflict { step: step_no, conflicts: attributed });
    }

    let fired = firings
        .iter()
        .map(|(agent, f)| {
            let updates = f
                .updates
                .iter()
                .map(|u| {
                    Ok(AppliedUpdate {
                        location: u.location.clone(),
                        old: state.read(&u.location)?,
                        new: u.value.clone(),
                    })
                })
                .collect::<Result<Vec<_>, AsmError>>()?;
            Ok(FiredRule { agent: agent.clone(), rule: f.rule, updates })
        })
        .collect::<Result<Vec<_>, AsmError>>()?;

    state.fire(&combined)?;
    Ok(StepLog { step: step_no, fired, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm::signature::{Codomain, Signature};

    struct Guarded {
        name: &'static str,
        guard: (&'static str, i64),
        write: (&'static str, i64),
    }

    impl Agent for Guarded {
        fn name(&self) -> &str {
            self.name
        }

        fn evaluate(&self, ctx: &mut StepContext<'_>) -> Result<Vec<Firing>, AsmError> {
            let s = ctx.state();
            let cur = s.read(&Location::nullary(self.guard.0))?;
            if cur.as_int().unwrap_or(0) != self.guard.1 {
                return Ok(vec![]);
            }
            let mut u = UpdateSet::new();
            u.stage(s.signature(), Location::nullary(self.write.0), self.write.1)?;
            Ok(vec![Firing::new("r", u)])
        }
    }

    struct Spawner;

    impl Agent for Spawner {
        fn name(&self) -> &str {
            "spawner"
        }

        fn evaluate(&self, ctx: &mut StepContext<'_>) -> Result<Vec<Firing>, AsmError> {
            let mut u = UpdateSet::new();
            ctx.extend("PROCESS", &mut u)?;
            ctx.extend("PROCESS", &mut u)?;
            Ok(vec![Firing::new("spawn", u)])
        }
    }

    fn state() -> GridState {
        GridState::new(
            Signature::new()
                .universe("PROCESS")
                .function("x", 0, Codomain::Int)
                .function("y", 0, Codomain::Int),
        )
    }

    #[test]
    fn quiescent_step_keeps_state() {
        let mut s = state();
        let before = s.clone();
        let a = Guarded { name: "a", guard: ("x", 5), write: ("y", 1) };
        let log = step(&mut s, &[&a], ChoosePolicy::default(), 0).unwrap();
        assert!(log.is_quiescent());
        assert_eq!(s, before);
    }

    #[test]
    fn disjoint_writes_both_land() {
        let mut s = state();
        let a = Guarded { name: "a", guard: ("x", 0), write: ("y", 1) };
        let b = Guarded { name: "b", guard: ("y", 0), write: ("x", 1) };
        step(&mut s, &[&a, &b], ChoosePolicy::default(), 0).unwrap();
        assert_eq!(s.get("x", &[]), Value::Int(1));
        assert_eq!(s.get("y", &[]), Value::Int(1));
    }

    #[test]
    fn guards_read_pre_state() {
        // b's write disables a's guard, yet a still fires in the same step.
        let mut s = state();
        let a = Guarded { name: "a", guard: ("x", 0), write: ("y", 7) };
        let b = Guarded { name: "b", guard: ("x", 0), write: ("x", 3) };
        let log = step(&mut s, &[&b, &a], ChoosePolicy::default(), 0).unwrap();
        assert_eq!(log.fired.len(), 2);
        assert_eq!(s.get("y", &[]), Value::Int(7));
        assert_eq!(s.get("x", &[]), Value::Int(3));
    }

    #[test]
    fn conflict_names_agents() {
        let mut s = state();
        let a = Guarded { name: "a", guard: ("x", 0), write: ("y", 1) };
        let b = Guarded { name: "b", guard: ("x", 0), write: ("y", 2) };
        let before = s.clone();
        let err = step(&mut s, &[&a, &b], ChoosePolicy::default(), 4).unwrap_err();
        match err {
            AsmError::AgentConflict { step, conflicts } => {
                assert_eq!(step, 4);
                assert_eq!(conflicts.len(), 1);
                let agents: Vec<_> = conflicts[0].proposals.iter().map(|p| p.0.as_str()).collect();
                assert_eq!(agents, ["a", "b"]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(s, before);
    }

    #[test]
    fn extend_in_step_bumps_reserve() {
        let mut s = state();
        let log = step(&mut s, &[&Spawner], ChoosePolicy::default(), 0).unwrap();
        assert!(s.is_member("PROCESS", &"PROCESS#0".into()));
        assert!(s.is_member("PROCESS", &"PROCESS#1".into()));
        assert_eq!(s.reserve_counter(), 2);
        assert_eq!(log.fired.last().unwrap().agent, KERNEL_AGENT);
        step(&mut s, &[&Spawner], ChoosePolicy::default(), 1).unwrap();
        assert!(s.is_member("PROCESS", &"PROCESS#3".into()));
    }

    #[test]
    fn applied_updates_record_old_values() {
        let mut s = state();
        let a = Guarded { name: "a", guard: ("x", 0), write: ("x", 9) };
        let log = step(&mut s, &[&a], ChoosePolicy::default(), 0).unwrap();
        let u = &log.fired[0].updates[0];
        assert_eq!(u.old, Value::Undef);
        assert_eq!(u.new, Value::Int(9));
    }
}
