use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::signature::{Signature, RESERVE};
use super::update::UpdateSet;
use super::value::{Elem, Location, Value};
use super::AsmError;

/// An ASM state: function interpretations plus universe membership.
///
/// Universe predicates are stored as member sets but read and written like any
/// other unary boolean location. Locations holding `undef` are not stored, so
/// two states are equal iff they interpret every location identically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridState {
    signature: Arc<Signature>,
    interpretation: BTreeMap<Location, Value>,
    universes: BTreeMap<&'static str, BTreeSet<Elem>>,
}

impl GridState {
    pub fn new(signature: Signature) -> Self {
        let universes = signature.universes().map(|u| (u, BTreeSet::new())).collect();
        GridState {
            signature: Arc::new(signature),
            interpretation: BTreeMap::new(),
            universes,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn read(&self, loc: &Location) -> Result<Value, AsmError> {
        let decl = self.signature.check_arity(loc.function, loc.args.len())?;
        if decl.universe {
            return Ok(Value::Bool(self.is_member(loc.function, &loc.args[0])));
        }
        Ok(self.interpretation.get(loc).cloned().unwrap_or(Value::Undef))
    }

    /// Like [`read`](Self::read) for locations built by trusted code.
    ///
    /// Panics on an undeclared function or an arity mismatch.
    pub fn get(&self, function: &'static str, args: &[&Elem]) -> Value {
        let loc = Location::new(function, args.iter().map(|e| (*e).clone()).collect());
        match self.read(&loc) {
            Ok(v) => v,
            Err(e) => panic!("signature violation reading {loc}: {e}"),
        }
    }

    pub fn is_member(&self, universe: &str, e: &Elem) -> bool {
        self.universes.get(universe).is_some_and(|s| s.contains(e))
    }

    pub fn members(&self, universe: &str) -> impl Iterator<Item = &Elem> + '_ {
        self.universes.get(universe).into_iter().flatten()
    }

    pub fn universe_names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.universes.keys().copied()
    }

    /// Interpreted (non-undef, non-universe) locations.
    pub fn interpretation(&self) -> impl Iterator<Item = (&Location, &Value)> + '_ {
        self.interpretation.iter()
    }

    pub fn reserve_counter(&self) -> i64 {
        self.interpretation
            .get(&Location::nullary(RESERVE))
            .and_then(Value::as_int)
            .unwrap_or(0)
    }

    /// Fires a consistent update set in place. On conflict the state is untouched.
    pub fn fire(&mut self, updates: &UpdateSet) -> Result<(), AsmError> {
        if let Err(conflicts) = updates.check_consistency() {
            return Err(AsmError::Inconsistent(conflicts));
        }
        for u in updates {
            self.write(&u.location, u.value.clone())?;
        }
        Ok(())
    }

    /// Functional form of [`fire`](Self::fire).
    pub fn fired(&self, updates: &UpdateSet) -> Result<GridState, AsmError> {
        let mut next = self.clone();
        next.fire(updates)?;
        Ok(next)
    }

    fn write(&mut self, loc: &Location, value: Value) -> Result<(), AsmError> {
        let decl = self.signature.check_arity(loc.function, loc.args.len())?;
        if !decl.codomain.admits(&value) {
            return Err(AsmError::CodomainMismatch {
                location: loc.to_string(),
                value: value.to_string(),
            });
        }
        if decl.universe {
            let set = self.universes.entry(loc.function).or_default();
            if value.is_true() {
                set.insert(loc.args[0].clone());
            } else {
                set.remove(&loc.args[0]);
            }
        } else if value.is_undef() {
            self.interpretation.remove(loc);
        } else {
            self.interpretation.insert(loc.clone(), value);
        }
        Ok(())
    }

    /// Imports a fresh element `<universe>#<n>` from the reserve into `universe`.
    pub fn extend(&mut self, universe: &'static str) -> Result<Elem, AsmError> {
        if !self.signature.is_universe(universe) {
            return Err(AsmError::NotAUniverse(universe.to_string()));
        }
        let mut n = self.reserve_counter();
        let fresh = loop {
            let candidate = fresh_name(universe, n);
            n += 1;
            if !self.in_any_universe(&candidate) {
                break candidate;
            }
        };
        self.interpretation
            .insert(Location::nullary(RESERVE), Value::Int(n));
        self.universes
            .entry(universe)
            .or_default()
            .insert(fresh.clone());
        Ok(fresh)
    }

    pub fn in_any_universe(&self, e: &Elem) -> bool {
        self.universes.values().any(|s| s.contains(e))
    }
}

pub(crate) fn fresh_name(universe: &str, n: i64) -> Elem {
    Elem::new(format!("{universe}#{n}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm::signature::Codomain;

    fn state() -> GridState {
        GridState::new(
            Signature::new()
                .universe("PROCESS")
                .function("mapped", 1, Codomain::Element)
                .function("jobState", 1, Codomain::Keyword(&["submitted", "done"])),
        )
    }

    #[test]
    fn never_written_reads_undef() {
        let s = state();
        let l = Location::unary("mapped", &"p1".into());
        assert_eq!(s.read(&l).unwrap(), Value::Undef);
    }

    #[test]
    fn write_then_read() {
        let mut s = state();
        let l = Location::unary("jobState", &"j1".into());
        let mut u = UpdateSet::new();
        u.stage(s.signature(), l.clone(), Value::Keyword("submitted")).unwrap();
        s.fire(&u).unwrap();
        assert_eq!(s.read(&l).unwrap(), Value::Keyword("submitted"));
    }

    #[test]
    fn read_rejects_bad_locations() {
        let s = state();
        assert!(matches!(
            s.read(&Location::unary("nope", &"x".into())),
            Err(AsmError::UndeclaredFunction(_))
        ));
        assert!(matches!(
            s.read(&Location::nullary("mapped")),
            Err(AsmError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn fire_empty_is_identity() {
        let mut s = state();
        s.extend("PROCESS").unwrap();
        let before = s.clone();
        s.fire(&UpdateSet::new()).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn membership_false_removes_element() {
        let mut s = state();
        let p = s.extend("PROCESS").unwrap();
        let mut u = UpdateSet::new();
        u.stage(s.signature(), Location::unary("PROCESS", &p), false).unwrap();
        s.fire(&u).unwrap();
        assert!(!s.is_member("PROCESS", &p));
        assert_eq!(s.get("PROCESS", &[&p]), Value::Bool(false));
    }

    #[test]
    fn frame_condition_on_other_locations() {
        let mut s = state();
        let p1 = Elem::new("p1");
        let p2 = Elem::new("p2");
        let mut u = UpdateSet::new();
        u.stage(s.signature(), Location::unary("mapped", &p2), Elem::new("loc2")).unwrap();
        s.fire(&u).unwrap();
        let mut u = UpdateSet::new();
        u.stage(s.signature(), Location::unary("mapped", &p1), Elem::new("loc1")).unwrap();
        s.fire(&u).unwrap();
        assert_eq!(s.get("mapped", &[&p2]), Value::Elem("loc2".into()));
    }

    #[test]
    fn inconsistent_fire_leaves_state() {
        let mut s = state();
        let l = Location::unary("jobState", &"j1".into());
        let mut u = UpdateSet::new();
        u.stage(s.signature(), l.clone(), Value::Keyword("done")).unwrap();
        u.stage(s.signature(), l, Value::Keyword("submitted")).unwrap();
        let before = s.clone();
        assert!(matches!(s.fire(&u), Err(AsmError::Inconsistent(_))));
        assert_eq!(s, before);
    }

    #[test]
    fn extend_is_fresh_and_named_by_counter() {
        let mut s = state();
        let a = s.extend("PROCESS").unwrap();
        let b = s.extend("PROCESS").unwrap();
        assert_ne!(a, b);
        assert!(s.is_member("PROCESS", &a));
        assert!(s.is_member("PROCESS", &b));

        let mut u = UpdateSet::new();
        u.stage(s.signature(), Location::nullary(RESERVE), 7i64).unwrap();
        s.fire(&u).unwrap();
        assert_eq!(s.extend("PROCESS").unwrap().as_str(), "PROCESS#7");
        assert_eq!(s.reserve_counter(), 8);
    }

    #[test]
    fn extend_skips_taken_names() {
        let mut s = state();
        let mut u = UpdateSet::new();
        u.stage(s.signature(), Location::unary("PROCESS", &"PROCESS#0".into()), true)
            .unwrap();
        s.fire(&u).unwrap();
        assert_eq!(s.extend("PROCESS").unwrap().as_str(), "PROCESS#1");
    }

    #[test]
    fn extend_requires_universe() {
        let mut s = state();
        assert!(matches!(s.extend("mapped"), Err(AsmError::NotAUniverse(_))));
    }
}
