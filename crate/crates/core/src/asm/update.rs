use std::collections::BTreeMap;
use std::fmt;

use super::signature::Signature;
use super::value::{Location, Value};
use super::AsmError;

/// A pair `(location, value)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Update {
    pub location: Location,
    pub value: Value,
}

/// Staged writes. Duplicates are kept as staged; consistency is checked separately.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UpdateSet {
    updates: Vec<Update>,
}

/// One location proposed with more than one value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conflict {
    pub location: Location,
    /// Distinct proposed values in staging order.
    pub values: Vec<Value>,
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- {{", self.location)?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

impl UpdateSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `(loc, value)` after checking it against the signature.
    pub fn stage(
        &mut self,
        signature: &Signature,
        loc: Location,
        value: impl Into<Value>,
    ) -> Result<&mut Self, AsmError> {
        let value = value.into();
        let decl = signature.check_arity(loc.function, loc.args.len())?;
        if !decl.codomain.admits(&value) {
            return Err(AsmError::CodomainMismatch {
                location: loc.to_string(),
                value: value.to_string(),
            });
        }
        self.updates.push(Update { location: loc, value });
        Ok(self)
    }

    pub(crate) fn push_unchecked(&mut self, update: Update) {
        self.updates.push(update);
    }

    pub fn extend_from(&mut self, other: &UpdateSet) {
        self.updates.extend(other.updates.iter().cloned());
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Update> {
        self.updates.iter()
    }

    pub fn contains(&self, loc: &Location, value: &Value) -> bool {
        self.updates
            .iter()
            .any(|u| &u.location == loc && &u.value == value)
    }

    /// Every location with two or more distinct proposed values.
    pub fn conflicts(&self) -> Vec<Conflict> {
        let mut by_loc: BTreeMap<&Location, Vec<&Value>> = BTreeMap::new();
        for u in &self.updates {
            let values = by_loc.entry(&u.location).or_default();
            if !values.contains(&&u.value) {
                values.push(&u.value);
            }
        }
        by_loc
            .into_iter()
            .filter(|(_, vs)| vs.len() > 1)
            .map(|(loc, vs)| Conflict {
                location: loc.clone(),
                values: vs.into_iter().cloned().collect(),
            })
            .collect()
    }

    pub fn check_consistency(&self) -> Result<(), Vec<Conflict>> {
        let conflicts = self.conflicts();
        if conflicts.is_empty() {
            Ok(())
        } else {
            Err(conflicts)
        }
    }
}

impl<'a> IntoIterator for &'a UpdateSet {
    type Item = &'a Update;
    type IntoIter = std::slice::Iter<'a, Update>;

    fn into_iter(self) -> Self::IntoIter {
        self.updates.iter()
    }
}
