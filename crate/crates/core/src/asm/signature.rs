use std::collections::BTreeMap;

use super::value::Value;
use super::AsmError;

/// Nullary location holding the next reserve index used by `extend`.
pub const RESERVE: &str = "reserve";

/// Declared codomain of a function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Codomain {
    Bool,
    /// Any superuniverse element; membership is not checked at staging time
    /// because freshly extended elements join their universe in the same firing.
    Element,
    Keyword(&'static [&'static str]),
    Int,
    Real,
}

impl Codomain {
    pub fn admits(&self, value: &Value) -> bool {
        match (self, value) {
            (_, Value::Undef) => true,
            (Codomain::Bool, Value::Bool(_)) => true,
            (Codomain::Element, Value::Elem(_)) => true,
            (Codomain::Keyword(allowed), Value::Keyword(k)) => allowed.contains(k),
            (Codomain::Int, Value::Int(_)) => true,
            (Codomain::Real, Value::Real(_)) => true,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDecl {
    pub arity: usize,
    pub codomain: Codomain,
    /// Unary boolean membership predicate of a universe.
    pub universe: bool,
}

/// Finite set of function names with fixed arities and codomains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    functions: BTreeMap<&'static str, FunctionDecl>,
}

impl Default for Signature {
    fn default() -> Self {
        Self::new()
    }
}

impl Signature {
    /// A signature holding only the kernel's `reserve` counter.
    pub fn new() -> Self {
        let mut functions = BTreeMap::new();
        functions.insert(
            RESERVE,
            FunctionDecl { arity: 0, codomain: Codomain::Int, universe: false },
        );
        Signature { functions }
    }

    pub fn universe(mut self, name: &'static str) -> Self {
        self.functions.insert(
            name,
            FunctionDecl { arity: 1, codomain: Codomain::Bool, universe: true },
        );
        self
    }

    pub fn function(mut self, name: &'static str, arity: usize, codomain: Codomain) -> Self {
        self.functions
            .insert(name, FunctionDecl { arity, codomain, universe: false });
        self
    }

    pub fn get(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.get(name)
    }

    pub fn is_universe(&self, name: &str) -> bool {
        self.functions.get(name).is_some_and(|d| d.universe)
    }

    pub fn universes(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.functions
            .iter()
            .filter(|(_, d)| d.universe)
            .map(|(n, _)| *n)
    }

    pub fn check_arity(&self, function: &str, arity: usize) -> Result<&FunctionDecl, AsmError> {
        let decl = self
            .functions
            .get(function)
            .ok_or_else(|| AsmError::UndeclaredFunction(function.to_string()))?;
        if decl.arity != arity {
            return Err(AsmError::ArityMismatch {
                function: function.to_string(),
                expected: decl.arity,
                got: arity,
            });
        }
        Ok(decl)
    }
}
