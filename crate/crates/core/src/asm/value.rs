//! Elements, values and locations of an ASM state.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// Identifier of a superuniverse element (a job, a host, a fresh `PROCESS#3`, ...).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(Arc<str>);

impl Elem {
    pub fn new(id: impl AsRef<str>) -> Self {
        Elem(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Elem {
    fn from(s: &str) -> Self {
        Elem::new(s)
    }
}

impl From<String> for Elem {
    fn from(s: String) -> Self {
        Elem(Arc::from(s))
    }
}

impl std::borrow::Borrow<str> for Elem {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Elem {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// A real number with total equality, so states containing reals can be compared.
#[derive(Clone, Copy, Debug)]
pub struct Real(pub f64);

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for Real {}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Content of a location. `Undef` is a value of its own and never equals `Bool(false)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Undef,
    Bool(bool),
    Elem(Elem),
    Keyword(&'static str),
    Int(i64),
    Real(Real),
}

impl Value {
    pub fn is_undef(&self) -> bool {
        matches!(self, Value::Undef)
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Value::Bool(true))
    }

    pub fn as_elem(&self) -> Option<&Elem> {
        match self {
            Value::Elem(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_keyword(&self) -> Option<&'static str> {
        match self {
            Value::Keyword(k) => Some(k),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<Elem> for Value {
    fn from(e: Elem) -> Self {
        Value::Elem(e)
    }
}

impl From<&Elem> for Value {
    fn from(e: &Elem) -> Self {
        Value::Elem(e.clone())
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Undef => f.write_str("undef"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Elem(e) => write!(f, "{e}"),
            Value::Keyword(k) => f.write_str(k),
            Value::Int(n) => write!(f, "{n}"),
            Value::Real(r) => write!(f, "{}", r.0),
        }
    }
}

/// A pair `(f, a)`: function name plus argument tuple.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub function: &'static str,
    pub args: Vec<Elem>,
}

impl Location {
    pub fn new(function: &'static str, args: Vec<Elem>) -> Self {
        Location { function, args }
    }

    pub fn nullary(function: &'static str) -> Self {
        Location { function, args: Vec::new() }
    }

    pub fn unary(function: &'static str, a: &Elem) -> Self {
        Location { function, args: vec![a.clone()] }
    }

    pub fn binary(function: &'static str, a: &Elem, b: &Elem) -> Self {
        Location { function, args: vec![a.clone(), b.clone()] }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.function)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
