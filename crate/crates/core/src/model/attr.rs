use std::fmt;

use thiserror::Error;

/// Attribute of a resource, requirement or property.
///
/// Keyword attributes match by exact, case-sensitive string equality;
/// capacity attributes match when the offered amount is at least the required one.
#[derive(Clone, Debug, PartialEq)]
pub enum Attr {
    Keyword { key: String, value: String },
    Capacity { key: String, value: f64, unit: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttrError {
    #[error("expected {expected} attributes, got {required} and {offered}")]
    KindMismatch { expected: &'static str, required: String, offered: String },
    #[error("attribute keys differ: '{0}' vs '{1}'")]
    KeyMismatch(String, String),
    #[error("units differ for '{key}': '{required}' vs '{offered}'")]
    UnitMismatch { key: String, required: String, offered: String },
}

impl Attr {
    pub fn keyword(key: impl Into<String>, value: impl Into<String>) -> Self {
        Attr::Keyword { key: key.into(), value: value.into() }
    }

    pub fn capacity(key: impl Into<String>, value: f64, unit: impl Into<String>) -> Self {
        Attr::Capacity { key: key.into(), value, unit: unit.into() }
    }

    pub fn key(&self) -> &str {
        match self {
            Attr::Keyword { key, .. } | Attr::Capacity { key, .. } => key,
        }
    }

    pub fn is_keyword(&self) -> bool {
        matches!(self, Attr::Keyword { .. })
    }

    /// Capacity amount, `None` for keyword attributes.
    pub fn amount(&self) -> Option<f64> {
        match self {
            Attr::Capacity { value, .. } => Some(*value),
            Attr::Keyword { .. } => None,
        }
    }

    pub fn well_formed(&self) -> bool {
        match self {
            Attr::Keyword { key, value } => !key.is_empty() && !value.is_empty(),
            Attr::Capacity { key, value, .. } => !key.is_empty() && value.is_finite() && *value >= 0.0,
        }
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attr::Keyword { key, value } => write!(f, "{key}={value}"),
            Attr::Capacity { key, value, unit } => write!(f, "{key}>={value}{unit}"),
        }
    }
}

pub fn compatible_keyword(required: &Attr, offered: &Attr) -> Result<bool, AttrError> {
    match (required, offered) {
        (Attr::Keyword { key: rk, value: rv }, Attr::Keyword { key: ok, value: ov }) => {
            Ok(rk == ok && rv == ov)
        }
        _ => Err(AttrError::KindMismatch {
            expected: "keyword",
            required: required.to_string(),
            offered: offered.to_string(),
        }),
    }
}

pub fn compatible_capacity(required: &Attr, offered: &Attr) -> Result<bool, AttrError> {
    match (required, offered) {
        (
            Attr::Capacity { key: rk, value: rv, unit: ru },
            Attr::Capacity { key: ok, value: ov, unit: ou },
        ) => {
            if rk != ok {
                return Err(AttrError::KeyMismatch(rk.clone(), ok.clone()));
            }
            if ru != ou {
                return Err(AttrError::UnitMismatch {
                    key: rk.clone(),
                    required: ru.clone(),
                    offered: ou.clone(),
                });
            }
            Ok(ov >= rv)
        }
        _ => Err(AttrError::KindMismatch {
            expected: "capacity",
            required: required.to_string(),
            offered: offered.to_string(),
        }),
    }
}

/// Total compatibility: false on kind, key or unit mismatch.
pub fn compatible(required: &Attr, offered: &Attr) -> bool {
    match (required, offered) {
        (Attr::Keyword { .. }, Attr::Keyword { .. }) => {
            compatible_keyword(required, offered).unwrap_or(false)
        }
        (Attr::Capacity { .. }, Attr::Capacity { .. }) => {
            compatible_capacity(required, offered).unwrap_or(false)
        }
        _ => false,
    }
}
