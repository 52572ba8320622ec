use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Identity of a simulated entity. Written as `jet`, `storage`, `sam[i]` or
/// `red_fighter[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum EntityId {
    Jet,
    Storage,
    Sam(usize),
    RedFighter(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityClass {
    Jet,
    Storage,
    Sam,
    RedFighter,
}

impl EntityId {
    pub fn class(self) -> EntityClass {
        match self {
            EntityId::Jet => EntityClass::Jet,
            EntityId::Storage => EntityClass::Storage,
            EntityId::Sam(_) => EntityClass::Sam,
            EntityId::RedFighter(_) => EntityClass::RedFighter,
        }
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityId::Jet => f.write_str("jet"),
            EntityId::Storage => f.write_str("storage"),
            EntityId::Sam(i) => write!(f, "sam[{i}]"),
            EntityId::RedFighter(i) => write!(f, "red_fighter[{i}]"),
        }
    }
}

/// Parses `name[index]` into its parts.
pub(crate) fn split_indexed(s: &str) -> Option<(&str, usize)> {
    let (name, rest) = s.split_once('[')?;
    let idx = rest.strip_suffix(']')?.parse().ok()?;
    Some((name, idx))
}

impl FromStr for EntityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "jet" => return Ok(EntityId::Jet),
            "storage" => return Ok(EntityId::Storage),
            _ => {}
        }
        match split_indexed(s) {
            Some(("sam", i)) => Ok(EntityId::Sam(i)),
            Some(("red_fighter", i)) => Ok(EntityId::RedFighter(i)),
            _ => Err(Error::Config(format!("unknown entity `{s}`"))),
        }
    }
}

impl From<EntityId> for String {
    fn from(id: EntityId) -> String {
        id.to_string()
    }
}

impl TryFrom<String> for EntityId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}
