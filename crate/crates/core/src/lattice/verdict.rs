use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::element::LatticeElement;
use crate::filters::SetDescriptor;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum Outcome {
    Holds,
    Fails,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "Holds",
            Outcome::Fails => "Fails",
            Outcome::Unknown => "Unknown",
        })
    }
}

/// Evidence attached to a verdict; re-evaluable at the verdict's depth.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Index(u64),
    Pair(u64, u64),
    Triple(u64, u64, u64),
    Indices(Vec<u64>),
    Set(SetDescriptor),
    Element(LatticeElement),
    /// `(index, set)` rows, e.g. a filter element per regulator level.
    Table(Vec<(u64, SetDescriptor)>),
    Note(String),
    Labeled(String, Box<Witness>),
}

impl Witness {
    pub fn labeled(label: impl Into<String>, w: Witness) -> Self {
        Witness::Labeled(label.into(), Box::new(w))
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Index(i) => write!(f, "{i}"),
            Witness::Pair(a, b) => write!(f, "({a} {b})"),
            Witness::Triple(a, b, c) => write!(f, "({a} {b} {c})"),
            Witness::Indices(v) => {
                f.write_str("(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            Witness::Set(s) => write!(f, "{s}"),
            Witness::Element(e) => write!(f, "{e}"),
            Witness::Table(rows) => {
                f.write_str("(")?;
                for (i, (k, s)) in rows.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({k} {s})")?;
                }
                f.write_str(")")
            }
            Witness::Note(s) => f.write_str(s),
            Witness::Labeled(l, w) => write!(f, "{l}: {w}"),
        }
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let kind = match self {
            Witness::Index(_) => "index",
            Witness::Pair(..) => "pair",
            Witness::Triple(..) => "triple",
            Witness::Indices(_) => "indices",
            Witness::Set(_) => "set",
            Witness::Element(_) => "element",
            Witness::Table(_) => "table",
            Witness::Note(_) => "note",
            Witness::Labeled(..) => "labeled",
        };
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("kind", kind)?;
        m.serialize_entry("value", &self.to_string())?;
        m.end()
    }
}

/// Three-valued, depth-stamped outcome of a truncated check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    pub depth: u64,
}

impl Verdict {
    pub fn holds(witness: Witness, depth: u64) -> Self {
        Self { outcome: Outcome::Holds, witness: Some(witness), depth }
    }

    pub fn fails(witness: Witness, depth: u64) -> Self {
        Self { outcome: Outcome::Fails, witness: Some(witness), depth }
    }

    pub fn unknown(depth: u64) -> Self {
        Self { outcome: Outcome::Unknown, witness: None, depth }
    }

    pub fn is_holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }

    pub fn is_unknown(&self) -> bool {
        self.outcome == Outcome::Unknown
    }

    /// Negation; Holds and Fails swap and keep their witness.
    pub fn negate(self) -> Self {
        let outcome = match self.outcome {
            Outcome::Holds => Outcome::Fails,
            Outcome::Fails => Outcome::Holds,
            Outcome::Unknown => Outcome::Unknown,
        };
        Self { outcome, ..self }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            Some(w) => write!(f, "{} @{} [{w}]", self.outcome, self.depth),
            None => write!(f, "{} @{}", self.outcome, self.depth),
        }
    }
}
