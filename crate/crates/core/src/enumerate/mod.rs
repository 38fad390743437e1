//! Lazy, duplicate-free enumeration of concepts, emergents and candidates.

mod candidates;
mod concepts;
mod emergent;
mod product;

pub use candidates::{Candidate, CandidateSpace, Scope};
pub use concepts::{ConceptEvent, ConceptId, ConceptSpace};
pub use emergent::EmergentSpace;
pub use product::LazyProduct;

use std::fmt;
use std::str::FromStr;

/// Pruning strategy: none, filtering complete emergents, or rejecting partial ones early.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Variant {
    NoGen,
    Retro,
    Proph,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::NoGen, Variant::Retro, Variant::Proph];

    pub fn name(self) -> &'static str {
        match self {
            Variant::NoGen => "nogen",
            Variant::Retro => "retro",
            Variant::Proph => "proph",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "nogen" | "no-gen" => Ok(Variant::NoGen),
            "retro" => Ok(Variant::Retro),
            "proph" => Ok(Variant::Proph),
            other => Err(format!("unknown variant `{other}` (expected nogen, retro or proph)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct EnumStats {
    pub tuples_materialized: u64,
    pub full_rejections: u64,
    pub partial_backtracks: u64,
    pub candidates: u64,
}
