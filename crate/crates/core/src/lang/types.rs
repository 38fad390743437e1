use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Interned-ish identifier used for variables and function symbols.
pub type Symbol = Arc<str>;

pub fn sym(name: &str) -> Symbol {
    Arc::from(name)
}

/// The closed type universe of the object language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Int,
    Bool,
    IntList,
}

impl Type {
    pub fn keyword(self) -> &'static str {
        match self {
            Type::Int => ":int",
            Type::Bool => ":bool",
            Type::IntList => ":int-list",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Type> {
        match kw {
            ":int" | "int" => Some(Type::Int),
            ":bool" | "bool" => Some(Type::Bool),
            ":int-list" | "int-list" => Some(Type::IntList),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Function type `t1 x ... x tn -> t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub params: Vec<Type>,
    pub ret: Type,
}

impl Signature {
    pub fn new(params: Vec<Type>, ret: Type) -> Self {
        Signature { params, ret }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "{}", p)?;
        }
        write!(f, " -> {}", self.ret)
    }
}

/// Identifier of a sketch hole, unique across a whole synthesis instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HoleId(pub u16);

impl fmt::Display for HoleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Maximum number of holes in one instance; hole sets are fixed-width bitsets.
pub const MAX_HOLES: usize = 128;

/// A set of hole ids.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct HoleSet(u128);

impl HoleSet {
    pub const EMPTY: HoleSet = HoleSet(0);

    pub fn singleton(h: HoleId) -> Self {
        HoleSet(1u128 << h.0)
    }

    pub fn insert(&mut self, h: HoleId) {
        self.0 |= 1u128 << h.0;
    }

    pub fn contains(&self, h: HoleId) -> bool {
        self.0 & (1u128 << h.0) != 0
    }

    pub fn union(self, other: HoleSet) -> HoleSet {
        HoleSet(self.0 | other.0)
    }

    pub fn union_with(&mut self, other: HoleSet) {
        self.0 |= other.0;
    }

    pub fn with(self, tag: Option<HoleId>) -> HoleSet {
        match tag {
            Some(h) => HoleSet(self.0 | (1u128 << h.0)),
            None => self,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(&self, other: &HoleSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = HoleId> + '_ {
        let bits = self.0;
        (0..MAX_HOLES as u16).filter(move |i| bits & (1u128 << i) != 0).map(HoleId)
    }
}

impl FromIterator<HoleId> for HoleSet {
    fn from_iter<I: IntoIterator<Item = HoleId>>(iter: I) -> Self {
        let mut s = HoleSet::EMPTY;
        for h in iter {
            s.insert(h);
        }
        s
    }
}

impl fmt::Debug for HoleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|h| h.0)).finish()
    }
}
