use std::fmt;
use std::sync::Arc;

use super::types::Type;

/// Persistent singly-linked integer list; `cons`, `head` and `tail` are O(1).
#[derive(Clone, Default)]
pub struct IntList(Option<Arc<Cell>>);

struct Cell {
    head: i64,
    tail: IntList,
}

impl IntList {
    pub fn nil() -> Self {
        IntList(None)
    }

    pub fn cons(head: i64, tail: IntList) -> Self {
        IntList(Some(Arc::new(Cell { head, tail })))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn head(&self) -> Option<i64> {
        self.0.as_ref().map(|c| c.head)
    }

    pub fn tail(&self) -> Option<IntList> {
        self.0.as_ref().map(|c| c.tail.clone())
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter { cur: self }
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.iter().collect()
    }
}

impl FromIterator<i64> for IntList {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        let items: Vec<i64> = iter.into_iter().collect();
        items.into_iter().rev().fold(IntList::nil(), |acc, x| IntList::cons(x, acc))
    }
}

impl From<&[i64]> for IntList {
    fn from(xs: &[i64]) -> Self {
        xs.iter().copied().collect()
    }
}

pub struct Iter<'a> {
    cur: &'a IntList,
}

impl Iterator for Iter<'_> {
    type Item = i64;

    fn next(&mut self) -> Option<i64> {
        let cell = self.cur.0.as_deref()?;
        self.cur = &cell.tail;
        Some(cell.head)
    }
}

impl PartialEq for IntList {
    fn eq(&self, other: &Self) -> bool {
        let (mut a, mut b) = (self, other);
        loop {
            match (&a.0, &b.0) {
                (None, None) => return true,
                (Some(x), Some(y)) => {
                    if Arc::ptr_eq(x, y) {
                        return true;
                    }
                    if x.head != y.head {
                        return false;
                    }
                    a = &x.tail;
                    b = &y.tail;
                }
                _ => return false,
            }
        }
    }
}

impl Eq for IntList {}

impl std::hash::Hash for IntList {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for x in self.iter() {
            x.hash(state);
        }
        state.write_u8(0xff);
    }
}

impl fmt::Debug for IntList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for IntList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("nil");
        }
        f.write_str("(")?;
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", x)?;
        }
        f.write_str(")")
    }
}

/// Runtime value of the object language.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    List(IntList),
}

impl Value {
    pub fn ty(&self) -> Type {
        match self {
            Value::Int(_) => Type::Int,
            Value::Bool(_) => Type::Bool,
            Value::List(_) => Type::IntList,
        }
    }

    pub fn list(xs: &[i64]) -> Value {
        Value::List(IntList::from(xs))
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(i) => *i,
            other => panic!("expected int, found {}", other),
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            other => panic!("expected bool, found {}", other),
        }
    }

    pub fn as_list(&self) -> &IntList {
        match self {
            Value::List(l) => l,
            other => panic!("expected int-list, found {}", other),
        }
    }

    /// Size of a value as an expression literal (lists count as cons chains).
    pub fn literal_size(&self) -> usize {
        match self {
            Value::List(l) => 1 + 2 * l.len(),
            _ => 1,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{}", i),
            Value::Bool(true) => f.write_str("true"),
            Value::Bool(false) => f.write_str("false"),
            Value::List(l) => write!(f, "{}", l),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
