//! Blocking clauses learned from counterexamples, and the store used for pruning.
//!
//! A clause lists `(hole, concept)` literals and means "at least one of these holes is filled
//! by a different concept". Clauses are scoped to the exact selection of sketch bodies they
//! were learned under.

use std::collections::HashSet;
use std::fmt;

use crate::cgen::{Counterexample, ViolationClass};
use crate::enumerate::{Candidate, ConceptId};
use crate::lang::HoleId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    /// Position of the hole in the scope's concatenated hole order.
    pub pos: u16,
    pub hole: HoleId,
    pub concept: ConceptId,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub scope: usize,
    /// Sorted by position; at most one literal per hole.
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(scope: usize, mut literals: Vec<Literal>) -> Self {
        literals.sort();
        literals.dedup();
        Clause { scope, literals }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// Largest hole position mentioned.
    pub fn max_pos(&self) -> Option<usize> {
        self.literals.last().map(|l| l.pos as usize)
    }

    /// Violated iff every listed hole holds the listed concept.
    pub fn violated_by(&self, tuple: &[ConceptId]) -> bool {
        self.literals.iter().all(|l| tuple.get(l.pos as usize) == Some(&l.concept))
    }

    fn subsumes(&self, other: &Clause) -> bool {
        self.literals.iter().all(|l| other.literals.binary_search(l).is_ok())
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" \u{2228} ")?;
            }
            write!(f, "{} \u{2260} c{}", l.hole, l.concept.0)?;
        }
        Ok(())
    }
}

/// Turns a counterexample for `candidate` into blocking clauses. A violation that depends on
/// no hole yields the empty clause, meaning the whole scope is infeasible.
pub fn generalize(cex: &Counterexample, candidate: &Candidate) -> Vec<Clause> {
    let holes = match &cex.class {
        ViolationClass::Admissibility { violation, .. } => violation.holes(),
        ViolationClass::Property { trace } | ViolationClass::Test { trace } | ViolationClass::Budget { trace } => *trace,
    };
    let literals = holes
        .iter()
        .map(|h| {
            let pos = candidate
                .holes
                .iter()
                .position(|x| *x == h)
                .expect("violation mentions a hole outside the candidate's scope");
            Literal { pos: pos as u16, hole: h, concept: candidate.concepts[pos] }
        })
        .collect();
    vec![Clause::new(candidate.scope, literals)]
}

#[derive(Clone, Debug, Default)]
struct ScopeClauses {
    clauses: Vec<Option<Clause>>,
    /// Clause indices bucketed by their maximum hole position.
    buckets: Vec<Vec<usize>>,
    dead: bool,
    live: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct StoreCounters {
    pub clauses_learned: u64,
    pub duplicates_dropped: u64,
    pub subsumed_removed: u64,
}

/// Per-scope clause sets with duplicate and subsumption elimination.
#[derive(Clone, Debug, Default)]
pub struct ConstraintStore {
    scopes: Vec<ScopeClauses>,
    seen: HashSet<Clause>,
    generation: u64,
    pub counters: StoreCounters,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check<'a> {
    Pass,
    Fail(&'a Clause),
}

impl ConstraintStore {
    pub fn new(num_scopes: usize) -> Self {
        ConstraintStore { scopes: vec![ScopeClauses::default(); num_scopes], ..Default::default() }
    }

    /// Changes whenever a clause is added.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn is_dead(&self, scope: usize) -> bool {
        self.scopes.get(scope).is_some_and(|s| s.dead)
    }

    pub fn len(&self, scope: usize) -> usize {
        self.scopes.get(scope).map_or(0, |s| s.live)
    }

    pub fn is_empty(&self) -> bool {
        self.scopes.iter().all(|s| s.live == 0 && !s.dead)
    }

    pub fn clauses(&self, scope: usize) -> impl Iterator<Item = &Clause> {
        self.scopes[scope].clauses.iter().flatten()
    }

    /// Inserts clauses, dropping duplicates and clauses subsumed by stronger ones.
    pub fn prune(&mut self, clauses: impl IntoIterator<Item = Clause>) {
        for c in clauses {
            self.insert(c);
        }
    }

    fn insert(&mut self, c: Clause) {
        if self.scopes.len() <= c.scope {
            self.scopes.resize(c.scope + 1, ScopeClauses::default());
        }
        if self.seen.contains(&c) {
            self.counters.duplicates_dropped += 1;
            return;
        }
        let sc = &mut self.scopes[c.scope];
        if c.is_empty() {
            if !sc.dead {
                sc.dead = true;
                self.generation += 1;
                self.counters.clauses_learned += 1;
            }
            return;
        }
        if sc.clauses.iter().flatten().any(|d| d.subsumes(&c)) {
            self.counters.duplicates_dropped += 1;
            return;
        }
        for slot in sc.clauses.iter_mut() {
            if slot.as_ref().is_some_and(|d| c.subsumes(d)) {
                self.seen.remove(slot.as_ref().unwrap());
                *slot = None;
                sc.live -= 1;
                self.counters.subsumed_removed += 1;
            }
        }
        let idx = sc.clauses.len();
        let max = c.max_pos().unwrap();
        if sc.buckets.len() <= max {
            sc.buckets.resize(max + 1, Vec::new());
        }
        sc.buckets[max].push(idx);
        self.seen.insert(c.clone());
        sc.clauses.push(Some(c));
        sc.live += 1;
        self.generation += 1;
        self.counters.clauses_learned += 1;
    }

    /// Checks a complete emergent against every clause of `scope`.
    pub fn check_full(&self, scope: usize, tuple: &[ConceptId]) -> Check<'_> {
        match self.scopes.get(scope) {
            Some(sc) => sc
                .clauses
                .iter()
                .flatten()
                .find(|c| c.violated_by(tuple))
                .map_or(Check::Pass, Check::Fail),
            None => Check::Pass,
        }
    }

    /// Checks a partial emergent assigning the first `prefix.len()` holes; only clauses whose
    /// holes are all assigned are judged.
    pub fn check_partial(&self, scope: usize, prefix: &[ConceptId]) -> Check<'_> {
        for pos in 0..prefix.len() {
            if let Check::Fail(c) = self.check_at(scope, pos, prefix) {
                return Check::Fail(c);
            }
        }
        Check::Pass
    }

    /// Judges only the clauses whose last hole is at `pos`, i.e. those first decidable once
    /// the prefix reaches `pos`.
    pub fn check_at(&self, scope: usize, pos: usize, prefix: &[ConceptId]) -> Check<'_> {
        let Some(sc) = self.scopes.get(scope) else {
            return Check::Pass;
        };
        let Some(bucket) = sc.buckets.get(pos) else {
            return Check::Pass;
        };
        for &i in bucket {
            if let Some(c) = &sc.clauses[i] {
                if c.violated_by(prefix) {
                    return Check::Fail(c);
                }
            }
        }
        Check::Pass
    }
}
