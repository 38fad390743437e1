use std::collections::VecDeque;

use crate::constrain::{Check, ConstraintStore};
use crate::grammar::NtSet;
use crate::lang::HoleId;

use super::concepts::{ConceptEvent, ConceptId};
use super::product::LazyProduct;
use super::{EnumStats, Variant};

/// Lazy enumeration of hole-filling tuples for one scope. Each hole draws from its own list of
/// concepts; every new concept extends the chain with products that use it at least once.
#[derive(Clone, Debug)]
pub struct EmergentSpace {
    scope: usize,
    holes: Vec<(HoleId, NtSet)>,
    lists: Vec<Vec<ConceptId>>,
    chain: VecDeque<LazyProduct>,
    scratch: Vec<ConceptId>,
}

impl EmergentSpace {
    pub fn new(scope: usize, holes: Vec<(HoleId, NtSet)>) -> Self {
        let mut chain = VecDeque::new();
        if holes.is_empty() {
            chain.push_back(LazyProduct::new(Vec::new()).unwrap());
        }
        let lists = vec![Vec::new(); holes.len()];
        EmergentSpace { scope, holes, lists, chain, scratch: Vec::new() }
    }

    pub fn scope(&self) -> usize {
        self.scope
    }

    pub fn holes(&self) -> &[(HoleId, NtSet)] {
        &self.holes
    }

    pub fn list(&self, pos: usize) -> &[ConceptId] {
        &self.lists[pos]
    }

    /// Products queued and not yet drained.
    pub fn pending_products(&self) -> usize {
        self.chain.len()
    }

    /// Registers a concept event. Holes the concept newly fits get it appended, and products
    /// pinning the first position that uses it are queued.
    pub fn add_concept(&mut self, ev: ConceptEvent) {
        let fits: Vec<bool> = self
            .holes
            .iter()
            .map(|(_, nts)| ev.added.intersects(*nts) && !ev.previous.intersects(*nts))
            .collect();
        if !fits.iter().any(|&f| f) {
            return;
        }
        let old: Vec<u32> = self.lists.iter().map(|l| l.len() as u32).collect();
        for (pos, &f) in fits.iter().enumerate() {
            if f {
                self.lists[pos].push(ev.id);
            }
        }
        for pin in (0..self.holes.len()).rev() {
            if !fits[pin] {
                continue;
            }
            let ranges = (0..self.holes.len())
                .map(|i| {
                    let new = self.lists[i].len() as u32;
                    if i < pin {
                        0..old[i]
                    } else if i == pin {
                        old[i]..new
                    } else {
                        0..new
                    }
                })
                .collect();
            if let Some(p) = LazyProduct::new(ranges) {
                self.chain.push_back(p);
            }
        }
    }

    /// Next tuple of concepts (one per hole) surviving the variant's pruning, or `None` when
    /// the chain is drained under the current concepts.
    pub fn next(&mut self, store: &ConstraintStore, variant: Variant, stats: &mut EnumStats) -> Option<Vec<ConceptId>> {
        let scope = self.scope;
        while let Some(front) = self.chain.front_mut() {
            match variant {
                Variant::NoGen => {
                    if let Some(t) = front.next_tuple() {
                        let out = map(&self.lists, t);
                        stats.tuples_materialized += 1;
                        return Some(out);
                    }
                }
                Variant::Retro => {
                    while let Some(t) = front.next_tuple() {
                        let out = map(&self.lists, t);
                        stats.tuples_materialized += 1;
                        match store.check_full(scope, &out) {
                            Check::Pass => return Some(out),
                            Check::Fail(_) => stats.full_rejections += 1,
                        }
                    }
                }
                Variant::Proph => {
                    let (lists, scratch) = (&self.lists, &mut self.scratch);
                    let backtracks = &mut stats.partial_backtracks;
                    let t = front.next_with(store.generation(), |pos, prefix| {
                        scratch.clear();
                        scratch.extend(prefix.iter().enumerate().map(|(i, &ix)| lists[i][ix as usize]));
                        let ok = matches!(store.check_at(scope, pos, scratch), Check::Pass);
                        if !ok {
                            *backtracks += 1;
                        }
                        ok
                    });
                    if let Some(t) = t {
                        stats.tuples_materialized += 1;
                        return Some(map(&self.lists, t));
                    }
                }
            }
            self.chain.pop_front();
        }
        None
    }
}

fn map(lists: &[Vec<ConceptId>], t: &[u32]) -> Vec<ConceptId> {
    t.iter().enumerate().map(|(i, &ix)| lists[i][ix as usize]).collect()
}
