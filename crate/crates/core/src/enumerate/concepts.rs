use std::collections::{HashMap, VecDeque};

use crate::grammar::{self, Grammar, NtId, NtSet, Rhs};
use crate::lang::Expr;

use super::product::LazyProduct;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct ConceptId(pub u32);

/// A concept became available for the non-terminals in `added`. `previous` is non-empty when
/// an already cached concept was re-derived from a new non-terminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConceptEvent {
    pub id: ConceptId,
    pub added: NtSet,
    pub previous: NtSet,
}

impl ConceptEvent {
    pub fn is_new(&self) -> bool {
        self.previous.is_empty()
    }
}

#[derive(Clone, Debug)]
struct Pending {
    rule: usize,
    product: LazyProduct,
}

/// Duplicate-free, on-the-fly enumeration of the concepts derivable from a grammar, up to a
/// size bound. Concepts come out in cache-arrival order, not in size order.
#[derive(Clone, Debug)]
pub struct ConceptSpace {
    grammar: Grammar,
    bound: usize,
    concepts: Vec<Expr>,
    nts: Vec<NtSet>,
    sizes: Vec<usize>,
    index: HashMap<Expr, ConceptId>,
    per_nt: Vec<Vec<ConceptId>>,
    next_terminal: usize,
    chain: VecDeque<Pending>,
}

impl ConceptSpace {
    pub fn new(grammar: Grammar, bound: usize) -> Self {
        let n = grammar.nts.len();
        ConceptSpace {
            grammar,
            bound,
            concepts: Vec::new(),
            nts: Vec::new(),
            sizes: Vec::new(),
            index: HashMap::new(),
            per_nt: vec![Vec::new(); n],
            next_terminal: 0,
            chain: VecDeque::new(),
        }
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn get(&self, id: ConceptId) -> &Expr {
        &self.concepts[id.0 as usize]
    }

    pub fn nts_of(&self, id: ConceptId) -> NtSet {
        self.nts[id.0 as usize]
    }

    pub fn concepts(&self) -> &[Expr] {
        &self.concepts
    }

    pub fn of_nt(&self, nt: NtId) -> &[ConceptId] {
        &self.per_nt[nt.0 as usize]
    }

    /// Tuples queued in the product chain and not yet drained, counting both pending and
    /// partially consumed products in full.
    pub fn queued_tuples(&self) -> u64 {
        self.chain.iter().map(|p| p.product.len()).sum()
    }

    /// Next concept event, or `None` once no rule can produce anything new within the bound.
    pub fn next_event(&mut self) -> Option<ConceptEvent> {
        while self.next_terminal < self.grammar.rules.len() {
            let r = self.next_terminal;
            self.next_terminal += 1;
            let rule = &self.grammar.rules[r];
            if let Rhs::Terminal(atom) = &rule.rhs {
                if atom.size() > self.bound {
                    continue;
                }
                let (atom, lhs) = (atom.clone(), rule.lhs);
                if let Some(ev) = self.record(atom, lhs) {
                    return Some(ev);
                }
            }
        }
        while let Some(mut pending) = self.chain.pop_front() {
            let Rhs::App(f, args) = &self.grammar.rules[pending.rule].rhs else { unreachable!() };
            let (f, arg_nts, lhs) = (f.clone(), args.clone(), self.grammar.rules[pending.rule].lhs);
            let budget = self.bound.saturating_sub(1);
            let arity = arg_nts.len();
            loop {
                let (per_nt, sizes) = (&self.per_nt, &self.sizes);
                let tuple = pending.product.next_with(0, |pos, prefix| {
                    let used: usize = prefix
                        .iter()
                        .enumerate()
                        .map(|(i, &ix)| sizes[per_nt[arg_nts[i].0 as usize][ix as usize].0 as usize])
                        .sum();
                    used + (arity - pos - 1) <= budget
                });
                let Some(tuple) = tuple else { break };
                let args: Vec<Expr> = tuple
                    .iter()
                    .enumerate()
                    .map(|(i, &ix)| self.concepts[self.per_nt[arg_nts[i].0 as usize][ix as usize].0 as usize].clone())
                    .collect();
                let expr = grammar::apply(&f, args);
                if let Some(ev) = self.record(expr, lhs) {
                    if !pending.product.is_exhausted() {
                        self.chain.push_front(pending);
                    }
                    return Some(ev);
                }
            }
        }
        None
    }

    /// Caches `expr` as generated by `lhs`; returns an event unless it is a pure duplicate.
    fn record(&mut self, expr: Expr, lhs: NtId) -> Option<ConceptEvent> {
        let added = NtSet::single(lhs);
        let (id, previous) = match self.index.get(&expr) {
            Some(&id) => {
                let prev = self.nts[id.0 as usize];
                if prev.contains(lhs) {
                    return None;
                }
                self.nts[id.0 as usize] = prev.union(added);
                (id, prev)
            }
            None => {
                let id = ConceptId(self.concepts.len() as u32);
                self.sizes.push(expr.size());
                self.index.insert(expr.clone(), id);
                self.concepts.push(expr);
                self.nts.push(added);
                (id, NtSet::default())
            }
        };
        let old_len: Vec<u32> = self.per_nt.iter().map(|l| l.len() as u32).collect();
        self.per_nt[lhs.0 as usize].push(id);
        self.extend_chain(id, added, &old_len);
        Some(ConceptEvent { id, added, previous })
    }

    /// Appends pin products capturing every rule application that uses the new entry at least
    /// once: the first such argument is pinned; arguments left of it draw from the old lists,
    /// arguments right of it from the extended lists.
    fn extend_chain(&mut self, id: ConceptId, added: NtSet, old_len: &[u32]) {
        if self.sizes[id.0 as usize] + 1 > self.bound {
            return;
        }
        for (r, rule) in self.grammar.rules.iter().enumerate() {
            let Rhs::App(_, args) = &rule.rhs else { continue };
            for pin in (0..args.len()).rev() {
                if !added.contains(args[pin]) {
                    continue;
                }
                let ranges = args
                    .iter()
                    .enumerate()
                    .map(|(i, nt)| {
                        let n = nt.0 as usize;
                        let new_len = self.per_nt[n].len() as u32;
                        if i < pin {
                            0..old_len[n]
                        } else if i == pin {
                            old_len[n]..new_len
                        } else {
                            0..new_len
                        }
                    })
                    .collect();
                if let Some(product) = LazyProduct::new(ranges) {
                    self.chain.push_back(Pending { rule: r, product });
                }
            }
        }
    }
}

impl Iterator for ConceptSpace {
    type Item = ConceptEvent;

    fn next(&mut self) -> Option<ConceptEvent> {
        self.next_event()
    }
}
