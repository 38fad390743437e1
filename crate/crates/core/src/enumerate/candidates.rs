use crate::constrain::ConstraintStore;
use crate::grammar::NtSet;
use crate::lang::{FnDef, HoleId};
use crate::sketch::{complete, Emergent, SynthFn};

use super::concepts::{ConceptId, ConceptSpace};
use super::emergent::EmergentSpace;
use super::{EnumStats, Variant};

/// One choice of sketch body per function; holes of all functions are concatenated in
/// function order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scope {
    pub bodies: Vec<usize>,
    pub holes: Vec<HoleId>,
    /// Start of each function's holes within `holes`.
    pub offsets: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub scope: usize,
    pub bodies: Vec<usize>,
    pub holes: Vec<HoleId>,
    pub concepts: Vec<ConceptId>,
    /// Per function, in function order.
    pub emergents: Vec<Emergent>,
    pub defs: Vec<FnDef>,
}

impl Candidate {
    /// Sum of the sizes of all hole fillings.
    pub fn size(&self) -> usize {
        self.emergents.iter().map(|e| e.size()).sum()
    }

    pub fn concept_of(&self, h: HoleId) -> Option<ConceptId> {
        self.holes.iter().position(|x| *x == h).map(|p| self.concepts[p])
    }
}

/// Candidate enumeration: emergent spaces are queried in a fixed order; when all are drained
/// under the current concepts, one more concept is pulled and broadcast to every space.
#[derive(Clone, Debug)]
pub struct CandidateSpace {
    functions: Vec<SynthFn>,
    concepts: ConceptSpace,
    scopes: Vec<Scope>,
    spaces: Vec<EmergentSpace>,
    variant: Variant,
    pub stats: EnumStats,
}

impl CandidateSpace {
    pub fn new(functions: Vec<SynthFn>, concepts: ConceptSpace, variant: Variant) -> Self {
        let mut selections: Vec<Vec<usize>> = vec![Vec::new()];
        for f in &functions {
            selections = selections
                .into_iter()
                .flat_map(|s| {
                    (0..f.sketch.bodies.len()).map(move |b| {
                        let mut s = s.clone();
                        s.push(b);
                        s
                    })
                })
                .collect();
        }
        let mut scopes = Vec::new();
        let mut spaces = Vec::new();
        for bodies in selections {
            let mut holes = Vec::new();
            let mut nts: Vec<(HoleId, NtSet)> = Vec::new();
            let mut offsets = Vec::new();
            for (f, &b) in functions.iter().zip(&bodies) {
                offsets.push(holes.len());
                for h in &f.sketch.bodies[b].holes {
                    holes.push(h.id);
                    nts.push((h.id, h.nts));
                }
            }
            spaces.push(EmergentSpace::new(scopes.len(), nts));
            scopes.push(Scope { bodies, holes, offsets });
        }
        CandidateSpace { functions, concepts, scopes, spaces, variant, stats: EnumStats::default() }
    }

    pub fn scopes(&self) -> &[Scope] {
        &self.scopes
    }

    pub fn concepts(&self) -> &ConceptSpace {
        &self.concepts
    }

    pub fn functions(&self) -> &[SynthFn] {
        &self.functions
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Next candidate not ruled out by `store`, or `None` when the space is exhausted.
    pub fn next(&mut self, store: &ConstraintStore) -> Option<Candidate> {
        loop {
            for i in 0..self.spaces.len() {
                if store.is_dead(i) {
                    continue;
                }
                if let Some(t) = self.spaces[i].next(store, self.variant, &mut self.stats) {
                    self.stats.candidates += 1;
                    return Some(self.build(i, t));
                }
            }
            let ev = self.concepts.next_event()?;
            for s in &mut self.spaces {
                s.add_concept(ev);
            }
        }
    }

    /// Assembles the candidate for a concept tuple of scope `scope`.
    pub fn build(&self, scope: usize, concepts: Vec<ConceptId>) -> Candidate {
        let sc = &self.scopes[scope];
        let mut emergents = Vec::with_capacity(self.functions.len());
        let mut defs = Vec::with_capacity(self.functions.len());
        for (fi, f) in self.functions.iter().enumerate() {
            let start = sc.offsets[fi];
            let end = sc.offsets.get(fi + 1).copied().unwrap_or(sc.holes.len());
            let e = Emergent(
                (start..end).map(|p| (sc.holes[p], self.concepts.get(concepts[p]).clone())).collect(),
            );
            defs.push(complete(f, sc.bodies[fi], &e).expect("emergent covers the scope's holes"));
            emergents.push(e);
        }
        Candidate { scope, bodies: sc.bodies.clone(), holes: sc.holes.clone(), concepts, emergents, defs }
    }
}
