//! The counterexample-guided synthesis loop.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cgen::{Cgen, CgenConfig, Counterexample};
use crate::constrain::{generalize, Clause, ConstraintStore};
use crate::enumerate::{Candidate, CandidateSpace, ConceptSpace, Variant};
use crate::lang::FnDef;
use crate::sketch::Emergent;
use crate::skolem::{reduce_instance, SkolemError};
use crate::spec::{InstanceError, SynthesisInstance};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub variant: Variant,
    pub cgen: CgenConfig,
    pub timeout: Option<Duration>,
    /// Keep every (candidate, counterexample, clauses) triple in the result.
    pub record_events: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { variant: Variant::Proph, cgen: CgenConfig::default(), timeout: None, record_events: false }
    }
}

impl SynthConfig {
    pub fn new(variant: Variant) -> Self {
        SynthConfig { variant, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub defs: Vec<FnDef>,
    /// Chosen sketch body per function.
    pub bodies: Vec<usize>,
    pub emergents: Vec<Emergent>,
}

impl Solution {
    pub fn size(&self) -> usize {
        self.emergents.iter().map(Emergent::size).sum()
    }

    pub fn def(&self, name: &str) -> Option<&FnDef> {
        self.defs.iter().find(|d| &*d.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SynthOutcome {
    Solution(Solution),
    Exhausted,
    TimedOut,
}

impl SynthOutcome {
    pub fn name(&self) -> &'static str {
        match self {
            SynthOutcome::Solution(_) => "solved",
            SynthOutcome::Exhausted => "exhausted",
            SynthOutcome::TimedOut => "timeout",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct RunStats {
    pub wall_seconds: f64,
    /// Candidates submitted to the counterexample generator.
    pub candidates_checked: u64,
    pub concepts_cached: u64,
    pub tuples_materialized: u64,
    pub clauses_learned: u64,
    pub full_rejections: u64,
    pub partial_backtracks: u64,
    pub cgen_evaluations: u64,
    pub cgen_steps: u64,
}

/// A counterexample found for a candidate, with the clauses learned from it.
#[derive(Clone, Debug)]
pub struct LearnEvent {
    pub candidate: Candidate,
    pub cex: Counterexample,
    pub clauses: Vec<Clause>,
}

#[derive(Clone, Debug)]
pub struct SynthResult {
    pub outcome: SynthOutcome,
    pub stats: RunStats,
    pub events: Vec<LearnEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("invalid instance:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<InstanceError>),
    #[error(transparent)]
    Skolem(#[from] SkolemError),
    #[error("instance has existential properties; reduce it first")]
    NotUniversal,
}

/// Seed used for the confirming re-check of a solution.
fn recheck_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x5eed_0f_c0ff_ee)
}

/// Synthesizes a ∀*-instance.
pub fn synth(inst: &SynthesisInstance, cfg: &SynthConfig) -> Result<SynthResult, SynthError> {
    let start = Instant::now();
    if !inst.is_universal() {
        return Err(SynthError::NotUniversal);
    }
    inst.validate().map_err(SynthError::Invalid)?;
    let deadline = cfg.timeout.map(|t| start + t);
    let mut cgen = Cgen::new(inst, cfg.cgen);
    let mut confirm = cgen.clone();
    confirm.reseed(recheck_seed(cfg.cgen.seed));
    let concepts = ConceptSpace::new(inst.grammar.clone(), inst.size_bound);
    let mut space = CandidateSpace::new(inst.functions.clone(), concepts, cfg.variant);
    let mut store = ConstraintStore::new(space.scopes().len());
    let mut events = Vec::new();

    let outcome = loop {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break SynthOutcome::TimedOut;
        }
        let Some(cand) = space.next(&store) else {
            break SynthOutcome::Exhausted;
        };
        let mut cex = match cgen.find_cex(inst, &cand.defs, deadline) {
            Ok(c) => c,
            Err(_) => break SynthOutcome::TimedOut,
        };
        if cex.is_none() {
            cex = match confirm.find_cex(inst, &cand.defs, deadline) {
                Ok(c) => c,
                Err(_) => break SynthOutcome::TimedOut,
            };
        }
        let Some(cex) = cex else {
            break SynthOutcome::Solution(Solution {
                defs: cand.defs.clone(),
                bodies: cand.bodies.clone(),
                emergents: cand.emergents.clone(),
            });
        };
        debug_assert!(cgen.replay(inst, &cand.defs, &cex), "counterexample does not replay: {cex}");
        if cfg.variant == Variant::NoGen {
            continue;
        }
        let clauses = generalize(&cex, &cand);
        store.prune(clauses.iter().cloned());
        if cfg.record_events {
            events.push(LearnEvent { candidate: cand, cex, clauses });
        }
    };

    let e = space.stats;
    let stats = RunStats {
        wall_seconds: start.elapsed().as_secs_f64(),
        candidates_checked: cgen.stats.calls,
        concepts_cached: space.concepts().len() as u64,
        tuples_materialized: e.tuples_materialized,
        clauses_learned: store.counters.clauses_learned,
        full_rejections: e.full_rejections,
        partial_backtracks: e.partial_backtracks,
        cgen_evaluations: cgen.stats.evaluations + confirm.stats.evaluations,
        cgen_steps: cgen.stats.steps + confirm.stats.steps,
    };
    Ok(SynthResult { outcome, stats, events })
}

/// Reduces existential properties to witness functions, then synthesizes. The solution
/// includes the witness definitions after the original functions.
pub fn solve(inst: &SynthesisInstance, cfg: &SynthConfig) -> Result<SynthResult, SynthError> {
    inst.validate().map_err(SynthError::Invalid)?;
    let reduced = reduce_instance(inst)?;
    synth(&reduced, cfg)
}
