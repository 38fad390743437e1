//! Testing-based counterexample generation.
//!
//! Inputs are drawn from a bounded exhaustive domain (small values first) followed by seeded
//! random samples. Evaluation runs with contract and measure checks active, so admissibility
//! violations surface wherever they occur.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lang::{
    EvalOutcome, FnDef, HoleSet, IntList, Limits, Outcome, Program, Query, SiteCheck, Symbol, Type, Value, Violation,
    ViolationKind,
};
use crate::spec::{eval_matrix, SynthesisInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CgenConfig {
    /// Exhaustive ints range over `[-int_bound, int_bound]`.
    pub int_bound: i64,
    /// Exhaustive lists have at most this many elements.
    pub list_len: usize,
    /// Random assignments tried per property after the exhaustive prefix.
    pub samples: usize,
    pub seed: u64,
    /// Evaluation steps per property/test evaluation.
    pub budget: u64,
    /// Exhaustive assignments tried per property before switching to random ones.
    pub exhaustive_cap: usize,
}

impl Default for CgenConfig {
    fn default() -> Self {
        CgenConfig { int_bound: 4, list_len: 4, samples: 200, seed: 0, budget: 100_000, exhaustive_cap: 50_000 }
    }
}

impl CgenConfig {
    pub fn limits(&self) -> Limits {
        Limits::with_budget(self.budget)
    }
}

/// `0, 1, -1, 2, -2, ..., b, -b`.
pub fn int_order(b: i64) -> Vec<i64> {
    let mut out = vec![0];
    for i in 1..=b.max(0) {
        out.push(i);
        out.push(-i);
    }
    out
}

/// Smallest-first exhaustive values: ints in [`int_order`]; lists by length, then
/// lexicographically in that element order.
pub fn exhaustive_values(ty: Type, cfg: &CgenConfig) -> Vec<Value> {
    match ty {
        Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Type::Int => int_order(cfg.int_bound).into_iter().map(Value::Int).collect(),
        Type::IntList => {
            let ints = int_order(cfg.int_bound);
            let mut out = vec![Value::List(IntList::nil())];
            let mut layer: Vec<Vec<i64>> = vec![Vec::new()];
            for _ in 0..cfg.list_len {
                let mut next = Vec::with_capacity(layer.len() * ints.len());
                for prefix in &layer {
                    for &i in &ints {
                        let mut v = prefix.clone();
                        v.push(i);
                        next.push(v);
                    }
                }
                out.extend(next.iter().map(|v| Value::list(v)));
                layer = next;
            }
            out
        }
    }
}

pub fn random_value(ty: Type, cfg: &CgenConfig, rng: &mut impl Rng) -> Value {
    let r = 2 * cfg.int_bound.max(0) + 2;
    match ty {
        Type::Bool => Value::Bool(rng.gen()),
        Type::Int => Value::Int(rng.gen_range(-r..=r)),
        Type::IntList => {
            let n = rng.gen_range(0..=2 * cfg.list_len);
            let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-r..=r)).collect();
            Value::list(&v)
        }
    }
}

/// The exhaustive prefix followed by an endless seeded random stream.
pub fn gen_values(ty: Type, cfg: &CgenConfig) -> impl Iterator<Item = Value> {
    let cfg = *cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    exhaustive_values(ty, &cfg).into_iter().chain(std::iter::repeat_with(move || random_value(ty, &cfg, &mut rng)))
}

/// Index tuples over lists of the given lengths, ordered by their largest component and then
/// lexicographically, truncated to `cap` tuples.
pub fn layered_tuples(lens: &[usize], cap: usize) -> Vec<Vec<usize>> {
    if lens.is_empty() {
        return vec![Vec::new()];
    }
    if lens.contains(&0) {
        return Vec::new();
    }
    let top = lens.iter().max().copied().unwrap_or(0);
    let mut out = Vec::new();
    for m in 0..top {
        // Each tuple of the layer is generated once, from the first position holding `m`.
        let mut layer = Vec::new();
        for p in (0..lens.len()).filter(|&p| m < lens[p]) {
            let ranges: Vec<usize> = lens
                .iter()
                .enumerate()
                .map(|(j, &n)| match j.cmp(&p) {
                    std::cmp::Ordering::Less => m.min(n),
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Greater => (m + 1).min(n),
                })
                .collect();
            if ranges.contains(&0) {
                continue;
            }
            let mut t: Vec<usize> = (0..lens.len()).map(|j| if j == p { m } else { 0 }).collect();
            'product: loop {
                layer.push(t.clone());
                for j in (0..t.len()).rev() {
                    if j == p {
                        continue;
                    }
                    if t[j] + 1 < ranges[j] {
                        t[j] += 1;
                        continue 'product;
                    }
                    t[j] = 0;
                }
                break;
            }
        }
        layer.sort_unstable();
        for t in layer {
            out.push(t);
            if out.len() >= cap {
                return out;
            }
        }
    }
    out
}

/// Which check produced a counterexample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum CexKind {
    Contract,
    Measure,
    Property,
    Test,
    Budget,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationClass {
    /// A contract or measure violation inside a function under synthesis.
    Admissibility { kind: ViolationKind, violation: Violation },
    /// A property evaluated to false, or failed inside the matrix itself.
    Property { trace: HoleSet },
    Test { trace: HoleSet },
    Budget { trace: HoleSet },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CexSource {
    Test(usize),
    Property(usize),
    /// Direct call of a function under synthesis on its own inputs.
    Call(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    /// For admissibility violations, the parameters of the violating invocation; otherwise
    /// the property's variables (empty for tests).
    pub assignment: Vec<(Symbol, Value)>,
    pub class: ViolationClass,
    pub source: CexSource,
    /// Top-level inputs on which the violation was found.
    pub inputs: Vec<Value>,
}

impl Counterexample {
    pub fn kind(&self) -> CexKind {
        match &self.class {
            ViolationClass::Admissibility { kind: ViolationKind::Contract, .. } => CexKind::Contract,
            ViolationClass::Admissibility { kind: ViolationKind::Measure, .. } => CexKind::Measure,
            ViolationClass::Property { .. } => CexKind::Property,
            ViolationClass::Test { .. } => CexKind::Test,
            ViolationClass::Budget { .. } => CexKind::Budget,
        }
    }

    pub fn holes(&self) -> HoleSet {
        match &self.class {
            ViolationClass::Admissibility { violation, .. } => violation.holes(),
            ViolationClass::Property { trace } | ViolationClass::Test { trace } | ViolationClass::Budget { trace } => {
                *trace
            }
        }
    }

    pub fn get(&self, var: &str) -> Option<&Value> {
        self.assignment.iter().find(|(v, _)| &**v == var).map(|(_, x)| x)
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind())?;
        for (v, x) in &self.assignment {
            write!(f, " ({} {})", v, x)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimedOut;

#[derive(Clone, Debug)]
struct Domain {
    types: Vec<Type>,
    exhaustive: Vec<Vec<Value>>,
    random: Vec<Vec<Value>>,
}

impl Domain {
    fn new(types: Vec<Type>, cfg: &CgenConfig, salt: u64) -> Self {
        let streams: Vec<Vec<Value>> = types.iter().map(|t| exhaustive_values(*t, cfg)).collect();
        let lens: Vec<usize> = streams.iter().map(Vec::len).collect();
        let exhaustive = layered_tuples(&lens, cfg.exhaustive_cap)
            .into_iter()
            .map(|t| t.iter().enumerate().map(|(i, &ix)| streams[i][ix].clone()).collect())
            .collect();
        let mut d = Domain { types, exhaustive, random: Vec::new() };
        d.reseed(cfg, salt);
        d
    }

    fn reseed(&mut self, cfg: &CgenConfig, salt: u64) {
        if self.types.is_empty() {
            self.random.clear();
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        self.random =
            (0..cfg.samples).map(|_| self.types.iter().map(|t| random_value(*t, cfg, &mut rng)).collect()).collect();
    }

    fn iter(&self) -> impl Iterator<Item = &Vec<Value>> {
        self.exhaustive.iter().chain(&self.random)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct CgenStats {
    pub calls: u64,
    pub evaluations: u64,
    pub steps: u64,
}

/// Inputs per property tried before any property's domain is searched in full.
const QUICK_PASS: usize = 256;

/// Counterexample generator for one ∀*-instance; input domains are built once.
#[derive(Clone, Debug)]
pub struct Cgen {
    pub cfg: CgenConfig,
    tests: Vec<Query>,
    properties: Vec<Query>,
    property_domains: Vec<Domain>,
    call_domains: Vec<Domain>,
    params: Vec<Vec<Symbol>>,
    names: Vec<Symbol>,
    pub stats: CgenStats,
}

impl Cgen {
    pub fn new(inst: &SynthesisInstance, cfg: CgenConfig) -> Self {
        assert!(inst.is_universal(), "counterexample generation needs a ∀*-instance");
        let property_domains = inst
            .properties
            .iter()
            .enumerate()
            .map(|(i, p)| Domain::new(p.var_types(), &cfg, i as u64 + 1))
            .collect();
        let call_domains = inst
            .functions
            .iter()
            .enumerate()
            .map(|(i, f)| Domain::new(f.params.iter().map(|(_, t)| *t).collect(), &cfg, 1000 + i as u64))
            .collect();
        Cgen {
            cfg,
            tests: inst.test_queries(),
            properties: inst.property_queries(),
            property_domains,
            call_domains,
            params: inst.functions.iter().map(|f| f.params.iter().map(|(v, _)| v.clone()).collect()).collect(),
            names: inst.fn_names(),
            stats: CgenStats::default(),
        }
    }

    /// Replaces the random part of every domain with samples from a new seed.
    pub fn reseed(&mut self, seed: u64) {
        self.cfg.seed = seed;
        let cfg = self.cfg;
        for (i, d) in self.property_domains.iter_mut().enumerate() {
            d.reseed(&cfg, i as u64 + 1);
        }
        for (i, d) in self.call_domains.iter_mut().enumerate() {
            d.reseed(&cfg, 1000 + i as u64);
        }
    }

    /// Checks tests, then properties, then every function on its own inputs. The first
    /// violation in that order is returned; properties are swept in two passes so a late
    /// property with an early counterexample is not stuck behind a long valid domain.
    pub fn find_cex(
        &mut self,
        inst: &SynthesisInstance,
        defs: &[FnDef],
        deadline: Option<Instant>,
    ) -> Result<Option<Counterexample>, TimedOut> {
        self.stats.calls += 1;
        let program = Program::new(defs, &inst.theory).expect("candidate compiles");
        let limits = self.cfg.limits();
        let mut n = 0u64;
        let mut tick = |stats: &mut CgenStats, out: &EvalOutcome| -> Result<(), TimedOut> {
            stats.evaluations += 1;
            stats.steps += out.steps;
            n += 1;
            match deadline {
                Some(d) if n.is_multiple_of(64) && Instant::now() >= d => Err(TimedOut),
                _ => Ok(()),
            }
        };
        for (i, q) in self.tests.iter().enumerate() {
            let out = eval_matrix(&program, &inst.theory, q, &[], limits);
            tick(&mut self.stats, &out)?;
            if let Some(c) = self.classify(&out, CexSource::Test(i), &[], &[]) {
                return Ok(Some(c));
            }
        }
        // Small inputs of every property first, then the rest of each domain.
        for pass in [0..QUICK_PASS, QUICK_PASS..usize::MAX] {
            for (i, q) in self.properties.iter().enumerate() {
                for a in self.property_domains[i].iter().take(pass.end).skip(pass.start) {
                    let out = eval_matrix(&program, &inst.theory, q, a, limits);
                    tick(&mut self.stats, &out)?;
                    if let Some(c) = self.classify(&out, CexSource::Property(i), q.vars(), a) {
                        return Ok(Some(c));
                    }
                }
            }
        }
        for (i, f) in inst.functions.iter().enumerate() {
            for a in self.call_domains[i].iter() {
                let out = program.call(&inst.theory, &f.name, a, limits);
                tick(&mut self.stats, &out)?;
                if let Some(c) = self.classify(&out, CexSource::Call(i), &self.params[i], a) {
                    return Ok(Some(c));
                }
            }
        }
        Ok(None)
    }

    fn classify(&self, out: &EvalOutcome, source: CexSource, vars: &[Symbol], inputs: &[Value]) -> Option<Counterexample> {
        let top: Vec<(Symbol, Value)> = vars.iter().cloned().zip(inputs.iter().cloned()).collect();
        let falsified = |trace| match source {
            CexSource::Test(_) => ViolationClass::Test { trace },
            _ => ViolationClass::Property { trace },
        };
        let (assignment, class) = match &out.result {
            Outcome::Ok(Value::Bool(true)) => return None,
            Outcome::Ok(_) if matches!(source, CexSource::Call(_)) => return None,
            Outcome::Ok(_) => (top, falsified(out.trace)),
            Outcome::BudgetExhausted => (top, ViolationClass::Budget { trace: out.trace }),
            Outcome::ContractViolation(v) | Outcome::MeasureViolation(v) => {
                let kind = if matches!(out.result, Outcome::ContractViolation(_)) {
                    ViolationKind::Contract
                } else {
                    ViolationKind::Measure
                };
                match &v.function {
                    Some(fname) => {
                        let fi = self.fn_index(fname);
                        let assignment = self.params[fi].iter().cloned().zip(v.args.iter().cloned()).collect();
                        (assignment, ViolationClass::Admissibility { kind, violation: v.clone() })
                    }
                    // a failing background call written in the property itself
                    None => (top, falsified(out.trace)),
                }
            }
        };
        Some(Counterexample { assignment, class, source, inputs: inputs.to_vec() })
    }

    fn fn_index(&self, name: &Symbol) -> usize {
        self.names.iter().position(|n| n == name).expect("violation in an unknown function")
    }

    /// Re-runs the check that produced `cex` against `defs`; true iff the same kind of
    /// violation recurs (for admissibility, at the same site of the same invocation).
    pub fn replay(&self, inst: &SynthesisInstance, defs: &[FnDef], cex: &Counterexample) -> bool {
        let program = Program::new(defs, &inst.theory).expect("candidate compiles");
        let limits = self.cfg.limits();
        if let ViolationClass::Admissibility { kind, violation } = &cex.class {
            let f = violation.function.as_ref().expect("admissibility violation inside a function");
            return program.check_site(&inst.theory, f, &violation.args, &violation.site, *kind, limits)
                == SiteCheck::Violated;
        }
        let out = match cex.source {
            CexSource::Test(i) => eval_matrix(&program, &inst.theory, &self.tests[i], &[], limits),
            CexSource::Property(i) => eval_matrix(&program, &inst.theory, &self.properties[i], &cex.inputs, limits),
            CexSource::Call(i) => program.call(&inst.theory, &self.names[i], &cex.inputs, limits),
        };
        let vars: &[Symbol] = match cex.source {
            CexSource::Property(i) => self.properties[i].vars(),
            CexSource::Call(i) => &self.params[i],
            CexSource::Test(_) => &[],
        };
        self.classify(&out, cex.source, vars, &cex.inputs).is_some_and(|c| c.kind() == cex.kind())
    }
}

/// One-shot search for a counterexample to the candidate `defs`.
pub fn find_cex(inst: &SynthesisInstance, defs: &[FnDef], cfg: CgenConfig) -> Option<Counterexample> {
    Cgen::new(inst, cfg).find_cex(inst, defs, None).expect("no deadline")
}
