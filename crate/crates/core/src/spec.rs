//! Properties, tests, and synthesis instances.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::grammar::{Grammar, GrammarError};
use crate::lang::{
    typecheck, EvalOutcome, Expr, HoleId, Limits, Program, Query, Signature, Symbol, Theory, Type, TypeEnv, Value,
    MAX_HOLES,
};
use crate::sketch::{validate_fn, SketchBody, SketchError, SynthFn};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quant {
    Forall,
    Exists,
}

/// User-supplied multi-sketch for an existentially quantified variable. Skeleton parameters
/// are the universals preceding the binder, under their own names; recursive calls use the
/// variable name as the function symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSketch {
    pub bodies: Vec<SketchBody>,
    pub measure: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binder {
    pub quant: Quant,
    pub var: Symbol,
    pub ty: Type,
    pub witness: Option<WitnessSketch>,
}

impl Binder {
    pub fn forall(var: &str, ty: Type) -> Self {
        Binder { quant: Quant::Forall, var: var.into(), ty, witness: None }
    }
}

/// A prenex first-order property.
#[derive(Clone, Debug, PartialEq)]
pub struct Property {
    pub prefix: Vec<Binder>,
    pub matrix: Expr,
}

impl Property {
    pub fn forall(vars: &[(&str, Type)], matrix: Expr) -> Self {
        Property { prefix: vars.iter().map(|(v, t)| Binder::forall(v, *t)).collect(), matrix }
    }

    pub fn is_universal(&self) -> bool {
        self.prefix.iter().all(|b| b.quant == Quant::Forall)
    }

    pub fn vars(&self) -> Vec<Symbol> {
        self.prefix.iter().map(|b| b.var.clone()).collect()
    }

    pub fn var_types(&self) -> Vec<Type> {
        self.prefix.iter().map(|b| b.ty).collect()
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.prefix {
            let q = if b.quant == Quant::Forall { "forall" } else { "exists" };
            write!(f, "{} {}{}. ", q, b.var, b.ty)?;
        }
        write!(f, "{}", self.matrix)
    }
}

/// A problem instance: find completions of every function's multi-sketch that are admissible
/// and satisfy all properties and tests.
#[derive(Clone, Debug)]
pub struct SynthesisInstance {
    pub name: String,
    pub theory: Theory,
    pub grammar: Grammar,
    pub functions: Vec<SynthFn>,
    pub properties: Vec<Property>,
    pub tests: Vec<Expr>,
    /// Upper bound on the size of each hole-filling concept.
    pub size_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("grammar: {0}")]
    Grammar(GrammarError),
    #[error(transparent)]
    Sketch(SketchError),
    #[error("property {index}: {msg}")]
    Property { index: usize, msg: String },
    #[error("test {index}: {msg}")]
    Test { index: usize, msg: String },
    #[error("{0}")]
    Other(String),
}

impl SynthesisInstance {
    pub fn signatures(&self) -> HashMap<Symbol, Signature> {
        self.functions.iter().map(|f| (f.name.clone(), f.signature())).collect()
    }

    pub fn fn_names(&self) -> Vec<Symbol> {
        self.functions.iter().map(|f| f.name.clone()).collect()
    }

    pub fn is_universal(&self) -> bool {
        self.properties.iter().all(Property::is_universal)
    }

    pub fn all_holes(&self) -> Vec<(HoleId, Symbol)> {
        let mut out = Vec::new();
        for f in &self.functions {
            for b in &f.sketch.bodies {
                out.extend(b.holes.iter().map(|h| (h.id, h.name.clone())));
            }
        }
        for p in &self.properties {
            for w in p.prefix.iter().filter_map(|b| b.witness.as_ref()) {
                for b in &w.bodies {
                    out.extend(b.holes.iter().map(|h| (h.id, h.name.clone())));
                }
            }
        }
        out
    }

    pub fn hole_name(&self, h: HoleId) -> String {
        self.all_holes().into_iter().find(|(id, _)| *id == h).map_or(h.to_string(), |(_, n)| n.to_string())
    }

    /// Checks well-formedness of every component.
    pub fn validate(&self) -> Result<(), Vec<InstanceError>> {
        let mut errs = Vec::new();
        let names = self.fn_names();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                errs.push(InstanceError::Other(format!("function `{}` declared twice", n)));
            }
            if self.theory.contains(n) {
                errs.push(InstanceError::Other(format!("`{}` is a background function", n)));
            }
        }
        if let Err(es) = self.grammar.validate(&self.theory, &names) {
            errs.extend(es.into_iter().map(InstanceError::Grammar));
        }
        let holes = self.all_holes();
        let mut seen = HashSet::new();
        for (id, name) in &holes {
            if !seen.insert(*id) || holes.iter().filter(|(_, n)| n == name).count() > 1 {
                errs.push(InstanceError::Other(format!("hole `{}` is declared more than once", name)));
            }
            if id.0 as usize >= MAX_HOLES {
                errs.push(InstanceError::Other(format!("more than {} holes", MAX_HOLES)));
            }
        }
        let sigs = self.signatures();
        for f in &self.functions {
            if let Err(es) = validate_fn(f, &self.grammar, &self.theory, &sigs) {
                errs.extend(es.into_iter().map(InstanceError::Sketch));
            }
        }
        for (index, p) in self.properties.iter().enumerate() {
            let perr = |msg: String| InstanceError::Property { index, msg };
            for (i, b) in p.prefix.iter().enumerate() {
                if p.prefix[..i].iter().any(|c| c.var == b.var) {
                    errs.push(perr(format!("variable `{}` bound twice", b.var)));
                }
                if b.quant == Quant::Exists && b.witness.is_none() {
                    errs.push(perr(format!("existential `{}` has no sketch annotation", b.var)));
                }
            }
            let env = TypeEnv::with_vars(p.prefix.iter().map(|b| (b.var.clone(), b.ty))).synth(&sigs);
            match typecheck(&p.matrix, &env, &self.theory) {
                Ok(Type::Bool) => {}
                Ok(t) => errs.push(perr(format!("matrix has type {}", t))),
                Err(e) => errs.push(perr(e.to_string())),
            }
        }
        for (index, t) in self.tests.iter().enumerate() {
            let env = TypeEnv::default().synth(&sigs);
            match typecheck(t, &env, &self.theory) {
                Ok(Type::Bool) => {}
                Ok(ty) => errs.push(InstanceError::Test { index, msg: format!("test has type {}", ty) }),
                Err(e) => errs.push(InstanceError::Test { index, msg: e.to_string() }),
            }
        }
        if self.size_bound == 0 {
            errs.push(InstanceError::Other("size bound must be positive".into()));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Compiles the matrices of ∀*-properties, in order.
    pub fn property_queries(&self) -> Vec<Query> {
        let names = self.fn_names();
        self.properties
            .iter()
            .map(|p| Query::compile(&p.matrix, &p.vars(), &names, &self.theory).expect("validated property"))
            .collect()
    }

    pub fn test_queries(&self) -> Vec<Query> {
        let names = self.fn_names();
        self.tests
            .iter()
            .map(|t| Query::compile(t, &[], &names, &self.theory).expect("validated test"))
            .collect()
    }
}

/// Evaluates a property matrix (or a test, with an empty assignment). The trace is the union
/// of the holes entered by every call the short-circuit evaluation reached.
pub fn eval_matrix(program: &Program, theory: &Theory, query: &Query, assignment: &[Value], limits: Limits) -> EvalOutcome {
    assert_eq!(assignment.len(), query.vars().len(), "assignment does not cover the prefix");
    program.eval_query(theory, query, assignment, limits)
}
