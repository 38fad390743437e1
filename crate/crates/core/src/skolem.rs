//! Reduction of mixed-quantifier properties to universal ones.
//!
//! Each existential variable becomes a fresh function of the universals before it; the
//! annotated witness sketch becomes that function's multi-sketch, synthesized alongside the
//! original functions.

use std::collections::HashSet;

use thiserror::Error;

use crate::lang::{Expr, Signature, Symbol};
use crate::sketch::{MultiSketch, SketchBody, SynthFn};
use crate::spec::{Binder, Property, Quant, SynthesisInstance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkolemError {
    #[error("existential `{0}` has no sketch annotation")]
    MissingSketch(String),
    #[error("cannot find a fresh name for existential `{0}`")]
    NameCollision(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkolemOutput {
    pub property: Property,
    pub fresh: Vec<SynthFn>,
}

impl SkolemOutput {
    pub fn signatures(&self) -> Vec<(Symbol, Signature)> {
        self.fresh.iter().map(|f| (f.name.clone(), f.signature())).collect()
    }
}

fn fresh_name(var: &Symbol, taken: &HashSet<Symbol>) -> Result<Symbol, SkolemError> {
    if !taken.contains(var) {
        return Ok(var.clone());
    }
    (1..10_000)
        .map(|k| Symbol::from(format!("{}_{}", var, k)))
        .find(|s| !taken.contains(s))
        .ok_or_else(|| SkolemError::NameCollision(var.to_string()))
}

/// Replaces every existential by a call of a fresh witness function on the universals that
/// precede it. `taken` holds symbols that must not be reused; fresh names are added to it.
pub fn skolemize(p: &Property, taken: &mut HashSet<Symbol>) -> Result<SkolemOutput, SkolemError> {
    let mut universals: Vec<&Binder> = Vec::new();
    let mut matrix = p.matrix.clone();
    let mut fresh = Vec::new();
    for b in &p.prefix {
        match b.quant {
            Quant::Forall => universals.push(b),
            Quant::Exists => {
                let w = b.witness.as_ref().ok_or_else(|| SkolemError::MissingSketch(b.var.to_string()))?;
                let name = fresh_name(&b.var, taken)?;
                taken.insert(name.clone());
                let params: Vec<(Symbol, crate::lang::Type)> = universals.iter().map(|u| (u.var.clone(), u.ty)).collect();
                let call = Expr::call(&name, params.iter().map(|(v, _)| Expr::var(v)).collect());
                matrix = matrix.subst_var(&b.var, &call);
                let bodies = w
                    .bodies
                    .iter()
                    .map(|sb| SketchBody {
                        owner: name.clone(),
                        skeleton: sb.skeleton.rename_fn(&b.var, &name),
                        holes: sb.holes.clone(),
                    })
                    .collect();
                fresh.push(SynthFn {
                    name: name.clone(),
                    params,
                    ret: b.ty,
                    sketch: MultiSketch { owner: name, bodies },
                    measure: w.measure.clone(),
                });
            }
        }
    }
    let prefix = universals.into_iter().cloned().collect();
    Ok(SkolemOutput { property: Property { prefix, matrix }, fresh })
}

/// Skolemizes every mixed property; fresh functions follow the original ones, in property
/// order. Universal properties and tests are unchanged.
pub fn reduce_instance(inst: &SynthesisInstance) -> Result<SynthesisInstance, SkolemError> {
    if inst.is_universal() {
        return Ok(inst.clone());
    }
    let mut taken: HashSet<Symbol> = inst.theory.symbols().cloned().collect();
    taken.extend(inst.fn_names());
    let mut out = inst.clone();
    out.properties.clear();
    for p in &inst.properties {
        if p.is_universal() {
            out.properties.push(p.clone());
            continue;
        }
        let sk = skolemize(p, &mut taken)?;
        out.properties.push(sk.property);
        out.functions.extend(sk.fresh);
    }
    Ok(out)
}
