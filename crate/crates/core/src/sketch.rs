//! Sketch bodies with typed holes, multi-sketches, emergents and completion.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::grammar::{Grammar, NtSet, Rhs};
use crate::lang::{typecheck, Expr, ExprKind, FnDef, HoleId, Signature, Symbol, Theory, Type, TypeEnv};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hole {
    pub id: HoleId,
    pub name: Symbol,
    pub nts: NtSet,
}

/// A partial body for `owner`; `holes` lists the skeleton's holes in document order.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchBody {
    pub owner: Symbol,
    pub skeleton: Expr,
    pub holes: Vec<Hole>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiSketch {
    pub owner: Symbol,
    pub bodies: Vec<SketchBody>,
}

/// A function under synthesis.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthFn {
    pub name: Symbol,
    pub params: Vec<(Symbol, Type)>,
    pub ret: Type,
    pub sketch: MultiSketch,
    /// Natural-number measure over the parameters; `None` is the constant-zero measure.
    pub measure: Option<Expr>,
}

impl SynthFn {
    pub fn signature(&self) -> Signature {
        Signature::new(self.params.iter().map(|(_, t)| *t).collect(), self.ret)
    }

    pub fn has_recursive_body(&self) -> bool {
        self.sketch.bodies.iter().any(|b| b.skeleton.called_symbols().contains(&self.name))
    }
}

/// Association list from holes to concepts, in hole document order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Emergent(pub Vec<(HoleId, Expr)>);

impl Emergent {
    pub fn get(&self, h: HoleId) -> Option<&Expr> {
        self.0.iter().find(|(k, _)| *k == h).map(|(_, e)| e)
    }

    /// Sum of concept sizes.
    pub fn size(&self) -> usize {
        self.0.iter().map(|(_, e)| e.size()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SketchError {
    #[error("hole `{0}` has no binding in the emergent")]
    Missing(String),
    #[error("emergent binds hole {0} which is not in the sketch body")]
    Extra(HoleId),
    #[error("sketch for `{owner}`: {msg}")]
    Invalid { owner: String, msg: String },
}

fn invalid(owner: &str, msg: impl Into<String>) -> SketchError {
    SketchError::Invalid { owner: owner.to_string(), msg: msg.into() }
}

fn substitute(e: &Expr, emergent: &Emergent) -> Result<Expr, HoleId> {
    Ok(match &e.kind {
        ExprKind::Hole(h) => emergent.get(*h).ok_or(*h)?.tagged(*h),
        ExprKind::If(c, t, el) => Expr {
            kind: ExprKind::If(
                Box::new(substitute(c, emergent)?),
                Box::new(substitute(t, emergent)?),
                Box::new(substitute(el, emergent)?),
            ),
            tag: e.tag,
        },
        ExprKind::Call(f, args) => Expr {
            kind: ExprKind::Call(
                f.clone(),
                args.iter().map(|a| substitute(a, emergent)).collect::<Result<_, _>>()?,
            ),
            tag: e.tag,
        },
        _ => e.clone(),
    })
}

/// Fills the holes of `f`'s sketch body `body` with `emergent`; substituted nodes are tagged
/// with their hole id.
pub fn complete(f: &SynthFn, body: usize, emergent: &Emergent) -> Result<FnDef, SketchError> {
    let sb = &f.sketch.bodies[body];
    for (h, _) in &emergent.0 {
        if !sb.holes.iter().any(|x| x.id == *h) {
            return Err(SketchError::Extra(*h));
        }
    }
    let filled = substitute(&sb.skeleton, emergent).map_err(|h| {
        let name = sb.holes.iter().find(|x| x.id == h).map_or(h.to_string(), |x| x.name.to_string());
        SketchError::Missing(name)
    })?;
    Ok(FnDef {
        name: f.name.clone(),
        params: f.params.clone(),
        ret: f.ret,
        body: filled,
        measure: f.measure.clone(),
    })
}

/// Recovers the emergent of a completed body from its provenance tags.
pub fn decompile(def: &FnDef, body: &SketchBody) -> Emergent {
    fn walk(e: &Expr, parent: Option<HoleId>, out: &mut HashMap<HoleId, Expr>) {
        if let Some(h) = e.tag {
            if parent != Some(h) {
                out.insert(h, e.untagged());
            }
        }
        for c in e.children() {
            walk(c, e.tag, out);
        }
    }
    let mut found = HashMap::new();
    walk(&def.body, None, &mut found);
    Emergent(body.holes.iter().filter_map(|h| found.remove(&h.id).map(|e| (h.id, e))).collect())
}

/// Checks hole typing against the skeleton and that every grammar terminal reachable from a
/// hole is a parameter of the owner.
pub fn validate_fn(
    f: &SynthFn,
    grammar: &Grammar,
    theory: &Theory,
    synth_sigs: &HashMap<Symbol, Signature>,
) -> Result<(), Vec<SketchError>> {
    let owner = &*f.name;
    let mut errs = Vec::new();
    if f.sketch.bodies.is_empty() {
        errs.push(invalid(owner, "multi-sketch has no bodies"));
    }
    let params: HashMap<&Symbol, Type> = f.params.iter().map(|(p, t)| (p, *t)).collect();
    for (bi, body) in f.sketch.bodies.iter().enumerate() {
        let refs = body.skeleton.hole_refs();
        let declared: Vec<HoleId> = body.holes.iter().map(|h| h.id).collect();
        for (i, h) in refs.iter().enumerate() {
            if refs[..i].contains(h) {
                errs.push(invalid(owner, format!("body {}: hole {} occurs more than once", bi, h)));
            }
        }
        if refs != declared {
            errs.push(invalid(owner, format!("body {}: hole declarations do not match skeleton order", bi)));
        }
        let mut hole_types = HashMap::new();
        for h in &body.holes {
            let tys: Vec<Type> = h.nts.iter().map(|n| grammar.nt_type(n)).collect();
            match tys.split_first() {
                None => errs.push(invalid(owner, format!("hole {} has no non-terminal", h.name))),
                Some((t, rest)) => {
                    if rest.iter().any(|u| u != t) {
                        errs.push(invalid(owner, format!("hole {} mixes non-terminal types", h.name)));
                    }
                    hole_types.insert(h.id, *t);
                }
            }
            let reach = grammar.reachable(h.nts);
            for r in grammar.rules.iter().filter(|r| reach.contains(r.lhs)) {
                if let Rhs::Terminal(Expr { kind: ExprKind::Var(v), .. }) = &r.rhs {
                    match params.get(v) {
                        Some(t) if *t == grammar.nt_type(r.lhs) => {}
                        Some(_) => errs.push(invalid(owner, format!("hole {} can produce `{}` at the wrong type", h.name, v))),
                        None => errs.push(invalid(
                            owner,
                            format!("hole {} can produce `{}`, which is not a parameter of {}", h.name, v, owner),
                        )),
                    }
                }
            }
        }
        let env = TypeEnv::with_vars(f.params.iter().cloned()).synth(synth_sigs).holes(&hole_types);
        match typecheck(&body.skeleton, &env, theory) {
            Ok(t) if t == f.ret => {}
            Ok(t) => errs.push(invalid(owner, format!("body {} has type {}, expected {}", bi, t, f.ret))),
            Err(e) => errs.push(invalid(owner, format!("body {}: {}", bi, e))),
        }
    }
    if let Some(m) = &f.measure {
        let env = TypeEnv::with_vars(f.params.iter().cloned());
        match typecheck(m, &env, theory) {
            Ok(Type::Int) => {}
            Ok(t) => errs.push(invalid(owner, format!("measure has type {}, expected :int", t))),
            Err(e) => errs.push(invalid(owner, format!("measure: {}", e))),
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

impl fmt::Display for Emergent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (h, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({} {})", h.0, e)?;
        }
        f.write_str(")")
    }
}
