use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::expr::{Expr, ExprKind};
use super::theory::Theory;
use super::types::{HoleId, Signature, Symbol, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown variable `{name}` in {node}")]
    UnknownVar { name: String, node: String },
    #[error("unknown function symbol `{name}` in {node}")]
    UnknownFn { name: String, node: String },
    #[error("unknown hole {hole} in {node}")]
    UnknownHole { hole: HoleId, node: String },
    #[error("`{name}` expects {expected} arguments, got {found} in {node}")]
    Arity { name: String, expected: usize, found: usize, node: String },
    #[error("type mismatch in {node}: {detail}")]
    Mismatch { node: String, detail: String },
}

/// Typing context for a single expression.
#[derive(Default, Clone, Debug)]
pub struct TypeEnv<'a> {
    pub vars: BTreeMap<Symbol, Type>,
    pub synth: Option<&'a HashMap<Symbol, Signature>>,
    pub holes: Option<&'a HashMap<HoleId, Type>>,
}

impl<'a> TypeEnv<'a> {
    pub fn with_vars<I: IntoIterator<Item = (Symbol, Type)>>(vars: I) -> Self {
        TypeEnv { vars: vars.into_iter().collect(), synth: None, holes: None }
    }

    pub fn synth(mut self, sigs: &'a HashMap<Symbol, Signature>) -> Self {
        self.synth = Some(sigs);
        self
    }

    pub fn holes(mut self, holes: &'a HashMap<HoleId, Type>) -> Self {
        self.holes = Some(holes);
        self
    }
}

/// Computes the unique type of `expr`, or the first located error.
pub fn typecheck(expr: &Expr, env: &TypeEnv<'_>, theory: &Theory) -> Result<Type, TypeError> {
    match &expr.kind {
        ExprKind::Var(v) => env
            .vars
            .get(v)
            .copied()
            .ok_or_else(|| TypeError::UnknownVar { name: v.to_string(), node: expr.to_string() }),
        ExprKind::Int(_) => Ok(Type::Int),
        ExprKind::Bool(_) => Ok(Type::Bool),
        ExprKind::Nil => Ok(Type::IntList),
        ExprKind::Hole(h) => env
            .holes
            .and_then(|hs| hs.get(h).copied())
            .ok_or_else(|| TypeError::UnknownHole { hole: *h, node: expr.to_string() }),
        ExprKind::If(c, t, e) => {
            let ct = typecheck(c, env, theory)?;
            if ct != Type::Bool {
                return Err(TypeError::Mismatch {
                    node: expr.to_string(),
                    detail: format!("condition {} has type {}, expected :bool", c, ct),
                });
            }
            let tt = typecheck(t, env, theory)?;
            let et = typecheck(e, env, theory)?;
            if tt != et {
                return Err(TypeError::Mismatch {
                    node: expr.to_string(),
                    detail: format!("branches have types {} and {}", tt, et),
                });
            }
            Ok(tt)
        }
        ExprKind::Call(f, args) => {
            let arg_types = args.iter().map(|a| typecheck(a, env, theory)).collect::<Result<Vec<_>, _>>()?;
            if let Some(sig) = env.synth.and_then(|s| s.get(f)) {
                if sig.params.len() != args.len() {
                    return Err(TypeError::Arity {
                        name: f.to_string(),
                        expected: sig.params.len(),
                        found: args.len(),
                        node: expr.to_string(),
                    });
                }
                if sig.params != arg_types {
                    return Err(mismatch(expr, f, &sig.params, &arg_types));
                }
                return Ok(sig.ret);
            }
            let bf = theory
                .get(f)
                .ok_or_else(|| TypeError::UnknownFn { name: f.to_string(), node: expr.to_string() })?;
            if bf.params.arity() != args.len() {
                return Err(TypeError::Arity {
                    name: f.to_string(),
                    expected: bf.params.arity(),
                    found: args.len(),
                    node: expr.to_string(),
                });
            }
            bf.apply_types(&arg_types).ok_or_else(|| TypeError::Mismatch {
                node: expr.to_string(),
                detail: format!(
                    "`{}` cannot be applied to ({})",
                    f,
                    arg_types.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
                ),
            })
        }
    }
}

fn mismatch(expr: &Expr, f: &str, expected: &[Type], found: &[Type]) -> TypeError {
    let show = |ts: &[Type]| ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
    TypeError::Mismatch {
        node: expr.to_string(),
        detail: format!("`{}` expects ({}), got ({})", f, show(expected), show(found)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::standard_theory;
    use crate::lang::types::sym;

    fn env() -> TypeEnv<'static> {
        TypeEnv::with_vars([(sym("x"), Type::Int), (sym("xs"), Type::IntList)])
    }

    #[test]
    fn endp_is_bool() {
        let t = standard_theory();
        let e = Expr::call("endp", vec![Expr::var("xs")]);
        assert_eq!(typecheck(&e, &env(), &t), Ok(Type::Bool));
    }

    #[test]
    fn if_branches() {
        let t = standard_theory();
        let e = Expr::ite(Expr::call("endp", vec![Expr::var("xs")]), Expr::int(0), Expr::var("x"));
        assert_eq!(typecheck(&e, &env(), &t), Ok(Type::Int));
        let bad = Expr::ite(Expr::var("x"), Expr::int(0), Expr::var("x"));
        assert!(matches!(typecheck(&bad, &env(), &t), Err(TypeError::Mismatch { .. })));
    }

    #[test]
    fn cons_of_lists_is_rejected() {
        let t = standard_theory();
        let e = Expr::call("cons", vec![Expr::var("xs"), Expr::var("xs")]);
        match typecheck(&e, &env(), &t) {
            Err(TypeError::Mismatch { node, .. }) => assert_eq!(node, "(cons xs xs)"),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn unknown_symbol_and_arity() {
        let t = standard_theory();
        let e = Expr::call("frob", vec![Expr::var("xs")]);
        assert!(matches!(typecheck(&e, &env(), &t), Err(TypeError::UnknownFn { .. })));
        let e = Expr::call("head", vec![Expr::var("xs"), Expr::var("xs")]);
        assert!(matches!(typecheck(&e, &env(), &t), Err(TypeError::Arity { expected: 1, found: 2, .. })));
    }

    #[test]
    fn synthesized_signatures_take_precedence() {
        let t = standard_theory();
        let mut sigs = HashMap::new();
        sigs.insert(sym("insert"), Signature::new(vec![Type::Int, Type::IntList], Type::IntList));
        let e = Expr::call("insert", vec![Expr::var("x"), Expr::var("xs")]);
        assert_eq!(typecheck(&e, &env().synth(&sigs), &t), Ok(Type::IntList));
    }
}
