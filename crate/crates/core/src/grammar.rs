//! Typed normal-form regular tree grammars.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::lang::{Expr, ExprKind, Symbol, Theory, Type};

/// Index of a non-terminal within its grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NtId(pub u8);

pub const MAX_NTS: usize = 64;

/// Set of non-terminals as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct NtSet(pub u64);

impl NtSet {
    pub const EMPTY: NtSet = NtSet(0);

    pub fn single(n: NtId) -> Self {
        NtSet(1 << n.0)
    }

    pub fn contains(self, n: NtId) -> bool {
        self.0 & (1 << n.0) != 0
    }

    pub fn insert(&mut self, n: NtId) {
        self.0 |= 1 << n.0;
    }

    pub fn intersects(self, o: NtSet) -> bool {
        self.0 & o.0 != 0
    }

    pub fn union(self, o: NtSet) -> NtSet {
        NtSet(self.0 | o.0)
    }

    pub fn minus(self, o: NtSet) -> NtSet {
        NtSet(self.0 & !o.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = NtId> {
        (0..MAX_NTS as u8).filter(move |i| self.0 & (1 << i) != 0).map(NtId)
    }
}

impl FromIterator<NtId> for NtSet {
    fn from_iter<I: IntoIterator<Item = NtId>>(iter: I) -> Self {
        let mut s = NtSet::EMPTY;
        iter.into_iter().for_each(|n| s.insert(n));
        s
    }
}

impl fmt::Debug for NtSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|n| n.0)).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonTerminal {
    pub name: Symbol,
    pub ty: Type,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    /// A variable or constant.
    Terminal(Expr),
    App(Symbol, Vec<NtId>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: NtId,
    pub rhs: Rhs,
}

/// Builds the expression for an application rule; `if` is the only non-function former.
pub fn apply(f: &Symbol, args: Vec<Expr>) -> Expr {
    if &**f == "if" && args.len() == 3 {
        let mut it = args.into_iter();
        let (c, t, e) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
        Expr::ite(c, t, e)
    } else {
        ExprKind::Call(f.clone(), args).into()
    }
}

impl Rule {
    pub fn is_terminal(&self) -> bool {
        matches!(self.rhs, Rhs::Terminal(_))
    }
}

/// Grammar `<terminals, function symbols, non-terminals, rules>`; rule order is significant.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Grammar {
    pub nts: Vec<NonTerminal>,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("rule {rule}: {msg}")]
    Rule { rule: usize, msg: String },
    #[error("too many non-terminals (max {MAX_NTS})")]
    TooManyNts,
    #[error("duplicate non-terminal `{0}`")]
    DuplicateNt(String),
}

impl Grammar {
    pub fn new() -> Self {
        Grammar::default()
    }

    pub fn add_nt(&mut self, name: &str, ty: Type) -> NtId {
        let id = NtId(self.nts.len() as u8);
        self.nts.push(NonTerminal { name: name.into(), ty });
        id
    }

    pub fn nt(&self, name: &str) -> Option<NtId> {
        self.nts.iter().position(|n| &*n.name == name).map(|i| NtId(i as u8))
    }

    pub fn nt_type(&self, n: NtId) -> Type {
        self.nts[n.0 as usize].ty
    }

    pub fn nt_name(&self, n: NtId) -> &str {
        &self.nts[n.0 as usize].name
    }

    pub fn terminal(&mut self, lhs: NtId, atom: Expr) {
        self.rules.push(Rule { lhs, rhs: Rhs::Terminal(atom) });
    }

    pub fn app(&mut self, lhs: NtId, f: &str, args: &[NtId]) {
        self.rules.push(Rule { lhs, rhs: Rhs::App(f.into(), args.to_vec()) });
    }

    /// Variables used as terminals, with the type of the non-terminal producing them.
    pub fn terminal_vars(&self) -> Vec<(Symbol, Type)> {
        let mut out: Vec<(Symbol, Type)> = Vec::new();
        for r in &self.rules {
            if let Rhs::Terminal(Expr { kind: ExprKind::Var(v), .. }) = &r.rhs {
                let t = self.nt_type(r.lhs);
                if !out.iter().any(|(w, u)| w == v && *u == t) {
                    out.push((v.clone(), t));
                }
            }
        }
        out
    }

    /// Non-terminals reachable from `start` (inclusive).
    pub fn reachable(&self, start: NtSet) -> NtSet {
        let mut seen = start;
        loop {
            let mut next = seen;
            for r in &self.rules {
                if let (true, Rhs::App(_, args)) = (seen.contains(r.lhs), &r.rhs) {
                    args.iter().for_each(|a| next.insert(*a));
                }
            }
            if next == seen {
                return seen;
            }
            seen = next;
        }
    }

    /// Checks rule typing and symbol membership. `under_synthesis` symbols may not appear.
    pub fn validate(&self, theory: &Theory, under_synthesis: &[Symbol]) -> Result<(), Vec<GrammarError>> {
        let mut errs = Vec::new();
        if self.nts.len() > MAX_NTS {
            errs.push(GrammarError::TooManyNts);
        }
        for (i, a) in self.nts.iter().enumerate() {
            if self.nts[..i].iter().any(|b| b.name == a.name) {
                errs.push(GrammarError::DuplicateNt(a.name.to_string()));
            }
        }
        let mut var_types: HashMap<Symbol, Type> = HashMap::new();
        for (i, r) in self.rules.iter().enumerate() {
            let err = |msg: String| GrammarError::Rule { rule: i, msg };
            if r.lhs.0 as usize >= self.nts.len() {
                errs.push(err("unknown left-hand non-terminal".into()));
                continue;
            }
            let lhs_ty = self.nt_type(r.lhs);
            let lhs_name = self.nt_name(r.lhs);
            match &r.rhs {
                Rhs::Terminal(atom) => {
                    let ty = match &atom.kind {
                        ExprKind::Int(_) => Some(Type::Int),
                        ExprKind::Bool(_) => Some(Type::Bool),
                        ExprKind::Nil => Some(Type::IntList),
                        ExprKind::Var(v) => {
                            let prev = *var_types.entry(v.clone()).or_insert(lhs_ty);
                            if prev != lhs_ty {
                                errs.push(err(format!("terminal `{}` used at types {} and {}", v, prev, lhs_ty)));
                            }
                            Some(lhs_ty)
                        }
                        _ => None,
                    };
                    match ty {
                        None => errs.push(err(format!("terminal `{}` is not a variable or constant", atom))),
                        Some(t) if t != lhs_ty => {
                            errs.push(err(format!("{} -> {}: terminal has type {}, expected {}", lhs_name, atom, t, lhs_ty)))
                        }
                        _ => {}
                    }
                }
                Rhs::App(f, args) => {
                    if under_synthesis.contains(f) {
                        errs.push(err(format!("`{}` is under synthesis and cannot appear in the grammar", f)));
                        continue;
                    }
                    if args.iter().any(|a| a.0 as usize >= self.nts.len()) {
                        errs.push(err("unknown non-terminal on right-hand side".into()));
                        continue;
                    }
                    if &**f == "if" {
                        let tys: Vec<Type> = args.iter().map(|a| self.nt_type(*a)).collect();
                        if tys != [Type::Bool, lhs_ty, lhs_ty] {
                            errs.push(err(format!("{} -> (if ...): expected a condition of type {} and branches of type {}", lhs_name, Type::Bool, lhs_ty)));
                        }
                        continue;
                    }
                    let Some(bf) = theory.get(f) else {
                        errs.push(err(format!("unknown function symbol `{}`", f)));
                        continue;
                    };
                    let arg_tys: Vec<Type> = args.iter().map(|a| self.nt_type(*a)).collect();
                    if bf.params.arity() != args.len() {
                        errs.push(err(format!("`{}` takes {} arguments, rule gives {}", f, bf.params.arity(), args.len())));
                        continue;
                    }
                    match bf.apply_types(&arg_tys) {
                        None => errs.push(err(format!("`{}` cannot take arguments of the given non-terminal types", f))),
                        Some(t) if t != lhs_ty => errs.push(err(format!(
                            "{} -> ({} ...): `{}` returns {}, but {} has type {}",
                            lhs_name, f, f, t, lhs_name, lhs_ty
                        ))),
                        _ => {}
                    }
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Whether `expr` is derivable from `nt`.
    pub fn generates(&self, nt: NtId, expr: &Expr) -> bool {
        self.rules.iter().filter(|r| r.lhs == nt).any(|r| match (&r.rhs, &expr.kind) {
            (Rhs::Terminal(a), _) => a == expr,
            (Rhs::App(f, ns), ExprKind::Call(g, args)) => {
                f == g && ns.len() == args.len() && ns.iter().zip(args).all(|(n, a)| self.generates(*n, a))
            }
            (Rhs::App(f, ns), ExprKind::If(c, t, e)) => {
                &**f == "if" && ns.len() == 3 && [&**c, &**t, &**e].iter().zip(ns).all(|(a, n)| self.generates(*n, a))
            }
            _ => false,
        })
    }

    /// Non-terminals generating `expr`.
    pub fn generators(&self, expr: &Expr) -> NtSet {
        (0..self.nts.len()).map(|i| NtId(i as u8)).filter(|n| self.generates(*n, expr)).collect()
    }

    pub fn rule_display(&self, r: &Rule) -> String {
        match &r.rhs {
            Rhs::Terminal(a) => format!("{} -> {}", self.nt_name(r.lhs), a),
            Rhs::App(f, args) => format!(
                "{} -> ({}{})",
                self.nt_name(r.lhs),
                f,
                args.iter().map(|a| format!(" {}", self.nt_name(*a))).collect::<String>()
            ),
        }
    }
}

/// Size of an expression (1 for atoms, 1 + sum over arguments otherwise).
pub fn size(expr: &Expr) -> usize {
    expr.size()
}
