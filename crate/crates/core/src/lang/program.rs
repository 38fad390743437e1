//! Function definitions, their compiled form, and the tracing evaluator.
//!
//! Evaluation enforces background contracts before every primitive call and a strict
//! natural-number measure decrease before every self-recursive call. Every node carries the
//! provenance tag of the hole it was substituted from; the evaluator records which holes
//! were entered and which holes each intermediate value depends on.

use std::cell::Cell;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::expr::{Expr, ExprKind};
use super::theory::{Strictness, Theory};
use super::types::{HoleId, HoleSet, Symbol, Type};
use super::value::{IntList, Value};

/// A recursive function definition. `measure == None` means the constant-zero measure.
#[derive(Clone, Debug, PartialEq)]
pub struct FnDef {
    pub name: Symbol,
    pub params: Vec<(Symbol, Type)>,
    pub ret: Type,
    pub body: Expr,
    pub measure: Option<Expr>,
}

impl FnDef {
    pub fn is_self_recursive(&self) -> bool {
        self.body.called_symbols().contains(&self.name)
    }
}

impl fmt::Display for FnDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(definec {} (", self.name)?;
        for (i, (p, t)) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{} {}", p, t)?;
        }
        write!(f, ") {}\n  {})", self.ret, self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("unknown function `{0}`")]
    UnknownFn(String),
    #[error("unfilled hole {0} in executable code")]
    Hole(HoleId),
    #[error("measure of `{0}` may only use background functions")]
    ImpureMeasure(String),
}

#[derive(Clone, Debug)]
enum Op {
    Param(u16),
    Const(Value),
    If(Box<[Node; 3]>),
    Prim(u32, Strictness, Box<[Node]>),
    Call(u32, Box<[Node]>),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    tag: Option<HoleId>,
}

impl Node {
    fn children(&self) -> &[Node] {
        match &self.op {
            Op::If(b) => &b[..],
            Op::Prim(_, _, a) | Op::Call(_, a) => a,
            _ => &[],
        }
    }
}

#[derive(Debug)]
struct CompiledFn {
    name: Symbol,
    body: Node,
    measure: Option<Node>,
    /// Which parameters the measure reads.
    measure_reads: Vec<bool>,
}

/// A closed set of definitions compiled against a theory.
#[derive(Debug)]
pub struct Program {
    fns: Vec<CompiledFn>,
    index: HashMap<Symbol, u32>,
}

/// A compiled query expression (property matrix or test) over named variables.
#[derive(Clone, Debug)]
pub struct Query {
    vars: Vec<Symbol>,
    node: Node,
    fn_names: Vec<Symbol>,
}

impl Query {
    /// Compiles `expr` for programs whose definitions are given in `fn_names` order.
    pub fn compile(expr: &Expr, vars: &[Symbol], fn_names: &[Symbol], theory: &Theory) -> Result<Query, CompileError> {
        let index: HashMap<Symbol, u32> = fn_names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        let scope = Scope { params: vars, theory, fn_index: &index, pure: false };
        Ok(Query { vars: vars.to_vec(), node: compile_expr(expr, &scope)?, fn_names: fn_names.to_vec() })
    }

    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }
}

struct Scope<'a> {
    params: &'a [Symbol],
    theory: &'a Theory,
    fn_index: &'a HashMap<Symbol, u32>,
    pure: bool,
}

fn compile_expr(e: &Expr, scope: &Scope<'_>) -> Result<Node, CompileError> {
    let op = match &e.kind {
        ExprKind::Var(v) => {
            let i = scope
                .params
                .iter()
                .position(|p| p == v)
                .ok_or_else(|| CompileError::UnboundVar(v.to_string()))?;
            Op::Param(i as u16)
        }
        ExprKind::Int(i) => Op::Const(Value::Int(*i)),
        ExprKind::Bool(b) => Op::Const(Value::Bool(*b)),
        ExprKind::Nil => Op::Const(Value::List(IntList::nil())),
        ExprKind::Hole(h) => return Err(CompileError::Hole(*h)),
        ExprKind::If(c, t, el) => Op::If(Box::new([
            compile_expr(c, scope)?,
            compile_expr(t, scope)?,
            compile_expr(el, scope)?,
        ])),
        ExprKind::Call(f, args) => {
            let args = args.iter().map(|a| compile_expr(a, scope)).collect::<Result<Vec<_>, _>>()?;
            if let Some(&fi) = scope.fn_index.get(f) {
                if scope.pure {
                    return Err(CompileError::ImpureMeasure(f.to_string()));
                }
                Op::Call(fi, args.into_boxed_slice())
            } else if let Some(pi) = scope.theory.index_of(f) {
                let strictness = scope.theory.by_index(pi).strictness;
                Op::Prim(pi as u32, strictness, args.into_boxed_slice())
            } else {
                return Err(CompileError::UnknownFn(f.to_string()));
            }
        }
    };
    Ok(Node { op, tag: e.tag })
}

impl Program {
    pub fn new(defs: &[FnDef], theory: &Theory) -> Result<Program, CompileError> {
        let index: HashMap<Symbol, u32> =
            defs.iter().enumerate().map(|(i, d)| (d.name.clone(), i as u32)).collect();
        let mut fns = Vec::with_capacity(defs.len());
        for d in defs {
            let params: Vec<Symbol> = d.params.iter().map(|(p, _)| p.clone()).collect();
            let scope = Scope { params: &params, theory, fn_index: &index, pure: false };
            let body = compile_expr(&d.body, &scope)?;
            let (measure, measure_reads) = match &d.measure {
                Some(m) => {
                    let pure = Scope { pure: true, ..scope };
                    let node = compile_expr(m, &pure).map_err(|e| match e {
                        CompileError::ImpureMeasure(_) => CompileError::ImpureMeasure(d.name.to_string()),
                        other => other,
                    })?;
                    let fv = m.free_vars();
                    (Some(node), params.iter().map(|p| fv.contains(p)).collect())
                }
                None => (None, vec![false; params.len()]),
            };
            fns.push(CompiledFn { name: d.name.clone(), body, measure, measure_reads });
        }
        Ok(Program { fns, index })
    }

    pub fn compile_query(&self, expr: &Expr, vars: &[Symbol], theory: &Theory) -> Result<Query, CompileError> {
        let names: Vec<Symbol> = self.fns.iter().map(|f| f.name.clone()).collect();
        Query::compile(expr, vars, &names, theory)
    }

    pub fn has_fn(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn fn_names(&self) -> impl Iterator<Item = &Symbol> {
        self.fns.iter().map(|f| &f.name)
    }

    /// Evaluates `(name args...)` with contract and measure checking.
    pub fn call(&self, theory: &Theory, name: &str, args: &[Value], limits: Limits) -> EvalOutcome {
        let fi = *self.index.get(name).unwrap_or_else(|| panic!("`{}` is not defined", name));
        let mut ev = Evaluator::new(self, theory, limits);
        let result = ev.enter_call(fi, args).map(|(v, _)| v);
        ev.finish(result)
    }

    /// Evaluates a query under an assignment given in `query.vars()` order.
    pub fn eval_query(&self, theory: &Theory, query: &Query, args: &[Value], limits: Limits) -> EvalOutcome {
        debug_assert!(query.fn_names.iter().eq(self.fn_names()), "query compiled for other definitions");
        let mut ev = Evaluator::new(self, theory, limits);
        let frame = Frame::new(None, args);
        let result = ev.eval(&query.node, &frame, HoleSet::EMPTY, &query.node).map(|(v, _)| v);
        ev.finish(result)
    }

    /// Re-checks a contract or measure obligation at a recorded site without running the
    /// rest of the body: guards along the site path are evaluated and must take the
    /// recorded branches, then the obligation of the call at the site is evaluated.
    pub fn check_site(
        &self,
        theory: &Theory,
        func: &str,
        args: &[Value],
        site: &[u16],
        kind: ViolationKind,
        limits: Limits,
    ) -> SiteCheck {
        let Some(&fi) = self.index.get(func) else {
            return SiteCheck::BadSite;
        };
        let f = &self.fns[fi as usize];
        let mut ev = Evaluator::new(self, theory, limits);
        let frame = Frame::new(Some(fi), args);
        let root = &f.body;
        let mut node = root;
        for &i in site {
            if let Op::If(b) = &node.op {
                if i > 0 {
                    match ev.eval(&b[0], &frame, HoleSet::EMPTY, root) {
                        Ok((Value::Bool(c), _)) => {
                            if c != (i == 1) {
                                return SiteCheck::PathNotTaken;
                            }
                        }
                        Ok(_) => return SiteCheck::BadSite,
                        Err(_) => return SiteCheck::Stopped,
                    }
                }
            }
            if let Op::Prim(_, conn, b) = &node.op {
                if *conn != Strictness::Strict && i == 1 {
                    match ev.eval(&b[0], &frame, HoleSet::EMPTY, root) {
                        Ok((Value::Bool(a), _)) => {
                            let short = if *conn == Strictness::Or { a } else { !a };
                            if short {
                                return SiteCheck::PathNotTaken;
                            }
                        }
                        Ok(_) => return SiteCheck::BadSite,
                        Err(_) => return SiteCheck::Stopped,
                    }
                }
            }
            match node.children().get(i as usize) {
                Some(n) => node = n,
                None => return SiteCheck::BadSite,
            }
        }
        // A measure obligation only involves the arguments the measure reads.
        let reads = &f.measure_reads;
        let measured = |j: usize| kind == ViolationKind::Contract || reads.get(j).copied().unwrap_or(true);
        let mut vals = Vec::new();
        for (j, a) in node.children().iter().enumerate() {
            if !measured(j) {
                vals.push(Value::Bool(false));
                continue;
            }
            match ev.eval(a, &frame, HoleSet::EMPTY, root) {
                Ok((v, _)) => vals.push(v),
                Err(_) => return SiteCheck::Stopped,
            }
        }
        match (&node.op, kind) {
            (Op::Prim(pi, Strictness::Strict, _), ViolationKind::Contract) => {
                if theory.by_index(*pi as usize).contract_holds(&vals) {
                    SiteCheck::Holds
                } else {
                    SiteCheck::Violated
                }
            }
            (Op::Call(ci, _), ViolationKind::Measure) if *ci == fi => {
                let before = ev.measure_of(fi, args);
                let after = ev.measure_of(fi, &vals);
                match (before, after) {
                    (Some(b), Some(a)) if a >= 0 && a < b => SiteCheck::Holds,
                    _ => SiteCheck::Violated,
                }
            }
            _ => SiteCheck::BadSite,
        }
    }
}

/// Result of [`Program::check_site`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteCheck {
    Violated,
    Holds,
    PathNotTaken,
    Stopped,
    BadSite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ViolationKind {
    Contract,
    Measure,
}

/// Evaluation resource limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// AST nodes that may be entered.
    pub budget: u64,
    /// Nested calls to defined functions.
    pub max_depth: u32,
}

pub const DEFAULT_BUDGET: u64 = 100_000;

impl Default for Limits {
    fn default() -> Self {
        Limits { budget: DEFAULT_BUDGET, max_depth: 400 }
    }
}

impl Limits {
    pub fn with_budget(budget: u64) -> Self {
        Limits { budget, ..Limits::default() }
    }
}

/// A contract or measure violation located in one invocation of a defined function.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Function whose body contains the violating call; `None` when it is the query itself.
    pub function: Option<Symbol>,
    /// Arguments of that invocation.
    pub args: Vec<Value>,
    /// Child-index path from the body root to the violating call.
    pub site: Vec<u16>,
    /// Holes the violating call depends on (the call itself, or for a measure violation the
    /// recursive arguments the measure reads).
    pub site_holes: HoleSet,
    /// Holes of the `if` conditions on the execution path to the call.
    pub guard_holes: HoleSet,
}

impl Violation {
    pub fn holes(&self) -> HoleSet {
        self.site_holes.union(self.guard_holes)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Ok(Value),
    ContractViolation(Violation),
    MeasureViolation(Violation),
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalOutcome {
    pub result: Outcome,
    /// Holes whose nodes were entered, in any invocation.
    pub trace: HoleSet,
    pub steps: u64,
}

enum Stop {
    Contract(Violation),
    Measure(Violation),
    Budget,
}

struct Frame<'a> {
    func: Option<u32>,
    args: &'a [Value],
    measure: Cell<Option<Option<i64>>>,
}

impl<'a> Frame<'a> {
    fn new(func: Option<u32>, args: &'a [Value]) -> Self {
        Frame { func, args, measure: Cell::new(None) }
    }
}

struct Evaluator<'p> {
    program: &'p Program,
    theory: &'p Theory,
    limits: Limits,
    steps: u64,
    depth: u32,
    trace: HoleSet,
}

type Step = Result<(Value, HoleSet), Stop>;

fn find_path(root: &Node, target: *const Node, path: &mut Vec<u16>) -> bool {
    if std::ptr::eq(root, target) {
        return true;
    }
    for (i, c) in root.children().iter().enumerate() {
        path.push(i as u16);
        if find_path(c, target, path) {
            return true;
        }
        path.pop();
    }
    false
}

impl<'p> Evaluator<'p> {
    fn new(program: &'p Program, theory: &'p Theory, limits: Limits) -> Self {
        Evaluator { program, theory, limits, steps: 0, depth: 0, trace: HoleSet::EMPTY }
    }

    fn finish(self, result: Result<Value, Stop>) -> EvalOutcome {
        let result = match result {
            Ok(v) => Outcome::Ok(v),
            Err(Stop::Contract(v)) => Outcome::ContractViolation(v),
            Err(Stop::Measure(v)) => Outcome::MeasureViolation(v),
            Err(Stop::Budget) => Outcome::BudgetExhausted,
        };
        EvalOutcome { result, trace: self.trace, steps: self.steps }
    }

    fn violation(&self, frame: &Frame<'_>, root: &Node, node: &Node, site: HoleSet, guards: HoleSet) -> Violation {
        let mut path = Vec::new();
        find_path(root, node, &mut path);
        Violation {
            function: frame.func.map(|f| self.program.fns[f as usize].name.clone()),
            args: frame.args.to_vec(),
            site: path,
            site_holes: site,
            guard_holes: guards,
        }
    }

    /// Measure value on `args`; `None` if the measure itself is undefined there.
    fn measure_of(&self, fi: u32, args: &[Value]) -> Option<i64> {
        match &self.program.fns[fi as usize].measure {
            None => Some(0),
            Some(m) => match self.eval_pure(m, args)? {
                Value::Int(i) => Some(i),
                _ => None,
            },
        }
    }

    fn eval_pure(&self, node: &Node, args: &[Value]) -> Option<Value> {
        match &node.op {
            Op::Param(i) => Some(args[*i as usize].clone()),
            Op::Const(v) => Some(v.clone()),
            Op::If(b) => {
                let c = self.eval_pure(&b[0], args)?.as_bool();
                self.eval_pure(if c { &b[1] } else { &b[2] }, args)
            }
            Op::Prim(pi, _, a) => {
                let vals = a.iter().map(|n| self.eval_pure(n, args)).collect::<Option<Vec<_>>>()?;
                let bf = self.theory.by_index(*pi as usize);
                bf.contract_holds(&vals).then(|| (bf.implementation)(&vals))
            }
            Op::Call(..) => None,
        }
    }

    fn enter_call(&mut self, fi: u32, args: &[Value]) -> Step {
        if self.depth >= self.limits.max_depth {
            return Err(Stop::Budget);
        }
        self.depth += 1;
        let f = &self.program.fns[fi as usize];
        let frame = Frame::new(Some(fi), args);
        let r = self.eval(&f.body, &frame, HoleSet::EMPTY, &f.body);
        self.depth -= 1;
        r
    }

    fn eval(&mut self, node: &Node, frame: &Frame<'_>, guards: HoleSet, root: &Node) -> Step {
        self.steps += 1;
        if self.steps > self.limits.budget {
            return Err(Stop::Budget);
        }
        if let Some(h) = node.tag {
            self.trace.insert(h);
        }
        let own = HoleSet::EMPTY.with(node.tag);
        match &node.op {
            Op::Param(i) => Ok((frame.args[*i as usize].clone(), own)),
            Op::Const(v) => Ok((v.clone(), own)),
            Op::If(b) => {
                let (c, cd) = self.eval(&b[0], frame, guards, root)?;
                let branch = if c.as_bool() { &b[1] } else { &b[2] };
                let (v, d) = self.eval(branch, frame, guards.union(cd), root)?;
                Ok((v, own.union(cd).union(d)))
            }
            Op::Prim(pi, Strictness::Strict, args) => {
                let mut vals = Vec::with_capacity(args.len());
                let mut deps = own;
                for a in args.iter() {
                    let (v, d) = self.eval(a, frame, guards, root)?;
                    vals.push(v);
                    deps.union_with(d);
                }
                let bf = self.theory.by_index(*pi as usize);
                if !bf.contract_holds(&vals) {
                    return Err(Stop::Contract(self.violation(frame, root, node, deps, guards)));
                }
                Ok(((bf.implementation)(&vals), deps))
            }
            Op::Prim(_, connective, args) => {
                let (a, da) = self.eval(&args[0], frame, guards, root)?;
                let a = a.as_bool();
                let short = match connective {
                    Strictness::And => (!a).then_some(false),
                    Strictness::Or => a.then_some(true),
                    _ => (!a).then_some(true),
                };
                match short {
                    Some(v) => Ok((Value::Bool(v), own.union(da))),
                    None => {
                        // the right operand only runs because of the left one
                        let (b, db) = self.eval(&args[1], frame, guards.union(da), root)?;
                        Ok((b, own.union(da).union(db)))
                    }
                }
            }
            Op::Call(fi, args) => {
                let mut vals = Vec::with_capacity(args.len());
                let mut deps = own;
                let mut arg_deps = Vec::with_capacity(args.len());
                for a in args.iter() {
                    let (v, d) = self.eval(a, frame, guards, root)?;
                    vals.push(v);
                    deps.union_with(d);
                    arg_deps.push(d);
                }
                if frame.func == Some(*fi) {
                    let before = match frame.measure.get() {
                        Some(m) => m,
                        None => {
                            let m = self.measure_of(*fi, frame.args);
                            frame.measure.set(Some(m));
                            m
                        }
                    };
                    let after = self.measure_of(*fi, &vals);
                    let decreasing = matches!((before, after), (Some(b), Some(a)) if a >= 0 && a < b);
                    if !decreasing {
                        let reads = &self.program.fns[*fi as usize].measure_reads;
                        let site = arg_deps
                            .iter()
                            .zip(reads)
                            .filter(|(_, &r)| r)
                            .fold(own, |acc, (d, _)| acc.union(*d));
                        return Err(Stop::Measure(self.violation(frame, root, node, site, guards)));
                    }
                }
                let (v, d) = self.enter_call(*fi, &vals)?;
                Ok((v, deps.union(d)))
            }
        }
    }
}
