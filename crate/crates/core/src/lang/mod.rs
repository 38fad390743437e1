//! The object language: types, expressions, values, the background theory and evaluation.

mod expr;
mod program;
mod theory;
mod typecheck;
mod types;
mod value;

pub use expr::{Expr, ExprKind};
pub use program::{
    CompileError, EvalOutcome, FnDef, Limits, Outcome, Program, Query, SiteCheck, Violation, ViolationKind,
    DEFAULT_BUDGET,
};
pub use theory::{standard_theory, BackgroundFn, ContractFn, ImplFn, Params, Strictness, Theory, REPEAT_CAP};
pub use typecheck::{typecheck, TypeEnv, TypeError};
pub use types::{sym, HoleId, HoleSet, Signature, Symbol, Type, MAX_HOLES};
pub use value::{IntList, Value};
