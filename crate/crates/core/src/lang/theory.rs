use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::types::{sym, Symbol, Type};
use super::value::{IntList as List, Value};

pub type ContractFn = Arc<dyn Fn(&[Value]) -> bool + Send + Sync>;
pub type ImplFn = Arc<dyn Fn(&[Value]) -> Value + Send + Sync>;

/// Parameter typing of a background function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Params {
    Fixed(Vec<Type>),
    /// `n` arguments that must all share one (arbitrary) type.
    SameType(usize),
}

impl Params {
    pub fn arity(&self) -> usize {
        match self {
            Params::Fixed(ts) => ts.len(),
            Params::SameType(n) => *n,
        }
    }
}

/// How arguments are evaluated. Connectives evaluate left to right and short-circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strictness {
    Strict,
    And,
    Or,
    Implies,
}

#[derive(Clone)]
pub struct BackgroundFn {
    pub name: Symbol,
    pub params: Params,
    pub ret: Type,
    /// `None` is the tautological contract.
    pub contract: Option<ContractFn>,
    pub implementation: ImplFn,
    pub strictness: Strictness,
}

impl BackgroundFn {
    pub fn new(
        name: &str,
        params: Vec<Type>,
        ret: Type,
        implementation: impl Fn(&[Value]) -> Value + Send + Sync + 'static,
    ) -> Self {
        BackgroundFn {
            name: sym(name),
            params: Params::Fixed(params),
            ret,
            contract: None,
            implementation: Arc::new(implementation),
            strictness: Strictness::Strict,
        }
    }

    pub fn with_contract(mut self, contract: impl Fn(&[Value]) -> bool + Send + Sync + 'static) -> Self {
        self.contract = Some(Arc::new(contract));
        self
    }

    pub fn contract_holds(&self, args: &[Value]) -> bool {
        self.contract.as_ref().is_none_or(|c| c(args))
    }

    /// Result type when applied to arguments of the given types, if well-typed.
    pub fn apply_types(&self, args: &[Type]) -> Option<Type> {
        match &self.params {
            Params::Fixed(ts) => (ts.as_slice() == args).then_some(self.ret),
            Params::SameType(n) => {
                (args.len() == *n && args.windows(2).all(|w| w[0] == w[1])).then_some(self.ret)
            }
        }
    }
}

impl fmt::Debug for BackgroundFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BackgroundFn")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("ret", &self.ret)
            .field("has_contract", &self.contract.is_some())
            .finish()
    }
}

/// Background theory: fixed-semantics function symbols with input contracts.
#[derive(Clone, Debug, Default)]
pub struct Theory {
    fns: Vec<BackgroundFn>,
    index: BTreeMap<Symbol, usize>,
}

impl Theory {
    pub fn empty() -> Self {
        Theory::default()
    }

    pub fn add(&mut self, f: BackgroundFn) {
        match self.index.get(&f.name) {
            Some(&i) => self.fns[i] = f,
            None => {
                self.index.insert(f.name.clone(), self.fns.len());
                self.fns.push(f);
            }
        }
    }

    pub fn alias(&mut self, alias: &str, target: &str) {
        if let Some(&i) = self.index.get(target) {
            self.index.insert(sym(alias), i);
        }
    }

    pub fn get(&self, name: &str) -> Option<&BackgroundFn> {
        self.index.get(name).map(|&i| &self.fns[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn by_index(&self, i: usize) -> &BackgroundFn {
        &self.fns[i]
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.index.keys()
    }
}

fn int(v: &Value) -> i64 {
    v.as_int()
}

fn list(v: &Value) -> &List {
    v.as_list()
}

fn non_empty(args: &[Value]) -> bool {
    !list(&args[0]).is_empty()
}

/// Largest list `repeat` will build.
pub const REPEAT_CAP: i64 = 4096;

/// The standard list/arithmetic theory.
pub fn standard_theory() -> Theory {
    use Type::*;
    let mut t = Theory::empty();

    t.add(BackgroundFn::new("nil", vec![], IntList, |_| Value::List(List::nil())));
    t.add(
        BackgroundFn::new("head", vec![IntList], Int, |a| Value::Int(list(&a[0]).head().unwrap()))
            .with_contract(non_empty),
    );
    t.add(
        BackgroundFn::new("tail", vec![IntList], IntList, |a| Value::List(list(&a[0]).tail().unwrap()))
            .with_contract(non_empty),
    );
    t.add(BackgroundFn::new("cons", vec![Int, IntList], IntList, |a| {
        Value::List(List::cons(int(&a[0]), list(&a[1]).clone()))
    }));
    t.add(BackgroundFn::new("endp", vec![IntList], Bool, |a| Value::Bool(list(&a[0]).is_empty())));
    t.add(BackgroundFn::new("consp", vec![IntList], Bool, |a| Value::Bool(!list(&a[0]).is_empty())));
    t.add(BackgroundFn::new("member", vec![Int, IntList], Bool, |a| {
        let x = int(&a[0]);
        Value::Bool(list(&a[1]).iter().any(|y| y == x))
    }));
    t.add(BackgroundFn::new("len", vec![IntList], Int, |a| Value::Int(list(&a[0]).len() as i64)));
    t.alias("length", "len");
    t.add(BackgroundFn::new("append", vec![IntList, IntList], IntList, |a| {
        let front = list(&a[0]).to_vec();
        let back = list(&a[1]).clone();
        Value::List(front.into_iter().rev().fold(back, |acc, x| List::cons(x, acc)))
    }));
    t.add(BackgroundFn::new("rev", vec![IntList], IntList, |a| {
        Value::List(list(&a[0]).iter().fold(List::nil(), |acc, x| List::cons(x, acc)))
    }));
    t.add(
        BackgroundFn::new("nth", vec![Int, IntList], Int, |a| {
            Value::Int(list(&a[1]).iter().nth(int(&a[0]) as usize).unwrap())
        })
        .with_contract(|a| {
            let i = int(&a[0]);
            i >= 0 && (i as usize) < list(&a[1]).len()
        }),
    );
    t.add(BackgroundFn::new("repeat", vec![Int, Int], IntList, |a| {
        let n = int(&a[1]).clamp(0, REPEAT_CAP);
        Value::List(std::iter::repeat_n(int(&a[0]), n as usize).collect())
    }));

    t.add(BackgroundFn::new("+", vec![Int, Int], Int, |a| Value::Int(int(&a[0]).wrapping_add(int(&a[1])))));
    t.add(BackgroundFn::new("-", vec![Int, Int], Int, |a| Value::Int(int(&a[0]).wrapping_sub(int(&a[1])))));
    t.add(BackgroundFn::new("*", vec![Int, Int], Int, |a| Value::Int(int(&a[0]).wrapping_mul(int(&a[1])))));
    t.add(BackgroundFn::new("min", vec![Int, Int], Int, |a| Value::Int(int(&a[0]).min(int(&a[1])))));
    t.add(BackgroundFn::new("max", vec![Int, Int], Int, |a| Value::Int(int(&a[0]).max(int(&a[1])))));
    t.add(BackgroundFn::new("<", vec![Int, Int], Bool, |a| Value::Bool(int(&a[0]) < int(&a[1]))));
    t.add(BackgroundFn::new("<=", vec![Int, Int], Bool, |a| Value::Bool(int(&a[0]) <= int(&a[1]))));
    t.add(BackgroundFn::new(">", vec![Int, Int], Bool, |a| Value::Bool(int(&a[0]) > int(&a[1]))));
    t.add(BackgroundFn::new(">=", vec![Int, Int], Bool, |a| Value::Bool(int(&a[0]) >= int(&a[1]))));
    t.add(BackgroundFn {
        name: sym("="),
        params: Params::SameType(2),
        ret: Bool,
        contract: None,
        implementation: Arc::new(|a| Value::Bool(a[0] == a[1])),
        strictness: Strictness::Strict,
    });
    t.add(BackgroundFn::new("not", vec![Bool], Bool, |a| Value::Bool(!a[0].as_bool())));
    for (name, strictness) in [("and", Strictness::And), ("or", Strictness::Or), ("=>", Strictness::Implies)] {
        let f = match strictness {
            Strictness::And => |a: &[Value]| Value::Bool(a[0].as_bool() && a[1].as_bool()),
            Strictness::Or => |a: &[Value]| Value::Bool(a[0].as_bool() || a[1].as_bool()),
            _ => |a: &[Value]| Value::Bool(!a[0].as_bool() || a[1].as_bool()),
        };
        let mut bf = BackgroundFn::new(name, vec![Bool, Bool], Bool, f);
        bf.strictness = strictness;
        t.add(bf);
    }
    t.alias("implies", "=>");
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(t: &Theory, f: &str, args: &[Value]) -> Value {
        (t.get(f).unwrap().implementation)(args)
    }

    #[test]
    fn list_primitives() {
        let t = standard_theory();
        assert_eq!(call(&t, "head", &[Value::list(&[1, 2])]), Value::Int(1));
        assert_eq!(call(&t, "endp", &[Value::list(&[])]), Value::Bool(true));
        assert_eq!(call(&t, "append", &[Value::list(&[1]), Value::list(&[2, 3])]), Value::list(&[1, 2, 3]));
        assert_eq!(call(&t, "rev", &[Value::list(&[1, 2, 3])]), Value::list(&[3, 2, 1]));
        assert_eq!(call(&t, "repeat", &[Value::Int(0), Value::Int(-2)]), Value::list(&[]));
        assert_eq!(call(&t, "length", &[Value::list(&[4, 4])]), Value::Int(2));
    }

    #[test]
    fn contracts() {
        let t = standard_theory();
        assert!(!t.get("tail").unwrap().contract_holds(&[Value::list(&[])]));
        assert!(!t.get("head").unwrap().contract_holds(&[Value::list(&[])]));
        assert!(t.get("head").unwrap().contract_holds(&[Value::list(&[0])]));
        assert!(!t.get("nth").unwrap().contract_holds(&[Value::Int(1), Value::list(&[0])]));
        for f in ["cons", "endp", "member", "len", "append", "+", "-", "<", "<=", "=", "and", "or", "not"] {
            assert!(t.get(f).unwrap().contract.is_none(), "{} should be total", f);
        }
    }

    #[test]
    fn polymorphic_equality_typing() {
        let t = standard_theory();
        let eq = t.get("=").unwrap();
        assert_eq!(eq.apply_types(&[Type::IntList, Type::IntList]), Some(Type::Bool));
        assert_eq!(eq.apply_types(&[Type::Int, Type::IntList]), None);
    }
}
