//! The benchmark file format: a sequence of s-expression forms.
//!
//! ```text
//! (name insert)
//! (expect solvable)
//! (size-bound 3)
//! (cgen :int-bound 4 :list-len 4 :samples 200 :budget 100000)
//! (grammar (I :int x (head L)) (L :int-list nil xs (cons I L) (tail L)) (B :bool (endp L)))
//! (synth-fun insert ((x :int) (xs :int-list)) :int-list
//!   :measure (len xs)
//!   :sketch ((if ?h1 ?h2 (cons ?h3 (insert ?h4 ?h5))))
//!   :holes ((?h1 B) (?h2 L) (?h3 I) (?h4 I) (?h5 L)))
//! (property (forall ((x :int) (xs :int-list)) (member x (insert x xs))))
//! (test (= (insert 3 (list 1 2)) (list 1 2 3)))
//! ```
//!
//! Existential binders carry their witness sketch:
//! `(exists ((s :int-list :sketch (...) :holes (...) :measure m)) ...)`. Expressions accept
//! `(list e ...)` and n-ary `and`/`or` as sugar.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::cgen::CgenConfig;
use crate::grammar::{Grammar, NtSet, Rhs};
use crate::lang::{standard_theory, Expr, HoleId, Symbol, Type};
use crate::sexpr::{read_all, Pos, ReadError, Sexp};
use crate::sketch::{Hole, MultiSketch, SketchBody, SynthFn};
use crate::skolem::reduce_instance;
use crate::spec::{Binder, InstanceError, Property, Quant, SynthesisInstance, WitnessSketch};

/// Optional overrides of the counterexample generator defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CgenOverrides {
    pub int_bound: Option<i64>,
    pub list_len: Option<usize>,
    pub samples: Option<usize>,
    pub budget: Option<u64>,
    pub exhaustive_cap: Option<usize>,
}

impl CgenOverrides {
    pub fn apply(&self, mut cfg: CgenConfig) -> CgenConfig {
        if let Some(v) = self.int_bound {
            cfg.int_bound = v;
        }
        if let Some(v) = self.list_len {
            cfg.list_len = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.budget {
            cfg.budget = v;
        }
        if let Some(v) = self.exhaustive_cap {
            cfg.exhaustive_cap = v;
        }
        cfg
    }

    fn is_empty(&self) -> bool {
        *self == CgenOverrides::default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Meta {
    pub name: Option<String>,
    pub expect_solvable: bool,
    pub cgen: CgenOverrides,
}

impl Default for Meta {
    fn default() -> Self {
        Meta { name: None, expect_solvable: true, cgen: CgenOverrides::default() }
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkFile {
    pub instance: SynthesisInstance,
    pub meta: Meta,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("{0}")]
    Read(#[from] ReadError),
    #[error("{pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<InstanceError>),
}

fn err<T>(s: &Sexp, msg: impl Into<String>) -> Result<T, BenchError> {
    Err(BenchError::Syntax { pos: s.pos(), msg: msg.into() })
}

fn atom<'a>(s: &'a Sexp, what: &str) -> Result<&'a str, BenchError> {
    s.as_atom().map_or_else(|| err(s, format!("expected {what}")), Ok)
}

fn list<'a>(s: &'a Sexp, what: &str) -> Result<&'a [Sexp], BenchError> {
    s.as_list().map_or_else(|| err(s, format!("expected {what}")), Ok)
}

fn ty(s: &Sexp) -> Result<Type, BenchError> {
    let a = atom(s, "a type")?;
    Type::from_keyword(a).map_or_else(|| err(s, format!("unknown type `{a}`")), Ok)
}

fn int<T: std::str::FromStr>(s: &Sexp) -> Result<T, BenchError> {
    atom(s, "a number")?.parse().or_else(|_| err(s, "expected a number"))
}

/// Splits `:key value` pairs.
fn keywords(items: &[Sexp]) -> Result<Vec<(&str, &Sexp)>, BenchError> {
    let mut out = Vec::new();
    let mut it = items.iter();
    while let Some(k) = it.next() {
        let key = atom(k, "a :keyword")?;
        if !key.starts_with(':') {
            return err(k, format!("expected a :keyword, found `{key}`"));
        }
        match it.next() {
            Some(v) => out.push((key, v)),
            None => return err(k, format!("`{key}` has no value")),
        }
    }
    Ok(out)
}

#[derive(Default)]
struct Parser {
    grammar: Grammar,
    holes: HashMap<String, (HoleId, NtSet)>,
    next_hole: u16,
}

impl Parser {
    fn expr(&self, s: &Sexp) -> Result<Expr, BenchError> {
        match s {
            Sexp::Str(..) => err(s, "strings are not expressions"),
            Sexp::Atom(a, _) => Ok(match a.as_str() {
                "true" => Expr::boolean(true),
                "false" => Expr::boolean(false),
                "nil" => Expr::nil(),
                h if h.starts_with('?') => match self.holes.get(&h[1..]) {
                    Some((id, _)) => Expr::hole(*id),
                    None => return err(s, format!("undeclared hole `{h}`")),
                },
                a => match a.parse::<i64>() {
                    Ok(i) => Expr::int(i),
                    Err(_) => Expr::var(a),
                },
            }),
            Sexp::List(items, _) => {
                let Some((head, args)) = items.split_first() else { return err(s, "empty form") };
                let f = atom(head, "a function symbol")?;
                let args = args.iter().map(|a| self.expr(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(match f {
                    "if" => {
                        let [c, t, e]: [Expr; 3] = args.try_into().or_else(|_| err(s, "`if` takes 3 arguments"))?;
                        Expr::ite(c, t, e)
                    }
                    "list" => args.into_iter().rev().fold(Expr::nil(), |acc, x| Expr::call("cons", vec![x, acc])),
                    "and" | "or" if args.len() != 2 => {
                        let mut rev = args.into_iter().rev();
                        match rev.next() {
                            None => Expr::boolean(f == "and"),
                            Some(last) => rev.fold(last, |acc, x| Expr::call(f, vec![x, acc])),
                        }
                    }
                    _ => Expr::call(f, args),
                })
            }
        }
    }

    fn grammar(&mut self, forms: &[&Sexp]) -> Result<(), BenchError> {
        let mut entries = Vec::new();
        for form in forms {
            for nt in &list(form, "a grammar form")?[1..] {
                let parts = list(nt, "a non-terminal definition (NAME :type alternatives...)")?;
                if parts.len() < 2 {
                    return err(nt, "non-terminal needs a name and a type");
                }
                let name = atom(&parts[0], "a non-terminal name")?;
                if self.grammar.nt(name).is_some() {
                    return err(&parts[0], format!("non-terminal `{name}` defined twice"));
                }
                self.grammar.add_nt(name, ty(&parts[1])?);
                entries.push((name, &parts[2..]));
            }
        }
        for (name, alts) in entries {
            let lhs = self.grammar.nt(name).unwrap();
            for alt in alts {
                match alt {
                    Sexp::Atom(a, _) => {
                        if self.grammar.nt(a).is_some() {
                            return err(alt, format!("unit production `{name} -> {a}` is not supported"));
                        }
                        self.grammar.terminal(lhs, self.expr(alt)?);
                    }
                    Sexp::List(items, _) if !items.is_empty() => {
                        let f = atom(&items[0], "a function symbol")?;
                        let mut args = Vec::new();
                        for a in &items[1..] {
                            let n = atom(a, "a non-terminal")?;
                            match self.grammar.nt(n) {
                                Some(id) => args.push(id),
                                None => return err(a, format!("unknown non-terminal `{n}`")),
                            }
                        }
                        self.grammar.app(lhs, f, &args);
                    }
                    _ => return err(alt, "expected a terminal or an application (f NT ...)"),
                }
            }
        }
        Ok(())
    }

    fn declare_holes(&mut self, s: &Sexp) -> Result<Vec<HoleId>, BenchError> {
        let mut ids = Vec::new();
        for h in list(s, "a list of hole declarations")? {
            let parts = list(h, "a hole declaration (?name NT ...)")?;
            let Some((name, nts)) = parts.split_first() else { return err(h, "empty hole declaration") };
            let name = atom(name, "a hole name")?;
            let Some(name) = name.strip_prefix('?') else { return err(h, "hole names start with `?`") };
            if self.holes.contains_key(name) {
                return err(h, format!("hole `?{name}` declared twice"));
            }
            if nts.is_empty() {
                return err(h, format!("hole `?{name}` has no non-terminal"));
            }
            let mut set = NtSet::default();
            for n in nts {
                let n_name = atom(n, "a non-terminal")?;
                match self.grammar.nt(n_name) {
                    Some(id) => set.insert(id),
                    None => return err(n, format!("unknown non-terminal `{n_name}`")),
                }
            }
            let id = HoleId(self.next_hole);
            self.next_hole += 1;
            self.holes.insert(name.to_string(), (id, set));
            ids.push(id);
        }
        Ok(ids)
    }

    /// Parses `:sketch`, `:holes` and `:measure` options for a function owned by `owner`.
    fn sketch(
        &mut self,
        owner: &Symbol,
        at: &Sexp,
        opts: &[(&str, &Sexp)],
    ) -> Result<(Vec<SketchBody>, Option<Expr>), BenchError> {
        let mut sketch = None;
        let mut measure = None;
        let mut declared = Vec::new();
        for (k, v) in opts {
            match *k {
                ":holes" => declared = self.declare_holes(v)?,
                ":sketch" => sketch = Some(*v),
                ":measure" => measure = Some(*v),
                _ => return err(v, format!("unknown option `{k}`")),
            }
        }
        let Some(sketch) = sketch else { return err(at, format!("`{owner}` has no :sketch")) };
        let names: HashMap<HoleId, &str> =
            self.holes.iter().filter(|(_, (id, _))| declared.contains(id)).map(|(n, (id, _))| (*id, n.as_str())).collect();
        let mut bodies = Vec::new();
        let mut used = Vec::new();
        for b in list(sketch, "a list of sketch bodies")? {
            let skeleton = self.expr(b)?;
            let mut holes = Vec::new();
            for h in skeleton.hole_refs() {
                let Some(name) = names.get(&h) else {
                    return err(b, format!("hole {h} is not declared for `{owner}`"));
                };
                if used.contains(&h) {
                    return err(b, format!("hole `?{name}` is used more than once"));
                }
                used.push(h);
                holes.push(Hole { id: h, name: (*name).into(), nts: self.holes[*name].1 });
            }
            bodies.push(SketchBody { owner: owner.clone(), skeleton, holes });
        }
        if let Some(unused) = declared.iter().find(|h| !used.contains(h)) {
            return err(at, format!("hole `?{}` of `{owner}` does not occur in any body", names[unused]));
        }
        let measure = measure.map(|m| self.expr(m)).transpose()?;
        Ok((bodies, measure))
    }

    fn synth_fun(&mut self, s: &Sexp) -> Result<SynthFn, BenchError> {
        let items = list(s, "synth-fun")?;
        if items.len() < 4 {
            return err(s, "expected (synth-fun NAME ((param :type) ...) :type options...)");
        }
        let name: Symbol = atom(&items[1], "a function name")?.into();
        let mut params = Vec::new();
        for p in list(&items[2], "a parameter list")? {
            let pv = list(p, "a parameter (name :type)")?;
            if pv.len() != 2 {
                return err(p, "expected (name :type)");
            }
            params.push((Symbol::from(atom(&pv[0], "a parameter name")?), ty(&pv[1])?));
        }
        let ret = ty(&items[3])?;
        let opts = keywords(&items[4..])?;
        let (bodies, measure) = self.sketch(&name, s, &opts)?;
        Ok(SynthFn { name: name.clone(), params, ret, sketch: MultiSketch { owner: name, bodies }, measure })
    }

    fn property(&mut self, s: &Sexp) -> Result<Property, BenchError> {
        let items = list(s, "property")?;
        if items.len() != 2 {
            return err(s, "expected (property FORMULA)");
        }
        let mut prefix = Vec::new();
        let mut cur = &items[1];
        loop {
            let quant = match cur.head() {
                Some("forall") => Quant::Forall,
                Some("exists") => Quant::Exists,
                _ => break,
            };
            let parts = list(cur, "a quantified formula")?;
            if parts.len() != 3 {
                return err(cur, "expected (forall|exists (bindings...) body)");
            }
            for b in list(&parts[1], "a binding list")? {
                let bv = list(b, "a binding (var :type ...)")?;
                if bv.len() < 2 {
                    return err(b, "expected (var :type ...)");
                }
                let var: Symbol = atom(&bv[0], "a variable")?.into();
                let t = ty(&bv[1])?;
                let opts = keywords(&bv[2..])?;
                let witness = match quant {
                    Quant::Forall if !opts.is_empty() => return err(b, "universal binders take no options"),
                    Quant::Forall => None,
                    Quant::Exists if opts.is_empty() => return err(b, format!("existential `{var}` has no :sketch")),
                    Quant::Exists => {
                        let (bodies, measure) = self.sketch(&var, b, &opts)?;
                        Some(WitnessSketch { bodies, measure })
                    }
                };
                prefix.push(Binder { quant, var, ty: t, witness });
            }
            cur = &parts[2];
        }
        Ok(Property { prefix, matrix: self.expr(cur)? })
    }
}

/// Parses one hole-free expression in benchmark syntax.
pub fn parse_expr(text: &str) -> Result<Expr, BenchError> {
    match read_all(text)?.as_slice() {
        [one] => Parser::default().expr(one),
        _ => Err(BenchError::Syntax { pos: Pos { line: 1, col: 1 }, msg: "expected exactly one expression".into() }),
    }
}

/// Parses and validates a benchmark.
pub fn parse_benchmark(text: &str) -> Result<BenchmarkFile, BenchError> {
    let forms = read_all(text)?;
    if forms.is_empty() {
        return Err(BenchError::Syntax { pos: Pos { line: 1, col: 1 }, msg: "empty benchmark".into() });
    }
    let mut p = Parser::default();
    let mut meta = Meta::default();
    let grammar_forms: Vec<&Sexp> = forms.iter().filter(|f| f.head() == Some("grammar")).collect();
    p.grammar(&grammar_forms)?;
    let mut functions = Vec::new();
    let mut properties = Vec::new();
    let mut tests = Vec::new();
    let mut size_bound = None;
    for f in &forms {
        let items = list(f, "a top-level form")?;
        match f.head() {
            Some("grammar") => {}
            Some("name") if items.len() == 2 => meta.name = Some(atom(&items[1], "a name")?.to_string()),
            Some("expect") if items.len() == 2 => {
                meta.expect_solvable = match atom(&items[1], "solvable or unsolvable")? {
                    "solvable" => true,
                    "unsolvable" => false,
                    _ => return err(&items[1], "expected solvable or unsolvable"),
                }
            }
            Some("size-bound") if items.len() == 2 => size_bound = Some(int::<usize>(&items[1])?),
            Some("cgen") => {
                for (k, v) in keywords(&items[1..])? {
                    match k {
                        ":int-bound" => meta.cgen.int_bound = Some(int(v)?),
                        ":list-len" => meta.cgen.list_len = Some(int(v)?),
                        ":samples" => meta.cgen.samples = Some(int(v)?),
                        ":budget" => meta.cgen.budget = Some(int(v)?),
                        ":exhaustive-cap" => meta.cgen.exhaustive_cap = Some(int(v)?),
                        _ => return err(v, format!("unknown cgen option `{k}`")),
                    }
                }
            }
            Some("synth-fun") => functions.push(p.synth_fun(f)?),
            Some("property") => properties.push(p.property(f)?),
            Some("test") if items.len() == 2 => tests.push(p.expr(&items[1])?),
            Some(h) => return err(f, format!("unknown or malformed form `{h}`")),
            None => return err(f, "expected a top-level form"),
        }
    }
    if functions.is_empty() {
        return Err(BenchError::Syntax { pos: forms[0].pos(), msg: "no synth-fun".into() });
    }
    let instance = SynthesisInstance {
        name: meta.name.clone().unwrap_or_else(|| functions[0].name.to_string()),
        theory: standard_theory(),
        grammar: p.grammar,
        functions,
        properties,
        tests,
        size_bound: size_bound.unwrap_or(3),
    };
    instance.validate().map_err(BenchError::Invalid)?;
    let reduced = reduce_instance(&instance)
        .map_err(|e| BenchError::Invalid(vec![InstanceError::Other(e.to_string())]))?;
    reduced.validate().map_err(BenchError::Invalid)?;
    Ok(BenchmarkFile { instance, meta })
}

fn print_expr(e: &Expr, names: &HashMap<HoleId, Symbol>) -> String {
    e.display_with(|h| format!("?{}", names.get(&h).map_or_else(|| h.0.to_string(), |n| n.to_string()))).to_string()
}

fn print_sketch(out: &mut String, bodies: &[SketchBody], measure: &Option<Expr>, g: &Grammar, names: &HashMap<HoleId, Symbol>) {
    if let Some(m) = measure {
        let _ = write!(out, " :measure {m}");
    }
    out.push_str(" :sketch (");
    for (i, b) in bodies.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&print_expr(&b.skeleton, names));
    }
    out.push_str(") :holes (");
    let holes: Vec<&Hole> = bodies.iter().flat_map(|b| &b.holes).collect();
    for (i, h) in holes.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "(?{}", h.name);
        for n in h.nts.iter() {
            let _ = write!(out, " {}", g.nt_name(n));
        }
        out.push(')');
    }
    out.push(')');
}

/// Renders a benchmark in the file format; parsing the result gives back the same instance.
pub fn print_benchmark(b: &BenchmarkFile) -> String {
    let inst = &b.instance;
    let names: HashMap<HoleId, Symbol> = inst.all_holes().into_iter().collect();
    let mut out = String::new();
    let _ = writeln!(out, "(name {})", inst.name);
    if !b.meta.expect_solvable {
        out.push_str("(expect unsolvable)\n");
    }
    let _ = writeln!(out, "(size-bound {})", inst.size_bound);
    if !b.meta.cgen.is_empty() {
        out.push_str("(cgen");
        let c = &b.meta.cgen;
        let opts: [(&str, Option<String>); 5] = [
            (":int-bound", c.int_bound.map(|v| v.to_string())),
            (":list-len", c.list_len.map(|v| v.to_string())),
            (":samples", c.samples.map(|v| v.to_string())),
            (":budget", c.budget.map(|v| v.to_string())),
            (":exhaustive-cap", c.exhaustive_cap.map(|v| v.to_string())),
        ];
        for (k, v) in opts {
            if let Some(v) = v {
                let _ = write!(out, " {k} {v}");
            }
        }
        out.push_str(")\n");
    }
    let g = &inst.grammar;
    out.push_str("(grammar");
    for (i, nt) in g.nts.iter().enumerate() {
        let _ = write!(out, "\n  ({} {}", nt.name, nt.ty.keyword());
        for r in g.rules.iter().filter(|r| r.lhs.0 as usize == i) {
            match &r.rhs {
                Rhs::Terminal(a) => {
                    let _ = write!(out, " {a}");
                }
                Rhs::App(f, args) => {
                    let _ = write!(out, " ({f}");
                    for a in args {
                        let _ = write!(out, " {}", g.nt_name(*a));
                    }
                    out.push(')');
                }
            }
        }
        out.push(')');
    }
    out.push_str(")\n");
    for f in &inst.functions {
        let _ = write!(out, "(synth-fun {} (", f.name);
        for (i, (p, t)) in f.params.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "({} {})", p, t.keyword());
        }
        let _ = write!(out, ") {}\n ", f.ret.keyword());
        print_sketch(&mut out, &f.sketch.bodies, &f.measure, g, &names);
        out.push_str(")\n");
    }
    for p in &inst.properties {
        out.push_str("(property ");
        let mut closes = 0;
        let mut i = 0;
        while i < p.prefix.len() {
            let q = p.prefix[i].quant;
            let _ = write!(out, "({} (", if q == Quant::Forall { "forall" } else { "exists" });
            let mut first = true;
            while i < p.prefix.len() && p.prefix[i].quant == q {
                let b = &p.prefix[i];
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "({} {}", b.var, b.ty.keyword());
                if let Some(w) = &b.witness {
                    print_sketch(&mut out, &w.bodies, &w.measure, g, &names);
                }
                out.push(')');
                i += 1;
            }
            out.push_str(") ");
            closes += 1;
        }
        out.push_str(&print_expr(&p.matrix, &names));
        out.push_str(&")".repeat(closes));
        out.push_str(")\n");
    }
    for t in &inst.tests {
        let _ = writeln!(out, "(test {})", print_expr(t, &names));
    }
    out
}
