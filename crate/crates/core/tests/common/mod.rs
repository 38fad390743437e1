//! Oracles shared by the integration tests. They deliberately avoid the enumerator and the
//! counterexample generator so they can judge them.
#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;

use recsynth::bench::{parse_benchmark, BenchmarkFile};
use recsynth::grammar::{Grammar, NtId, Rhs};
use recsynth::lang::{Expr, ExprKind, FnDef, Limits, Outcome, Program, Type, Value};
use recsynth::spec::SynthesisInstance;

pub fn bench_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks")
}

pub fn bench_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(bench_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "bench").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

pub fn load(name: &str) -> BenchmarkFile {
    let path = bench_dir().join(format!("{name}.bench"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_benchmark(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Every expression of exactly `size` nodes derivable from `nt`, by direct recursion over
/// the rules.
pub fn derive_exact(g: &Grammar, nt: NtId, size: usize) -> Vec<Expr> {
    let mut out = Vec::new();
    for r in g.rules.iter().filter(|r| r.lhs == nt) {
        match &r.rhs {
            Rhs::Terminal(a) => {
                if size == 1 {
                    out.push(a.clone());
                }
            }
            Rhs::App(f, args) => {
                if size < 1 + args.len() {
                    continue;
                }
                for split in compositions(size - 1, args.len()) {
                    let mut partial: Vec<Vec<Expr>> = vec![Vec::new()];
                    for (a, &s) in args.iter().zip(&split) {
                        let options = derive_exact(g, *a, s);
                        partial = partial
                            .into_iter()
                            .flat_map(|p| {
                                options.iter().map(move |o| {
                                    let mut q = p.clone();
                                    q.push(o.clone());
                                    q
                                })
                            })
                            .collect();
                    }
                    for args in partial {
                        out.push(if &**f == "if" {
                            Expr::ite(args[0].clone(), args[1].clone(), args[2].clone())
                        } else {
                            Expr::call(f, args)
                        });
                    }
                }
            }
        }
    }
    out
}

/// Ordered ways to write `n` as a sum of `k` positive parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All distinct concepts of size at most `bound` derivable from any of `nts`.
pub fn derive_upto(g: &Grammar, nts: &[NtId], bound: usize) -> Vec<Expr> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for s in 1..=bound {
        for nt in nts {
            for e in derive_exact(g, *nt, s) {
                if seen.insert(e.clone()) {
                    out.push(e);
                }
            }
        }
    }
    out
}

pub fn all_values(ty: Type, int_bound: i64, list_len: usize) -> Vec<Value> {
    match ty {
        Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Type::Int => (-int_bound..=int_bound).map(Value::Int).collect(),
        Type::IntList => {
            let mut out = vec![Vec::<i64>::new()];
            let mut frontier = out.clone();
            for _ in 0..list_len {
                let mut next = Vec::new();
                for l in &frontier {
                    for i in -int_bound..=int_bound {
                        let mut m = l.clone();
                        m.push(i);
                        next.push(m);
                    }
                }
                out.extend(next.iter().cloned());
                frontier = next;
            }
            out.into_iter().map(|l| Value::list(&l)).collect()
        }
    }
}

/// Domains per variable; list length is lowered until the product has at most `max` points.
pub fn domains(types: &[Type], int_bound: i64, list_len: usize, max: usize) -> (Vec<Vec<Value>>, usize) {
    let mut l = list_len;
    loop {
        let ds: Vec<Vec<Value>> = types.iter().map(|t| all_values(*t, int_bound, l)).collect();
        let n = ds.iter().map(Vec::len).try_fold(1usize, |acc, x| acc.checked_mul(x));
        match n {
            Some(n) if n <= max || l == 0 => return (ds, l),
            _ => l -= 1,
        }
    }
}

pub fn for_each_assignment(ds: &[Vec<Value>], mut f: impl FnMut(&[Value]) -> bool) -> bool {
    let k = ds.len();
    if ds.iter().any(Vec::is_empty) {
        return true;
    }
    let mut idx = vec![0usize; k];
    let mut cur: Vec<Value> = ds.iter().map(|d| d[0].clone()).collect();
    loop {
        if !f(&cur) {
            return false;
        }
        let mut p = k;
        loop {
            if p == 0 {
                return true;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < ds[p].len() {
                cur[p] = ds[p][idx[p]].clone();
                break;
            }
            idx[p] = 0;
            cur[p] = ds[p][0].clone();
        }
    }
}

/// Brute-force semantic check of a ∀*-instance: every test and every property over the full
/// bounded domain must evaluate to true with no contract or measure violation, and every
/// function must be admissible on its own bounded domain.
pub fn semantic_check(inst: &SynthesisInstance, defs: &[FnDef], int_bound: i64, list_len: usize) -> Result<(), String> {
    const MAX_POINTS: usize = 2_000_000;
    let theory = &inst.theory;
    let program = Program::new(defs, theory).map_err(|e| e.to_string())?;
    let limits = Limits::with_budget(1_000_000);
    let names = inst.fn_names();
    let judge = |out: Outcome, what: &dyn Fn() -> String| -> Result<(), String> {
        match out {
            Outcome::Ok(Value::Bool(true)) => Ok(()),
            other => Err(format!("{}: {:?}", what(), other)),
        }
    };
    for t in &inst.tests {
        let q = program.compile_query(t, &[], theory).map_err(|e| e.to_string())?;
        judge(program.eval_query(theory, &q, &[], limits).result, &|| format!("test {t}"))?;
    }
    for p in &inst.properties {
        let vars = p.vars();
        let q = program.compile_query(&p.matrix, &vars, theory).map_err(|e| e.to_string())?;
        let (ds, _) = domains(&p.var_types(), int_bound, list_len, MAX_POINTS);
        let mut failure = None;
        for_each_assignment(&ds, |a| match judge(program.eval_query(theory, &q, a, limits).result, &|| {
            let shown: Vec<String> = vars.iter().zip(a).map(|(v, x)| format!("({v} {x})")).collect();
            format!("property {p} at {}", shown.join(" "))
        }) {
            Ok(()) => true,
            Err(e) => {
                failure = Some(e);
                false
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    for (f, name) in inst.functions.iter().zip(&names) {
        let types: Vec<Type> = f.params.iter().map(|(_, t)| *t).collect();
        let (ds, _) = domains(&types, int_bound, list_len, MAX_POINTS);
        let mut failure = None;
        for_each_assignment(&ds, |a| match program.call(theory, name, a, limits).result {
            Outcome::Ok(_) => true,
            other => {
                failure = Some(format!("{name} on {a:?}: {other:?}"));
                false
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(())
}

pub fn is_hole_free(e: &Expr) -> bool {
    let mut ok = true;
    e.visit(&mut |n| ok &= !matches!(n.kind, ExprKind::Hole(_)));
    ok
}

/// Pulls every concept of the space.
pub fn drain(mut cs: recsynth::enumerate::ConceptSpace) -> recsynth::enumerate::ConceptSpace {
    while cs.next_event().is_some() {}
    cs
}

pub fn concept_id(cs: &recsynth::enumerate::ConceptSpace, e: &Expr) -> recsynth::enumerate::ConceptId {
    let i = cs.concepts().iter().position(|c| c == e).unwrap_or_else(|| panic!("{e} is not a concept"));
    recsynth::enumerate::ConceptId(i as u32)
}

/// A small random instance for enumeration tests: three typed non-terminals, at most six
/// rules, one function with one or two bodies of at most three holes each, bound 1..=4.
pub struct Tiny {
    pub grammar: Grammar,
    pub functions: Vec<recsynth::sketch::SynthFn>,
    pub bound: usize,
}

pub fn tiny_instance(rng: &mut impl rand::Rng) -> Tiny {
    use rand::seq::SliceRandom;
    use recsynth::grammar::NtSet;
    use recsynth::lang::{sym, HoleId};
    use recsynth::sketch::{Hole, MultiSketch, SketchBody, SynthFn};

    let mut g = Grammar::new();
    let n = g.add_nt("N", Type::Int);
    let l = g.add_nt("L", Type::IntList);
    let b = g.add_nt("B", Type::Bool);
    let mut pool: Vec<Box<dyn Fn(&mut Grammar)>> = vec![
        Box::new(move |g| g.terminal(n, Expr::var("x"))),
        Box::new(move |g| g.terminal(n, Expr::int(0))),
        Box::new(move |g| g.terminal(n, Expr::int(1))),
        Box::new(move |g| g.app(n, "+", &[n, n])),
        Box::new(move |g| g.app(n, "head", &[l])),
        Box::new(move |g| g.app(n, "if", &[b, n, n])),
        Box::new(move |g| g.terminal(l, Expr::var("xs"))),
        Box::new(move |g| g.terminal(l, Expr::nil())),
        Box::new(move |g| g.app(l, "cons", &[n, l])),
        Box::new(move |g| g.app(l, "tail", &[l])),
        Box::new(move |g| g.app(b, "endp", &[l])),
        Box::new(move |g| g.app(b, "<", &[n, n])),
        Box::new(move |g| g.app(b, "not", &[b])),
    ];
    pool.shuffle(rng);
    let k = rng.gen_range(1..=6);
    for add in pool.iter().take(k) {
        add(&mut g);
    }
    let mut next_hole = 0u16;
    let mut bodies = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let mut holes = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let mut nts = NtSet::default();
            while nts.is_empty() {
                for nt in [n, l, b] {
                    if rng.gen_bool(0.4) {
                        nts.insert(nt);
                    }
                }
            }
            let id = HoleId(next_hole);
            next_hole += 1;
            holes.push(Hole { id, name: sym(&format!("h{}", id.0)), nts });
        }
        let skeleton = Expr::call("tuple", holes.iter().map(|h| Expr::hole(h.id)).collect());
        bodies.push(SketchBody { owner: sym("f"), skeleton, holes });
    }
    let f = SynthFn {
        name: sym("f"),
        params: vec![(sym("x"), Type::Int), (sym("xs"), Type::IntList)],
        ret: Type::Int,
        sketch: MultiSketch { owner: sym("f"), bodies },
        measure: None,
    };
    Tiny { grammar: g, functions: vec![f], bound: rng.gen_range(1..=4) }
}
