use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use super::types::{HoleId, HoleSet, Symbol};

/// Expression node. `tag` records the hole a node was substituted from, if any.
///
/// Equality and hashing are structural and ignore provenance tags.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub tag: Option<HoleId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Var(Symbol),
    Int(i64),
    Bool(bool),
    Nil,
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(Symbol, Vec<Expr>),
    /// Reference to a sketch hole; only valid inside skeletons.
    Hole(HoleId),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state)
    }
}

impl From<ExprKind> for Expr {
    fn from(kind: ExprKind) -> Self {
        Expr { kind, tag: None }
    }
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        ExprKind::Var(name.into()).into()
    }

    pub fn int(v: i64) -> Expr {
        ExprKind::Int(v).into()
    }

    pub fn boolean(v: bool) -> Expr {
        ExprKind::Bool(v).into()
    }

    pub fn nil() -> Expr {
        ExprKind::Nil.into()
    }

    pub fn hole(h: HoleId) -> Expr {
        ExprKind::Hole(h).into()
    }

    pub fn call(f: &str, args: Vec<Expr>) -> Expr {
        ExprKind::Call(f.into(), args).into()
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Expr {
        ExprKind::If(Box::new(c), Box::new(t), Box::new(e)).into()
    }

    pub fn is_atom(&self) -> bool {
        !matches!(self.kind, ExprKind::If(..) | ExprKind::Call(..))
    }

    /// Children in evaluation position order (`if` yields cond, then, else).
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::If(c, t, e) => vec![c, t, e],
            ExprKind::Call(_, args) => args.iter().collect(),
            _ => Vec::new(),
        }
    }

    /// Expression size: 1 for atoms, 1 + sum of children otherwise (`if` counts as a 3-ary call).
    pub fn size(&self) -> usize {
        match &self.kind {
            ExprKind::If(c, t, e) => 1 + c.size() + t.size() + e.size(),
            ExprKind::Call(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match &self.kind {
            ExprKind::Var(v) => {
                out.insert(v.clone());
            }
            _ => self.children().into_iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn called_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let ExprKind::Call(f, _) = &e.kind {
                out.insert(f.clone());
            }
        });
        out
    }

    /// Holes referenced by `Hole` nodes, in document (pre-)order.
    pub fn hole_refs(&self) -> Vec<HoleId> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let ExprKind::Hole(h) = e.kind {
                out.push(h);
            }
        });
        out
    }

    /// Every provenance tag appearing in the tree.
    pub fn tags(&self) -> HoleSet {
        let mut out = HoleSet::EMPTY;
        self.visit(&mut |e| {
            if let Some(h) = e.tag {
                out.insert(h);
            }
        });
        out
    }

    pub fn visit<F: FnMut(&Expr)>(&self, f: &mut F) {
        f(self);
        match &self.kind {
            ExprKind::If(c, t, e) => {
                c.visit(f);
                t.visit(f);
                e.visit(f);
            }
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            _ => {}
        }
    }

    /// Returns a copy with every node tagged by `h`.
    pub fn tagged(&self, h: HoleId) -> Expr {
        let kind = match &self.kind {
            ExprKind::If(c, t, e) => {
                ExprKind::If(Box::new(c.tagged(h)), Box::new(t.tagged(h)), Box::new(e.tagged(h)))
            }
            ExprKind::Call(f, args) => ExprKind::Call(f.clone(), args.iter().map(|a| a.tagged(h)).collect()),
            k => k.clone(),
        };
        Expr { kind, tag: Some(h) }
    }

    pub fn untagged(&self) -> Expr {
        let kind = match &self.kind {
            ExprKind::If(c, t, e) => {
                ExprKind::If(Box::new(c.untagged()), Box::new(t.untagged()), Box::new(e.untagged()))
            }
            ExprKind::Call(f, args) => ExprKind::Call(f.clone(), args.iter().map(Expr::untagged).collect()),
            k => k.clone(),
        };
        kind.into()
    }

    /// Substitutes every free occurrence of variable `name` by `by`.
    pub fn subst_var(&self, name: &str, by: &Expr) -> Expr {
        match &self.kind {
            ExprKind::Var(v) if &**v == name => by.clone(),
            ExprKind::If(c, t, e) => Expr {
                kind: ExprKind::If(
                    Box::new(c.subst_var(name, by)),
                    Box::new(t.subst_var(name, by)),
                    Box::new(e.subst_var(name, by)),
                ),
                tag: self.tag,
            },
            ExprKind::Call(f, args) => Expr {
                kind: ExprKind::Call(f.clone(), args.iter().map(|a| a.subst_var(name, by)).collect()),
                tag: self.tag,
            },
            _ => self.clone(),
        }
    }

    /// Renames calls to function symbol `from` into `to`.
    pub fn rename_fn(&self, from: &str, to: &Symbol) -> Expr {
        match &self.kind {
            ExprKind::If(c, t, e) => Expr {
                kind: ExprKind::If(
                    Box::new(c.rename_fn(from, to)),
                    Box::new(t.rename_fn(from, to)),
                    Box::new(e.rename_fn(from, to)),
                ),
                tag: self.tag,
            },
            ExprKind::Call(f, args) => {
                let f = if &**f == from { to.clone() } else { f.clone() };
                Expr {
                    kind: ExprKind::Call(f, args.iter().map(|a| a.rename_fn(from, to)).collect()),
                    tag: self.tag,
                }
            }
            _ => self.clone(),
        }
    }

    /// Follows a child-index path from this node.
    pub fn at_path(&self, path: &[u16]) -> Option<&Expr> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i as usize)?;
        }
        Some(cur)
    }

    /// Renders with holes printed through `hole_name`.
    pub fn display_with<'a, F>(&'a self, hole_name: F) -> impl fmt::Display + 'a
    where
        F: Fn(HoleId) -> String + 'a,
    {
        WithHoles { expr: self, hole_name }
    }
}

struct WithHoles<'a, F> {
    expr: &'a Expr,
    hole_name: F,
}

impl<F: Fn(HoleId) -> String> fmt::Display for WithHoles<'_, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self.expr, f, &self.hole_name)
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>, hole_name: &dyn Fn(HoleId) -> String) -> fmt::Result {
    match &e.kind {
        ExprKind::Var(v) => f.write_str(v),
        ExprKind::Int(i) => write!(f, "{}", i),
        ExprKind::Bool(true) => f.write_str("true"),
        ExprKind::Bool(false) => f.write_str("false"),
        ExprKind::Nil => f.write_str("nil"),
        ExprKind::Hole(h) => f.write_str(&hole_name(*h)),
        ExprKind::If(c, t, el) => {
            f.write_str("(if ")?;
            write_expr(c, f, hole_name)?;
            f.write_str(" ")?;
            write_expr(t, f, hole_name)?;
            f.write_str(" ")?;
            write_expr(el, f, hole_name)?;
            f.write_str(")")
        }
        ExprKind::Call(name, args) => {
            write!(f, "({}", name)?;
            for a in args {
                f.write_str(" ")?;
                write_expr(a, f, hole_name)?;
            }
            f.write_str(")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f, &|h: HoleId| format!("?{}", h.0))
    }
}
