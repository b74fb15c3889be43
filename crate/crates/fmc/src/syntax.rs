//! Terms of the calculus, binding structure, substitution and composition.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::types::SimpleType;

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// A stack location. `Main` is the computation stack, written without annotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Loc {
    Main,
    Named(Name),
}

impl Loc {
    pub fn named(s: &str) -> Loc {
        assert!(!s.is_empty(), "location names are non-empty");
        Loc::Named(name(s))
    }

    pub fn is_main(&self) -> bool {
        matches!(self, Loc::Main)
    }

    /// The annotation as written after `]` or before `<`; empty for the main location.
    pub fn label(&self) -> &str {
        match self {
            Loc::Main => "",
            Loc::Named(n) => n,
        }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Loc::Main => write!(f, "λ"),
            Loc::Named(n) => write!(f, "{n}"),
        }
    }
}

/// Constant symbols. Literals have arity (0,1); operators carry their declared arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstSym {
    Int(i64),
    Bool(bool),
    Op { name: Name, arity_in: usize, arity_out: usize },
}

impl ConstSym {
    pub fn op(name_: &str, arity_in: usize, arity_out: usize) -> ConstSym {
        ConstSym::Op { name: name(name_), arity_in, arity_out }
    }

    pub fn add() -> ConstSym {
        ConstSym::op("+", 2, 1)
    }

    pub fn mul() -> ConstSym {
        ConstSym::op("mul", 2, 1)
    }

    pub fn ite() -> ConstSym {
        ConstSym::op("if", 3, 1)
    }

    /// Built-in operator by its source spelling.
    pub fn builtin(s: &str) -> Option<ConstSym> {
        match s {
            "+" => Some(ConstSym::add()),
            "mul" => Some(ConstSym::mul()),
            "if" => Some(ConstSym::ite()),
            "true" => Some(ConstSym::Bool(true)),
            "false" => Some(ConstSym::Bool(false)),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            ConstSym::Int(n) => n.to_string(),
            ConstSym::Bool(b) => b.to_string(),
            ConstSym::Op { name, .. } => name.to_string(),
        }
    }

    pub fn arity(&self) -> (usize, usize) {
        match self {
            ConstSym::Int(_) | ConstSym::Bool(_) => (0, 1),
            ConstSym::Op { arity_in, arity_out, .. } => (*arity_in, *arity_out),
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, ConstSym::Int(_) | ConstSym::Bool(_))
    }
}

/// `*`, `x.M`, `[N]a.M`, `a<x>.M`, and a constant prefix `c.M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Nil,
    Var(Name, Arc<Term>),
    Push(Arc<Term>, Loc, Arc<Term>),
    Pop(Loc, Name, Option<SimpleType>, Arc<Term>),
    Const(ConstSym, Arc<Term>),
}

pub fn nil() -> Term {
    Term::Nil
}

pub fn var(x: &str, k: Term) -> Term {
    Term::Var(name(x), Arc::new(k))
}

pub fn push(n: Term, a: Loc, k: Term) -> Term {
    Term::Push(Arc::new(n), a, Arc::new(k))
}

pub fn pop(a: Loc, x: &str, k: Term) -> Term {
    Term::Pop(a, name(x), None, Arc::new(k))
}

pub fn cnst(c: ConstSym, k: Term) -> Term {
    Term::Const(c, Arc::new(k))
}

pub fn int(n: i64) -> Term {
    cnst(ConstSym::Int(n), Term::Nil)
}

impl Term {
    pub fn is_nil(&self) -> bool {
        matches!(self, Term::Nil)
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Nil => 1,
            Term::Var(_, k) | Term::Pop(_, _, _, k) | Term::Const(_, k) => 1 + k.size(),
            Term::Push(n, _, k) => 1 + n.size() + k.size(),
        }
    }

    /// The continuation of a prefix, or `None` for `*`.
    pub fn cont(&self) -> Option<&Term> {
        match self {
            Term::Nil => None,
            Term::Var(_, k) | Term::Pop(_, _, _, k) | Term::Const(_, k) | Term::Push(_, _, k) => {
                Some(k)
            }
        }
    }

    /// Replace the continuation of a prefix node.
    pub fn with_cont(&self, k: Term) -> Term {
        match self {
            Term::Nil => k,
            Term::Var(x, _) => Term::Var(x.clone(), Arc::new(k)),
            Term::Push(n, a, _) => Term::Push(n.clone(), a.clone(), Arc::new(k)),
            Term::Pop(a, x, t, _) => Term::Pop(a.clone(), x.clone(), t.clone(), Arc::new(k)),
            Term::Const(c, _) => Term::Const(c.clone(), Arc::new(k)),
        }
    }

    /// Drop all binder annotations.
    pub fn erase(&self) -> Term {
        match self {
            Term::Nil => Term::Nil,
            Term::Var(x, k) => Term::Var(x.clone(), Arc::new(k.erase())),
            Term::Push(n, a, k) => push(n.erase(), a.clone(), k.erase()),
            Term::Pop(a, x, _, k) => Term::Pop(a.clone(), x.clone(), None, Arc::new(k.erase())),
            Term::Const(c, k) => Term::Const(c.clone(), Arc::new(k.erase())),
        }
    }

    pub fn has_consts(&self) -> bool {
        match self {
            Term::Nil => false,
            Term::Const(..) => true,
            Term::Var(_, k) | Term::Pop(_, _, _, k) => k.has_consts(),
            Term::Push(n, _, k) => n.has_consts() || k.has_consts(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::print_term(self))
    }
}

pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    let mut bound = Vec::new();
    fv_into(t, &mut bound, &mut out);
    out
}

fn fv_into(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    let mut cur = t;
    let depth = bound.len();
    loop {
        match cur {
            Term::Nil => break,
            Term::Var(x, k) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
                cur = k;
            }
            Term::Push(n, _, k) => {
                fv_into(n, bound, out);
                cur = k;
            }
            Term::Pop(_, x, _, k) => {
                bound.push(x.clone());
                cur = k;
            }
            Term::Const(_, k) => cur = k,
        }
    }
    bound.truncate(depth);
}

pub fn is_free(x: &str, t: &Term) -> bool {
    match t {
        Term::Nil => false,
        Term::Var(y, k) => &**y == x || is_free(x, k),
        Term::Push(n, _, k) => is_free(x, n) || is_free(x, k),
        Term::Pop(_, y, _, k) => &**y != x && is_free(x, k),
        Term::Const(_, k) => is_free(x, k),
    }
}

pub fn is_closed(t: &Term) -> bool {
    free_vars(t).is_empty()
}

/// Every variable name occurring in the term, free or bound.
pub fn all_names(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Nil => {}
        Term::Var(x, k) => {
            out.insert(x.clone());
            all_names(k, out);
        }
        Term::Push(n, _, k) => {
            all_names(n, out);
            all_names(k, out);
        }
        Term::Pop(_, x, _, k) => {
            out.insert(x.clone());
            all_names(k, out);
        }
        Term::Const(_, k) => all_names(k, out),
    }
}

pub fn locations_of(t: &Term) -> BTreeSet<Loc> {
    let mut out = BTreeSet::new();
    locs_into(t, &mut out);
    out
}

fn locs_into(t: &Term, out: &mut BTreeSet<Loc>) {
    match t {
        Term::Nil => {}
        Term::Var(_, k) | Term::Const(_, k) => locs_into(k, out),
        Term::Push(n, a, k) => {
            out.insert(a.clone());
            locs_into(n, out);
            locs_into(k, out);
        }
        Term::Pop(a, _, _, k) => {
            out.insert(a.clone());
            locs_into(k, out);
        }
    }
}

/// A name based on `base` for which `taken` is false. Deterministic: tries `base_1`, `base_2`, ...
pub fn fresh(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let root = match base.rfind('_') {
        Some(i) if i > 0 && base[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < base.len() => {
            &base[..i]
        }
        _ => base,
    };
    let mut i = 1usize;
    loop {
        let cand = format!("{root}_{i}");
        if !taken(&cand) {
            return name(&cand);
        }
        i += 1;
    }
}

/// Sequential composition `N;M`.
pub fn compose(n: &Term, m: &Term) -> Term {
    if m.is_nil() {
        return n.clone();
    }
    let fvm = free_vars(m);
    compose_with(n, m, &fvm)
}

fn compose_with(n: &Term, m: &Term, fvm: &BTreeSet<Name>) -> Term {
    match n {
        Term::Nil => m.clone(),
        Term::Var(x, k) => Term::Var(x.clone(), Arc::new(compose_with(k, m, fvm))),
        Term::Push(p, a, k) => Term::Push(p.clone(), a.clone(), Arc::new(compose_with(k, m, fvm))),
        Term::Const(c, k) => Term::Const(c.clone(), Arc::new(compose_with(k, m, fvm))),
        Term::Pop(a, x, t, k) => {
            if fvm.contains(x) {
                let fvk = free_vars(k);
                let x2 = fresh(x, |c| fvm.contains(c) || fvk.contains(c));
                let k2 = rename(k, x, &x2);
                Term::Pop(a.clone(), x2, t.clone(), Arc::new(compose_with(&k2, m, fvm)))
            } else {
                Term::Pop(a.clone(), x.clone(), t.clone(), Arc::new(compose_with(k, m, fvm)))
            }
        }
    }
}

/// Rename free occurrences of `x` to `y`; `y` must not be captured in `t`.
pub fn rename(t: &Term, x: &str, y: &Name) -> Term {
    substitute(&Term::Var(y.clone(), Arc::new(Term::Nil)), x, t)
}

/// Capture-avoiding substitution `{P/x}M`.
pub fn substitute(p: &Term, x: &str, m: &Term) -> Term {
    if !is_free(x, m) {
        return m.clone();
    }
    let fvp = free_vars(p);
    subst_with(p, &fvp, x, m)
}

fn subst_with(p: &Term, fvp: &BTreeSet<Name>, x: &str, m: &Term) -> Term {
    if !is_free(x, m) {
        return m.clone();
    }
    match m {
        Term::Nil => Term::Nil,
        Term::Var(y, k) if &**y == x => compose(p, &subst_with(p, fvp, x, k)),
        Term::Var(y, k) => Term::Var(y.clone(), Arc::new(subst_with(p, fvp, x, k))),
        Term::Push(n, a, k) => Term::Push(
            Arc::new(subst_with(p, fvp, x, n)),
            a.clone(),
            Arc::new(subst_with(p, fvp, x, k)),
        ),
        Term::Const(c, k) => Term::Const(c.clone(), Arc::new(subst_with(p, fvp, x, k))),
        Term::Pop(a, y, t, k) => {
            // y == x is excluded by is_free above
            if fvp.contains(y) {
                let fvk = free_vars(k);
                let y2 = fresh(y, |c| fvp.contains(c) || fvk.contains(c) || c == x);
                let k2 = rename(k, y, &y2);
                Term::Pop(a.clone(), y2, t.clone(), Arc::new(subst_with(p, fvp, x, &k2)))
            } else {
                Term::Pop(a.clone(), y.clone(), t.clone(), Arc::new(subst_with(p, fvp, x, k)))
            }
        }
    }
}

/// Nameless representation: bound variables by binder distance, free by name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nameless {
    Nil,
    Bound(usize, Box<Nameless>),
    Free(Name, Box<Nameless>),
    Push(Box<Nameless>, Loc, Box<Nameless>),
    Pop(Loc, Box<Nameless>),
    Const(ConstSym, Box<Nameless>),
}

pub fn nameless(t: &Term) -> Nameless {
    let mut env = Vec::new();
    to_nameless(t, &mut env)
}

fn to_nameless(t: &Term, env: &mut Vec<Name>) -> Nameless {
    match t {
        Term::Nil => Nameless::Nil,
        Term::Var(x, k) => {
            let head = env.iter().rev().position(|y| y == x);
            let rest = Box::new(to_nameless(k, env));
            match head {
                Some(i) => Nameless::Bound(i, rest),
                None => Nameless::Free(x.clone(), rest),
            }
        }
        Term::Push(n, a, k) => {
            let n2 = to_nameless(n, env);
            Nameless::Push(Box::new(n2), a.clone(), Box::new(to_nameless(k, env)))
        }
        Term::Pop(a, x, _, k) => {
            env.push(x.clone());
            let k2 = to_nameless(k, env);
            env.pop();
            Nameless::Pop(a.clone(), Box::new(k2))
        }
        Term::Const(c, k) => Nameless::Const(c.clone(), Box::new(to_nameless(k, env))),
    }
}

/// Alpha-equivalence, ignoring binder annotations.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    nameless(a) == nameless(b)
}

/// Rename every binder to `v0`, `v1`, ... in traversal order, avoiding free names.
pub fn canonical(t: &Term) -> Term {
    let fv = free_vars(t);
    let mut counter = 0usize;
    canon(t, &fv, &mut counter)
}

fn canon(t: &Term, fv: &BTreeSet<Name>, counter: &mut usize) -> Term {
    match t {
        Term::Nil => Term::Nil,
        Term::Var(x, k) => Term::Var(x.clone(), Arc::new(canon(k, fv, counter))),
        Term::Push(n, a, k) => {
            let n2 = canon(n, fv, counter);
            Term::Push(Arc::new(n2), a.clone(), Arc::new(canon(k, fv, counter)))
        }
        Term::Const(c, k) => Term::Const(c.clone(), Arc::new(canon(k, fv, counter))),
        Term::Pop(a, x, ty, k) => {
            let y = loop {
                let cand = format!("v{}", *counter);
                *counter += 1;
                if !fv.contains(cand.as_str()) {
                    break name(&cand);
                }
            };
            let k2 = if &**x == &*y { (**k).clone() } else { rename(k, x, &y) };
            Term::Pop(a.clone(), y, ty.clone(), Arc::new(canon(&k2, fv, counter)))
        }
    }
}

/// Fragment classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragment {
    Sequential,
    Poly,
    Full,
}

pub fn fragment_of(t: &Term) -> Fragment {
    if locations_of(t).iter().all(Loc::is_main) {
        return Fragment::Sequential;
    }
    if poly_shape(t) {
        Fragment::Poly
    } else {
        Fragment::Full
    }
}

fn poly_shape(t: &Term) -> bool {
    match t {
        Term::Nil => true,
        Term::Var(_, k) | Term::Const(_, k) => k.is_nil(),
        Term::Push(n, _, k) => poly_shape(n) && poly_shape(k),
        Term::Pop(_, _, _, k) => poly_shape(k),
    }
}

/// One frame of a head context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    Push(Term, Loc),
    Pop(Loc, Name, Option<SimpleType>),
}

/// A sequence of push and pop frames terminating in a hole.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HeadContext {
    pub frames: Vec<Frame>,
}

impl HeadContext {
    pub fn bound_vars(&self) -> BTreeSet<Name> {
        self.frames
            .iter()
            .filter_map(|f| match f {
                Frame::Pop(_, x, _) => Some(x.clone()),
                Frame::Push(..) => None,
            })
            .collect()
    }

    pub fn locations(&self) -> BTreeSet<Loc> {
        self.frames
            .iter()
            .map(|f| match f {
                Frame::Push(_, a) | Frame::Pop(a, _, _) => a.clone(),
            })
            .collect()
    }

    /// Fill the hole with `m`; binders in the context capture in `m`.
    pub fn plug(&self, m: Term) -> Term {
        self.frames.iter().rev().fold(m, |acc, f| match f {
            Frame::Push(n, a) => push(n.clone(), a.clone(), acc),
            Frame::Pop(a, x, t) => Term::Pop(a.clone(), x.clone(), t.clone(), Arc::new(acc)),
        })
    }

    /// Split off the first `depth` push/pop frames of `t`.
    pub fn decompose(t: &Term, depth: usize) -> Option<(HeadContext, Term)> {
        let mut frames = Vec::with_capacity(depth);
        let mut cur = t;
        for _ in 0..depth {
            match cur {
                Term::Push(n, a, k) => {
                    frames.push(Frame::Push((**n).clone(), a.clone()));
                    cur = k;
                }
                Term::Pop(a, x, ty, k) => {
                    frames.push(Frame::Pop(a.clone(), x.clone(), ty.clone()));
                    cur = k;
                }
                _ => return None,
            }
        }
        Some((HeadContext { frames }, cur.clone()))
    }
}

pub fn plug(h: &HeadContext, m: Term) -> Term {
    h.plug(m)
}

pub fn bound_vars(h: &HeadContext) -> BTreeSet<Name> {
    h.bound_vars()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn names(xs: &[&str]) -> BTreeSet<Name> {
        xs.iter().map(|x| name(x)).collect()
    }

    #[test]
    fn free_vars_examples() {
        assert!(free_vars(&p("*")).is_empty());
        assert_eq!(free_vars(&p("x.[y]")), names(&["x", "y"]));
        assert_eq!(free_vars(&p("<x>.[x].y")), names(&["y"]));
    }

    #[test]
    fn substitution_examples() {
        let pp = p("[1]");
        assert_eq!(substitute(&pp, "x", &Term::Nil), Term::Nil);
        assert!(alpha_eq(&substitute(&pp, "x", &p("x")), &p("[1]")));
        // {y/x}(<y>.[x]) must rename the binder
        let r = substitute(&p("y"), "x", &p("<y>.[x]"));
        assert!(alpha_eq(&r, &p("<z>.[y]")));
        assert!(!alpha_eq(&r, &p("<y>.[y]")));
        assert_eq!(free_vars(&r), names(&["y"]));
    }

    #[test]
    fn substitution_sequences_through_heads() {
        // {[1].[2]/x}(x.x) = [1].[2].[1].[2]
        let r = substitute(&p("[1].[2]"), "x", &p("x.x"));
        assert!(alpha_eq(&r, &p("[1].[2].[1].[2]")));
        let r = substitute(&p("<a>.[a]"), "x", &p("[x].x.<b>"));
        assert!(alpha_eq(&r, &p("[<a>.[a]].<a>.[a].<b>")));
    }

    #[test]
    fn compose_examples() {
        let m = p("<x>.[x]");
        assert_eq!(compose(&Term::Nil, &m), m);
        assert!(alpha_eq(&compose(&m, &Term::Nil), &m));
        assert!(alpha_eq(&compose(&p("[1]"), &m), &p("[1].<x>.[x]")));
        // binder in N must not capture free x of M
        let c = compose(&p("<x>.[x]"), &p("x"));
        assert!(alpha_eq(&c, &p("<y>.[y].x")));
    }

    #[test]
    fn alpha_examples() {
        assert!(alpha_eq(&p("<x>.[x]"), &p("<y>.[y]")));
        assert!(!alpha_eq(&p("<x>.[x]"), &p("<x>.[z]")));
        assert!(alpha_eq(&p("[<x>.x].<f>.f"), &p("[<a>.a].<b>.b")));
        assert!(!alpha_eq(&p("a<x>.[x]"), &p("b<x>.[x]")));
    }

    #[test]
    fn fragments() {
        assert_eq!(fragment_of(&p("<x>.[x]")), Fragment::Sequential);
        assert_eq!(fragment_of(&p("a<x>.[x]b.*")), Fragment::Poly);
        assert_eq!(fragment_of(&p("rnd<x>.[x].c<y>.[y].+.<z>.[z]c")), Fragment::Full);
    }

    #[test]
    fn head_context_plug_decompose() {
        let t = p("[N]a.b<y>.a<x>.*");
        let (h, rest) = HeadContext::decompose(&t, 2).unwrap();
        assert_eq!(h.bound_vars(), names(&["y"]));
        assert_eq!(h.locations().len(), 2);
        assert_eq!(rest, p("a<x>"));
        assert_eq!(h.plug(rest), t);
    }

    #[test]
    fn size_is_positive() {
        assert_eq!(p("*").size(), 1);
        assert_eq!(p("[x].y").size(), 5);
    }
}
