//! The simply typed λ-calculus with n-ary tuples and patterns: syntax, type inference,
//! normal-order normalization, and βη-equality via η-long normal forms.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::{Lexer, Tok};
use crate::parser::ParseError;
use crate::syntax::{fresh, name, Name};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Var(Name),
    Tuple(Vec<Pattern>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LTerm {
    Var(Name),
    /// Integer literals and the operators `+`, `mul`.
    Const(String),
    App(Arc<LTerm>, Arc<LTerm>),
    Lam(Pattern, Arc<LTerm>),
    Tuple(Vec<LTerm>),
    /// `π_i` of an `n`-tuple (0-based), sugar for `(λ(y₁,…,yₙ).y_i) M`.
    Proj(usize, usize, Arc<LTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LType {
    Base(Name),
    Arrow(Arc<LType>, Arc<LType>),
    Product(Vec<LType>),
    /// Inference variable; never present in returned types.
    Var(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LambdaError {
    #[error("normalization did not finish within {0} steps")]
    FuelExhausted(usize),
    #[error("type error: cannot unify {0} with {1}")]
    Mismatch(String, String),
    #[error("type error: infinite type")]
    Occurs,
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("pattern binds `{0}` twice")]
    NonLinearPattern(String),
    #[error("term is not in normal form at base type: {0}")]
    NotNeutral(String),
}

pub fn var(x: &str) -> LTerm {
    LTerm::Var(name(x))
}

pub fn app(f: LTerm, a: LTerm) -> LTerm {
    LTerm::App(Arc::new(f), Arc::new(a))
}

pub fn lam(p: Pattern, b: LTerm) -> LTerm {
    LTerm::Lam(p, Arc::new(b))
}

pub fn pvar(x: &str) -> Pattern {
    Pattern::Var(name(x))
}

pub fn base(b: &str) -> LType {
    LType::Base(name(b))
}

pub fn arrow(a: LType, b: LType) -> LType {
    LType::Arrow(Arc::new(a), Arc::new(b))
}

impl Pattern {
    pub fn vars(&self, out: &mut Vec<Name>) {
        match self {
            Pattern::Var(x) => out.push(x.clone()),
            Pattern::Tuple(ps) => ps.iter().for_each(|p| p.vars(out)),
        }
    }

    fn binds(&self, x: &str) -> bool {
        match self {
            Pattern::Var(y) => &**y == x,
            Pattern::Tuple(ps) => ps.iter().any(|p| p.binds(x)),
        }
    }

    fn rename(&self, m: &HashMap<Name, Name>) -> Pattern {
        match self {
            Pattern::Var(x) => Pattern::Var(m.get(x).cloned().unwrap_or_else(|| x.clone())),
            Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|p| p.rename(m)).collect()),
        }
    }

    /// The pattern read as a term.
    pub fn to_term(&self) -> LTerm {
        match self {
            Pattern::Var(x) => LTerm::Var(x.clone()),
            Pattern::Tuple(ps) => LTerm::Tuple(ps.iter().map(Pattern::to_term).collect()),
        }
    }
}

impl LTerm {
    pub fn size(&self) -> usize {
        match self {
            LTerm::Var(_) | LTerm::Const(_) => 1,
            LTerm::App(f, a) => 1 + f.size() + a.size(),
            LTerm::Lam(_, b) => 1 + b.size(),
            LTerm::Tuple(ts) => 1 + ts.iter().map(LTerm::size).sum::<usize>(),
            LTerm::Proj(_, _, m) => 1 + m.size(),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing

fn print_pattern(p: &Pattern, out: &mut String) {
    match p {
        Pattern::Var(x) => out.push_str(x),
        Pattern::Tuple(ps) => {
            out.push('(');
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                print_pattern(q, out);
            }
            if ps.len() == 1 {
                out.push(',');
            }
            out.push(')');
        }
    }
}

fn print_at(t: &LTerm, prec: u8, out: &mut String) {
    // prec 0: anything; 1: function position; 2: argument position
    match t {
        LTerm::Var(x) => out.push_str(x),
        LTerm::Const(c) => out.push_str(c),
        LTerm::Lam(p, b) => {
            if prec > 0 {
                out.push('(');
            }
            out.push('\\');
            print_pattern(p, out);
            out.push('.');
            print_at(b, 0, out);
            if prec > 0 {
                out.push(')');
            }
        }
        LTerm::App(f, a) => {
            if prec > 1 {
                out.push('(');
            }
            print_at(f, 1, out);
            out.push(' ');
            print_at(a, 2, out);
            if prec > 1 {
                out.push(')');
            }
        }
        LTerm::Proj(i, n, m) => {
            let ys: Vec<Pattern> = (0..*n).map(|k| Pattern::Var(name(&format!("_{}", k + 1)))).collect();
            let sugar = app(lam(Pattern::Tuple(ys), LTerm::Var(name(&format!("_{}", i + 1)))), (**m).clone());
            print_at(&sugar, prec, out);
        }
        LTerm::Tuple(ts) => {
            out.push('(');
            for (i, x) in ts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_at(x, 0, out);
            }
            if ts.len() == 1 {
                out.push(',');
            }
            out.push(')');
        }
    }
}

pub fn print_lambda(t: &LTerm) -> String {
    let mut s = String::new();
    print_at(t, 0, &mut s);
    s
}

impl fmt::Display for LTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_lambda(self))
    }
}

impl fmt::Display for LType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LType::Base(b) => write!(f, "{b}"),
            LType::Var(v) => write!(f, "'t{v}"),
            LType::Arrow(a, b) => {
                if matches!(**a, LType::Arrow(_, _)) {
                    write!(f, "({a}) -> {b}")
                } else {
                    write!(f, "{a} -> {b}")
                }
            }
            LType::Product(ts) if ts.is_empty() => write!(f, "1"),
            LType::Product(ts) => {
                write!(f, "(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

fn parse_pattern(lx: &mut Lexer) -> Result<Pattern, ParseError> {
    if lx.eat("(") {
        let mut ps = Vec::new();
        let mut trailing = false;
        if !lx.eat(")") {
            loop {
                ps.push(parse_pattern(lx)?);
                if lx.eat(",") {
                    if lx.eat(")") {
                        trailing = true;
                        break;
                    }
                    continue;
                }
                lx.expect(")")?;
                break;
            }
        }
        if ps.len() == 1 && !trailing {
            return Ok(ps.pop().expect("one pattern"));
        }
        Ok(Pattern::Tuple(ps))
    } else {
        Ok(Pattern::Var(name(&lx.ident()?)))
    }
}

fn starts_atom(t: &Tok) -> bool {
    matches!(t, Tok::Ident(_) | Tok::Int(_) | Tok::Sym("(") | Tok::Sym("\\") | Tok::Sym("λ") | Tok::Sym("+"))
}

fn parse_term(lx: &mut Lexer) -> Result<LTerm, ParseError> {
    if lx.eat("\\") || lx.eat("λ") {
        let p = parse_pattern(lx)?;
        let mut seen = Vec::new();
        p.vars(&mut seen);
        let uniq: BTreeSet<_> = seen.iter().collect();
        if uniq.len() != seen.len() {
            return Err(lx.error("pattern binds a variable twice", &[]));
        }
        lx.expect(".")?;
        let b = parse_term(lx)?;
        return Ok(lam(p, b));
    }
    let mut t = parse_atom(lx)?;
    while starts_atom(lx.peek()) {
        let a = if matches!(lx.peek(), Tok::Sym("\\") | Tok::Sym("λ")) { parse_term(lx)? } else { parse_atom(lx)? };
        t = app(t, a);
    }
    Ok(t)
}

fn parse_atom(lx: &mut Lexer) -> Result<LTerm, ParseError> {
    match lx.next() {
        Tok::Ident(x) => Ok(LTerm::Var(name(&x))),
        Tok::Int(n) => Ok(LTerm::Const(n.to_string())),
        Tok::Sym("+") => Ok(LTerm::Const("+".into())),
        Tok::Sym("(") => {
            let mut ts = Vec::new();
            let mut trailing = false;
            if !lx.eat(")") {
                loop {
                    ts.push(parse_term(lx)?);
                    if lx.eat(",") {
                        if lx.eat(")") {
                            trailing = true;
                            break;
                        }
                        continue;
                    }
                    lx.expect(")")?;
                    break;
                }
            }
            if ts.len() == 1 && !trailing {
                return Ok(ts.pop().expect("one term"));
            }
            Ok(LTerm::Tuple(ts))
        }
        _ => Err(lx.error("expected a λ-term", &["identifier", "`(`", "`\\`"])),
    }
}

/// Concrete syntax: `\(x,y).M`, juxtaposition for application, `(M,N)` tuples, `()` unit.
pub fn parse_lambda(src: &str) -> Result<LTerm, ParseError> {
    let mut lx = Lexer::new(src)?;
    let t = parse_term(&mut lx)?;
    if !lx.at_eof() {
        return Err(lx.error("unexpected input after term", &["end of input"]));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Free variables and substitution

pub fn free_vars(t: &LTerm) -> BTreeSet<Name> {
    fn go(t: &LTerm, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match t {
            LTerm::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            LTerm::Const(_) => {}
            LTerm::App(f, a) => {
                go(f, bound, out);
                go(a, bound, out);
            }
            LTerm::Lam(p, b) => {
                let n = bound.len();
                p.vars(bound);
                go(b, bound, out);
                bound.truncate(n);
            }
            LTerm::Tuple(ts) => ts.iter().for_each(|x| go(x, bound, out)),
            LTerm::Proj(_, _, m) => go(m, bound, out),
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

fn all_names(t: &LTerm, out: &mut BTreeSet<Name>) {
    match t {
        LTerm::Var(x) => {
            out.insert(x.clone());
        }
        LTerm::Const(_) => {}
        LTerm::App(f, a) => {
            all_names(f, out);
            all_names(a, out);
        }
        LTerm::Lam(p, b) => {
            let mut v = Vec::new();
            p.vars(&mut v);
            out.extend(v);
            all_names(b, out);
        }
        LTerm::Tuple(ts) => ts.iter().for_each(|x| all_names(x, out)),
        LTerm::Proj(_, _, m) => all_names(m, out),
    }
}

/// Simultaneous capture-avoiding substitution.
pub fn subst_many(t: &LTerm, s: &HashMap<Name, LTerm>) -> LTerm {
    if s.is_empty() {
        return t.clone();
    }
    match t {
        LTerm::Var(x) => s.get(x).cloned().unwrap_or_else(|| t.clone()),
        LTerm::Const(_) => t.clone(),
        LTerm::App(f, a) => app(subst_many(f, s), subst_many(a, s)),
        LTerm::Tuple(ts) => LTerm::Tuple(ts.iter().map(|x| subst_many(x, s)).collect()),
        LTerm::Proj(i, n, m) => LTerm::Proj(*i, *n, Arc::new(subst_many(m, s))),
        LTerm::Lam(p, b) => {
            let mut inner: HashMap<Name, LTerm> = s.iter().filter(|(x, _)| !p.binds(x)).map(|(x, v)| (x.clone(), v.clone())).collect();
            if inner.is_empty() {
                return t.clone();
            }
            let fvb = free_vars(b);
            inner.retain(|x, _| fvb.contains(x));
            if inner.is_empty() {
                return t.clone();
            }
            let mut danger = BTreeSet::new();
            for v in inner.values() {
                danger.extend(free_vars(v));
            }
            let mut pv = Vec::new();
            p.vars(&mut pv);
            let mut renaming = HashMap::new();
            let mut avoid = danger.clone();
            all_names(b, &mut avoid);
            for x in &pv {
                if danger.contains(x) {
                    let y = fresh(x, |c| avoid.contains(c) || inner.contains_key(c));
                    avoid.insert(y.clone());
                    renaming.insert(x.clone(), y.clone());
                    inner.insert(x.clone(), LTerm::Var(y));
                }
            }
            lam(p.rename(&renaming), subst_many(b, &inner))
        }
    }
}

fn bind(p: &Pattern, a: &LTerm, out: &mut HashMap<Name, LTerm>) {
    match (p, a) {
        (Pattern::Var(x), _) => {
            out.insert(x.clone(), a.clone());
        }
        (Pattern::Tuple(ps), LTerm::Tuple(ts)) if ps.len() == ts.len() => {
            for (q, t) in ps.iter().zip(ts) {
                bind(q, t, out);
            }
        }
        (Pattern::Tuple(ps), _) => {
            let n = ps.len();
            for (i, q) in ps.iter().enumerate() {
                bind(q, &LTerm::Proj(i, n, Arc::new(a.clone())), out);
            }
        }
    }
}

/// One normal-order step. A tuple pattern applied to a non-tuple binds projections.
fn step(t: &LTerm) -> Option<LTerm> {
    match t {
        LTerm::Var(_) | LTerm::Const(_) => None,
        LTerm::App(f, a) => {
            if let LTerm::Lam(p, b) = &**f {
                let mut s = HashMap::new();
                bind(p, a, &mut s);
                return Some(subst_many(b, &s));
            }
            if let Some(f2) = step(f) {
                return Some(LTerm::App(Arc::new(f2), a.clone()));
            }
            step(a).map(|a2| LTerm::App(f.clone(), Arc::new(a2)))
        }
        LTerm::Proj(i, n, m) => {
            if let LTerm::Tuple(ts) = &**m {
                if ts.len() == *n {
                    return Some(ts[*i].clone());
                }
            }
            step(m).map(|m2| LTerm::Proj(*i, *n, Arc::new(m2)))
        }
        LTerm::Lam(p, b) => step(b).map(|b2| LTerm::Lam(p.clone(), Arc::new(b2))),
        LTerm::Tuple(ts) => {
            for (i, x) in ts.iter().enumerate() {
                if let Some(x2) = step(x) {
                    let mut v = ts.clone();
                    v[i] = x2;
                    return Some(LTerm::Tuple(v));
                }
            }
            None
        }
    }
}

/// β-normal form (pattern β and projections), normal order.
pub fn lambda_normalize(t: &LTerm, fuel: usize) -> Result<LTerm, LambdaError> {
    let mut cur = t.clone();
    for _ in 0..fuel {
        match step(&cur) {
            Some(n) => cur = n,
            None => return Ok(cur),
        }
    }
    Err(LambdaError::FuelExhausted(fuel))
}

/// Alpha-equivalence.
pub fn alpha_eq(a: &LTerm, b: &LTerm) -> bool {
    fn pat(p: &Pattern, q: &Pattern, ea: &mut Vec<Name>, eb: &mut Vec<Name>) -> bool {
        match (p, q) {
            (Pattern::Var(x), Pattern::Var(y)) => {
                ea.push(x.clone());
                eb.push(y.clone());
                true
            }
            (Pattern::Tuple(ps), Pattern::Tuple(qs)) => {
                ps.len() == qs.len() && ps.iter().zip(qs).all(|(p, q)| pat(p, q, ea, eb))
            }
            _ => false,
        }
    }
    fn go(a: &LTerm, b: &LTerm, ea: &mut Vec<Name>, eb: &mut Vec<Name>) -> bool {
        match (a, b) {
            (LTerm::Var(x), LTerm::Var(y)) => {
                let ix = ea.iter().rposition(|v| v == x);
                let iy = eb.iter().rposition(|v| v == y);
                match (ix, iy) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (LTerm::Const(c), LTerm::Const(d)) => c == d,
            (LTerm::App(f, x), LTerm::App(g, y)) => go(f, g, ea, eb) && go(x, y, ea, eb),
            (LTerm::Tuple(xs), LTerm::Tuple(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| go(x, y, ea, eb)),
            (LTerm::Proj(i, n, x), LTerm::Proj(j, m, y)) => i == j && n == m && go(x, y, ea, eb),
            (LTerm::Lam(p, x), LTerm::Lam(q, y)) => {
                let (na, nb) = (ea.len(), eb.len());
                let ok = pat(p, q, ea, eb) && go(x, y, ea, eb);
                ea.truncate(na);
                eb.truncate(nb);
                ok
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

// ---------------------------------------------------------------------------
// Types

pub fn const_type(c: &str) -> Option<LType> {
    if c.parse::<i64>().is_ok() {
        return Some(base("Z"));
    }
    match c {
        "true" | "false" => Some(base("B")),
        "+" | "mul" => Some(arrow(LType::Product(vec![base("Z"), base("Z")]), base("Z"))),
        _ => None,
    }
}

/// Principal typing of a term, with all variables defaulted to the base type `o`.
#[derive(Clone, Debug)]
pub struct LTyping {
    pub ty: LType,
    /// Free variables, in order of first occurrence.
    pub free: Vec<(Name, LType)>,
    /// Types of abstraction patterns, in preorder of abstractions.
    pub lam_types: Vec<LType>,
    /// Types of all subterms.
    pub all: Vec<LType>,
}

#[derive(Default)]
struct LInfer {
    next: u32,
    subst: HashMap<u32, LType>,
    free: Vec<(Name, LType)>,
    lam_types: Vec<LType>,
    all: Vec<LType>,
}

impl LInfer {
    fn fresh(&mut self) -> LType {
        self.next += 1;
        LType::Var(self.next)
    }

    fn resolve(&self, t: &LType) -> LType {
        match t {
            LType::Var(v) => match self.subst.get(v) {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            LType::Base(_) => t.clone(),
            LType::Arrow(a, b) => arrow(self.resolve(a), self.resolve(b)),
            LType::Product(ts) => LType::Product(ts.iter().map(|x| self.resolve(x)).collect()),
        }
    }

    fn occurs(&self, v: u32, t: &LType) -> bool {
        match self.resolve(t) {
            LType::Var(w) => v == w,
            LType::Base(_) => false,
            LType::Arrow(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
            LType::Product(ts) => ts.iter().any(|x| self.occurs(v, x)),
        }
    }

    fn unify(&mut self, a: &LType, b: &LType) -> Result<(), LambdaError> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (LType::Var(x), LType::Var(y)) if x == y => Ok(()),
            (LType::Var(x), t) | (t, LType::Var(x)) => {
                if self.occurs(*x, t) {
                    return Err(LambdaError::Occurs);
                }
                self.subst.insert(*x, t.clone());
                Ok(())
            }
            (LType::Base(x), LType::Base(y)) if x == y => Ok(()),
            (LType::Arrow(a1, b1), LType::Arrow(a2, b2)) => {
                self.unify(a1, a2)?;
                self.unify(b1, b2)
            }
            (LType::Product(xs), LType::Product(ys)) if xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.unify(x, y)?;
                }
                Ok(())
            }
            _ => Err(LambdaError::Mismatch(a.to_string(), b.to_string())),
        }
    }

    fn pattern(&mut self, p: &Pattern, env: &mut Vec<(Name, LType)>) -> LType {
        match p {
            Pattern::Var(x) => {
                let t = self.fresh();
                env.push((x.clone(), t.clone()));
                t
            }
            Pattern::Tuple(ps) => LType::Product(ps.iter().map(|q| self.pattern(q, env)).collect()),
        }
    }

    fn infer(&mut self, env: &mut Vec<(Name, LType)>, t: &LTerm) -> Result<LType, LambdaError> {
        let ty = match t {
            LTerm::Var(x) => match env.iter().rev().find(|(y, _)| y == x) {
                Some((_, ty)) => ty.clone(),
                None => match self.free.iter().find(|(y, _)| y == x) {
                    Some((_, ty)) => ty.clone(),
                    None => {
                        let ty = self.fresh();
                        self.free.push((x.clone(), ty.clone()));
                        ty
                    }
                },
            },
            LTerm::Const(c) => const_type(c).ok_or_else(|| LambdaError::UnknownConstant(c.clone()))?,
            LTerm::App(f, a) => {
                let tf = self.infer(env, f)?;
                let ta = self.infer(env, a)?;
                let r = self.fresh();
                self.unify(&tf, &arrow(ta, r.clone()))?;
                r
            }
            LTerm::Lam(p, b) => {
                let mut seen = Vec::new();
                p.vars(&mut seen);
                for (i, x) in seen.iter().enumerate() {
                    if seen[..i].contains(x) {
                        return Err(LambdaError::NonLinearPattern(x.to_string()));
                    }
                }
                let n = env.len();
                let tp = self.pattern(p, env);
                self.lam_types.push(tp.clone());
                let tb = self.infer(env, b)?;
                env.truncate(n);
                arrow(tp, tb)
            }
            LTerm::Tuple(ts) => {
                let mut v = Vec::new();
                for x in ts {
                    v.push(self.infer(env, x)?);
                }
                LType::Product(v)
            }
            LTerm::Proj(i, n, m) => {
                let tm = self.infer(env, m)?;
                let vs: Vec<LType> = (0..*n).map(|_| self.fresh()).collect();
                self.unify(&tm, &LType::Product(vs.clone()))?;
                vs[*i].clone()
            }
        };
        self.all.push(ty.clone());
        Ok(ty)
    }

    fn ground(&self, t: &LType) -> LType {
        match self.resolve(t) {
            LType::Var(_) => base("o"),
            LType::Base(b) => LType::Base(b),
            LType::Arrow(a, b) => arrow(self.ground(&a), self.ground(&b)),
            LType::Product(ts) => LType::Product(ts.iter().map(|x| self.ground(x)).collect()),
        }
    }
}

/// Infer the principal type; free variables are typed by their uses (or from `ctx`).
pub fn infer_lambda(ctx: &[(Name, LType)], t: &LTerm) -> Result<LTyping, LambdaError> {
    let mut inf = LInfer { free: ctx.to_vec(), ..LInfer::default() };
    let ty = inf.infer(&mut Vec::new(), t)?;
    Ok(LTyping {
        ty: inf.ground(&ty),
        free: inf.free.iter().map(|(x, t)| (x.clone(), inf.ground(t))).collect(),
        lam_types: inf.lam_types.iter().map(|t| inf.ground(t)).collect(),
        all: inf.all.iter().map(|t| inf.ground(t)).collect(),
    })
}

// ---------------------------------------------------------------------------
// η-long normal forms

struct EtaLong {
    fuel: usize,
    counter: usize,
}

impl EtaLong {
    fn fresh_pattern(&mut self, ty: &LType, ctx: &mut Vec<(Name, LType)>) -> Pattern {
        match ty {
            LType::Product(ts) => Pattern::Tuple(ts.iter().map(|t| self.fresh_pattern(t, ctx)).collect()),
            _ => {
                self.counter += 1;
                let x = name(&format!("%{}", self.counter));
                ctx.push((x.clone(), ty.clone()));
                Pattern::Var(x)
            }
        }
    }

    fn long(&mut self, m: &LTerm, ty: &LType, ctx: &mut Vec<(Name, LType)>) -> Result<LTerm, LambdaError> {
        match ty {
            LType::Arrow(a, b) => {
                let n = ctx.len();
                let p = self.fresh_pattern(a, ctx);
                let body = lambda_normalize(&app(m.clone(), p.to_term()), self.fuel)?;
                let r = self.long(&body, b, ctx)?;
                ctx.truncate(n);
                Ok(lam(p, r))
            }
            LType::Product(ts) => {
                let n = ts.len();
                let mut out = Vec::new();
                for (i, t) in ts.iter().enumerate() {
                    let c = lambda_normalize(&LTerm::Proj(i, n, Arc::new(m.clone())), self.fuel)?;
                    out.push(self.long(&c, t, ctx)?);
                }
                Ok(LTerm::Tuple(out))
            }
            _ => Ok(self.neutral(m, ctx)?.0),
        }
    }

    fn neutral(&mut self, m: &LTerm, ctx: &mut Vec<(Name, LType)>) -> Result<(LTerm, LType), LambdaError> {
        match m {
            LTerm::Var(x) => {
                let ty = ctx.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t.clone());
                ty.map(|t| (m.clone(), t)).ok_or_else(|| LambdaError::Unbound(x.to_string()))
            }
            LTerm::Const(c) => Ok((m.clone(), const_type(c).ok_or_else(|| LambdaError::UnknownConstant(c.clone()))?)),
            LTerm::App(f, a) => {
                let (f2, tf) = self.neutral(f, ctx)?;
                let LType::Arrow(ta, tb) = tf else { return Err(LambdaError::NotNeutral(print_lambda(m))) };
                let a2 = self.long(a, &ta, ctx)?;
                Ok((app(f2, a2), (*tb).clone()))
            }
            LTerm::Proj(i, n, f) => {
                let (f2, tf) = self.neutral(f, ctx)?;
                match tf {
                    LType::Product(ts) if ts.len() == *n => Ok((LTerm::Proj(*i, *n, Arc::new(f2)), ts[*i].clone())),
                    _ => Err(LambdaError::NotNeutral(print_lambda(m))),
                }
            }
            _ => Err(LambdaError::NotNeutral(print_lambda(m))),
        }
    }
}

/// β-normal η-long form at `ty`, with free variables typed by `ctx`.
pub fn eta_long(t: &LTerm, ty: &LType, ctx: &[(Name, LType)], fuel: usize) -> Result<LTerm, LambdaError> {
    let nf = lambda_normalize(t, fuel)?;
    let mut e = EtaLong { fuel, counter: 0 };
    e.long(&nf, ty, &mut ctx.to_vec())
}

/// βη-equality at a given type.
pub fn lambda_beta_eta_eq_at(a: &LTerm, b: &LTerm, ty: &LType, ctx: &[(Name, LType)], fuel: usize) -> Result<bool, LambdaError> {
    Ok(alpha_eq(&eta_long(a, ty, ctx, fuel)?, &eta_long(b, ty, ctx, fuel)?))
}

/// βη-equality; both terms are typed together, sharing their free variables.
pub fn lambda_beta_eta_eq(a: &LTerm, b: &LTerm) -> bool {
    let mut inf = LInfer::default();
    let (Ok(ta), Ok(tb)) = (inf.infer(&mut Vec::new(), a), inf.infer(&mut Vec::new(), b)) else {
        return false;
    };
    if inf.unify(&ta, &tb).is_err() {
        return false;
    }
    let ty = inf.ground(&ta);
    let ctx: Vec<(Name, LType)> = inf.free.iter().map(|(x, t)| (x.clone(), inf.ground(t))).collect();
    lambda_beta_eta_eq_at(a, b, &ty, &ctx, 100_000).unwrap_or(false)
}

// ---------------------------------------------------------------------------
// Generation

/// True when no product type nests directly inside another or has a single component.
pub fn flat_products(t: &LType) -> bool {
    match t {
        LType::Base(_) | LType::Var(_) => true,
        LType::Arrow(a, b) => flat_products(a) && flat_products(b),
        LType::Product(ts) => ts.len() != 1 && ts.iter().all(|x| !matches!(x, LType::Product(_)) && flat_products(x)),
    }
}

fn gen_term(rng: &mut impl Rng, budget: usize, scope: &mut Vec<Name>, counter: &mut usize) -> LTerm {
    if budget <= 1 || (budget <= 3 && rng.gen_bool(0.3) && !scope.is_empty()) {
        if scope.is_empty() {
            return LTerm::Var(name("g"));
        }
        return LTerm::Var(scope[rng.gen_range(0..scope.len())].clone());
    }
    match rng.gen_range(0..10) {
        0..=3 => {
            let p = if budget >= 4 && rng.gen_bool(0.3) {
                let k = rng.gen_range(0..=3usize);
                let k = if k == 1 { 2 } else { k };
                Pattern::Tuple(
                    (0..k)
                        .map(|_| {
                            *counter += 1;
                            Pattern::Var(name(&format!("y{counter}")))
                        })
                        .collect(),
                )
            } else {
                *counter += 1;
                Pattern::Var(name(&format!("y{counter}")))
            };
            let n = scope.len();
            p.vars(scope);
            let b = gen_term(rng, budget - 1, scope, counter);
            scope.truncate(n);
            lam(p, b)
        }
        4..=7 if budget >= 3 => {
            let left = rng.gen_range(1..budget - 1);
            let f = gen_term(rng, left, scope, counter);
            let a = gen_term(rng, budget - 1 - left, scope, counter);
            app(f, a)
        }
        8 | 9 if budget >= 3 => {
            let k = if budget >= 4 && rng.gen_bool(0.3) { 3 } else { 2 };
            let each = (budget - 1) / k;
            LTerm::Tuple((0..k).map(|_| gen_term(rng, each.max(1), scope, counter)).collect())
        }
        _ => {
            if scope.is_empty() {
                LTerm::Var(name("g"))
            } else {
                LTerm::Var(scope[rng.gen_range(0..scope.len())].clone())
            }
        }
    }
}

/// A random typable term of size at most `max_size` whose typing has only flat products.
/// Free variables are drawn from `f`, `g`.
pub fn random_lambda(rng: &mut impl Rng, max_size: usize) -> (LTerm, LTyping) {
    loop {
        let mut scope = vec![name("f")];
        let budget = rng.gen_range(1..=max_size);
        let t = gen_term(rng, budget, &mut scope, &mut 0);
        if t.size() > max_size || 2 * t.size() < budget {
            continue;
        }
        if let Ok(ty) = infer_lambda(&[], &t) {
            let flat = flat_products(&ty.ty)
                && ty.all.iter().all(flat_products)
                && ty.lam_types.iter().all(flat_products)
                && ty.free.iter().all(|(_, t)| flat_products(t));
            if flat {
                return (t, ty);
            }
        }
    }
}
