//! A call-by-value λ-calculus with input/output, global store and probabilistic and
//! non-deterministic choice; its encoding into the calculus, and a reference interpreter.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::{Lexer, Tok};
use crate::machine::{run, DeltaRegistry, Memory, RunError, Stack};
use crate::parser::ParseError;
use crate::syntax::{cnst, compose, fresh, int, name, push, substitute, ConstSym, Loc, Name, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CbvTerm {
    Var(Name),
    Int(i64),
    App(Arc<CbvTerm>, Arc<CbvTerm>),
    Lam(Name, Arc<CbvTerm>),
    Read,
    /// `write N; M`
    Write(Arc<CbvTerm>, Arc<CbvTerm>),
    /// `c := N; M`
    Assign(Name, Arc<CbvTerm>, Arc<CbvTerm>),
    /// `!c`
    Deref(Name),
    /// `N (+) M`
    ProbSum(Arc<CbvTerm>, Arc<CbvTerm>),
    /// `N + M`
    NondetSum(Arc<CbvTerm>, Arc<CbvTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CbvError {
    #[error("cell `{0}` is not declared")]
    UndeclaredCell(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("applied a non-function")]
    NotAFunction,
    #[error("read from exhausted input")]
    InputExhausted,
    #[error("the `{0}` oracle stream is exhausted")]
    OracleExhausted(&'static str),
    #[error("cell `{0}` holds no value")]
    EmptyCell(String),
    #[error("evaluation did not finish within {0} steps")]
    FuelExhausted(usize),
}

pub fn cell_names(t: &CbvTerm) -> BTreeSet<Name> {
    fn go(t: &CbvTerm, out: &mut BTreeSet<Name>) {
        match t {
            CbvTerm::Var(_) | CbvTerm::Int(_) | CbvTerm::Read => {}
            CbvTerm::Deref(c) => {
                out.insert(c.clone());
            }
            CbvTerm::Assign(c, n, m) => {
                out.insert(c.clone());
                go(n, out);
                go(m, out);
            }
            CbvTerm::Lam(_, m) => go(m, out),
            CbvTerm::App(a, b) | CbvTerm::Write(a, b) | CbvTerm::ProbSum(a, b) | CbvTerm::NondetSum(a, b) => {
                go(a, out);
                go(b, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut out);
    out
}

fn var_names(t: &CbvTerm, out: &mut BTreeSet<Name>) {
    match t {
        CbvTerm::Var(x) => {
            out.insert(x.clone());
        }
        CbvTerm::Lam(x, m) => {
            out.insert(x.clone());
            var_names(m, out);
        }
        CbvTerm::Int(_) | CbvTerm::Read | CbvTerm::Deref(_) => {}
        CbvTerm::Assign(_, n, m) => {
            var_names(n, out);
            var_names(m, out);
        }
        CbvTerm::App(a, b) | CbvTerm::Write(a, b) | CbvTerm::ProbSum(a, b) | CbvTerm::NondetSum(a, b) => {
            var_names(a, out);
            var_names(b, out);
        }
    }
}

// ---------------------------------------------------------------------------
// Printing and parsing

fn print_at(t: &CbvTerm, prec: u8, out: &mut String) {
    // 0: anything, 1: operand of a sum, 2: function position, 3: argument
    let wrap = |p: u8, out: &mut String, f: &dyn Fn(&mut String)| {
        if prec > p {
            out.push('(');
        }
        f(out);
        if prec > p {
            out.push(')');
        }
    };
    match t {
        CbvTerm::Var(x) => out.push_str(x),
        CbvTerm::Int(n) => out.push_str(&n.to_string()),
        CbvTerm::Read => out.push_str("read"),
        CbvTerm::Deref(c) => {
            out.push('!');
            out.push_str(c);
        }
        CbvTerm::Lam(x, m) => wrap(0, out, &|o| {
            o.push('\\');
            o.push_str(x);
            o.push('.');
            print_at(m, 0, o);
        }),
        CbvTerm::Write(n, m) => wrap(0, out, &|o| {
            o.push_str("write ");
            print_at(n, 1, o);
            o.push_str("; ");
            print_at(m, 0, o);
        }),
        CbvTerm::Assign(c, n, m) => wrap(0, out, &|o| {
            o.push_str(c);
            o.push_str(" := ");
            print_at(n, 1, o);
            o.push_str("; ");
            print_at(m, 0, o);
        }),
        CbvTerm::ProbSum(n, m) | CbvTerm::NondetSum(n, m) => wrap(1, out, &|o| {
            print_at(n, 1, o);
            o.push_str(if matches!(t, CbvTerm::ProbSum(..)) { " (+) " } else { " + " });
            print_at(m, 2, o);
        }),
        CbvTerm::App(f, a) => wrap(2, out, &|o| {
            print_at(f, 2, o);
            o.push(' ');
            print_at(a, 3, o);
        }),
    }
}

impl fmt::Display for CbvTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        print_at(self, 0, &mut s);
        f.write_str(&s)
    }
}

fn parse_term(lx: &mut Lexer) -> Result<CbvTerm, ParseError> {
    if lx.eat("\\") || lx.eat("λ") {
        let x = name(&lx.ident()?);
        lx.expect(".")?;
        return Ok(CbvTerm::Lam(x, Arc::new(parse_term(lx)?)));
    }
    if matches!(lx.peek(), Tok::Ident(w) if w == "write") {
        lx.next();
        let n = parse_sum(lx)?;
        lx.expect(";")?;
        let m = parse_term(lx)?;
        return Ok(CbvTerm::Write(Arc::new(n), Arc::new(m)));
    }
    if matches!(lx.peek(), Tok::Ident(_)) && matches!(lx.peek2(), Tok::Sym(":=")) {
        let c = name(&lx.ident()?);
        lx.next();
        let n = parse_sum(lx)?;
        lx.expect(";")?;
        let m = parse_term(lx)?;
        return Ok(CbvTerm::Assign(c, Arc::new(n), Arc::new(m)));
    }
    parse_sum(lx)
}

fn parse_sum(lx: &mut Lexer) -> Result<CbvTerm, ParseError> {
    let mut t = parse_app(lx)?;
    loop {
        if lx.eat("(+)") {
            t = CbvTerm::ProbSum(Arc::new(t), Arc::new(parse_app(lx)?));
        } else if lx.eat("+") {
            t = CbvTerm::NondetSum(Arc::new(t), Arc::new(parse_app(lx)?));
        } else {
            return Ok(t);
        }
    }
}

fn starts_atom(t: &Tok) -> bool {
    match t {
        Tok::Ident(w) => w != "write",
        Tok::Int(_) | Tok::Sym("(") | Tok::Sym("!") | Tok::Sym("\\") | Tok::Sym("λ") => true,
        _ => false,
    }
}

fn parse_app(lx: &mut Lexer) -> Result<CbvTerm, ParseError> {
    let mut t = parse_atom(lx)?;
    while starts_atom(lx.peek()) {
        let a = if matches!(lx.peek(), Tok::Sym("\\") | Tok::Sym("λ")) { parse_term(lx)? } else { parse_atom(lx)? };
        t = CbvTerm::App(Arc::new(t), Arc::new(a));
    }
    Ok(t)
}

fn parse_atom(lx: &mut Lexer) -> Result<CbvTerm, ParseError> {
    match lx.peek().clone() {
        Tok::Ident(w) if w == "read" => {
            lx.next();
            Ok(CbvTerm::Read)
        }
        Tok::Ident(x) => {
            lx.next();
            Ok(CbvTerm::Var(name(&x)))
        }
        Tok::Int(n) => {
            lx.next();
            Ok(CbvTerm::Int(n))
        }
        Tok::Sym("!") => {
            lx.next();
            Ok(CbvTerm::Deref(name(&lx.ident()?)))
        }
        Tok::Sym("(") => {
            lx.next();
            let t = parse_term(lx)?;
            lx.expect(")")?;
            Ok(t)
        }
        Tok::Sym("\\") | Tok::Sym("λ") => parse_term(lx),
        _ => Err(lx.error("expected a term", &["identifier", "integer", "`read`", "`!`", "`(`", "`\\`"])),
    }
}

/// Syntax: `\x.M`, `M N`, `read`, `write N; M`, `c := N; M`, `!c`, `N (+) M`, `N + M`.
pub fn parse_cbv(src: &str) -> Result<CbvTerm, ParseError> {
    let mut lx = Lexer::new(src)?;
    let t = parse_term(&mut lx)?;
    if !lx.at_eof() {
        return Err(lx.error("unexpected input after term", &["end of input"]));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Encoding

pub fn loc_in() -> Loc {
    Loc::named("in")
}

pub fn loc_out() -> Loc {
    Loc::named("out")
}

pub fn loc_rnd() -> Loc {
    Loc::named("rnd")
}

pub fn loc_nd() -> Loc {
    Loc::named("nd")
}

struct Encoder<'a> {
    cells: &'a BTreeSet<Name>,
    taken: BTreeSet<Name>,
}

impl Encoder<'_> {
    fn fresh(&mut self, base: &str) -> Name {
        let x = fresh(base, |c| self.taken.contains(c));
        self.taken.insert(x.clone());
        x
    }

    fn cell(&self, c: &Name) -> Result<Loc, CbvError> {
        if self.cells.contains(c) {
            Ok(Loc::Named(c.clone()))
        } else {
            Err(CbvError::UndeclaredCell(c.to_string()))
        }
    }

    fn sum(&mut self, stream: Loc, n: &CbvTerm, m: &CbvTerm) -> Result<Term, CbvError> {
        let x = self.fresh("b");
        let k = self.fresh("k");
        let (n, m) = (self.val(n)?, self.val(m)?);
        let call = Term::Pop(Loc::Main, k.clone(), None, Arc::new(Term::Var(k, Arc::new(Term::Nil))));
        let choose = cnst(ConstSym::ite(), call);
        let body = push(n, Loc::Main, push(m, Loc::Main, push(Term::Var(x.clone(), Arc::new(Term::Nil)), Loc::Main, choose)));
        Ok(Term::Pop(stream, x, None, Arc::new(body)))
    }

    fn val(&mut self, t: &CbvTerm) -> Result<Term, CbvError> {
        Ok(match t {
            CbvTerm::Var(x) => push(Term::Var(x.clone(), Arc::new(Term::Nil)), Loc::Main, Term::Nil),
            CbvTerm::Int(n) => push(int(*n), Loc::Main, Term::Nil),
            CbvTerm::Lam(x, m) => push(Term::Pop(Loc::Main, x.clone(), None, Arc::new(self.val(m)?)), Loc::Main, Term::Nil),
            CbvTerm::App(m, n) => {
                let x = self.fresh("f");
                let call = Term::Pop(Loc::Main, x.clone(), None, Arc::new(Term::Var(x, Arc::new(Term::Nil))));
                let (nv, mv) = (self.val(n)?, self.val(m)?);
                compose(&nv, &compose(&mv, &call))
            }
            CbvTerm::Read => {
                let x = self.fresh("r");
                Term::Pop(loc_in(), x.clone(), None, Arc::new(push(Term::Var(x, Arc::new(Term::Nil)), Loc::Main, Term::Nil)))
            }
            CbvTerm::Deref(c) => {
                let a = self.cell(c)?;
                let x = self.fresh("y");
                let xv = || Term::Var(x.clone(), Arc::new(Term::Nil));
                Term::Pop(a.clone(), x.clone(), None, Arc::new(push(xv(), a, push(xv(), Loc::Main, Term::Nil))))
            }
            CbvTerm::Write(n, m) => {
                let x = self.fresh("w");
                let nv = self.val(n)?;
                let mv = self.val(m)?;
                let tail = Term::Pop(Loc::Main, x.clone(), None, Arc::new(push(Term::Var(x, Arc::new(Term::Nil)), loc_out(), mv)));
                compose(&nv, &tail)
            }
            CbvTerm::Assign(c, n, m) => {
                let a = self.cell(c)?;
                let x = self.fresh("v");
                let old = self.fresh("old");
                let nv = self.val(n)?;
                let mv = self.val(m)?;
                let set = Term::Pop(a.clone(), old, None, Arc::new(push(Term::Var(x.clone(), Arc::new(Term::Nil)), a, mv)));
                compose(&nv, &Term::Pop(Loc::Main, x, None, Arc::new(set)))
            }
            CbvTerm::ProbSum(n, m) => self.sum(loc_rnd(), n, m)?,
            CbvTerm::NondetSum(n, m) => self.sum(loc_nd(), n, m)?,
        })
    }
}

/// The value encoding. Cells must be among `cells`; `None` declares every cell used.
pub fn encode_cbv_with(t: &CbvTerm, cells: Option<&[&str]>) -> Result<Term, CbvError> {
    let declared: BTreeSet<Name> = match cells {
        Some(cs) => cs.iter().map(|c| name(c)).collect(),
        None => cell_names(t),
    };
    let mut taken = BTreeSet::new();
    var_names(t, &mut taken);
    let mut e = Encoder { cells: &declared, taken };
    e.val(t)
}

/// The value encoding, declaring every cell the term uses.
pub fn encode_cbv(t: &CbvTerm) -> Term {
    encode_cbv_with(t, None).expect("all cells declared")
}

// ---------------------------------------------------------------------------
// Reference interpreter

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CbvValue {
    Int(i64),
    Closure(Name, Arc<CbvTerm>, Env),
}

pub type Env = Vec<(Name, CbvValue)>;

/// Inputs, oracle streams (first element read first), and the store.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CbvWorld {
    pub input: VecDeque<CbvValue>,
    pub rnd: VecDeque<bool>,
    pub nd: VecDeque<bool>,
    pub store: BTreeMap<Name, CbvValue>,
    pub output: Vec<CbvValue>,
}

struct Eval<'a> {
    w: &'a mut CbvWorld,
    fuel: usize,
    limit: usize,
}

impl Eval<'_> {
    fn eval(&mut self, t: &CbvTerm, env: &Env) -> Result<CbvValue, CbvError> {
        if self.fuel == 0 {
            return Err(CbvError::FuelExhausted(self.limit));
        }
        self.fuel -= 1;
        match t {
            CbvTerm::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| CbvError::Unbound(x.to_string())),
            CbvTerm::Int(n) => Ok(CbvValue::Int(*n)),
            CbvTerm::Lam(x, m) => Ok(CbvValue::Closure(x.clone(), m.clone(), env.clone())),
            CbvTerm::App(m, n) => {
                let arg = self.eval(n, env)?;
                match self.eval(m, env)? {
                    CbvValue::Closure(x, body, mut e) => {
                        e.push((x, arg));
                        self.eval(&body, &e)
                    }
                    CbvValue::Int(_) => Err(CbvError::NotAFunction),
                }
            }
            CbvTerm::Read => self.w.input.pop_front().ok_or(CbvError::InputExhausted),
            CbvTerm::Write(n, m) => {
                let v = self.eval(n, env)?;
                self.w.output.push(v);
                self.eval(m, env)
            }
            CbvTerm::Assign(c, n, m) => {
                let v = self.eval(n, env)?;
                match self.w.store.get_mut(c) {
                    Some(slot) => *slot = v,
                    None => return Err(CbvError::EmptyCell(c.to_string())),
                }
                self.eval(m, env)
            }
            CbvTerm::Deref(c) => self.w.store.get(c).cloned().ok_or_else(|| CbvError::EmptyCell(c.to_string())),
            CbvTerm::ProbSum(n, m) => {
                let b = self.w.rnd.pop_front().ok_or(CbvError::OracleExhausted("rnd"))?;
                self.eval(if b { n } else { m }, env)
            }
            CbvTerm::NondetSum(n, m) => {
                let b = self.w.nd.pop_front().ok_or(CbvError::OracleExhausted("nd"))?;
                self.eval(if b { n } else { m }, env)
            }
        }
    }
}

/// Big-step call-by-value evaluation; the argument of an application is evaluated first.
pub fn eval_cbv(t: &CbvTerm, w: &mut CbvWorld, fuel: usize) -> Result<CbvValue, CbvError> {
    Eval { w, fuel, limit: fuel }.eval(t, &Vec::new())
}

/// The machine term a value corresponds to: a literal, or the encoded body with its
/// environment substituted.
pub fn value_term(v: &CbvValue) -> Term {
    match v {
        CbvValue::Int(n) => int(*n),
        CbvValue::Closure(x, body, env) => {
            let mut b = encode_cbv(body);
            let fv = crate::syntax::free_vars(&b);
            let mut seen = BTreeSet::new();
            for (y, val) in env.iter().rev() {
                if y != x && fv.contains(y) && seen.insert(y.clone()) {
                    b = substitute(&value_term(val), y, &b);
                }
            }
            Term::Pop(Loc::Main, x.clone(), None, Arc::new(b))
        }
    }
}

/// The machine memory corresponding to a world: stream heads on top, one item per cell.
pub fn world_memory(w: &CbvWorld) -> Memory {
    let mut m = Memory::new();
    let stack = |items: Vec<Term>| Stack::new(items.into_iter().rev().collect());
    let bools = |bs: &VecDeque<bool>| stack(bs.iter().map(|b| cnst(ConstSym::Bool(*b), Term::Nil)).collect());
    m.set(loc_in(), stack(w.input.iter().map(value_term).collect()));
    m.set(loc_rnd(), bools(&w.rnd));
    m.set(loc_nd(), bools(&w.nd));
    for (c, v) in &w.store {
        m.set(Loc::Named(c.clone()), Stack::new(vec![value_term(v)]));
    }
    m
}

/// Outcome of comparing the machine run of the encoding with the reference interpreter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CbvAgreement {
    Agree,
    /// The reference interpreter did not produce a value; nothing to compare.
    Skipped(CbvError),
    Disagree(String),
}

/// Run both semantics from `w` and compare results, outputs and final store.
pub fn compare_with_reference(t: &CbvTerm, w: &CbvWorld, fuel: usize) -> CbvAgreement {
    let mut rw = w.clone();
    let v = match eval_cbv(t, &mut rw, fuel) {
        Ok(v) => v,
        Err(e) => return CbvAgreement::Skipped(e),
    };
    let term = encode_cbv(t);
    let res = match run(&world_memory(w), &term, &DeltaRegistry::default(), fuel * 50) {
        Ok(r) => r.memory,
        Err(RunError::Stuck { reason, .. }) => return CbvAgreement::Disagree(format!("machine stuck: {reason}")),
        Err(RunError::FuelExhausted { .. }) => return CbvAgreement::Disagree("machine fuel exhausted".into()),
    };
    let same = |a: &Term, b: &Term| crate::syntax::alpha_eq(a, b);
    let main = res.stack(&Loc::Main).items();
    if main.len() != 1 || !same(&main[0], &value_term(&v)) {
        return CbvAgreement::Disagree(format!("result: machine {main:?}, reference {v:?}"));
    }
    let out = res.stack(&loc_out()).items();
    let expected: Vec<Term> = rw.output.iter().map(value_term).collect();
    if out.len() != expected.len() || !out.iter().zip(&expected).all(|(a, b)| same(a, b)) {
        return CbvAgreement::Disagree("output stream differs".into());
    }
    for (c, val) in &rw.store {
        let s = res.stack(&Loc::Named(c.clone())).items();
        if s.len() != 1 || !same(&s[0], &value_term(val)) {
            return CbvAgreement::Disagree(format!("cell {c} differs"));
        }
    }
    CbvAgreement::Agree
}

// ---------------------------------------------------------------------------
// Generation

fn gen(rng: &mut impl Rng, budget: usize, scope: &mut Vec<Name>, cells: &[Name]) -> CbvTerm {
    let leaf = |rng: &mut dyn rand::RngCore, scope: &Vec<Name>| -> CbvTerm {
        match rng.gen_range(0..4) {
            0 if !scope.is_empty() => CbvTerm::Var(scope[rng.gen_range(0..scope.len())].clone()),
            1 if !cells.is_empty() => CbvTerm::Deref(cells[rng.gen_range(0..cells.len())].clone()),
            2 => CbvTerm::Read,
            _ => CbvTerm::Int(rng.gen_range(0..4)),
        }
    };
    if budget <= 1 {
        return leaf(rng, scope);
    }
    let arc = Arc::new;
    match rng.gen_range(0..12) {
        0 | 1 => {
            let x = name(&format!("x{}", scope.len()));
            scope.push(x.clone());
            let b = gen(rng, budget - 1, scope, cells);
            scope.pop();
            // apply immediately so the program produces a first-order result more often
            let arg = gen(rng, budget / 3 + 1, scope, cells);
            CbvTerm::App(arc(CbvTerm::Lam(x, arc(b))), arc(arg))
        }
        2 | 3 => {
            let x = name(&format!("x{}", scope.len()));
            scope.push(x.clone());
            let b = gen(rng, budget - 1, scope, cells);
            scope.pop();
            CbvTerm::Lam(x, arc(b))
        }
        4 | 5 => {
            let l = rng.gen_range(1..budget);
            CbvTerm::App(arc(gen(rng, l, scope, cells)), arc(gen(rng, budget - l, scope, cells)))
        }
        6 | 7 => {
            let l = rng.gen_range(1..budget);
            CbvTerm::Write(arc(gen(rng, l, scope, cells)), arc(gen(rng, budget - l, scope, cells)))
        }
        8 if !cells.is_empty() => {
            let c = cells[rng.gen_range(0..cells.len())].clone();
            let l = rng.gen_range(1..budget);
            CbvTerm::Assign(c, arc(gen(rng, l, scope, cells)), arc(gen(rng, budget - l, scope, cells)))
        }
        9 => {
            let l = rng.gen_range(1..budget);
            CbvTerm::ProbSum(arc(gen(rng, l, scope, cells)), arc(gen(rng, budget - l, scope, cells)))
        }
        10 => {
            let l = rng.gen_range(1..budget);
            CbvTerm::NondetSum(arc(gen(rng, l, scope, cells)), arc(gen(rng, budget - l, scope, cells)))
        }
        _ => leaf(rng, scope),
    }
}

/// A random closed program over `cells`, with a world to run it in.
pub fn random_cbv(rng: &mut impl Rng, size: usize, cells: &[&str]) -> (CbvTerm, CbvWorld) {
    let cells: Vec<Name> = cells.iter().map(|c| name(c)).collect();
    let budget = rng.gen_range(1..=size);
    let t = gen(rng, budget, &mut Vec::new(), &cells);
    let w = CbvWorld {
        input: (0..4).map(|_| CbvValue::Int(rng.gen_range(0..10))).collect(),
        rnd: (0..8).map(|_| rng.gen_bool(0.5)).collect(),
        nd: (0..8).map(|_| rng.gen_bool(0.5)).collect(),
        store: cells.iter().map(|c| (c.clone(), CbvValue::Int(rng.gen_range(0..10)))).collect(),
        output: Vec::new(),
    };
    (t, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_term, print_term};
    use crate::reduction::{normalize, Strategy};
    use crate::syntax::alpha_eq;

    fn c(s: &str) -> CbvTerm {
        parse_cbv(s).unwrap()
    }

    #[test]
    fn table_rows() {
        assert_eq!(print_term(&encode_cbv(&c("x"))), "[x]");
        assert!(alpha_eq(&encode_cbv(&c("\\x.x")), &parse_term("[<x>.[x]]").unwrap()));
        assert!(alpha_eq(&encode_cbv(&c("read")), &parse_term("in<x>.[x]").unwrap()));
        assert!(alpha_eq(&encode_cbv(&c("!c")), &parse_term("c<x>.[x]c.[x]").unwrap()));
        assert!(alpha_eq(&encode_cbv(&c("write x; y")), &parse_term("[x].<w>.[w]out.[y]").unwrap()));
        assert!(alpha_eq(&encode_cbv(&c("c := x; y")), &parse_term("[x].<v>.c<o>.[v]c.[y]").unwrap()));
        assert!(alpha_eq(&encode_cbv(&c("f x")), &parse_term("[x].[f].<g>.g").unwrap()));
        assert!(alpha_eq(&encode_cbv(&c("x (+) y")), &parse_term("rnd<b>.[[x]].[[y]].[b].if.<k>.k").unwrap()));
        assert!(alpha_eq(&encode_cbv(&c("x + y")), &parse_term("nd<b>.[[x]].[[y]].[b].if.<k>.k").unwrap()));
        assert_eq!(encode_cbv_with(&c("!d"), Some(&["c"])), Err(CbvError::UndeclaredCell("d".into())));
    }

    #[test]
    fn worked_example() {
        let t = c("(\\f. f (f 0)) (\\x. write x; !c)");
        let e = encode_cbv(&t);
        // the table gives [arg].[<f>.body].<k>.k for the outer application; the displayed
        // term is that after its first beta step
        let outer = parse_term("[<x>.[x].<v>.[v]out.c<y>.[y]c.[y]].[<f>.[0].[f].<z>.z.[f].<w>.w].<k>.k").unwrap();
        assert!(alpha_eq(&e, &outer), "{}", print_term(&e));
        let shown = parse_term("[<x>.[x].<v>.[v]out.c<y>.[y]c.[y]].<f>.[0].[f].<z>.z.[f].<w>.w").unwrap();
        let g = crate::reduction::reduction_graph(&e, 10_000, false).unwrap();
        let first: Vec<&Term> = g.successors(g.root).map(|j| &g.nodes[j]).collect();
        assert!(first.iter().any(|t| alpha_eq(t, &shown)));
        let target = parse_term("[0]out.c<y>.[y]out.[y]c.[y]").unwrap();
        for t in [&e, &shown] {
            let nf = normalize(t, Strategy::LeftmostOutermost, 1000, false).unwrap();
            assert!(alpha_eq(&nf.term, &target), "{}", print_term(&nf.term));
        }
    }

    #[test]
    fn parse_print_round_trip() {
        for s in ["\\x.write x; !c", "c := read; x (+) y + z", "f (g x) 3", "(\\x.x) (\\y.y)"] {
            let t = c(s);
            assert_eq!(c(&t.to_string()), t, "{s}");
        }
    }

    #[test]
    fn reference_agrees_on_examples() {
        let w = CbvWorld {
            input: [CbvValue::Int(4), CbvValue::Int(5)].into(),
            rnd: [true, false].into(),
            nd: [false].into(),
            store: [(name("c"), CbvValue::Int(7))].into(),
            output: vec![],
        };
        for s in [
            "(\\f. f (f 0)) (\\x. write x; !c)",
            "c := read; write read; !c",
            "(1 (+) 2) (+) (3 + 4)",
            "(\\x. write x; x) (\\y. c := y; y)",
        ] {
            assert_eq!(compare_with_reference(&c(s), &w, 1000), CbvAgreement::Agree, "{s}");
        }
    }
}
