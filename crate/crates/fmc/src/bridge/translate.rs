//! Interpretation of main-location terms as λ-terms over their input stack, and the
//! translation of typed λ-terms back into the calculus.
//!
//! Stacks and contexts are laid out bottom to top. A stack of `n ≠ 1` items is read as an
//! `n`-tuple in that order, a single item as itself. In the λ to machine direction the most
//! recently bound context entry lies deepest.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::lambda::{app, infer_lambda, lam, const_type, LTerm, LType, LambdaError, Pattern};
use crate::syntax::{all_names, cnst, compose, name, push, ConstSym, Loc, Name, Term};
use crate::types::{check, Context, Derivation, SimpleType, TypeError, Typed};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("only the main location can be interpreted as a λ-term; found `{0}`")]
    NamedLocation(String),
    #[error("expected a function type, found {0}")]
    NotAnArrow(String),
    #[error("operator `{0}` has no λ-calculus counterpart")]
    UnsupportedConstant(String),
    #[error("ill-formed derivation: {0}")]
    Malformed(String),
    #[error(transparent)]
    Lambda(#[from] LambdaError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

// ---------------------------------------------------------------------------
// Types

/// A stack of λ-types as one type: the type itself when there is one, otherwise a product.
pub fn stack_type(items: Vec<LType>) -> LType {
    if items.len() == 1 {
        items.into_iter().next().expect("one item")
    } else {
        LType::Product(items)
    }
}

fn main_only(m: &crate::types::MemoryType) -> Result<Vec<SimpleType>, TranslateError> {
    for (l, v) in &m.0 {
        if !l.is_main() && !v.0.is_empty() {
            return Err(TranslateError::NamedLocation(l.to_string()));
        }
    }
    Ok(m.get(&Loc::Main).to_vec())
}

pub fn fmc_type_to_lambda(t: &SimpleType) -> Result<LType, TranslateError> {
    match t {
        SimpleType::Base(b) => Ok(LType::Base(b.clone())),
        SimpleType::Arrow(i, o) => {
            let i = main_only(i)?.iter().map(fmc_type_to_lambda).collect::<Result<_, _>>()?;
            let o = main_only(o)?.iter().map(fmc_type_to_lambda).collect::<Result<_, _>>()?;
            Ok(LType::Arrow(Arc::new(stack_type(i)), Arc::new(stack_type(o))))
        }
    }
}

/// A λ-type as the stack of machine types it occupies.
pub fn flatten_type(a: &LType) -> Vec<SimpleType> {
    match a {
        LType::Product(ts) => ts.iter().flat_map(flatten_type).collect(),
        _ => vec![lambda_type_to_fmc(a)],
    }
}

/// Base types map to themselves, `A → B` to `A > B` over flattened stacks. A product is
/// not a single machine type; see [`flatten_type`].
pub fn lambda_type_to_fmc(a: &LType) -> SimpleType {
    match a {
        LType::Base(b) => SimpleType::Base(b.clone()),
        LType::Var(_) => SimpleType::base("o"),
        LType::Arrow(x, y) => SimpleType::main_arrow(flatten_type(x), flatten_type(y)),
        LType::Product(_) => SimpleType::main_arrow(vec![], flatten_type(a)),
    }
}

// ---------------------------------------------------------------------------
// Machine terms to λ-terms

struct ToLambda {
    taken: BTreeSet<Name>,
}

impl ToLambda {
    fn fresh(&mut self, base: &str) -> Name {
        let mut i = self.taken.len();
        loop {
            let c = name(&format!("{base}{i}"));
            if self.taken.insert(c.clone()) {
                return c;
            }
            i += 1;
        }
    }

    /// A pattern for a stack of the given machine types, and the items it binds.
    fn stack_pattern(&mut self, tys: &[SimpleType]) -> (Pattern, Vec<LTerm>) {
        let vars: Vec<Name> = tys.iter().map(|_| self.fresh("c")).collect();
        let items = vars.iter().map(|x| LTerm::Var(x.clone())).collect();
        let pat = if vars.len() == 1 {
            Pattern::Var(vars[0].clone())
        } else {
            Pattern::Tuple(vars.into_iter().map(Pattern::Var).collect())
        };
        (pat, items)
    }

    fn value(&mut self, n: &Typed, ty: &SimpleType, v: &HashMap<Name, LTerm>) -> Result<LTerm, TranslateError> {
        match (n, ty) {
            (Typed::Var(x, _, k), _) if matches!(**k, Typed::Nil) => {
                Ok(v.get(x).cloned().unwrap_or_else(|| LTerm::Var(x.clone())))
            }
            (Typed::Const(c, _, k), _) if c.is_literal() && matches!(**k, Typed::Nil) => Ok(LTerm::Const(c.name())),
            (_, SimpleType::Arrow(i, _)) => {
                let i = main_only(i)?;
                let (pat, items) = self.stack_pattern(&i);
                let out = self.items(n, v, items)?;
                Ok(lam(pat, tuple(out)))
            }
            _ => Err(TranslateError::Malformed(format!("base-typed argument that is not a variable or literal: {n:?}"))),
        }
    }

    fn call(&mut self, f: LTerm, ty: &SimpleType, s: &mut Vec<LTerm>) -> Result<(), TranslateError> {
        let Some((i, o)) = ty.as_arrow() else {
            return Err(TranslateError::NotAnArrow(ty.to_string()));
        };
        let (ni, no) = (main_only(i)?.len(), main_only(o)?.len());
        if s.len() < ni {
            return Err(TranslateError::Malformed("stack underflow".into()));
        }
        let args = s.split_off(s.len() - ni);
        let r = app(f, tuple(args));
        if no == 1 {
            s.push(r);
        } else {
            let r = Arc::new(r);
            s.extend((0..no).map(|j| LTerm::Proj(j, no, r.clone())));
        }
        Ok(())
    }

    /// The stack left by running `t` on the stack `s`.
    fn items(&mut self, t: &Typed, v: &HashMap<Name, LTerm>, mut s: Vec<LTerm>) -> Result<Vec<LTerm>, TranslateError> {
        let mut v = v.clone();
        let mut cur = t;
        loop {
            match cur {
                Typed::Nil => return Ok(s),
                Typed::Pop(a, x, _, k) => {
                    if !a.is_main() {
                        return Err(TranslateError::NamedLocation(a.to_string()));
                    }
                    let top = s.pop().ok_or_else(|| TranslateError::Malformed("pop on empty stack".into()))?;
                    v.insert(x.clone(), top);
                    cur = k;
                }
                Typed::Push(n, ty, a, k) => {
                    if !a.is_main() {
                        return Err(TranslateError::NamedLocation(a.to_string()));
                    }
                    let val = self.value(n, ty, &v)?;
                    s.push(val);
                    cur = k;
                }
                Typed::Var(x, ty, k) => {
                    let f = v.get(x).cloned().unwrap_or_else(|| LTerm::Var(x.clone()));
                    self.call(f, ty, &mut s)?;
                    cur = k;
                }
                Typed::Const(c, ty, k) => {
                    match c {
                        ConstSym::Int(_) | ConstSym::Bool(_) => s.push(LTerm::Const(c.name())),
                        ConstSym::Op { name: op, arity_in, arity_out } => {
                            if const_type(op).is_none() {
                                return Err(TranslateError::UnsupportedConstant(op.to_string()));
                            }
                            let (i, o) = (vec![SimpleType::base("Z"); *arity_in], vec![SimpleType::base("Z"); *arity_out]);
                            let _ = ty;
                            self.call(LTerm::Const(op.to_string()), &SimpleType::main_arrow(i, o), &mut s)?;
                        }
                    }
                    cur = k;
                }
            }
        }
    }
}

fn tuple(mut items: Vec<LTerm>) -> LTerm {
    if items.len() == 1 {
        items.pop().expect("one item")
    } else {
        LTerm::Tuple(items)
    }
}

/// Run the interpretation of a derivation on a given input stack under a valuation
/// (unlisted variables denote themselves). Returns the output stack, bottom to top.
pub fn interpret_on(d: &Derivation, v: &HashMap<Name, LTerm>, input: Vec<LTerm>) -> Result<Vec<LTerm>, TranslateError> {
    let mut taken = BTreeSet::new();
    all_names(&d.term, &mut taken);
    for t in v.values().chain(&input) {
        taken.extend(super::lambda::free_vars(t));
    }
    ToLambda { taken }.items(&d.typed, v, input)
}

/// The λ-term `λc. out(c)` of a derivation `Γ ⊢ M : ?s > !t`: a function of the input stack
/// (a tuple unless it has one item) returning the output stack. Free variables of `M`
/// denote the λ-variables of the same name.
pub fn fmc_to_lambda(d: &Derivation) -> Result<LTerm, TranslateError> {
    let Some((i, _)) = d.ty.as_arrow() else {
        return Err(TranslateError::NotAnArrow(d.ty.to_string()));
    };
    let i = main_only(i)?;
    let mut taken = BTreeSet::new();
    all_names(&d.term, &mut taken);
    let mut tl = ToLambda { taken };
    let (pat, items) = tl.stack_pattern(&i);
    let out = tl.items(&d.typed, &HashMap::new(), items)?;
    Ok(lam(pat, tuple(out)))
}

/// Check `M` at `ty` (with free variables typed by `ctx`) and interpret it.
pub fn fmc_to_lambda_at(ctx: &Context, m: &Term, ty: &SimpleType) -> Result<LTerm, TranslateError> {
    fmc_to_lambda(&check(ctx, m, ty)?)
}

// ---------------------------------------------------------------------------
// λ-terms to machine terms

/// One stack item of a λ-context: the variable it belongs to, and its machine type.
#[derive(Clone, Debug)]
struct Slot {
    var: Name,
    ty: SimpleType,
}

struct ToFmc<'a> {
    lam_types: &'a [LType],
    next_lam: usize,
    counter: usize,
}

fn layout(p: &Pattern, a: &LType, out: &mut Vec<Slot>) -> Result<(), TranslateError> {
    match (p, a) {
        (Pattern::Var(x), _) => {
            out.extend(flatten_type(a).into_iter().map(|ty| Slot { var: x.clone(), ty }));
            Ok(())
        }
        (Pattern::Tuple(ps), LType::Product(ts)) if ps.len() == ts.len() => {
            for (q, t) in ps.iter().zip(ts) {
                layout(q, t, out)?;
            }
            Ok(())
        }
        _ => Err(TranslateError::Malformed(format!("pattern does not match type {a}"))),
    }
}

fn var_nil(x: &Name) -> Term {
    Term::Var(x.clone(), Arc::new(Term::Nil))
}

impl ToFmc<'_> {
    fn fresh(&mut self, base: &str) -> Name {
        self.counter += 1;
        name(&format!("{base}{}", self.counter))
    }

    /// `<?x>` binding every context item, returned with the names bottom to top.
    fn pop_all(&mut self, n: usize) -> Vec<Name> {
        (0..n).map(|_| self.fresh("a")).collect()
    }

    fn wrap_pops(xs: &[Name], body: Term) -> Term {
        xs.iter().fold(body, |k, x| Term::Pop(Loc::Main, x.clone(), None, Arc::new(k)))
    }

    fn push_all(xs: &[Name], k: Term) -> Term {
        xs.iter().rev().fold(k, |k, x| push(var_nil(x), Loc::Main, k))
    }

    fn synth(&self, env: &[(Name, LType)], t: &LTerm, lam_idx: &mut usize) -> Result<LType, TranslateError> {
        Ok(match t {
            LTerm::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| LambdaError::Unbound(x.to_string()))?,
            LTerm::Const(c) => const_type(c).ok_or_else(|| LambdaError::UnknownConstant(c.clone()))?,
            LTerm::App(f, a) => {
                let tf = self.synth(env, f, lam_idx)?;
                self.synth(env, a, lam_idx)?;
                match tf {
                    LType::Arrow(_, b) => (*b).clone(),
                    other => return Err(TranslateError::NotAnArrow(other.to_string())),
                }
            }
            LTerm::Lam(p, b) => {
                let pt = self.lam_types[*lam_idx].clone();
                *lam_idx += 1;
                let mut env2 = env.to_vec();
                bind_env(p, &pt, &mut env2)?;
                let tb = self.synth(&env2, b, lam_idx)?;
                LType::Arrow(Arc::new(pt), Arc::new(tb))
            }
            LTerm::Tuple(ts) => {
                let mut v = Vec::new();
                for x in ts {
                    v.push(self.synth(env, x, lam_idx)?);
                }
                LType::Product(v)
            }
            LTerm::Proj(i, _, m) => match self.synth(env, m, lam_idx)? {
                LType::Product(ts) => ts[*i].clone(),
                other => return Err(TranslateError::Malformed(format!("projection from {other}"))),
            },
        })
    }

    /// `ctx` is the stack layout bottom to top; `env` the λ-typing environment.
    fn term(&mut self, ctx: &[Slot], env: &[(Name, LType)], t: &LTerm) -> Result<Term, TranslateError> {
        let n = ctx.len();
        match t {
            LTerm::Var(x) => {
                let xs = self.pop_all(n);
                // a variable of empty product type occupies no slots
                if let Some((_, a)) = env.iter().rev().find(|(y, _)| y == x) {
                    if flatten_type(a).is_empty() {
                        return Ok(Self::wrap_pops(&xs, Term::Nil));
                    }
                }
                let start = ctx.iter().position(|s| &s.var == x).ok_or_else(|| LambdaError::Unbound(x.to_string()))?;
                let end = start + ctx[start..].iter().take_while(|s| &s.var == x).count();
                Ok(Self::wrap_pops(&xs, Self::push_all(&xs[start..end], Term::Nil)))
            }
            LTerm::Const(c) => {
                let xs = self.pop_all(n);
                let value = match c.parse::<i64>() {
                    Ok(k) => Term::Const(ConstSym::Int(k), Arc::new(Term::Nil)),
                    Err(_) => match ConstSym::builtin(c) {
                        Some(sym) => cnst(sym, Term::Nil),
                        None => return Err(TranslateError::UnsupportedConstant(c.clone())),
                    },
                };
                Ok(Self::wrap_pops(&xs, push(value, Loc::Main, Term::Nil)))
            }
            LTerm::Tuple(ms) => {
                let xs = self.pop_all(n);
                let mut body = Term::Nil;
                let mut parts = Vec::new();
                for m in ms {
                    parts.push(self.term(ctx, env, m)?);
                }
                for p in parts.into_iter().rev() {
                    body = Self::push_all(&xs, compose(&p, &body));
                }
                Ok(Self::wrap_pops(&xs, body))
            }
            LTerm::App(m, arg) => {
                let xs = self.pop_all(n);
                let tm = self.term(ctx, env, m)?;
                let tn = self.term(ctx, env, arg)?;
                let k = self.fresh("k");
                let call = Term::Pop(Loc::Main, k.clone(), None, Arc::new(var_nil(&k)));
                let body = Self::push_all(&xs, compose(&tn, &Self::push_all(&xs, compose(&tm, &call))));
                Ok(Self::wrap_pops(&xs, body))
            }
            LTerm::Lam(p, b) => {
                let pt = self.lam_types[self.next_lam].clone();
                self.next_lam += 1;
                let mut inner = Vec::new();
                layout(p, &pt, &mut inner)?;
                inner.extend_from_slice(ctx);
                let mut env2 = env.to_vec();
                bind_env(p, &pt, &mut env2)?;
                let xs = self.pop_all(n);
                let body = self.term(&inner, &env2, b)?;
                Ok(Self::wrap_pops(&xs, push(Self::push_all(&xs, body), Loc::Main, Term::Nil)))
            }
            LTerm::Proj(i, k, m) => {
                // (λ(y₁…y_k).y_i) M, with the abstraction typed by M
                let mut idx = self.next_lam;
                let tm = self.synth(env, m, &mut idx)?;
                let ys: Vec<Pattern> = (0..*k).map(|_| Pattern::Var(self.fresh("p"))).collect();
                let Pattern::Var(yi) = ys[*i].clone() else { unreachable!() };
                let mut inner = Vec::new();
                layout(&Pattern::Tuple(ys.clone()), &tm, &mut inner)?;
                inner.extend_from_slice(ctx);
                let mut env2 = env.to_vec();
                bind_env(&Pattern::Tuple(ys), &tm, &mut env2)?;
                let xs = self.pop_all(n);
                let f = Self::wrap_pops(&xs, push(Self::push_all(&xs, self.term(&inner, &env2, &LTerm::Var(yi))?), Loc::Main, Term::Nil));
                let tn = self.term(ctx, env, m)?;
                let kk = self.fresh("k");
                let call = Term::Pop(Loc::Main, kk.clone(), None, Arc::new(var_nil(&kk)));
                let xs2 = self.pop_all(n);
                let body = Self::push_all(&xs2, compose(&tn, &Self::push_all(&xs2, compose(&f, &call))));
                Ok(Self::wrap_pops(&xs2, body))
            }
        }
    }
}

fn bind_env(p: &Pattern, a: &LType, env: &mut Vec<(Name, LType)>) -> Result<(), TranslateError> {
    match (p, a) {
        (Pattern::Var(x), _) => {
            env.push((x.clone(), a.clone()));
            Ok(())
        }
        (Pattern::Tuple(ps), LType::Product(ts)) if ps.len() == ts.len() => {
            for (q, t) in ps.iter().zip(ts) {
                bind_env(q, t, env)?;
            }
            Ok(())
        }
        _ => Err(TranslateError::Malformed(format!("pattern does not match type {a}"))),
    }
}

/// A translated λ-term with the context it was translated in.
#[derive(Clone, Debug)]
pub struct FromLambda {
    pub term: Term,
    /// `⟦Γ⟧ > ⟦A⟧`.
    pub ty: SimpleType,
    /// Γ, oldest entry first; free variables not given in the context are appended.
    pub ctx: Vec<(Name, LType)>,
    /// The λ-type of the term.
    pub lambda_ty: LType,
}

/// Translate `Γ ⊢ M : A` to a term of type `⟦Γ⟧ > ⟦A⟧`, where the newest entry of `Γ`
/// is deepest on the stack.
pub fn lambda_to_fmc(ctx: &[(Name, LType)], t: &LTerm) -> Result<FromLambda, TranslateError> {
    let typing = infer_lambda(ctx, t)?;
    let full: Vec<(Name, LType)> = typing.free.clone();
    let mut slots = Vec::new();
    for (x, a) in full.iter().rev() {
        layout(&Pattern::Var(x.clone()), a, &mut slots)?;
    }
    let mut tf = ToFmc { lam_types: &typing.lam_types, next_lam: 0, counter: 0 };
    let term = tf.term(&slots, &full, t)?;
    let ty = SimpleType::main_arrow(slots.iter().map(|s| s.ty.clone()).collect(), flatten_type(&typing.ty));
    Ok(FromLambda { term, ty, ctx: full, lambda_ty: typing.ty })
}

/// The closed λ-term that [`fmc_to_lambda`] of a translation is expected to equal:
/// `M` abstracted over the translated context's stack.
pub fn close_over_context(ctx: &[(Name, LType)], m: &LTerm) -> LTerm {
    let mut taken = super::lambda::free_vars(m);
    for (x, _) in ctx {
        taken.insert(x.clone());
    }
    let mut counter = 0;
    let mut items = Vec::new();
    let mut subst = HashMap::new();
    for (x, a) in ctx.iter().rev() {
        let k = flatten_type(a).len();
        let mut group = Vec::new();
        for _ in 0..k {
            let c = loop {
                counter += 1;
                let c = name(&format!("s{counter}"));
                if !taken.contains(&c) {
                    break c;
                }
            };
            group.push(LTerm::Var(c.clone()));
            items.push(Pattern::Var(c));
        }
        let val = match a {
            LType::Product(_) => LTerm::Tuple(group),
            _ => group.pop().expect("one item"),
        };
        subst.insert(x.clone(), val);
    }
    let pat = if items.len() == 1 { items.pop().expect("one item") } else { Pattern::Tuple(items) };
    lam(pat, super::lambda::subst_many(m, &subst))
}
