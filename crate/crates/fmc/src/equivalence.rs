//! The equational theory, the Cartesian closed combinators, and machine equivalence
//! tested on synthesized inputs.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;

use crate::gen::{self, GenConfig};
use crate::machine::{run, DeltaRegistry, Memory, RunError};
use crate::parser::print_term;
use crate::reduction::{perm_normal, redexes, reduce_at};
use crate::syntax::{
    all_names, alpha_eq, canonical, cnst, compose, free_vars, int, is_closed, name, nameless, substitute, ConstSym,
    Loc, Name, Nameless, Term,
};
use crate::types::{check, ground_type, infer, Context, MemoryType, SimpleType, Typed};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EquivError {
    #[error("ill-typed binding: {0}")]
    IllTypedBinding(String),
    #[error("{side} term is not of type {ty}: {reason}")]
    IllTyped { side: &'static str, ty: String, reason: String },
    #[error("{0} term is not closed")]
    Open(&'static str),
}

// ---------------------------------------------------------------------------
// Variable vectors

/// Variables for a memory type, bottom to top within each location.
#[derive(Clone, Debug, Default)]
pub struct VarVec(pub Vec<(Loc, Name)>);

impl VarVec {
    pub fn fresh(mt: &MemoryType, base: &str, avoid: &mut BTreeSet<Name>) -> VarVec {
        let mut out = Vec::new();
        let mut i = 1;
        for (l, v) in &mt.0 {
            for _ in &v.0 {
                let x = loop {
                    let c = name(&format!("{base}{i}"));
                    i += 1;
                    if !avoid.contains(&c) {
                        break c;
                    }
                };
                avoid.insert(x.clone());
                out.push((l.clone(), x));
            }
        }
        VarVec(out)
    }

    /// `<?x>`: the first pop binds the top.
    pub fn pops(&self, k: Term) -> Term {
        self.0.iter().fold(k, |acc, (l, x)| Term::Pop(l.clone(), x.clone(), None, Arc::new(acc)))
    }

    /// `[!x]`: the bottom is pushed first.
    pub fn pushes(&self, k: Term) -> Term {
        self.0.iter().rev().fold(k, |acc, (l, x)| {
            Term::Push(Arc::new(Term::Var(x.clone(), Arc::new(Term::Nil))), l.clone(), Arc::new(acc))
        })
    }
}

fn seq(parts: &[Term]) -> Term {
    parts.iter().rev().fold(Term::Nil, |acc, p| compose(p, &acc))
}

fn names_of(ts: &[&Term]) -> BTreeSet<Name> {
    let mut s = BTreeSet::new();
    for t in ts {
        all_names(t, &mut s);
    }
    s
}

fn split_arrow(ty: &SimpleType) -> Result<(MemoryType, MemoryType), EquivError> {
    ty.as_arrow()
        .map(|(i, o)| (i.clone(), o.clone()))
        .ok_or_else(|| EquivError::IllTypedBinding(format!("expected an arrow type, found {ty}")))
}

fn closed_type(m: &Term) -> Result<SimpleType, EquivError> {
    if !is_closed(m) {
        return Err(EquivError::IllTypedBinding(format!("`{}` is not closed", print_term(m))));
    }
    ground_type(m).map(|(t, _)| t).map_err(|e| EquivError::IllTypedBinding(e.to_string()))
}

// ---------------------------------------------------------------------------
// Combinators

#[derive(Clone, Debug)]
pub enum Combinator {
    /// `! : !t → 1`
    Bang(MemoryType),
    /// `δ : !t → !t × !t`
    Delta(MemoryType),
    /// `π₁ : !u × !t → !t`
    Pi1 { u: MemoryType, t: MemoryType },
    /// `π₂ : !u × !t → !u`
    Pi2 { u: MemoryType, t: MemoryType },
    /// `ε = <z>.z`
    Eps,
    /// `η : !t → (!s → !s × !t)`
    EtaCurry(MemoryType),
    Hom(Term, Term),
    /// `[N, M]` for `N, M : ?r > _`.
    Pair { n: Term, m: Term, r: MemoryType },
    /// `M*` for `M : ?s?r > !t`.
    Curry { m: Term, s: MemoryType },
    /// `M ⊗ !t`, which is `M` itself.
    TensorLeft(Term, MemoryType),
    /// `!t ⊗ M = <?x>.M.[!x]`
    TensorRight(MemoryType, Term),
}

pub fn ccc_combinator(c: &Combinator) -> Term {
    match c {
        Combinator::Bang(t) => VarVec::fresh(t, "x", &mut BTreeSet::new()).pops(Term::Nil),
        Combinator::Delta(t) => {
            let x = VarVec::fresh(t, "x", &mut BTreeSet::new());
            x.pops(x.pushes(x.pushes(Term::Nil)))
        }
        Combinator::Pi1 { u, t } | Combinator::Pi2 { u, t } => {
            let mut avoid = BTreeSet::new();
            let x = VarVec::fresh(t, "x", &mut avoid);
            let y = VarVec::fresh(u, "y", &mut avoid);
            let keep = if matches!(c, Combinator::Pi1 { .. }) { &x } else { &y };
            x.pops(y.pops(keep.pushes(Term::Nil)))
        }
        Combinator::Eps => Term::Pop(Loc::Main, name("z"), None, Arc::new(Term::Var(name("z"), Arc::new(Term::Nil)))),
        Combinator::EtaCurry(t) => {
            let x = VarVec::fresh(t, "x", &mut BTreeSet::new());
            x.pops(Term::Push(Arc::new(x.pushes(Term::Nil)), Loc::Main, Arc::new(Term::Nil)))
        }
        Combinator::Hom(m, n) => {
            let z = crate::syntax::fresh("z", |c| free_vars(m).contains(c) || free_vars(n).contains(c));
            let body = seq(&[m.clone(), Term::Var(z.clone(), Arc::new(Term::Nil)), n.clone()]);
            Term::Pop(Loc::Main, z, None, Arc::new(Term::Push(Arc::new(body), Loc::Main, Arc::new(Term::Nil))))
        }
        Combinator::Pair { n, m, r } => pair(n, m, r),
        Combinator::Curry { m, s } => curry(m, s),
        Combinator::TensorLeft(m, _) => m.clone(),
        Combinator::TensorRight(t, m) => {
            let mut avoid = names_of(&[m]);
            let x = VarVec::fresh(t, "x", &mut avoid);
            x.pops(compose(m, &x.pushes(Term::Nil)))
        }
    }
}

/// `[N, M] = <?x>.[!x].[!x] ; M.<?z>.N.[!z] : ?r > !s!t`
pub fn pair(n: &Term, m: &Term, r: &MemoryType) -> Term {
    let mut avoid = names_of(&[n, m]);
    let x = VarVec::fresh(r, "x", &mut avoid);
    let t = match ground_type(m).ok().and_then(|(ty, _)| ty.as_arrow().map(|(_, o)| o.clone())) {
        Some(o) => o,
        None => MemoryType::default(),
    };
    let z = VarVec::fresh(&t, "z", &mut avoid);
    let dup = x.pops(x.pushes(x.pushes(Term::Nil)));
    let tail = compose(m, &z.pops(compose(n, &z.pushes(Term::Nil))));
    compose(&dup, &tail)
}

/// `M* = <?x>.[[!x].M]` with `x : !s`.
pub fn curry(m: &Term, s: &MemoryType) -> Term {
    let mut avoid = names_of(&[m]);
    let x = VarVec::fresh(s, "x", &mut avoid);
    let body = x.pushes(m.clone());
    x.pops(Term::Push(Arc::new(body), Loc::Main, Arc::new(Term::Nil)))
}

/// Projection keeping the bottom `s` of `!s!t`.
fn proj_bottom(s: &MemoryType, t: &MemoryType) -> Term {
    ccc_combinator(&Combinator::Pi2 { u: s.clone(), t: t.clone() })
}

/// Projection keeping the top `t` of `!s!t`.
fn proj_top(s: &MemoryType, t: &MemoryType) -> Term {
    ccc_combinator(&Combinator::Pi1 { u: s.clone(), t: t.clone() })
}

// ---------------------------------------------------------------------------
// Laws

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EqnLaw {
    Beta,
    Interchange,
    Diagonal,
    Terminal,
    EtaFirstOrder,
    EtaHigherOrder,
}

impl EqnLaw {
    pub const ALL: [EqnLaw; 6] = [
        EqnLaw::Beta,
        EqnLaw::Interchange,
        EqnLaw::Diagonal,
        EqnLaw::Terminal,
        EqnLaw::EtaFirstOrder,
        EqnLaw::EtaHigherOrder,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            EqnLaw::Beta => "β",
            EqnLaw::Interchange => "ι",
            EqnLaw::Diagonal => "Δ",
            EqnLaw::Terminal => "!",
            EqnLaw::EtaFirstOrder => "η",
            EqnLaw::EtaHigherOrder => "ε",
        }
    }

    /// The schema with its side conditions.
    pub fn schema(self) -> &'static str {
        match self {
            EqnLaw::Beta => "[N].<x>.M = {N/x}M : ?s > !t",
            EqnLaw::Interchange => "<?x>.N.[!x].M = M.<?y>.N.[!y] : ?s?r > !u!t   (M : ?s > !t, N : ?r > !u)",
            EqnLaw::Diagonal => "M.<?y>.[!y].[!y] = <?x>.[!x].M.[!x].M : ?s > !t!t   (M : ?s > !t)",
            EqnLaw::Terminal => "M.<?y> = <?x> : ?s >   (M : ?s > !t)",
            EqnLaw::EtaFirstOrder => "* = <a>.[a] : α > α",
            EqnLaw::EtaHigherOrder => "P = <?x>.[[!x].P.<z>.z] : ?r > (?s > !t)",
        }
    }
}

impl fmt::Display for EqnLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// Terms plugged into a law schema. `M`, `N`, `P` are closed.
#[derive(Clone, Debug)]
pub enum Bindings {
    Beta { arg: Term, var: Name, body: Term },
    Interchange { m: Term, n: Term },
    Diagonal { m: Term },
    Terminal { m: Term },
    EtaFirstOrder { ty: SimpleType, loc: Loc },
    EtaHigherOrder { p: Term },
}

impl Bindings {
    pub fn law(&self) -> EqnLaw {
        match self {
            Bindings::Beta { .. } => EqnLaw::Beta,
            Bindings::Interchange { .. } => EqnLaw::Interchange,
            Bindings::Diagonal { .. } => EqnLaw::Diagonal,
            Bindings::Terminal { .. } => EqnLaw::Terminal,
            Bindings::EtaFirstOrder { .. } => EqnLaw::EtaFirstOrder,
            Bindings::EtaHigherOrder { .. } => EqnLaw::EtaHigherOrder,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LawInstance {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
    pub ty: SimpleType,
}

impl fmt::Display for LawInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} = {} : {}", self.name, print_term(&self.lhs), print_term(&self.rhs), self.ty)
    }
}

fn verify(name: &str, lhs: Term, rhs: Term, ty: SimpleType) -> Result<LawInstance, EquivError> {
    for (side, t) in [("left", &lhs), ("right", &rhs)] {
        check(&Context::new(), t, &ty).map_err(|e| {
            EquivError::IllTypedBinding(format!("{side} side `{}` at {ty}: {e}", print_term(t)))
        })?;
    }
    Ok(LawInstance { name: name.to_string(), lhs, rhs, ty })
}

pub fn law_instance(b: &Bindings) -> Result<LawInstance, EquivError> {
    let label = b.law().to_string();
    match b {
        Bindings::Beta { arg, var, body } => {
            let targ = closed_type(arg)?;
            let mut ctx = Context::new();
            ctx.insert(var.clone(), targ);
            let s = infer(&ctx, body).map_err(|e| EquivError::IllTypedBinding(e.to_string()))?;
            let ty = s.ground(&SimpleType::unit_arrow());
            let lhs = Term::Push(Arc::new(arg.clone()), Loc::Main, Arc::new(Term::Pop(Loc::Main, var.clone(), None, Arc::new(body.clone()))));
            let rhs = substitute(arg, var, body);
            verify(&label, lhs, rhs, ty)
        }
        Bindings::Interchange { m, n } => {
            let (s, t) = split_arrow(&closed_type(m)?)?;
            let (r, u) = split_arrow(&closed_type(n)?)?;
            let mut avoid = names_of(&[m, n]);
            let x = VarVec::fresh(&s, "x", &mut avoid);
            let y = VarVec::fresh(&t, "y", &mut avoid);
            let lhs = x.pops(seq(&[n.clone(), x.pushes(m.clone())]));
            let rhs = seq(&[m.clone(), y.pops(seq(&[n.clone(), y.pushes(Term::Nil)]))]);
            let ty = SimpleType::arrow(r.concat(&s), u.concat(&t));
            verify(&label, lhs, rhs, ty)
        }
        Bindings::Diagonal { m } => {
            let (s, t) = split_arrow(&closed_type(m)?)?;
            let mut avoid = names_of(&[m]);
            let x = VarVec::fresh(&s, "x", &mut avoid);
            let y = VarVec::fresh(&t, "y", &mut avoid);
            let lhs = seq(&[m.clone(), y.pops(y.pushes(y.pushes(Term::Nil)))]);
            let rhs = x.pops(seq(&[x.pushes(Term::Nil), m.clone(), x.pushes(Term::Nil), m.clone()]));
            let ty = SimpleType::arrow(s, t.concat(&t));
            verify(&label, lhs, rhs, ty)
        }
        Bindings::Terminal { m } => {
            let (s, t) = split_arrow(&closed_type(m)?)?;
            let mut avoid = names_of(&[m]);
            let x = VarVec::fresh(&s, "x", &mut avoid);
            let y = VarVec::fresh(&t, "y", &mut avoid);
            let lhs = compose(m, &y.pops(Term::Nil));
            let rhs = x.pops(Term::Nil);
            verify(&label, lhs, rhs, SimpleType::arrow(s, MemoryType::default()))
        }
        Bindings::EtaFirstOrder { ty, loc } => {
            let a = name("a");
            let rhs = Term::Pop(
                loc.clone(),
                a.clone(),
                None,
                Arc::new(Term::Push(Arc::new(Term::Var(a, Arc::new(Term::Nil))), loc.clone(), Arc::new(Term::Nil))),
            );
            let mt = MemoryType::singleton(loc.clone(), vec![ty.clone()]);
            verify(&label, Term::Nil, rhs, SimpleType::arrow(mt.clone(), mt))
        }
        Bindings::EtaHigherOrder { p } => {
            let pty = closed_type(p)?;
            let (r, out) = split_arrow(&pty)?;
            let single = out.0.len() == 1 && out.get(&Loc::Main).len() == 1 && out.get(&Loc::Main)[0].as_arrow().is_some();
            if !single {
                return Err(EquivError::IllTypedBinding(format!("P must have type ?r > (?s > !t), found {pty}")));
            }
            let mut avoid = names_of(&[p]);
            let x = VarVec::fresh(&r, "x", &mut avoid);
            let z = crate::syntax::fresh("z", |c| avoid.contains(c));
            let call = Term::Pop(Loc::Main, z.clone(), None, Arc::new(Term::Var(z, Arc::new(Term::Nil))));
            let inner = x.pushes(seq(&[p.clone(), call]));
            let rhs = x.pops(Term::Push(Arc::new(inner), Loc::Main, Arc::new(Term::Nil)));
            verify(&label, p.clone(), rhs, pty)
        }
    }
}

/// `[N,M];π = N` and `[N,M];π' = M` for `N : ?r > !s`, `M : ?r > !t`.
pub fn product_existence(n: &Term, m: &Term) -> Result<[LawInstance; 2], EquivError> {
    let (r, s) = split_arrow(&closed_type(n)?)?;
    let (r2, t) = split_arrow(&closed_type(m)?)?;
    if r != r2 {
        return Err(EquivError::IllTypedBinding(format!("pair components need equal inputs, found {r:?} and {r2:?}")));
    }
    let p = pair(n, m, &r);
    let first = verify(
        "ProductExistence1",
        compose(&p, &proj_bottom(&s, &t)),
        n.clone(),
        SimpleType::arrow(r.clone(), s.clone()),
    )?;
    let second = verify("ProductExistence2", compose(&p, &proj_top(&s, &t)), m.clone(), SimpleType::arrow(r, t))?;
    Ok([first, second])
}

/// `P = [P;π, P;π']` where the top `top` items of the main output of `P` form `t`.
pub fn product_uniqueness(p: &Term, top: usize) -> Result<LawInstance, EquivError> {
    let pty = closed_type(p)?;
    let (r, out) = split_arrow(&pty)?;
    let (s, t) = split_main(&out, top)?;
    let n = compose(p, &proj_bottom(&s, &t));
    let m = compose(p, &proj_top(&s, &t));
    verify("ProductUniqueness", p.clone(), pair(&n, &m, &r), pty)
}

/// `(id × M*);ε = M` where the top `top` items of the main input of `M` form `s`.
pub fn exponent_existence(m: &Term, top: usize) -> Result<LawInstance, EquivError> {
    let mty = closed_type(m)?;
    let (input, _) = split_arrow(&mty)?;
    let (_, s) = split_main(&input, top)?;
    let eps = ccc_combinator(&Combinator::Eps);
    verify("ExponentExistence", compose(&curry(m, &s), &eps), m.clone(), mty)
}

/// `((id × N);ε)* = N` for `N : ?s > (?r > !t)`.
pub fn exponent_uniqueness(n: &Term) -> Result<LawInstance, EquivError> {
    let nty = closed_type(n)?;
    let (s, out) = split_arrow(&nty)?;
    if !(out.0.len() == 1 && out.get(&Loc::Main).len() == 1 && out.get(&Loc::Main)[0].as_arrow().is_some()) {
        return Err(EquivError::IllTypedBinding(format!("N must have type ?s > (?r > !t), found {nty}")));
    }
    let eps = ccc_combinator(&Combinator::Eps);
    let lhs = curry(&compose(n, &eps), &s);
    verify("ExponentUniqueness", lhs, n.clone(), nty)
}

/// Split the main vector of `mt` into the bottom part (with all other locations) and
/// the top `top` items.
fn split_main(mt: &MemoryType, top: usize) -> Result<(MemoryType, MemoryType), EquivError> {
    let v = mt.get(&Loc::Main);
    if top > v.len() {
        return Err(EquivError::IllTypedBinding(format!("cannot split {top} items off a vector of {}", v.len())));
    }
    let mut bottom = mt.clone();
    bottom.0.insert(Loc::Main, crate::types::TypeVector(v[..v.len() - top].to_vec()));
    let t = MemoryType::singleton(Loc::Main, v[v.len() - top..].to_vec());
    Ok((bottom.normalized(), t))
}

// ---------------------------------------------------------------------------
// Random instances

fn instance_cfg() -> GenConfig {
    GenConfig { max_size: 14, locs: vec![Loc::Main], consts: true }
}

/// Mostly terms with an observable (integer) output somewhere in their output type.
fn closed_typed(rng: &mut impl Rng, cfg: &GenConfig) -> (Term, SimpleType) {
    loop {
        let (t, ty, _) = gen::random_typed(rng, cfg);
        let mut bs = BTreeSet::new();
        if let Some((_, o)) = ty.as_arrow() {
            for v in o.0.values() {
                for x in &v.0 {
                    bases(x, &mut bs);
                }
            }
        }
        if !bs.is_empty() || rng.gen_bool(0.1) {
            return (t, ty);
        }
    }
}

fn is_single_function(ty: &SimpleType) -> bool {
    match ty.as_arrow() {
        Some((_, o)) => o.0.len() == 1 && o.get(&Loc::Main).len() == 1 && o.get(&Loc::Main)[0].as_arrow().is_some(),
        None => false,
    }
}

/// A term of type `?r > (?s > !t)`: `A.<?y>.[[!y].Q]` for random `A`, `Q`.
fn random_function_producer(rng: &mut impl Rng, cfg: &GenConfig) -> Term {
    loop {
        let (a, aty) = closed_typed(rng, cfg);
        let (q, _) = closed_typed(rng, cfg);
        let (_, out) = split_arrow(&aty).expect("closed terms have arrow types");
        let mut avoid = names_of(&[&a, &q]);
        let y = VarVec::fresh(&out, "y", &mut avoid);
        let p = compose(&a, &y.pops(Term::Push(Arc::new(y.pushes(q)), Loc::Main, Arc::new(Term::Nil))));
        if let Ok((ty, _)) = ground_type(&p) {
            if is_single_function(&ty) {
                return p;
            }
        }
    }
}

/// A random instance of `law` over closed terms with integer constants.
pub fn random_instance(law: EqnLaw, rng: &mut impl Rng) -> LawInstance {
    let cfg = instance_cfg();
    loop {
        let b = match law {
            EqnLaw::Beta => {
                let (arg, _) = closed_typed(rng, &cfg);
                let body = gen::random_open(rng, &cfg, 1);
                Bindings::Beta { arg, var: name("x0"), body }
            }
            EqnLaw::Interchange => {
                let (m, _) = closed_typed(rng, &cfg);
                let (n, _) = closed_typed(rng, &cfg);
                Bindings::Interchange { m, n }
            }
            EqnLaw::Diagonal => Bindings::Diagonal { m: closed_typed(rng, &cfg).0 },
            EqnLaw::Terminal => Bindings::Terminal { m: closed_typed(rng, &cfg).0 },
            EqnLaw::EtaFirstOrder => {
                let ty = if rng.gen_bool(0.5) { SimpleType::base("Z") } else { closed_typed(rng, &cfg).1 };
                Bindings::EtaFirstOrder { ty, loc: Loc::Main }
            }
            EqnLaw::EtaHigherOrder => Bindings::EtaHigherOrder { p: random_function_producer(rng, &cfg) },
        };
        if let Ok(i) = law_instance(&b) {
            return i;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivedLaw {
    ProductExistence,
    ProductUniqueness,
    ExponentExistence,
    ExponentUniqueness,
}

impl DerivedLaw {
    pub const ALL: [DerivedLaw; 4] = [
        DerivedLaw::ProductExistence,
        DerivedLaw::ProductUniqueness,
        DerivedLaw::ExponentExistence,
        DerivedLaw::ExponentUniqueness,
    ];
}

/// Random instances of a derived law (two for product existence, one otherwise).
pub fn random_derived(law: DerivedLaw, rng: &mut impl Rng) -> Vec<LawInstance> {
    let cfg = instance_cfg();
    loop {
        let r = match law {
            DerivedLaw::ProductExistence => {
                let (n, nty) = closed_typed(rng, &cfg);
                let input = split_arrow(&nty).expect("arrow").0;
                // Search for a partner with the same input.
                let mut found = None;
                for _ in 0..200 {
                    let (m, mty) = closed_typed(rng, &cfg);
                    if split_arrow(&mty).expect("arrow").0 == input {
                        found = Some(m);
                        break;
                    }
                }
                match found {
                    Some(m) => product_existence(&n, &m).map(|a| a.to_vec()),
                    None => continue,
                }
            }
            DerivedLaw::ProductUniqueness => {
                let (p, pty) = closed_typed(rng, &cfg);
                let k = split_arrow(&pty).expect("arrow").1.get(&Loc::Main).len();
                product_uniqueness(&p, rng.gen_range(0..=k)).map(|i| vec![i])
            }
            DerivedLaw::ExponentExistence => {
                let (m, mty) = closed_typed(rng, &cfg);
                let k = split_arrow(&mty).expect("arrow").0.get(&Loc::Main).len();
                exponent_existence(&m, rng.gen_range(0..=k)).map(|i| vec![i])
            }
            DerivedLaw::ExponentUniqueness => {
                exponent_uniqueness(&random_function_producer(rng, &cfg)).map(|i| vec![i])
            }
        };
        if let Ok(v) = r {
            return v;
        }
    }
}

// ---------------------------------------------------------------------------
// Machine equivalence

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TestBudget {
    /// Size bound for synthesized higher-type arguments.
    pub size: usize,
    /// Nesting depth for comparing function-typed outputs.
    pub depth: usize,
    /// Input memories per test point.
    pub inputs: usize,
    pub fuel: usize,
    /// Node bound for the rewrite search in [`eqn_check`].
    pub search: usize,
    pub seed: u64,
}

impl Default for TestBudget {
    fn default() -> Self {
        TestBudget { size: 7, depth: 2, inputs: 32, fuel: 20_000, search: 3_000, seed: 0 }
    }
}

impl TestBudget {
    pub fn with_size(size: usize) -> TestBudget {
        TestBudget { size, ..TestBudget::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessStep {
    pub input: Memory,
    /// Output item descended into at the next step.
    pub probe: Option<(Loc, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub steps: Vec<WitnessStep>,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivVerdict {
    Distinguished(Witness),
    NotDistinguished { tests: usize },
}

impl EquivVerdict {
    pub fn is_distinguished(&self) -> bool {
        matches!(self, EquivVerdict::Distinguished(_))
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            let input = if s.input.is_empty() { "ε".to_string() } else { s.input.to_string() };
            write!(f, "input {i}: {input}")?;
            if let Some((l, k)) = &s.probe {
                write!(f, "  then apply output {}[{k}]", l.label())?;
            }
            writeln!(f)?;
        }
        writeln!(f, "left:  {}", self.left)?;
        write!(f, "right: {}", self.right)
    }
}

impl fmt::Display for EquivVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivVerdict::NotDistinguished { tests } => write!(f, "not distinguished ({tests} tests)"),
            EquivVerdict::Distinguished(w) => write!(f, "distinguished\n{w}"),
        }
    }
}

type SynthKey = (SimpleType, usize);

fn synth_cache() -> &'static Mutex<HashMap<SynthKey, Arc<Vec<Term>>>> {
    static CACHE: OnceLock<Mutex<HashMap<SynthKey, Arc<Vec<Term>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Largest enumeration run per type, in terms.
const ENUM_LIMIT: u128 = 40_000;

fn bases(ty: &SimpleType, out: &mut BTreeSet<Name>) {
    match ty {
        SimpleType::Base(b) => {
            out.insert(b.clone());
        }
        SimpleType::Arrow(i, o) => {
            for v in i.0.values().chain(o.0.values()) {
                for t in &v.0 {
                    bases(t, out);
                }
            }
        }
    }
}

fn base_literals(b: &str) -> Vec<Term> {
    match b {
        "Z" => (0..3).map(int).collect(),
        "B" => vec![cnst(ConstSym::Bool(true), Term::Nil), cnst(ConstSym::Bool(false), Term::Nil)],
        _ => Vec::new(),
    }
}

/// Closed inhabitants of `ty`: literals 0, 1, 2 at base types, and at arrow types the
/// typable closed terms up to `size`.
pub fn inhabitants(ty: &SimpleType, size: usize) -> Arc<Vec<Term>> {
    let key = (ty.clone(), size);
    if let Some(v) = synth_cache().lock().expect("cache lock").get(&key) {
        return v.clone();
    }
    let v = Arc::new(synthesize(ty, size));
    synth_cache().lock().expect("cache lock").insert(key, v.clone());
    v
}

fn synthesize(ty: &SimpleType, size: usize) -> Vec<Term> {
    let SimpleType::Arrow(_, _) = ty else {
        let SimpleType::Base(b) = ty else { unreachable!() };
        return base_literals(b);
    };
    let mut locs = BTreeSet::new();
    ty.locations(&mut locs);
    locs.insert(Loc::Main);
    let mut bs = BTreeSet::new();
    bases(ty, &mut bs);
    let literals: Vec<Term> = bs.iter().flat_map(|b| base_literals(b)).collect();
    let mut e = gen::Enumerator::new(locs.into_iter().collect(), literals);
    let mut memo = HashMap::new();
    let mut total = 0u128;
    let mut out = Vec::new();
    let ctx = Context::new();
    for n in 1..=size {
        total += e.count(n, 0, &mut memo);
        if total > ENUM_LIMIT {
            break;
        }
        for t in e.of_size(n).iter() {
            if check(&ctx, t, ty).is_ok() {
                out.push(t.clone());
            }
        }
    }
    out
}

fn input_memories(input: &MemoryType, budget: &TestBudget, rng: &mut impl Rng) -> Vec<Memory> {
    let slots: Vec<(Loc, Arc<Vec<Term>>)> = input
        .0
        .iter()
        .flat_map(|(l, v)| v.0.iter().map(move |t| (l.clone(), t.clone())))
        .map(|(l, t)| (l, inhabitants(&t, budget.size)))
        .collect();
    if slots.iter().any(|(_, c)| c.is_empty()) {
        return Vec::new();
    }
    let total = slots.iter().try_fold(1usize, |acc, (_, c)| acc.checked_mul(c.len()));
    let build = |choice: &[usize]| {
        let mut m = Memory::new();
        for ((l, c), &i) in slots.iter().zip(choice) {
            m.push(l, c[i].clone());
        }
        m
    };
    match total {
        Some(n) if n <= budget.inputs => {
            let mut out = Vec::with_capacity(n);
            let mut choice = vec![0usize; slots.len()];
            for _ in 0..n {
                out.push(build(&choice));
                for (k, (_, c)) in slots.iter().enumerate() {
                    choice[k] += 1;
                    if choice[k] < c.len() {
                        break;
                    }
                    choice[k] = 0;
                }
            }
            out
        }
        _ => {
            let mut out = vec![build(&vec![0; slots.len()])];
            while out.len() < budget.inputs {
                let choice: Vec<usize> = slots.iter().map(|(_, c)| rng.gen_range(0..c.len())).collect();
                out.push(build(&choice));
            }
            out
        }
    }
}

fn describe_run(r: &Result<crate::machine::RunResult, RunError>) -> String {
    match r {
        Ok(res) => {
            if res.memory.is_empty() {
                "ε".into()
            } else {
                res.memory.to_string()
            }
        }
        Err(RunError::Stuck { reason, .. }) => format!("stuck: {reason}"),
        Err(RunError::FuelExhausted { steps, .. }) => format!("no result after {steps} steps"),
    }
}

struct Tester<'a> {
    budget: &'a TestBudget,
    delta: DeltaRegistry,
    rng: rand_chacha::ChaCha8Rng,
    tests: usize,
}

/// A divergence found below the current level: the remaining steps, and the two sides.
type Divergence = (Vec<WitnessStep>, String, String);

impl Tester<'_> {
    fn equiv_at(&mut self, m: &Term, n: &Term, ty: &SimpleType, depth: usize) -> Option<Divergence> {
        let (input, output) = ty.as_arrow()?;
        let inputs = input_memories(input, self.budget, &mut self.rng);
        for mem in inputs {
            self.tests += 1;
            let rm = run(&mem, m, &self.delta, self.budget.fuel);
            let rn = run(&mem, n, &self.delta, self.budget.fuel);
            let found = match (&rm, &rn) {
                (Err(_), Err(_)) => None,
                (Ok(a), Ok(b)) => self.compare(&a.memory, &b.memory, output, depth),
                _ => Some((Vec::new(), describe_run(&rm), describe_run(&rn))),
            };
            if let Some((rest, l, r)) = found {
                let probe = rest.first().and_then(|s| s.probe.clone());
                let mut steps = vec![WitnessStep { input: mem, probe }];
                steps.extend(rest.into_iter().skip(1));
                return Some((steps, l, r));
            }
        }
        None
    }

    /// Compares outputs. A nested divergence is returned with a leading placeholder step
    /// carrying the probe position.
    fn compare(&mut self, a: &Memory, b: &Memory, output: &MemoryType, depth: usize) -> Option<Divergence> {
        let mut locs = a.locations();
        locs.extend(b.locations());
        locs.extend(output.0.keys().cloned());
        for l in &locs {
            let (sa, sb) = (a.stack(l), b.stack(l));
            if sa.len() != sb.len() {
                return Some((Vec::new(), a.to_string(), b.to_string()));
            }
            let tys = output.get(l);
            for (i, (x, y)) in sa.iter().zip(sb.iter()).enumerate() {
                match tys.get(i) {
                    Some(t @ SimpleType::Arrow(_, _)) => {
                        if depth == 0 {
                            continue;
                        }
                        if let Some((steps, left, right)) = self.equiv_at(x, y, t, depth - 1) {
                            let mut out = vec![WitnessStep { input: Memory::new(), probe: Some((l.clone(), i)) }];
                            out.extend(steps);
                            return Some((out, left, right));
                        }
                    }
                    _ => {
                        if !alpha_eq(x, y) {
                            return Some((
                                Vec::new(),
                                format!("{}[{i}] = {}", l.label(), print_term(x)),
                                format!("{}[{i}] = {}", l.label(), print_term(y)),
                            ));
                        }
                    }
                }
            }
        }
        None
    }
}

fn check_side(side: &'static str, t: &Term, ty: &SimpleType) -> Result<(), EquivError> {
    if !is_closed(t) {
        return Err(EquivError::Open(side));
    }
    check(&Context::new(), t, ty)
        .map(|_| ())
        .map_err(|e| EquivError::IllTyped { side, ty: ty.to_string(), reason: e.to_string() })
}

/// Test `m ∼ n : ty` on synthesized inputs. `NotDistinguished` holds only up to the budget.
pub fn machine_equiv(m: &Term, n: &Term, ty: &SimpleType, budget: &TestBudget) -> Result<EquivVerdict, EquivError> {
    check_side("left", m, ty)?;
    check_side("right", n, ty)?;
    let mut tester = Tester { budget, delta: DeltaRegistry::default(), rng: gen::rng(budget.seed), tests: 0 };
    Ok(match tester.equiv_at(m, n, ty, budget.depth) {
        Some((steps, left, right)) => EquivVerdict::Distinguished(Witness { steps, left, right }),
        None => EquivVerdict::NotDistinguished { tests: tester.tests },
    })
}

/// Re-run a witness and confirm the two sides still diverge.
pub fn replay(m: &Term, n: &Term, ty: &SimpleType, w: &Witness, fuel: usize) -> bool {
    let delta = DeltaRegistry::default();
    let (mut cm, mut cn, mut cty) = (m.clone(), n.clone(), ty.clone());
    for step in &w.steps {
        let Some((_, output)) = cty.as_arrow() else { return false };
        let output = output.clone();
        let rm = run(&step.input, &cm, &delta, fuel);
        let rn = run(&step.input, &cn, &delta, fuel);
        let (a, b) = match (rm, rn) {
            (Ok(a), Ok(b)) => (a.memory, b.memory),
            (Err(_), Err(_)) => return false,
            _ => return true,
        };
        match &step.probe {
            Some((l, i)) => {
                let (Some(x), Some(y), Some(t)) = (a.stack(l).items().get(*i), b.stack(l).items().get(*i), output.get(l).get(*i))
                else {
                    return false;
                };
                cm = x.clone();
                cn = y.clone();
                cty = t.clone();
            }
            None => {
                let budget = TestBudget { depth: 0, ..TestBudget::default() };
                let mut t = Tester { budget: &budget, delta: DeltaRegistry::default(), rng: gen::rng(0), tests: 0 };
                return t.compare(&a, &b, &output, 0).is_some();
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Equational checking

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqnResult {
    /// A rewrite trace joining the two sides, one line per term.
    Proved(Vec<String>),
    Refuted(Witness),
    Unknown,
}

fn perm_key(t: &Term) -> Nameless {
    nameless(&perm_normal(&canonical(t)))
}

fn binder_types(t: &Typed, out: &mut Context) {
    match t {
        Typed::Nil => {}
        Typed::Var(_, _, k) | Typed::Const(_, _, k) => binder_types(k, out),
        Typed::Pop(_, x, ty, k) => {
            out.insert(x.clone(), ty.clone());
            binder_types(k, out);
        }
        Typed::Push(n, _, _, k) => {
            binder_types(n, out);
            binder_types(k, out);
        }
    }
}

fn chain(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    let mut cur = t;
    while let Some(k) = cur.cont() {
        out.push(cur.with_cont(Term::Nil));
        cur = k;
    }
    out
}

fn unchain(parts: &[Term]) -> Term {
    parts.iter().rev().fold(Term::Nil, |acc, p| p.with_cont(acc))
}

/// Terminal-law rewrites `M.<?y> → <?x>` at every position, where the segment `M`
/// has an exact frame and the popped outputs are unused.
fn terminal_moves(t: &Term, ctx: &Context, taken: &BTreeSet<Name>) -> Vec<Term> {
    let parts = chain(t);
    let mut out = Vec::new();
    for i in 0..parts.len() {
        for j in i + 1..=parts.len() {
            let seg = unchain(&parts[i..j]);
            let fv = free_vars(&seg);
            let sctx: Context = ctx.iter().filter(|(x, _)| fv.contains(*x)).map(|(x, t)| (x.clone(), t.clone())).collect();
            let Ok(s) = infer(&sctx, &seg) else { continue };
            let mut ins: BTreeMap<Loc, usize> = BTreeMap::new();
            let mut outs: BTreeMap<Loc, usize> = BTreeMap::new();
            let exact = s.input.0.iter().all(|(l, iv)| {
                let ov = &s.output.0[l];
                ins.insert(l.clone(), iv.items.len());
                outs.insert(l.clone(), ov.items.len());
                iv.row == ov.row
            });
            if !exact {
                continue;
            }
            let want: usize = outs.values().sum();
            if j + want > parts.len() {
                continue;
            }
            let mut popped: BTreeMap<Loc, usize> = BTreeMap::new();
            let mut vars = BTreeSet::new();
            let ok = parts[j..j + want].iter().all(|p| match p {
                Term::Pop(l, x, _, _) => {
                    *popped.entry(l.clone()).or_default() += 1;
                    vars.insert(x.clone());
                    true
                }
                _ => false,
            });
            outs.retain(|_, n| *n > 0);
            if !ok || popped != outs {
                continue;
            }
            let rest = unchain(&parts[j + want..]);
            let fvr = free_vars(&rest);
            let mut bound = BTreeSet::new();
            binders_of(&seg, &mut bound);
            if vars.iter().chain(bound.iter()).any(|x| fvr.contains(x)) {
                continue;
            }
            let mut avoid = taken.clone();
            let mut pops = Vec::new();
            for (l, n) in &ins {
                for _ in 0..*n {
                    let x = crate::syntax::fresh("w", |c| avoid.contains(c));
                    avoid.insert(x.clone());
                    pops.push(Term::Pop(l.clone(), x, None, Arc::new(Term::Nil)));
                }
            }
            let mut np = parts[..i].to_vec();
            np.extend(pops);
            np.extend(parts[j + want..].iter().cloned());
            out.push(unchain(&np));
        }
    }
    for (k, p) in parts.iter().enumerate() {
        if let Term::Push(n, a, _) = p {
            for n2 in terminal_moves(n, ctx, taken) {
                let mut np = parts.clone();
                np[k] = Term::Push(Arc::new(n2), a.clone(), Arc::new(Term::Nil));
                out.push(unchain(&np));
            }
        }
    }
    out
}

fn binders_of(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Nil => {}
        Term::Pop(_, x, _, k) => {
            out.insert(x.clone());
            binders_of(k, out);
        }
        Term::Push(n, _, k) => {
            binders_of(n, out);
            binders_of(k, out);
        }
        Term::Var(_, k) | Term::Const(_, k) => binders_of(k, out),
    }
}

fn moves(t: &Term, ty: &SimpleType) -> Vec<(&'static str, Term)> {
    let mut out = Vec::new();
    for r in redexes(t, true) {
        if let Ok(t2) = reduce_at(t, &r) {
            out.push((if r.is_beta() { "β" } else { "η" }, t2));
        }
    }
    if let Ok(d) = check(&Context::new(), t, ty) {
        let mut ctx = Context::new();
        binder_types(&d.typed, &mut ctx);
        let mut taken = BTreeSet::new();
        all_names(t, &mut taken);
        for t2 in terminal_moves(t, &ctx, &taken) {
            out.push(("!", t2));
        }
    }
    out
}

struct Visit {
    term: Term,
    parent: Option<(Nameless, &'static str)>,
}

/// Bidirectional breadth-first rewriting from both sides, keyed modulo permutation.
fn join(m: &Term, n: &Term, ty: &SimpleType, limit: usize) -> Option<Vec<String>> {
    let ctx = Context::new();
    let mut seen: [HashMap<Nameless, Visit>; 2] = [HashMap::new(), HashMap::new()];
    let mut queue: [VecDeque<Nameless>; 2] = [VecDeque::new(), VecDeque::new()];
    for (side, t) in [m, n].into_iter().enumerate() {
        let t = canonical(t);
        let k = perm_key(&t);
        seen[side].insert(k.clone(), Visit { term: t, parent: None });
        queue[side].push_back(k);
    }
    let meet = |seen: &[HashMap<Nameless, Visit>; 2], k: &Nameless| seen[0].contains_key(k) && seen[1].contains_key(k);
    let k0 = perm_key(m);
    let mut found = if meet(&seen, &k0) { Some(k0) } else { None };
    let mut visited = 2;
    let mut side = 0;
    while found.is_none() && visited < limit && (!queue[0].is_empty() || !queue[1].is_empty()) {
        if queue[side].is_empty() {
            side = 1 - side;
        }
        let Some(k) = queue[side].pop_front() else { break };
        let term = seen[side][&k].term.clone();
        for (law, t2) in moves(&term, ty) {
            let t2 = canonical(&t2);
            let k2 = perm_key(&t2);
            if seen[side].contains_key(&k2) || check(&ctx, &t2, ty).is_err() {
                continue;
            }
            seen[side].insert(k2.clone(), Visit { term: t2, parent: Some((k.clone(), law)) });
            visited += 1;
            if seen[1 - side].contains_key(&k2) {
                found = Some(k2);
                break;
            }
            queue[side].push_back(k2);
        }
        side = 1 - side;
    }
    let k = found?;
    let path = |side: usize| {
        let mut out = Vec::new();
        let mut cur = k.clone();
        loop {
            let v = &seen[side][&cur];
            out.push((v.term.clone(), v.parent.as_ref().map(|p| p.1)));
            match &v.parent {
                Some((p, _)) => cur = p.clone(),
                None => break,
            }
        }
        out
    };
    // Left path runs from the meeting point back to m.
    let mut left = path(0);
    left.reverse();
    let right = path(1);
    let mut lines = Vec::new();
    for (t, law) in &left {
        lines.push(match law {
            None => format!("   {}", print_term(t)),
            Some(l) => format!("={l} {}", print_term(t)),
        });
    }
    for w in right.windows(2) {
        lines.push(format!("={} {}", w[0].1.unwrap_or("~"), print_term(&w[1].0)));
    }
    Some(lines)
}

/// Proved by rewriting, refuted by machine testing, or unknown.
pub fn eqn_check(m: &Term, n: &Term, ty: &SimpleType, budget: &TestBudget) -> Result<EqnResult, EquivError> {
    check_side("left", m, ty)?;
    check_side("right", n, ty)?;
    if let Some(trace) = join(m, n, ty, budget.search) {
        return Ok(EqnResult::Proved(trace));
    }
    Ok(match machine_equiv(m, n, ty, budget)? {
        EquivVerdict::Distinguished(w) => EqnResult::Refuted(w),
        EquivVerdict::NotDistinguished { .. } => EqnResult::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_term, parse_type};

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn ty(s: &str) -> SimpleType {
        parse_type(s).unwrap()
    }

    fn z(n: usize) -> MemoryType {
        MemoryType::singleton(Loc::Main, vec![SimpleType::base("Z"); n])
    }

    #[test]
    fn combinator_table() {
        assert!(alpha_eq(&ccc_combinator(&Combinator::Delta(z(1))), &p("<x>.[x].[x]")));
        assert!(alpha_eq(&ccc_combinator(&Combinator::Eps), &p("<z>.z")));
        let pi1 = ccc_combinator(&Combinator::Pi1 { u: z(1), t: z(1) });
        assert!(alpha_eq(&pi1, &p("<x>.<y>.[x]")));
        let pi2 = ccc_combinator(&Combinator::Pi2 { u: z(1), t: z(1) });
        assert!(alpha_eq(&pi2, &p("<x>.<y>.[y]")));
        assert!(alpha_eq(&ccc_combinator(&Combinator::Bang(z(2))), &p("<a>.<b>")));
        assert!(alpha_eq(&ccc_combinator(&Combinator::EtaCurry(z(1))), &p("<x>.[[x]]")));
        let hom = ccc_combinator(&Combinator::Hom(p("[1]"), p("+")));
        assert!(alpha_eq(&hom, &p("<z>.[[1].z.+]")));
        // Two arguments are restored in their original order.
        let tr = ccc_combinator(&Combinator::TensorRight(z(2), p("[3]")));
        assert!(alpha_eq(&tr, &p("<b>.<a>.[3].[a].[b]")));
        assert_eq!(ccc_combinator(&Combinator::TensorLeft(p("[3]"), z(2))), p("[3]"));
        let d = ccc_combinator(&Combinator::Delta(z(2)));
        check(&Context::new(), &d, &ty("Z Z > Z Z Z Z")).unwrap();
        check(&Context::new(), &tr, &ty("Z Z > Z Z Z")).unwrap();
    }

    #[test]
    fn law_schemas() {
        let eta = law_instance(&Bindings::EtaFirstOrder { ty: SimpleType::base("Z"), loc: Loc::Main }).unwrap();
        assert_eq!(eta.lhs, Term::Nil);
        assert!(alpha_eq(&eta.rhs, &p("<a>.[a]")));
        let term = law_instance(&Bindings::Terminal { m: p("<x:Z>.[x].[x]") }).unwrap();
        assert!(alpha_eq(&term.lhs, &p("<x>.[x].[x].<y1>.<y2>")));
        assert!(alpha_eq(&term.rhs, &p("<x>")));
        assert_eq!(term.ty, ty("Z >"));
        let diag = law_instance(&Bindings::Diagonal { m: p("<x:Z>.[x].[x]") }).unwrap();
        assert_eq!(diag.ty, ty("Z > Z Z Z Z"));
        let ic = law_instance(&Bindings::Interchange { m: p("[1]"), n: p("<x:Z>.[x].[x].+") }).unwrap();
        assert_eq!(ic.ty, ty("Z > Z Z"));
        assert!(alpha_eq(&ic.rhs, &p("[1].<y>.<x>.[x].[x].+.[y]")));
        let beta = law_instance(&Bindings::Beta { arg: p("[2]"), var: name("f"), body: p("f.f") }).unwrap();
        assert!(alpha_eq(&beta.rhs, &p("[2].[2]")));
        assert!(law_instance(&Bindings::EtaHigherOrder { p: p("[1]") }).is_err());
        let eho = law_instance(&Bindings::EtaHigherOrder { p: p("[[1]]") }).unwrap();
        assert!(alpha_eq(&eho.rhs, &p("[[[1]].<z>.z]")));
    }

    #[test]
    fn machine_equiv_examples() {
        let b = TestBudget::default();
        let m = p("<x>.[x].[x].+");
        assert!(!machine_equiv(&m, &m, &ty("Z > Z"), &b).unwrap().is_distinguished());
        let v = machine_equiv(&p("[1]"), &p("[2]"), &ty("> Z"), &b).unwrap();
        let EquivVerdict::Distinguished(w) = &v else { panic!("{v}") };
        assert_eq!(w.steps.len(), 1);
        assert!(w.steps[0].input.is_empty());
        assert!(replay(&p("[1]"), &p("[2]"), &ty("> Z"), w, 1000));
        // Beta: [P].<x>.x against P.
        let pt = p("<y>.[y].[1].+");
        let lhs = p("[<y>.[y].[1].+].<x>.x");
        assert!(!machine_equiv(&lhs, &pt, &ty("Z > Z"), &b).unwrap().is_distinguished());
        assert!(matches!(
            machine_equiv(&p("[1]"), &p("[1].[1]"), &ty("> Z"), &b),
            Err(EquivError::IllTyped { side: "right", .. })
        ));
    }

    #[test]
    fn higher_type_witness_is_nested() {
        let b = TestBudget::default();
        let f = p("[<x>.[x].[1].+]");
        let g = p("[<x>.[x].[2].+]");
        let v = machine_equiv(&f, &g, &ty("> (Z > Z)"), &b).unwrap();
        let EquivVerdict::Distinguished(w) = &v else { panic!("{v}") };
        assert_eq!(w.steps.len(), 2);
        assert_eq!(w.steps[0].probe, Some((Loc::Main, 0)));
        assert!(replay(&f, &g, &ty("> (Z > Z)"), w, 1000));
        let shallow = TestBudget { depth: 0, ..b };
        assert!(!machine_equiv(&f, &g, &ty("> (Z > Z)"), &shallow).unwrap().is_distinguished());
    }

    #[test]
    fn synthesized_inhabitants_check() {
        let t = ty("Z > Z");
        let inh = inhabitants(&t, 5);
        assert!(inh.iter().any(|m| alpha_eq(m, &Term::Nil)));
        assert!(inh.iter().all(|m| check(&Context::new(), m, &t).is_ok()));
        assert_eq!(inhabitants(&ty("Z"), 7).len(), 3);
    }

    #[test]
    fn eqn_check_examples() {
        let b = TestBudget::default();
        let n = p("<x:Z>.[x].[1].+");
        let m = p("<x:Z>.[x].[x]");
        let [first, second] = product_existence(&n, &m).unwrap();
        assert!(matches!(eqn_check(&first.lhs, &first.rhs, &first.ty, &b).unwrap(), EqnResult::Proved(_)));
        assert!(matches!(eqn_check(&second.lhs, &second.rhs, &second.ty, &b).unwrap(), EqnResult::Proved(_)));
        let e = exponent_existence(&p("<a:Z>.<b:Z>.[a].[b].+"), 1).unwrap();
        assert!(matches!(eqn_check(&e.lhs, &e.rhs, &e.ty, &b).unwrap(), EqnResult::Proved(_)));
        assert!(matches!(eqn_check(&p("[1]"), &p("[2]"), &ty("> Z"), &b).unwrap(), EqnResult::Refuted(_)));
    }

    #[test]
    fn proof_trace_starts_and_ends_at_the_sides() {
        let b = TestBudget::default();
        let EqnResult::Proved(lines) = eqn_check(&p("[1].<x>.[x].[x]"), &p("[1].[1]"), &ty("> Z Z"), &b).unwrap() else {
            panic!()
        };
        assert!(lines[0].contains("[1].<"));
        assert!(lines.last().unwrap().ends_with("[1].[1]"));
        assert!(lines[1].starts_with("=β"));
    }

    #[test]
    fn machine_equivalence_is_coarser_than_the_equations() {
        // operators compute on the machine but have no equations
        let b = TestBudget::default();
        let (m, n, t) = (p("[1].[2].+"), p("[3]"), ty("> Z"));
        assert!(!machine_equiv(&m, &n, &t, &b).unwrap().is_distinguished());
        assert!(matches!(eqn_check(&m, &n, &t, &b).unwrap(), EqnResult::Unknown));
    }

    #[test]
    fn random_instances_typecheck() {
        let mut r = gen::rng(11);
        for law in EqnLaw::ALL {
            for _ in 0..5 {
                let i = random_instance(law, &mut r);
                check(&Context::new(), &i.lhs, &i.ty).unwrap();
                check(&Context::new(), &i.rhs, &i.ty).unwrap();
            }
        }
        for law in DerivedLaw::ALL {
            for i in random_derived(law, &mut r) {
                check(&Context::new(), &i.lhs, &i.ty).unwrap();
            }
        }
    }
}
