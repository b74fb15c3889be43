//! Monotone-functional interpretation of typed terms, collapse, and the
//! strong-normalisation measure.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::machine::{Memory, Stack};
use crate::syntax::{name, Loc, Name, Term};
use crate::types::{check, Context, Derivation, MemoryType, SimpleType, Typed};

/// Element of the domain of a type. Base types are a one-point domain.
#[derive(Clone, Debug)]
pub enum SnValue {
    Unit,
    Fun(Arc<Functional>),
}

/// Memory values: location-indexed tuples, bottom to top.
pub type SnMemory = BTreeMap<Loc, Vec<SnValue>>;

/// A monotone functional `⟦s⟧ → ℕ × ⟦t⟧`, kept as a suspension.
#[derive(Debug)]
pub enum Functional {
    /// `s ↦ (k, 0_t)`; `k = 0` is the least element.
    Konst { count: u64, input: MemoryType, output: MemoryType },
    /// `s ↦ (k + Σ ⌊s_i⌋, 0_t)`, sensitive to its arguments.
    Probe { count: u64, input: MemoryType, output: MemoryType },
    /// Adds `k` to the count of another functional.
    Shift(SnValue, u64),
    /// Interpretation of a typed term under a valuation.
    Closure { body: Arc<Typed>, env: Valuation, input: MemoryType, output: MemoryType, variant: bool },
}

impl Functional {
    pub fn input(&self) -> &MemoryType {
        match self {
            Functional::Konst { input, .. } | Functional::Probe { input, .. } | Functional::Closure { input, .. } => input,
            Functional::Shift(SnValue::Fun(f), _) => f.input(),
            Functional::Shift(SnValue::Unit, _) => unreachable!("shift of a base value"),
        }
    }

    pub fn output(&self) -> &MemoryType {
        match self {
            Functional::Konst { output, .. } | Functional::Probe { output, .. } | Functional::Closure { output, .. } => output,
            Functional::Shift(SnValue::Fun(f), _) => f.output(),
            Functional::Shift(SnValue::Unit, _) => unreachable!("shift of a base value"),
        }
    }
}

/// Persistent variable valuation.
#[derive(Clone, Debug, Default)]
pub struct Valuation(Option<Arc<(Name, SnValue, Valuation)>>);

impl Valuation {
    pub fn new() -> Valuation {
        Valuation(None)
    }

    pub fn with(&self, x: Name, v: SnValue) -> Valuation {
        Valuation(Some(Arc::new((x, v, self.clone()))))
    }

    pub fn get(&self, x: &str) -> Option<&SnValue> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if &*node.0 == x {
                return Some(&node.1);
            }
            cur = &node.2;
        }
        None
    }

    /// `v(x:t) = 0_t`.
    pub fn least(ctx: &Context) -> Valuation {
        ctx.iter().fold(Valuation::new(), |v, (x, t)| v.with(x.clone(), least(t)))
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Name, SnValue)>) -> Valuation {
        pairs.into_iter().fold(Valuation::new(), |v, (x, s)| v.with(x, s))
    }
}

/// `0_t`.
pub fn least(t: &SimpleType) -> SnValue {
    match t {
        SimpleType::Base(_) => SnValue::Unit,
        SimpleType::Arrow(i, o) => {
            SnValue::Fun(Arc::new(Functional::Konst { count: 0, input: (**i).clone(), output: (**o).clone() }))
        }
    }
}

pub fn least_mem(m: &MemoryType) -> SnMemory {
    m.0.iter().map(|(l, v)| (l.clone(), v.0.iter().map(least).collect())).collect()
}

/// Apply a functional to a memory value of its input type.
pub fn apply(f: &SnValue, s: SnMemory) -> (u64, SnMemory) {
    let SnValue::Fun(f) = f else { panic!("apply on a base value") };
    match &**f {
        Functional::Konst { count, output, .. } => (*count, least_mem(output)),
        Functional::Probe { count, output, .. } => {
            let extra = s.values().flatten().fold(0u64, |acc, v| acc.saturating_add(collapse(v)));
            (count.saturating_add(extra), least_mem(output))
        }
        Functional::Shift(g, k) => {
            let (n, out) = apply(g, s);
            (n.saturating_add(*k), out)
        }
        Functional::Closure { body, env, variant, .. } => eval(body, env, s, *variant),
    }
}

/// `⌊f⌋ = π₁(f(0))`; base values collapse to 0.
pub fn collapse(f: &SnValue) -> u64 {
    match f {
        SnValue::Unit => 0,
        SnValue::Fun(g) => apply(f, least_mem(g.input())).0,
    }
}

/// Split off the top `n` items of each location.
fn take_top(mem: &mut SnMemory, shape: &MemoryType) -> SnMemory {
    let mut out = SnMemory::new();
    for (l, v) in &shape.0 {
        let st = mem.get_mut(l).expect("typed term: location present");
        let at = st.len().checked_sub(v.0.len()).expect("typed term: enough items");
        out.insert(l.clone(), st.split_off(at));
    }
    out
}

fn put_on(mem: &mut SnMemory, add: SnMemory) {
    for (l, v) in add {
        mem.entry(l).or_default().extend(v);
    }
}

/// Run the interpretation clauses left to right over a memory value.
/// With `variant`, pushes do not add the collapse of their argument.
pub fn eval(t: &Typed, env: &Valuation, mut mem: SnMemory, variant: bool) -> (u64, SnMemory) {
    let mut count = 0u64;
    let mut cur = t;
    let mut env = env.clone();
    loop {
        match cur {
            Typed::Nil => {
                mem.retain(|_, v| !v.is_empty());
                return (count, mem);
            }
            Typed::Pop(a, x, _, k) => {
                let r = mem.get_mut(a).and_then(Vec::pop).expect("typed term: pop has an item");
                env = env.with(x.clone(), r);
                count = count.saturating_add(1);
                cur = k;
            }
            Typed::Push(n, r, a, k) => {
                let f = arg_value(n, r, &env, variant);
                count = count.saturating_add(1);
                if !variant {
                    count = count.saturating_add(collapse(&f));
                }
                mem.entry(a.clone()).or_default().push(f);
                cur = k;
            }
            Typed::Var(x, ty, k) => {
                let f = env.get(x).expect("valuation covers the context").clone();
                let (inp, _) = ty.as_arrow().expect("called variable has arrow type");
                let r = take_top(&mut mem, inp);
                let (n, u) = apply(&f, r);
                count = count.saturating_add(n);
                put_on(&mut mem, u);
                cur = k;
            }
            Typed::Const(_, ty, k) => {
                // constants take one step, consuming and producing base values
                let (inp, out) = ty.as_arrow().expect("constant has arrow type");
                take_top(&mut mem, inp);
                put_on(&mut mem, least_mem(out));
                count = count.saturating_add(1);
                cur = k;
            }
        }
    }
}

/// `⟦N⟧_v` for a pushed argument.
fn arg_value(n: &Arc<Typed>, r: &SimpleType, env: &Valuation, variant: bool) -> SnValue {
    match (&**n, r) {
        (_, SimpleType::Base(_)) => SnValue::Unit,
        (Typed::Var(x, _, k), _) if matches!(**k, Typed::Nil) => env.get(x).expect("valuation covers the context").clone(),
        (_, SimpleType::Arrow(i, o)) => SnValue::Fun(Arc::new(Functional::Closure {
            body: n.clone(),
            env: env.clone(),
            input: (**i).clone(),
            output: (**o).clone(),
            variant,
        })),
    }
}

/// `⟦Γ ⊢ M : t⟧_v`.
pub fn interpret(d: &Derivation, v: &Valuation) -> SnValue {
    interpret_with(d, v, false)
}

pub fn interpret_variant(d: &Derivation, v: &Valuation) -> SnValue {
    interpret_with(d, v, true)
}

fn interpret_with(d: &Derivation, v: &Valuation, variant: bool) -> SnValue {
    match &d.ty {
        SimpleType::Base(_) => SnValue::Unit,
        SimpleType::Arrow(i, o) => SnValue::Fun(Arc::new(Functional::Closure {
            body: d.typed.clone(),
            env: v.clone(),
            input: (**i).clone(),
            output: (**o).clone(),
            variant,
        })),
    }
}

/// `⌊⟦M⟧⌋` under the least valuation.
pub fn measure(d: &Derivation) -> u64 {
    collapse(&interpret(d, &Valuation::least(&d.ctx)))
}

/// The measure without the argument collapse in the push clause.
pub fn measure_variant(d: &Derivation) -> u64 {
    collapse(&interpret_variant(d, &Valuation::least(&d.ctx)))
}

/// The variant measure of a closed term applied to a given input memory value.
pub fn measure_variant_on(d: &Derivation, input: SnMemory) -> u64 {
    apply(&interpret_variant(d, &Valuation::least(&d.ctx)), input).0
}

/// Canonical closed term standing for `0_t`: pop every input, push the canonical term of
/// every output. `None` at base types, which have no constant-free inhabitant.
pub fn least_term(t: &SimpleType) -> Option<Term> {
    let (i, o) = t.as_arrow()?;
    let mut body = Term::Nil;
    for (l, v) in o.0.iter().rev() {
        for item in v.0.iter().rev() {
            body = Term::Push(Arc::new(least_term(item)?), l.clone(), Arc::new(body));
        }
    }
    let mut k = 0;
    for (l, v) in &i.0 {
        for _ in &v.0 {
            k += 1;
            body = Term::Pop(l.clone(), name(&format!("z{k}")), None, Arc::new(body));
        }
    }
    Some(body)
}

/// Machine memory holding [`least_term`] of every item of `m`.
pub fn least_input_memory(m: &MemoryType) -> Option<Memory> {
    let mut mem = Memory::new();
    for (l, v) in &m.0 {
        let items = v.0.iter().map(least_term).collect::<Option<Vec<_>>>()?;
        mem.set(l.clone(), Stack::new(items));
    }
    Some(mem)
}

/// Variant interpretations of the [`least_term`]s of `m`, as a memory value.
pub fn least_term_values(m: &MemoryType) -> Option<SnMemory> {
    let mut out = SnMemory::new();
    for (l, v) in &m.0 {
        let mut items = Vec::new();
        for t in &v.0 {
            let d = check(&Context::new(), &least_term(t)?, t).ok()?;
            items.push(interpret_variant(&d, &Valuation::new()));
        }
        out.insert(l.clone(), items);
    }
    Some(out)
}

/// Finite observation of a value: counts and outputs at a fixed family of inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obs {
    Unit,
    Fun(Vec<(u64, Vec<Obs>)>),
}

impl Obs {
    /// Pointwise order on observations of the same shape.
    pub fn leq(&self, other: &Obs) -> bool {
        match (self, other) {
            (Obs::Unit, Obs::Unit) => true,
            (Obs::Fun(a), Obs::Fun(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b).all(|((n, xs), (m, ys))| {
                        n <= m && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| x.leq(y))
                    })
            }
            _ => false,
        }
    }
}

/// Deterministic probe inputs: least, then each arrow item raised in turn.
pub fn probe_inputs(m: &MemoryType) -> Vec<SnMemory> {
    let base = least_mem(m);
    let mut out = vec![base.clone()];
    for (l, v) in &m.0 {
        for (i, t) in v.0.iter().enumerate() {
            if let SimpleType::Arrow(ti, to) = t {
                for f in [
                    Functional::Konst { count: 2, input: (**ti).clone(), output: (**to).clone() },
                    Functional::Probe { count: 1, input: (**ti).clone(), output: (**to).clone() },
                ] {
                    let mut s = base.clone();
                    s.get_mut(l).expect("location")[i] = SnValue::Fun(Arc::new(f));
                    out.push(s);
                }
            }
        }
    }
    out.truncate(9);
    out
}

pub fn observe(v: &SnValue, depth: usize) -> Obs {
    match v {
        SnValue::Unit => Obs::Unit,
        SnValue::Fun(f) => {
            if depth == 0 {
                return Obs::Fun(vec![(collapse(v), vec![])]);
            }
            let rows = probe_inputs(f.input())
                .into_iter()
                .map(|s| {
                    let (n, out) = apply(v, s);
                    (n, out.values().flatten().map(|x| observe(x, depth - 1)).collect())
                })
                .collect();
            Obs::Fun(rows)
        }
    }
}

/// Random element of `⟦t⟧`, built from the monotone families above.
pub fn sample_value(t: &SimpleType, rng: &mut impl Rng) -> SnValue {
    match t {
        SimpleType::Base(_) => SnValue::Unit,
        SimpleType::Arrow(i, o) => {
            let (input, output) = ((**i).clone(), (**o).clone());
            let k = rng.gen_range(0..4);
            let f = match rng.gen_range(0..3) {
                0 => Functional::Konst { count: k, input, output },
                1 => Functional::Probe { count: k, input, output },
                _ => Functional::Shift(
                    SnValue::Fun(Arc::new(Functional::Probe { count: 0, input, output })),
                    k,
                ),
            };
            SnValue::Fun(Arc::new(f))
        }
    }
}

pub fn sample_memory(m: &MemoryType, rng: &mut impl Rng) -> SnMemory {
    m.0.iter().map(|(l, v)| (l.clone(), v.0.iter().map(|t| sample_value(t, rng)).collect())).collect()
}

/// A value at least as large as `v`.
pub fn raise(v: &SnValue, k: u64) -> SnValue {
    match v {
        SnValue::Unit => SnValue::Unit,
        SnValue::Fun(_) => SnValue::Fun(Arc::new(Functional::Shift(v.clone(), k))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_term, parse_type};
    use crate::types::check;

    fn deriv(src: &str, ty: &str) -> Derivation {
        check(&Context::new(), &parse_term(src).unwrap(), &parse_type(ty).unwrap()).unwrap()
    }

    #[test]
    fn least_elements() {
        let unit = parse_type(">").unwrap();
        let (n, out) = apply(&least(&unit), SnMemory::new());
        assert_eq!((n, out.len()), (0, 0));
        assert_eq!(collapse(&least(&parse_type("(>) >").unwrap())), 0);
        assert!(least_mem(&MemoryType::default()).is_empty());
    }

    #[test]
    fn clause_examples() {
        assert_eq!(measure(&deriv("*", ">")), 0);
        assert_eq!(measure(&deriv("[*].<x>.*", ">")), 2);
        assert_eq!(measure_variant(&deriv("[*].<x>.*", ">")), 2);
        let d = deriv("<x>.[x]", "(>) > (>)");
        let f = interpret(&d, &Valuation::new());
        assert_eq!(collapse(&f), 2);
    }

    #[test]
    fn identity_passes_input_through() {
        let d = deriv("*", "(>) > (>)");
        let f = interpret(&d, &Valuation::new());
        let mut s = SnMemory::new();
        s.insert(Loc::Main, vec![SnValue::Fun(Arc::new(Functional::Konst {
            count: 5,
            input: MemoryType::default(),
            output: MemoryType::default(),
        }))]);
        let (n, out) = apply(&f, s);
        assert_eq!(n, 0);
        assert_eq!(collapse(&out[&Loc::Main][0]), 5);
    }

    #[test]
    fn push_counts_argument() {
        // the argument's own redex is counted by the collapse
        let full = measure(&deriv("[[*].<y>.*].<x>.*", ">"));
        let variant = measure_variant(&deriv("[[*].<y>.*].<x>.*", ">"));
        assert_eq!(full, 4);
        assert_eq!(variant, 2);
    }

    #[test]
    fn least_terms() {
        assert_eq!(least_term(&parse_type(">").unwrap()), Some(Term::Nil));
        let t = parse_type("(>) c(((>) >)) > (>)").unwrap();
        let m = least_term(&t).unwrap();
        assert_eq!(m.size(), 5, "{m}");
        check(&Context::new(), &m, &t).unwrap();
        assert_eq!(least_term(&parse_type("Z").unwrap()), None);
    }

    #[test]
    fn least_terms_are_not_free_under_the_variant() {
        // calling a least input costs machine steps but nothing under 0_t
        let d = deriv("<f>.[*].f", "((>) >) >");
        let (i, _) = d.ty.as_arrow().unwrap();
        assert_eq!(measure_variant(&d), 2);
        assert_eq!(measure_variant_on(&d, least_term_values(i).unwrap()), 3);
        let mem = least_input_memory(i).unwrap();
        let r = crate::machine::run(&mem, &d.term, &Default::default(), 100).unwrap();
        assert_eq!(r.steps, 3);
    }

    #[test]
    fn observation_order() {
        let t = parse_type("(>) >").unwrap();
        let a = observe(&least(&t), 2);
        let b = observe(&raise(&least(&t), 1), 2);
        assert!(a.leq(&b));
        assert!(!b.leq(&a));
    }
}
