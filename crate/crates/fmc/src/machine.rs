//! The abstract machine: a memory of stacks, one per location, and a term to run.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::parser::print_term;
use crate::syntax::{int, locations_of, substitute, ConstSym, Loc, Term};

/// A stack of closed terms, top at the end.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Stack(Vec<Term>);

impl Stack {
    pub fn new(items: Vec<Term>) -> Stack {
        Stack(items)
    }

    pub fn push(&mut self, t: Term) {
        self.0.push(t);
    }

    pub fn pop(&mut self) -> Option<Term> {
        self.0.pop()
    }

    pub fn top(&self) -> Option<&Term> {
        self.0.last()
    }

    pub fn items(&self) -> &[Term] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Term> {
        self.0.iter()
    }
}

impl FromIterator<Term> for Stack {
    fn from_iter<I: IntoIterator<Item = Term>>(it: I) -> Self {
        Stack(it.into_iter().collect())
    }
}

/// Location-indexed stacks. Empty stacks are not stored, so equality is extensional.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Memory(BTreeMap<Loc, Stack>);

static EMPTY: Stack = Stack(Vec::new());

impl Memory {
    pub fn new() -> Memory {
        Memory::default()
    }

    pub fn stack(&self, a: &Loc) -> &Stack {
        self.0.get(a).unwrap_or(&EMPTY)
    }

    pub fn push(&mut self, a: &Loc, t: Term) {
        self.0.entry(a.clone()).or_default().push(t);
    }

    pub fn pop(&mut self, a: &Loc) -> Option<Term> {
        let s = self.0.get_mut(a)?;
        let t = s.pop();
        if s.is_empty() {
            self.0.remove(a);
        }
        t
    }

    /// Append `s` on top of the stack at `a`.
    pub fn extend_stack(&mut self, a: Loc, s: Stack) {
        if s.is_empty() {
            return;
        }
        self.0.entry(a).or_default().0.extend(s.0);
    }

    pub fn set(&mut self, a: Loc, s: Stack) {
        if s.is_empty() {
            self.0.remove(&a);
        } else {
            self.0.insert(a, s);
        }
    }

    /// Non-empty locations in order.
    pub fn iter(&self) -> impl Iterator<Item = (&Loc, &Stack)> {
        self.0.iter()
    }

    pub fn locations(&self) -> BTreeSet<Loc> {
        self.0.keys().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total number of stacked terms.
    pub fn depth(&self) -> usize {
        self.0.values().map(Stack::len).sum()
    }
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::print_memory(self, " | "))
    }
}

pub type DeltaFn = Arc<dyn Fn(&[Term]) -> Option<Vec<Term>> + Send + Sync>;

/// Operator semantics: for each operator name, its arity and a partial function from
/// inputs (in stack order, top last) to outputs (pushed in order).
#[derive(Clone)]
pub struct DeltaRegistry {
    ops: HashMap<String, (usize, usize, DeltaFn)>,
}

impl fmt::Debug for DeltaRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<_> = self.ops.keys().collect();
        names.sort();
        f.debug_struct("DeltaRegistry").field("ops", &names).finish()
    }
}

fn as_int(t: &Term) -> Option<i64> {
    match t {
        Term::Const(ConstSym::Int(n), k) if k.is_nil() => Some(*n),
        _ => None,
    }
}

fn as_bool(t: &Term) -> Option<bool> {
    match t {
        Term::Const(ConstSym::Bool(b), k) if k.is_nil() => Some(*b),
        _ => None,
    }
}

impl Default for DeltaRegistry {
    fn default() -> Self {
        let mut d = DeltaRegistry::empty();
        d.register("+", 2, 1, |xs| Some(vec![int(as_int(&xs[0])?.checked_add(as_int(&xs[1])?)?)]));
        d.register("mul", 2, 1, |xs| Some(vec![int(as_int(&xs[0])?.checked_mul(as_int(&xs[1])?)?)]));
        // stack holds N, M, b with b on top
        d.register("if", 3, 1, |xs| Some(vec![if as_bool(&xs[2])? { xs[0].clone() } else { xs[1].clone() }]));
        d
    }
}

impl DeltaRegistry {
    pub fn empty() -> DeltaRegistry {
        DeltaRegistry { ops: HashMap::new() }
    }

    pub fn register(
        &mut self,
        op: &str,
        arity_in: usize,
        arity_out: usize,
        f: impl Fn(&[Term]) -> Option<Vec<Term>> + Send + Sync + 'static,
    ) {
        self.ops.insert(op.to_string(), (arity_in, arity_out, Arc::new(f)));
    }

    pub fn get(&self, op: &str) -> Option<(usize, usize, &DeltaFn)> {
        self.ops.get(op).map(|(i, o, f)| (*i, *o, f))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineState {
    pub memory: Memory,
    pub code: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StuckReason {
    #[error("pop on empty stack at location {0}")]
    PopOnEmpty(Loc),
    #[error("operator `{sym}` undefined on inputs {inputs}")]
    DeltaUndefined { sym: String, inputs: String },
    #[error("operator `{0}` finds too few items on the main stack")]
    DeltaUnderflow(String),
    #[error("free variable `{0}` in head position")]
    FreeVariable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Stepped(MachineState),
    Terminal(Memory),
    Stuck(StuckReason),
}

/// One transition.
pub fn step(s: &MachineState, d: &DeltaRegistry) -> Step {
    match &s.code {
        Term::Nil => Step::Terminal(s.memory.clone()),
        Term::Push(n, a, k) => {
            let mut m = s.memory.clone();
            m.push(a, (**n).clone());
            Step::Stepped(MachineState { memory: m, code: (**k).clone() })
        }
        Term::Pop(a, x, _, k) => {
            let mut m = s.memory.clone();
            match m.pop(a) {
                Some(n) => Step::Stepped(MachineState { memory: m, code: substitute(&n, x, k) }),
                None => Step::Stuck(StuckReason::PopOnEmpty(a.clone())),
            }
        }
        Term::Var(x, _) => Step::Stuck(StuckReason::FreeVariable(x.to_string())),
        Term::Const(c, k) => {
            let mut m = s.memory.clone();
            if c.is_literal() {
                m.push(&Loc::Main, Term::Const(c.clone(), Arc::new(Term::Nil)));
                return Step::Stepped(MachineState { memory: m, code: (**k).clone() });
            }
            let nm = c.name();
            let Some((n, _, f)) = d.get(&nm) else {
                return Step::Stuck(StuckReason::DeltaUndefined { sym: nm, inputs: "(unregistered)".into() });
            };
            if m.stack(&Loc::Main).len() < n {
                return Step::Stuck(StuckReason::DeltaUnderflow(nm));
            }
            let mut inputs: Vec<Term> = (0..n).map(|_| m.pop(&Loc::Main).expect("checked")).collect();
            inputs.reverse();
            match f(&inputs) {
                Some(outs) => {
                    for o in outs {
                        m.push(&Loc::Main, o);
                    }
                    Step::Stepped(MachineState { memory: m, code: (**k).clone() })
                }
                None => Step::Stuck(StuckReason::DeltaUndefined {
                    sym: nm,
                    inputs: inputs.iter().map(print_term).collect::<Vec<_>>().join(" "),
                }),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub memory: Memory,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("fuel exhausted after {steps} steps")]
    FuelExhausted { state: MachineState, steps: usize },
    #[error("stuck after {steps} steps: {reason}")]
    Stuck { state: MachineState, reason: StuckReason, steps: usize },
}

/// Run from `(m, t)` for at most `fuel` transitions.
pub fn run(m: &Memory, t: &Term, d: &DeltaRegistry, fuel: usize) -> Result<RunResult, RunError> {
    let mut s = MachineState { memory: m.clone(), code: t.clone() };
    let mut steps = 0;
    loop {
        match step(&s, d) {
            Step::Terminal(memory) => return Ok(RunResult { memory, steps }),
            Step::Stuck(reason) => return Err(RunError::Stuck { state: s, reason, steps }),
            Step::Stepped(next) => {
                if steps == fuel {
                    return Err(RunError::FuelExhausted { state: s, steps });
                }
                steps += 1;
                s = next;
            }
        }
    }
}

/// How a trace ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEnd {
    Terminal,
    Stuck(StuckReason),
    FuelExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<MachineState>,
    pub end: TraceEnd,
}

pub fn trace(m: &Memory, t: &Term, d: &DeltaRegistry, fuel: usize) -> Trace {
    let mut states = vec![MachineState { memory: m.clone(), code: t.clone() }];
    loop {
        let s = states.last().expect("nonempty");
        match step(s, d) {
            Step::Terminal(_) => return Trace { states, end: TraceEnd::Terminal },
            Step::Stuck(r) => return Trace { states, end: TraceEnd::Stuck(r) },
            Step::Stepped(next) => {
                if states.len() > fuel {
                    return Trace { states, end: TraceEnd::FuelExhausted };
                }
                states.push(next);
            }
        }
    }
}

impl Trace {
    /// Locations shown as columns: those of the initial memory, the code, and λ.
    pub fn columns(&self) -> Vec<Loc> {
        let mut locs = BTreeSet::new();
        locs.insert(Loc::Main);
        for s in &self.states {
            locs.extend(s.memory.locations());
        }
        locs.extend(locations_of(&self.states[0].code));
        // named locations first, λ last, as in the memory literal convention
        let mut v: Vec<Loc> = locs.iter().filter(|l| !l.is_main()).cloned().collect();
        v.push(Loc::Main);
        v
    }

    /// One line per state: `loc = stack | ... || code`.
    pub fn render(&self) -> String {
        let cols = self.columns();
        let mut out = String::new();
        for s in &self.states {
            out.push_str(&render_state(s, &cols));
            out.push('\n');
        }
        match &self.end {
            TraceEnd::Terminal => {}
            TraceEnd::Stuck(r) => out.push_str(&format!("stuck: {r}\n")),
            TraceEnd::FuelExhausted => out.push_str("fuel exhausted\n"),
        }
        out
    }
}

pub fn render_state(s: &MachineState, cols: &[Loc]) -> String {
    let mem = cols
        .iter()
        .map(|l| {
            let st = s.memory.stack(l);
            let items = if st.is_empty() {
                "ε".to_string()
            } else {
                st.iter().map(print_term).collect::<Vec<_>>().join(" ")
            };
            format!("{l} = {items}")
        })
        .collect::<Vec<_>>()
        .join(" | ");
    format!("{mem} || {}", print_term(&s.code))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_memory, parse_term};

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn example_run() {
        let m = parse_memory("rnd = 7 3 ; c = 5").unwrap();
        let r = run(&m, &p("rnd<x>.[x].c<y>.[y].+.<z>.[z]c"), &DeltaRegistry::default(), 100).unwrap();
        assert_eq!(r.steps, 7);
        assert_eq!(r.memory, parse_memory("rnd = 7 ; c = 8").unwrap());
    }

    #[test]
    fn arithmetic() {
        let r = run(&Memory::new(), &p("[4].[3].[2].+.mul.[1].+"), &DeltaRegistry::default(), 100).unwrap();
        assert_eq!(r.memory.stack(&Loc::Main).items(), &[int(21)]);
    }

    #[test]
    fn duplicate() {
        let r = run(&Memory::new(), &p("[1].<x>.[x].[x]"), &DeltaRegistry::default(), 100).unwrap();
        assert_eq!(r.steps, 4);
        assert_eq!(r.memory.stack(&Loc::Main).items(), &[int(1), int(1)]);
    }

    #[test]
    fn trivial_and_stuck() {
        let d = DeltaRegistry::default();
        assert_eq!(step(&MachineState { memory: Memory::new(), code: Term::Nil }, &d), Step::Terminal(Memory::new()));
        assert_eq!(
            step(&MachineState { memory: Memory::new(), code: p("<x>.*") }, &d),
            Step::Stuck(StuckReason::PopOnEmpty(Loc::Main))
        );
        assert!(matches!(
            run(&Memory::new(), &p("[1].+"), &d, 10),
            Err(RunError::Stuck { reason: StuckReason::DeltaUnderflow(_), .. })
        ));
        assert!(matches!(
            run(&Memory::new(), &p("[*].[1].+"), &d, 10),
            Err(RunError::Stuck { reason: StuckReason::DeltaUndefined { .. }, .. })
        ));
    }

    #[test]
    fn conditional_picks_by_boolean() {
        let d = DeltaRegistry::default();
        let r = run(&Memory::new(), &p("[1].[2].[true].if"), &d, 10).unwrap();
        assert_eq!(r.memory.stack(&Loc::Main).items(), &[int(1)]);
        let r = run(&Memory::new(), &p("[1].[2].[false].if"), &d, 10).unwrap();
        assert_eq!(r.memory.stack(&Loc::Main).items(), &[int(2)]);
    }

    #[test]
    fn trace_table() {
        let m = parse_memory("rnd = 7 3 ; c = 5").unwrap();
        let t = trace(&m, &p("rnd<x>.[x].c<y>.[y].+.<z>.[z]c"), &DeltaRegistry::default(), 100);
        assert_eq!(t.states.len(), 8);
        let lines: Vec<String> = t.render().lines().map(String::from).collect();
        assert_eq!(lines[0], "c = 5 | rnd = 7 3 | λ = ε || rnd<x>.[x].c<y>.[y].+.<z>.[z]c");
        assert_eq!(lines[7], "c = 8 | rnd = 7 | λ = ε || *");
        let single = trace(&Memory::new(), &Term::Nil, &DeltaRegistry::default(), 10);
        assert_eq!(single.states.len(), 1);
    }

    #[test]
    fn fuel() {
        let omega = p("[<x>.[x].x].<x>.[x].x");
        assert!(matches!(run(&Memory::new(), &omega, &DeltaRegistry::default(), 50), Err(RunError::FuelExhausted { .. })));
    }
}
