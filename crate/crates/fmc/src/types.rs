//! Simple types with memory types, checking against the typing rules, and
//! inference with per-location row variables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::parser::{self, ParseError};
use crate::syntax::{free_vars, locations_of, name, ConstSym, Loc, Name, Term};

/// `α` or `?s_A > !t_A`. Both memory types are stored bottom to top; the input is
/// printed reversed (top first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimpleType {
    Base(Name),
    Arrow(Arc<MemoryType>, Arc<MemoryType>),
}

/// A stack type, bottom to top.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeVector(pub Vec<SimpleType>);

/// Location-indexed type vectors; absent locations are empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemoryType(pub BTreeMap<Loc, TypeVector>);

impl SimpleType {
    pub fn base(s: &str) -> SimpleType {
        SimpleType::Base(name(s))
    }

    pub fn arrow(i: MemoryType, o: MemoryType) -> SimpleType {
        SimpleType::Arrow(Arc::new(i.normalized()), Arc::new(o.normalized()))
    }

    /// Arrow on the main location only; vectors bottom to top.
    pub fn main_arrow(i: Vec<SimpleType>, o: Vec<SimpleType>) -> SimpleType {
        SimpleType::arrow(MemoryType::singleton(Loc::Main, i), MemoryType::singleton(Loc::Main, o))
    }

    pub fn unit_arrow() -> SimpleType {
        SimpleType::arrow(MemoryType::default(), MemoryType::default())
    }

    pub fn as_arrow(&self) -> Option<(&MemoryType, &MemoryType)> {
        match self {
            SimpleType::Arrow(i, o) => Some((i, o)),
            SimpleType::Base(_) => None,
        }
    }

    pub fn locations(&self, out: &mut BTreeSet<Loc>) {
        if let SimpleType::Arrow(i, o) = self {
            i.locations(out);
            o.locations(out);
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SimpleType::Base(_) => 1,
            SimpleType::Arrow(i, o) => 1 + i.size() + o.size(),
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&parser::print_type(self))
    }
}

impl TypeVector {
    pub fn concat(&self, other: &TypeVector) -> TypeVector {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        TypeVector(v)
    }

    pub fn reversed(&self) -> TypeVector {
        TypeVector(self.0.iter().rev().cloned().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl MemoryType {
    pub fn singleton(a: Loc, v: Vec<SimpleType>) -> MemoryType {
        let mut m = BTreeMap::new();
        if !v.is_empty() {
            m.insert(a, TypeVector(v));
        }
        MemoryType(m)
    }

    pub fn get(&self, a: &Loc) -> &[SimpleType] {
        self.0.get(a).map(|v| v.0.as_slice()).unwrap_or(&[])
    }

    pub fn normalized(mut self) -> MemoryType {
        self.0.retain(|_, v| !v.0.is_empty());
        self
    }

    /// Pointwise concatenation.
    pub fn concat(&self, other: &MemoryType) -> MemoryType {
        let mut m = self.0.clone();
        for (l, v) in &other.0 {
            let e = m.entry(l.clone()).or_default();
            *e = e.concat(v);
        }
        MemoryType(m).normalized()
    }

    pub fn reversed(&self) -> MemoryType {
        MemoryType(self.0.iter().map(|(l, v)| (l.clone(), v.reversed())).collect())
    }

    pub fn locations(&self, out: &mut BTreeSet<Loc>) {
        for (l, v) in &self.0 {
            out.insert(l.clone());
            for t in &v.0 {
                t.locations(out);
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.values().all(|v| v.0.is_empty())
    }

    pub fn size(&self) -> usize {
        self.0.values().flat_map(|v| v.0.iter()).map(SimpleType::size).sum()
    }
}

/// Variable typing context.
pub type Context = BTreeMap<Name, SimpleType>;

/// Typing signature for constants. Identifiers in constant types that are not
/// declared bases are type variables, instantiated afresh at each use.
#[derive(Clone, Debug)]
pub struct Signature {
    pub bases: BTreeSet<Name>,
    pub consts: BTreeMap<String, SimpleType>,
}

impl Default for Signature {
    fn default() -> Self {
        let mut s = Signature { bases: BTreeSet::new(), consts: BTreeMap::new() };
        s.bases.insert(name("Z"));
        s.bases.insert(name("B"));
        let zz_z = parser::parse_type("Z Z > Z").expect("builtin type");
        s.consts.insert("+".into(), zz_z.clone());
        s.consts.insert("mul".into(), zz_z);
        s.consts.insert("if".into(), parser::parse_type("B t t > t").expect("builtin type"));
        s
    }
}

/// The builtin signature, built once.
fn builtin() -> &'static Signature {
    static SIG: std::sync::OnceLock<Signature> = std::sync::OnceLock::new();
    SIG.get_or_init(Signature::default)
}

impl Signature {
    /// Lines `base Name` and `const name : type`; `#` starts a comment.
    pub fn parse(src: &str) -> Result<Signature, ParseError> {
        let mut sig = Signature::default();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at_line = |e: ParseError| ParseError {
                span: parser::SourceSpan { line: i + 1, ..e.span },
                ..e
            };
            if let Some(rest) = line.strip_prefix("base ") {
                sig.bases.insert(name(rest.trim()));
            } else if let Some(rest) = line.strip_prefix("const ") {
                let (n, ty) = rest.split_once(':').ok_or_else(|| ParseError {
                    message: "missing `:` in constant declaration".into(),
                    span: parser::SourceSpan { line: i + 1, col: 1, start: 0, end: 0 },
                    expected: vec!["`:`".into()],
                })?;
                let ty = parser::parse_type(ty.trim()).map_err(at_line)?;
                sig.consts.insert(n.trim().to_string(), ty);
            } else {
                return Err(ParseError {
                    message: format!("unrecognised declaration `{line}`"),
                    span: parser::SourceSpan { line: i + 1, col: 1, start: 0, end: 0 },
                    expected: vec!["`base`".into(), "`const`".into()],
                });
            }
        }
        Ok(sig)
    }

    pub fn literal_type(&self, c: &ConstSym) -> Option<SimpleType> {
        match c {
            ConstSym::Int(_) => Some(SimpleType::base("Z")),
            ConstSym::Bool(_) => Some(SimpleType::base("B")),
            ConstSym::Op { .. } => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Inference-level types

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IType {
    Base(Name),
    Var(u32),
    Arrow(Box<IMemory>, Box<IMemory>),
}

/// Row tail (bottom) followed by items, bottom to top. `row = None` is an exact vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IVector {
    pub row: Option<u32>,
    pub items: Vec<IType>,
}

/// A vector for every location in the problem's location set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IMemory(pub BTreeMap<Loc, IVector>);

impl IVector {
    pub fn exact(items: Vec<IType>) -> IVector {
        IVector { row: None, items }
    }

    pub fn row(r: u32) -> IVector {
        IVector { row: Some(r), items: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("node {node}: expected {expected}, found {found}")]
    Mismatch { expected: String, found: String, node: usize },
    #[error("node {node}: unbound variable `{name}`")]
    UnboundVariable { name: String, node: usize },
    #[error("node {node}: stack arity mismatch on location {loc}: {detail}")]
    ArityMismatch { loc: String, detail: String, node: usize },
    #[error("node {node}: occurs check failed")]
    OccursCheck { node: usize },
    #[error("node {node}: constant `{name}` has no type in the signature")]
    AmbiguousConstant { name: String, node: usize },
}

impl TypeError {
    pub fn node(&self) -> usize {
        match self {
            TypeError::Mismatch { node, .. }
            | TypeError::UnboundVariable { node, .. }
            | TypeError::ArityMismatch { node, .. }
            | TypeError::OccursCheck { node }
            | TypeError::AmbiguousConstant { node, .. } => *node,
        }
    }

    fn at(self, n: usize) -> TypeError {
        match self {
            TypeError::Mismatch { expected, found, .. } => TypeError::Mismatch { expected, found, node: n },
            TypeError::UnboundVariable { name, .. } => TypeError::UnboundVariable { name, node: n },
            TypeError::ArityMismatch { loc, detail, .. } => TypeError::ArityMismatch { loc, detail, node: n },
            TypeError::OccursCheck { .. } => TypeError::OccursCheck { node: n },
            TypeError::AmbiguousConstant { name, .. } => TypeError::AmbiguousConstant { name, node: n },
        }
    }
}

/// Unification failure before a node position is attached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Clash {
    Types(String, String),
    Arity(String, String),
    Occurs,
}

impl Clash {
    fn into_error(self, node: usize, loc: Option<&Loc>) -> TypeError {
        match self {
            Clash::Types(a, b) => TypeError::Mismatch { expected: a, found: b, node },
            Clash::Arity(a, b) => TypeError::ArityMismatch {
                loc: loc.map(|l| l.to_string()).unwrap_or_else(|| "?".into()),
                detail: format!("{a} vs {b}"),
                node,
            },
            Clash::Occurs => TypeError::OccursCheck { node },
        }
    }
}

/// `lhs == frame ++ rhs`, solvable once `rhs` has no unresolved tail.
#[derive(Clone, Debug)]
struct Pending {
    /// `lhs = frame · rhs`; for an output constraint `lhs` is the state after the call.
    output: bool,
    lhs: IVector,
    frame: IVector,
    rhs: IVector,
    node: usize,
    loc: Loc,
}

/// Substitution over type and row variables, with fresh-variable supply.
#[derive(Clone, Debug, Default)]
pub struct Unifier {
    tsub: HashMap<u32, IType>,
    rsub: HashMap<u32, IVector>,
    next: u32,
}

impl Unifier {
    pub fn new() -> Unifier {
        Unifier::default()
    }

    pub fn fresh_var(&mut self) -> IType {
        self.next += 1;
        IType::Var(self.next)
    }

    pub fn fresh_row(&mut self) -> u32 {
        self.next += 1;
        self.next
    }

    pub fn row_binding(&self, r: u32) -> Option<&IVector> {
        self.rsub.get(&r)
    }

    pub fn var_binding(&self, v: u32) -> Option<&IType> {
        self.tsub.get(&v)
    }

    fn shallow(&self, t: &IType) -> IType {
        let mut cur = t.clone();
        while let IType::Var(v) = cur {
            match self.tsub.get(&v) {
                Some(t2) => cur = t2.clone(),
                None => break,
            }
        }
        cur
    }

    /// Expand bound row tails.
    pub fn norm(&self, v: &IVector) -> IVector {
        let mut out = v.clone();
        while let Some(r) = out.row {
            match self.rsub.get(&r) {
                Some(b) => {
                    let mut items = b.items.clone();
                    items.extend(out.items);
                    out = IVector { row: b.row, items };
                }
                None => break,
            }
        }
        out
    }

    /// Fully resolve a type.
    pub fn zonk(&self, t: &IType) -> IType {
        match self.shallow(t) {
            IType::Arrow(i, o) => IType::Arrow(Box::new(self.zonk_mem(&i)), Box::new(self.zonk_mem(&o))),
            other => other,
        }
    }

    pub fn zonk_vec(&self, v: &IVector) -> IVector {
        let n = self.norm(v);
        IVector { row: n.row, items: n.items.iter().map(|t| self.zonk(t)).collect() }
    }

    pub fn zonk_mem(&self, m: &IMemory) -> IMemory {
        IMemory(m.0.iter().map(|(l, v)| (l.clone(), self.zonk_vec(v))).collect())
    }

    fn occurs_var(&self, v: u32, t: &IType) -> bool {
        match self.shallow(t) {
            IType::Var(w) => v == w,
            IType::Base(_) => false,
            IType::Arrow(i, o) => self.occurs_var_mem(v, &i) || self.occurs_var_mem(v, &o),
        }
    }

    fn occurs_var_mem(&self, v: u32, m: &IMemory) -> bool {
        m.0.values().any(|vec| self.norm(vec).items.iter().any(|t| self.occurs_var(v, t)))
    }

    fn occurs_row(&self, r: u32, v: &IVector) -> bool {
        let n = self.norm(v);
        n.row == Some(r) || n.items.iter().any(|t| self.occurs_row_ty(r, t))
    }

    fn occurs_row_ty(&self, r: u32, t: &IType) -> bool {
        match self.shallow(t) {
            IType::Arrow(i, o) => {
                i.0.values().any(|v| self.occurs_row(r, v)) || o.0.values().any(|v| self.occurs_row(r, v))
            }
            _ => false,
        }
    }

    pub fn unify(&mut self, a: &IType, b: &IType) -> Result<(), Clash> {
        let (a, b) = (self.shallow(a), self.shallow(b));
        match (&a, &b) {
            (IType::Var(x), IType::Var(y)) if x == y => Ok(()),
            (IType::Var(x), t) | (t, IType::Var(x)) => {
                if self.occurs_var(*x, t) {
                    return Err(Clash::Occurs);
                }
                self.tsub.insert(*x, t.clone());
                Ok(())
            }
            (IType::Base(x), IType::Base(y)) if x == y => Ok(()),
            (IType::Arrow(i1, o1), IType::Arrow(i2, o2)) => {
                self.unify_mem(i1, i2)?;
                self.unify_mem(o1, o2)
            }
            _ => Err(Clash::Types(self.show(&a), self.show(&b))),
        }
    }

    pub fn unify_mem(&mut self, a: &IMemory, b: &IMemory) -> Result<(), Clash> {
        let locs: BTreeSet<&Loc> = a.0.keys().chain(b.0.keys()).collect();
        let empty = IVector::exact(vec![]);
        for l in locs {
            let va = a.0.get(l).unwrap_or(&empty).clone();
            let vb = b.0.get(l).unwrap_or(&empty).clone();
            self.unify_vec(&va, &vb)?;
        }
        Ok(())
    }

    pub fn unify_vec(&mut self, a: &IVector, b: &IVector) -> Result<(), Clash> {
        let mut a = self.norm(a);
        let mut b = self.norm(b);
        if !a.items.is_empty() && !b.items.is_empty() {
            let x = a.items.pop().expect("nonempty");
            let y = b.items.pop().expect("nonempty");
            self.unify(&x, &y)?;
            return self.unify_vec(&a, &b);
        }
        match (a.items.is_empty(), b.items.is_empty()) {
            (true, true) => match (a.row, b.row) {
                (None, None) => Ok(()),
                (Some(r), Some(s)) if r == s => Ok(()),
                (Some(r), other) | (other, Some(r)) => {
                    self.rsub.insert(r, IVector { row: other, items: vec![] });
                    Ok(())
                }
            },
            (true, false) => self.bind_row(&a, &b),
            (false, true) => self.bind_row(&b, &a),
            (false, false) => unreachable!(),
        }
    }

    fn bind_row(&mut self, short: &IVector, long: &IVector) -> Result<(), Clash> {
        match short.row {
            Some(r) => {
                if self.occurs_row(r, long) {
                    return Err(Clash::Occurs);
                }
                self.rsub.insert(r, long.clone());
                Ok(())
            }
            None => Err(Clash::Arity(self.show_vec(short), self.show_vec(long))),
        }
    }

    pub fn show(&self, t: &IType) -> String {
        let mut names = Names::default();
        names.ty(&self.zonk(t), true)
    }

    pub fn show_vec(&self, v: &IVector) -> String {
        let mut names = Names::default();
        let z = self.zonk_vec(v);
        let mut parts: Vec<String> = Vec::new();
        if let Some(r) = z.row {
            parts.push(names.row(r));
        }
        parts.extend(z.items.iter().map(|t| names.ty(t, false)));
        if parts.is_empty() {
            "ε".into()
        } else {
            parts.join(" ")
        }
    }

    /// Replace remaining row variables by ε and type variables by `default`.
    pub fn ground(&self, t: &IType, default: &SimpleType) -> SimpleType {
        match self.zonk(t) {
            IType::Base(b) => SimpleType::Base(b),
            IType::Var(_) => default.clone(),
            IType::Arrow(i, o) => SimpleType::arrow(self.ground_mem(&i, default), self.ground_mem(&o, default)),
        }
    }

    pub fn ground_mem(&self, m: &IMemory, default: &SimpleType) -> MemoryType {
        MemoryType(
            m.0.iter()
                .map(|(l, v)| (l.clone(), TypeVector(self.zonk_vec(v).items.iter().map(|t| self.ground(t, default)).collect())))
                .collect(),
        )
        .normalized()
    }
}

/// Display names for variables: α1, α2, ... and ρ1, ρ2, ...
#[derive(Default)]
struct Names {
    vars: BTreeMap<u32, usize>,
    rows: BTreeMap<u32, usize>,
}

impl Names {
    fn var(&mut self, v: u32) -> String {
        let n = self.vars.len() + 1;
        format!("α{}", self.vars.entry(v).or_insert(n))
    }

    fn row(&mut self, r: u32) -> String {
        let n = self.rows.len() + 1;
        format!("ρ{}", self.rows.entry(r).or_insert(n))
    }

    fn ty(&mut self, t: &IType, top: bool) -> String {
        match t {
            IType::Base(b) => b.to_string(),
            IType::Var(v) => self.var(*v),
            IType::Arrow(i, o) => {
                let s = self.arrow(i, o);
                if top {
                    s
                } else {
                    format!("({s})")
                }
            }
        }
    }

    fn side(&mut self, m: &IMemory, input: bool, hide: &BTreeSet<Loc>) -> String {
        let mut parts = Vec::new();
        let render = |names: &mut Names, v: &IVector| -> Vec<String> {
            let mut xs: Vec<String> = Vec::new();
            if let Some(r) = v.row {
                xs.push(names.row(r));
            }
            xs.extend(v.items.iter().map(|t| names.ty(t, false)));
            if input {
                xs.reverse();
            }
            xs
        };
        for (l, v) in &m.0 {
            if let Loc::Named(n) = l {
                if hide.contains(l) || (v.row.is_none() && v.items.is_empty()) {
                    continue;
                }
                let xs = render(self, v);
                parts.push(format!("{n}({})", xs.join(" ")));
            }
        }
        if let Some(v) = m.0.get(&Loc::Main) {
            parts.extend(render(self, v));
        }
        parts.join(" ")
    }

    fn arrow(&mut self, i: &IMemory, o: &IMemory) -> String {
        // a named location whose input and output are the same bare row is a pass-through
        let hide: BTreeSet<Loc> = i
            .0
            .iter()
            .filter(|(l, v)| {
                !l.is_main() && v.items.is_empty() && v.row.is_some() && o.0.get(*l).map(|w| w == *v).unwrap_or(false)
            })
            .map(|(l, _)| l.clone())
            .collect();
        let left = self.side(i, true, &hide);
        let right = self.side(o, false, &hide);
        match (left.is_empty(), right.is_empty()) {
            (true, true) => ">".into(),
            (true, false) => format!("> {right}"),
            (false, true) => format!("{left} >"),
            (false, false) => format!("{left} > {right}"),
        }
    }
}

/// Principal-style type of a term: input and output memory types with row tails.
#[derive(Clone, Debug)]
pub struct Scheme {
    pub input: IMemory,
    pub output: IMemory,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = Names::default();
        f.write_str(&names.arrow(&self.input, &self.output))
    }
}

impl Scheme {
    /// Ground instance with every row set to ε and every type variable set to `default`.
    pub fn ground(&self, default: &SimpleType) -> SimpleType {
        let u = Unifier::new();
        SimpleType::arrow(u.ground_mem(&self.input, default), u.ground_mem(&self.output, default))
    }

    /// Ground instance under explicit row and variable assignments.
    pub fn instantiate(&self, rows: &dyn Fn(u32) -> Vec<SimpleType>, vars: &dyn Fn(u32) -> SimpleType) -> SimpleType {
        fn ty(t: &IType, rows: &dyn Fn(u32) -> Vec<SimpleType>, vars: &dyn Fn(u32) -> SimpleType) -> SimpleType {
            match t {
                IType::Base(b) => SimpleType::Base(b.clone()),
                IType::Var(v) => vars(*v),
                IType::Arrow(i, o) => SimpleType::arrow(mem(i, rows, vars), mem(o, rows, vars)),
            }
        }
        fn mem(m: &IMemory, rows: &dyn Fn(u32) -> Vec<SimpleType>, vars: &dyn Fn(u32) -> SimpleType) -> MemoryType {
            MemoryType(
                m.0.iter()
                    .map(|(l, v)| {
                        let mut items = v.row.map(rows).unwrap_or_default();
                        items.extend(v.items.iter().map(|t| ty(t, rows, vars)));
                        (l.clone(), TypeVector(items))
                    })
                    .collect(),
            )
            .normalized()
        }
        SimpleType::arrow(mem(&self.input, rows, vars), mem(&self.output, rows, vars))
    }

    pub fn row_vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        fn ty(t: &IType, out: &mut BTreeSet<u32>) {
            if let IType::Arrow(i, o) = t {
                mem(i, out);
                mem(o, out);
            }
        }
        fn mem(m: &IMemory, out: &mut BTreeSet<u32>) {
            for v in m.0.values() {
                if let Some(r) = v.row {
                    out.insert(r);
                }
                for t in &v.items {
                    ty(t, out);
                }
            }
        }
        mem(&self.input, &mut out);
        mem(&self.output, &mut out);
        out
    }

    pub fn type_vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        fn ty(t: &IType, out: &mut BTreeSet<u32>) {
            match t {
                IType::Var(v) => {
                    out.insert(*v);
                }
                IType::Base(_) => {}
                IType::Arrow(i, o) => {
                    mem(i, out);
                    mem(o, out);
                }
            }
        }
        fn mem(m: &IMemory, out: &mut BTreeSet<u32>) {
            for v in m.0.values() {
                for t in &v.items {
                    ty(t, out);
                }
            }
        }
        mem(&self.input, &mut out);
        mem(&self.output, &mut out);
        out
    }
}

/// A term annotated with the types chosen by the syntax-directed rules:
/// push arguments, pop binders, and called variables or constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Typed {
    Nil,
    Var(Name, SimpleType, Arc<Typed>),
    Push(Arc<Typed>, SimpleType, Loc, Arc<Typed>),
    Pop(Loc, Name, SimpleType, Arc<Typed>),
    Const(ConstSym, SimpleType, Arc<Typed>),
}

/// Rule instance at a node, in preorder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Nil,
    BaseVar,
    Pop,
    Push,
    SeqVar,
    Const,
}

/// Typing derivation of `Γ ⊢ M : t`.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub ctx: Context,
    pub term: Term,
    pub ty: SimpleType,
    pub typed: Arc<Typed>,
}

impl Derivation {
    pub fn rules(&self) -> Vec<Rule> {
        fn walk(t: &Typed, out: &mut Vec<Rule>, arg: bool) {
            match t {
                Typed::Nil => out.push(Rule::Nil),
                Typed::Var(_, ty, k) => {
                    let base = matches!(ty, SimpleType::Base(_)) && arg && matches!(**k, Typed::Nil);
                    out.push(if base { Rule::BaseVar } else { Rule::SeqVar });
                    walk(k, out, false);
                }
                Typed::Push(n, _, _, k) => {
                    out.push(Rule::Push);
                    walk(n, out, true);
                    walk(k, out, false);
                }
                Typed::Pop(_, _, _, k) => {
                    out.push(Rule::Pop);
                    walk(k, out, false);
                }
                Typed::Const(_, _, k) => {
                    out.push(Rule::Const);
                    walk(k, out, false);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.typed, &mut out, false);
        out
    }
}

struct Infer<'a> {
    sig: &'a Signature,
    locs: Vec<Loc>,
    u: Unifier,
    pending: Vec<Pending>,
    node_ty: Vec<Option<IType>>,
}

impl<'a> Infer<'a> {
    fn new(sig: &'a Signature, locs: BTreeSet<Loc>, nodes: usize) -> Infer<'a> {
        Infer { sig, locs: locs.into_iter().collect(), u: Unifier::new(), pending: Vec::new(), node_ty: vec![None; nodes] }
    }

    fn fresh_mem(&mut self) -> IMemory {
        let locs = self.locs.clone();
        IMemory(locs.into_iter().map(|l| (l, IVector::row(self.u.fresh_row()))).collect())
    }

    fn from_ground(&self, t: &SimpleType) -> IType {
        match t {
            SimpleType::Base(b) => IType::Base(b.clone()),
            SimpleType::Arrow(i, o) => IType::Arrow(Box::new(self.mem_from_ground(i)), Box::new(self.mem_from_ground(o))),
        }
    }

    fn mem_from_ground(&self, m: &MemoryType) -> IMemory {
        IMemory(
            self.locs
                .iter()
                .map(|l| (l.clone(), IVector::exact(m.get(l).iter().map(|t| self.from_ground(t)).collect())))
                .collect(),
        )
    }

    /// Signature type with type variables renamed apart.
    fn instantiate_sig(&mut self, t: &SimpleType, vars: &mut BTreeMap<Name, IType>) -> IType {
        match t {
            SimpleType::Base(b) if self.sig.bases.contains(b) => IType::Base(b.clone()),
            SimpleType::Base(b) => {
                if let Some(v) = vars.get(b) {
                    return v.clone();
                }
                let v = self.u.fresh_var();
                vars.insert(b.clone(), v.clone());
                v
            }
            SimpleType::Arrow(i, o) => {
                let i2 = self.instantiate_mem(i, vars);
                let o2 = self.instantiate_mem(o, vars);
                IType::Arrow(Box::new(i2), Box::new(o2))
            }
        }
    }

    fn instantiate_mem(&mut self, m: &MemoryType, vars: &mut BTreeMap<Name, IType>) -> IMemory {
        let locs = self.locs.clone();
        IMemory(
            locs.into_iter()
                .map(|l| {
                    let items = m.get(&l).iter().map(|t| self.instantiate_sig(t, vars)).collect();
                    (l, IVector::exact(items))
                })
                .collect(),
        )
    }

    /// A call whose input and output share a row `ρ` beyond the frame: from
    /// `L = θ·ρ` and `ω = θ·ρ·b` follows `ω = L·b`, whatever `θ` and `ρ` are.
    fn shared_rows(&mut self) -> Result<bool, TypeError> {
        for j in 0..self.pending.len() {
            if !self.pending[j].output {
                continue;
            }
            let out = self.u.norm(&self.pending[j].rhs);
            let Some(rho) = out.row else { continue };
            let frame = self.u.norm(&self.pending[j].frame);
            let found = self.pending.iter().position(|p| {
                !p.output && p.node == self.pending[j].node && p.loc == self.pending[j].loc && {
                    let i = self.u.norm(&p.rhs);
                    i.row == Some(rho) && i.items.is_empty() && self.u.norm(&p.frame) == frame
                }
            });
            if let Some(i) = found {
                let mut target = self.u.norm(&self.pending[i].lhs);
                target.items.extend(out.items);
                let p = self.pending.remove(j);
                self.u.unify_vec(&p.lhs, &target).map_err(|c| c.into_error(p.node, Some(&p.loc)))?;
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn solve(&mut self) -> Result<(), TypeError> {
        loop {
            let mut progressed = self.shared_rows()?;
            let mut rest = Vec::new();
            for mut p in std::mem::take(&mut self.pending) {
                let mut rhs = self.u.norm(&p.rhs);
                if rhs.row.is_none() {
                    let frame = self.u.norm(&p.frame);
                    let mut items = frame.items;
                    items.extend(rhs.items);
                    let target = IVector { row: frame.row, items };
                    self.u.unify_vec(&p.lhs, &target).map_err(|c| c.into_error(p.node, Some(&p.loc)))?;
                    progressed = true;
                    continue;
                }
                // the top of the left side is the top of the right side, whatever the rows
                if !rhs.items.is_empty() {
                    let mut lhs = self.u.norm(&p.lhs);
                    while let Some(want) = rhs.items.pop() {
                        let got = match lhs.items.pop() {
                            Some(t) => t,
                            None => match lhs.row {
                                // ρ = F·ρ·R with R nonempty has no finite solution
                                Some(r) if rhs.row == Some(r) => {
                                    return Err(Clash::Occurs.into_error(p.node, Some(&p.loc)));
                                }
                                Some(r) => {
                                    let r2 = self.u.fresh_row();
                                    let v = self.u.fresh_var();
                                    self.u.rsub.insert(r, IVector { row: Some(r2), items: vec![v.clone()] });
                                    lhs = IVector::row(r2);
                                    v
                                }
                                None => {
                                    return Err(TypeError::ArityMismatch {
                                        loc: p.loc.to_string(),
                                        detail: "call needs more items than the stack holds".into(),
                                        node: p.node,
                                    })
                                }
                            },
                        };
                        self.u.unify(&got, &want).map_err(|c| c.into_error(p.node, Some(&p.loc)))?;
                    }
                    p.lhs = lhs;
                    p.rhs = rhs;
                    progressed = true;
                }
                rest.push(p);
            }
            self.pending.extend(rest);
            if !progressed {
                return Ok(());
            }
        }
    }

    /// Solve what is determined, then fix undetermined tails of called functions to ε.
    ///
    /// An output tail under items popped after the call may instead hold those items;
    /// that is tried first, backtracking to ε.
    fn finish(&mut self) -> Result<(), TypeError> {
        let mut budget = 256;
        self.finish_from(&mut budget)
    }

    fn finish_from(&mut self, budget: &mut usize) -> Result<(), TypeError> {
        loop {
            self.solve()?;
            if self.pending.is_empty() {
                return Ok(());
            }
            let popped = self.pending.iter().find_map(|p| {
                let rhs = self.u.norm(&p.rhs);
                let lhs = self.u.norm(&p.lhs);
                match (p.output, rhs.row) {
                    (true, Some(r)) if rhs.items.is_empty() && !lhs.items.is_empty() => Some((r, lhs.items.len())),
                    _ => None,
                }
            });
            if let Some((r, k)) = popped {
                let mut first = None;
                for n in (0..=k).rev() {
                    if *budget == 0 {
                        break;
                    }
                    *budget -= 1;
                    let saved = (self.u.clone(), self.pending.clone(), self.node_ty.clone());
                    let items = (0..n).map(|_| self.u.fresh_var()).collect();
                    self.u.rsub.insert(r, IVector::exact(items));
                    match self.finish_from(budget) {
                        Ok(()) => return Ok(()),
                        Err(e) => {
                            first.get_or_insert(e);
                            (self.u, self.pending, self.node_ty) = saved;
                        }
                    }
                }
                if let Some(e) = first {
                    return Err(e);
                }
                self.u.rsub.insert(r, IVector::exact(vec![]));
                continue;
            }
            // rows standing for results of earlier calls are determined, not free
            let placeholders: BTreeSet<u32> =
                self.pending.iter().filter_map(|p| self.u.norm(&p.lhs).row.filter(|_| p.lhs.items.is_empty())).collect();
            let rows: Vec<u32> = self.pending.iter().filter_map(|p| self.u.norm(&p.rhs).row).collect();
            let r = rows.iter().find(|r| !placeholders.contains(r)).or(rows.first()).copied();
            if let Some(r) = r {
                self.u.rsub.insert(r, IVector::exact(vec![]));
            }
        }
    }

    fn lookup(&self, env: &[(Name, IType)], x: &Name) -> Option<IType> {
        env.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t.clone())
    }

    /// Walk the prefixes of `t` from memory state `st`, returning the final state.
    fn seq(&mut self, env: &mut Vec<(Name, IType)>, t: &Term, idx: usize, mut st: IMemory) -> Result<IMemory, TypeError> {
        let mut cur = t;
        let mut idx = idx;
        loop {
            match cur {
                Term::Nil => return Ok(st),
                Term::Pop(a, x, ann, k) => {
                    let v = self.u.norm(&st.0[a]);
                    let ty = match ann {
                        Some(t) => self.from_ground(t),
                        None => self.u.fresh_var(),
                    };
                    let mut v2 = v.clone();
                    match v2.items.pop() {
                        Some(top) => {
                            self.u.unify(&top, &ty).map_err(|c| c.into_error(idx, Some(a)))?;
                        }
                        None => match v.row {
                            Some(r) => {
                                let r2 = self.u.fresh_row();
                                self.u.rsub.insert(r, IVector { row: Some(r2), items: vec![ty.clone()] });
                                v2 = IVector::row(r2);
                            }
                            None => {
                                return Err(TypeError::ArityMismatch {
                                    loc: a.to_string(),
                                    detail: "pop from a stack whose type is empty".into(),
                                    node: idx,
                                })
                            }
                        },
                    }
                    st.0.insert(a.clone(), v2);
                    self.node_ty[idx] = Some(ty.clone());
                    env.push((x.clone(), ty));
                    let r = self.seq(env, k, idx + 1, st);
                    env.pop();
                    return r;
                }
                Term::Push(n, a, k) => {
                    let r = self.arg(env, n, idx + 1)?;
                    self.node_ty[idx] = Some(r.clone());
                    let mut v = self.u.norm(&st.0[a]);
                    v.items.push(r);
                    st.0.insert(a.clone(), v);
                    idx += 1 + n.size();
                    cur = k;
                }
                Term::Var(x, k) => {
                    let tx = self.lookup(env, x).ok_or_else(|| TypeError::UnboundVariable { name: x.to_string(), node: idx })?;
                    let tx = match self.u.shallow(&tx) {
                        IType::Var(v) => {
                            let f = IType::Arrow(Box::new(self.fresh_mem()), Box::new(self.fresh_mem()));
                            self.u.tsub.insert(v, f.clone());
                            f
                        }
                        IType::Base(b) => {
                            return Err(TypeError::Mismatch {
                                expected: "a function type for a called variable".into(),
                                found: format!("`{x}` of base type {b}"),
                                node: idx,
                            })
                        }
                        f => f,
                    };
                    self.node_ty[idx] = Some(tx.clone());
                    st = self.call(&tx, st, idx)?;
                    idx += 1;
                    cur = k;
                }
                Term::Const(c, k) => {
                    let ty = if let Some(b) = self.sig.literal_type(c) {
                        let locs = self.locs.clone();
                        let out = IMemory(
                            locs.iter()
                                .map(|l| {
                                    let items = if l.is_main() { vec![self.from_ground(&b)] } else { vec![] };
                                    (l.clone(), IVector::exact(items))
                                })
                                .collect(),
                        );
                        let inp = IMemory(locs.iter().map(|l| (l.clone(), IVector::exact(vec![]))).collect());
                        IType::Arrow(Box::new(inp), Box::new(out))
                    } else {
                        let sigty = self
                            .sig
                            .consts
                            .get(&c.name())
                            .cloned()
                            .ok_or_else(|| TypeError::AmbiguousConstant { name: c.name(), node: idx })?;
                        let mut vars = BTreeMap::new();
                        self.instantiate_sig(&sigty, &mut vars)
                    };
                    self.node_ty[idx] = Some(ty.clone());
                    st = self.call(&ty, st, idx)?;
                    idx += 1;
                    cur = k;
                }
            }
        }
    }

    /// Apply a function type to the state: consume its input above a frame, add its output.
    fn call(&mut self, f: &IType, st: IMemory, idx: usize) -> Result<IMemory, TypeError> {
        let IType::Arrow(fi, fo) = f else { unreachable!("call on non-arrow") };
        let mut out = BTreeMap::new();
        for l in self.locs.clone() {
            let have = self.u.norm(&st.0[&l]);
            let need = self.u.norm(&fi.0[&l]);
            let produce = fo.0[&l].clone();
            let frame = if need.row.is_none() {
                let mut have = have;
                let mut need_items = need.items.clone();
                loop {
                    let Some(n) = need_items.pop() else { break };
                    match have.items.pop() {
                        Some(h) => self.u.unify(&h, &n).map_err(|c| c.into_error(idx, Some(&l)))?,
                        None => match have.row {
                            Some(r) => {
                                let r2 = self.u.fresh_row();
                                let mut items = need_items.clone();
                                items.push(n);
                                self.u.rsub.insert(r, IVector { row: Some(r2), items: items.clone() });
                                have = IVector::row(r2);
                                need_items.clear();
                            }
                            None => {
                                return Err(TypeError::ArityMismatch {
                                    loc: l.to_string(),
                                    detail: format!("call needs {} more item(s)", need_items.len() + 1),
                                    node: idx,
                                })
                            }
                        },
                    }
                }
                have
            } else {
                let theta = IVector::row(self.u.fresh_row());
                self.pending.push(Pending { output: false, lhs: have, frame: theta.clone(), rhs: need, node: idx, loc: l.clone() });
                theta
            };
            let prod = self.u.norm(&produce);
            let next = if prod.row.is_none() {
                let frame = self.u.norm(&frame);
                let mut items = frame.items;
                items.extend(prod.items);
                IVector { row: frame.row, items }
            } else {
                let omega = IVector::row(self.u.fresh_row());
                self.pending.push(Pending { output: true, lhs: omega.clone(), frame, rhs: prod, node: idx, loc: l.clone() });
                omega
            };
            out.insert(l, next);
        }
        self.solve()?;
        Ok(IMemory(out))
    }

    /// Type of a pushed argument: a variable's own type, a literal's base type, or an arrow.
    fn arg(&mut self, env: &mut Vec<(Name, IType)>, n: &Term, idx: usize) -> Result<IType, TypeError> {
        match n {
            Term::Var(x, k) if k.is_nil() => {
                let t = self.lookup(env, x).ok_or_else(|| TypeError::UnboundVariable { name: x.to_string(), node: idx })?;
                self.node_ty[idx] = Some(t.clone());
                Ok(t)
            }
            Term::Const(c, k) if k.is_nil() && c.is_literal() => {
                let b = self.sig.literal_type(c).expect("literal");
                let t = self.from_ground(&b);
                self.node_ty[idx] = Some(t.clone());
                Ok(t)
            }
            _ => {
                let input = self.fresh_mem();
                let output = self.seq(env, n, idx, input.clone())?;
                Ok(IType::Arrow(Box::new(input), Box::new(output)))
            }
        }
    }
}

fn problem_locs(t: &Term, ctx: &Context, extra: Option<&SimpleType>) -> BTreeSet<Loc> {
    let mut locs = locations_of(t);
    locs.insert(Loc::Main);
    for ty in ctx.values() {
        ty.locations(&mut locs);
    }
    if let Some(e) = extra {
        e.locations(&mut locs);
    }
    annotation_locs(t, &mut locs);
    locs
}

fn annotation_locs(t: &Term, out: &mut BTreeSet<Loc>) {
    match t {
        Term::Nil => {}
        Term::Pop(_, _, ann, k) => {
            if let Some(a) = ann {
                a.locations(out);
            }
            annotation_locs(k, out);
        }
        Term::Push(n, _, k) => {
            annotation_locs(n, out);
            annotation_locs(k, out);
        }
        Term::Var(_, k) | Term::Const(_, k) => annotation_locs(k, out),
    }
}

/// Infer a type for `t`, with row tails for what the term leaves untouched.
pub fn infer(ctx: &Context, t: &Term) -> Result<Scheme, TypeError> {
    infer_with(builtin(), ctx, t)
}

pub fn infer_with(sig: &Signature, ctx: &Context, t: &Term) -> Result<Scheme, TypeError> {
    let locs = problem_locs(t, ctx, None);
    let mut inf = Infer::new(sig, locs, t.size());
    let mut env: Vec<(Name, IType)> = ctx.iter().map(|(x, ty)| (x.clone(), inf.from_ground(ty))).collect();
    let input = inf.fresh_mem();
    let output = inf.seq(&mut env, t, 0, input.clone())?;
    inf.finish()?;
    Ok(Scheme { input: inf.u.zonk_mem(&input), output: inf.u.zonk_mem(&output) })
}

/// Like [`infer`], but free variables without a context entry get fresh type variables.
pub fn infer_open(ctx: &Context, t: &Term) -> Result<Scheme, TypeError> {
    let sig = builtin();
    let locs = problem_locs(t, ctx, None);
    let mut inf = Infer::new(sig, locs, t.size());
    let mut env: Vec<(Name, IType)> = ctx.iter().map(|(x, ty)| (x.clone(), inf.from_ground(ty))).collect();
    for x in free_vars(t) {
        if !ctx.contains_key(&x) {
            let v = inf.u.fresh_var();
            env.push((x, v));
        }
    }
    let input = inf.fresh_mem();
    let output = inf.seq(&mut env, t, 0, input.clone())?;
    inf.finish()?;
    Ok(Scheme { input: inf.u.zonk_mem(&input), output: inf.u.zonk_mem(&output) })
}

/// Check `Γ ⊢ t : ty`. Undetermined binder types are fixed to `>`.
pub fn check(ctx: &Context, t: &Term, ty: &SimpleType) -> Result<Derivation, TypeError> {
    check_with(builtin(), ctx, t, ty)
}

pub fn check_with(sig: &Signature, ctx: &Context, t: &Term, ty: &SimpleType) -> Result<Derivation, TypeError> {
    let locs = problem_locs(t, ctx, Some(ty));
    let mut inf = Infer::new(sig, locs, t.size());
    let mut env: Vec<(Name, IType)> = ctx.iter().map(|(x, ty)| (x.clone(), inf.from_ground(ty))).collect();
    match ty {
        SimpleType::Base(b) => {
            // a bare variable of base type
            match t {
                Term::Var(x, k) if k.is_nil() => match ctx.get(x) {
                    Some(SimpleType::Base(c)) if c == b => {
                        let typed = Arc::new(Typed::Var(x.clone(), ty.clone(), Arc::new(Typed::Nil)));
                        Ok(Derivation { ctx: ctx.clone(), term: t.clone(), ty: ty.clone(), typed })
                    }
                    Some(other) => Err(TypeError::Mismatch { expected: b.to_string(), found: other.to_string(), node: 0 }),
                    None => Err(TypeError::UnboundVariable { name: x.to_string(), node: 0 }),
                },
                Term::Const(c, k) if k.is_nil() && sig.literal_type(c).as_ref() == Some(ty) => {
                    let typed = Arc::new(Typed::Const(c.clone(), ty.clone(), Arc::new(Typed::Nil)));
                    Ok(Derivation { ctx: ctx.clone(), term: t.clone(), ty: ty.clone(), typed })
                }
                _ => Err(TypeError::Mismatch {
                    expected: b.to_string(),
                    found: "a term that is not a base-typed variable".into(),
                    node: 0,
                }),
            }
        }
        SimpleType::Arrow(i, o) => {
            let input = inf.mem_from_ground(i);
            let want = inf.mem_from_ground(o);
            let output = inf.seq(&mut env, t, 0, input)?;
            let last = t.size() - 1;
            for l in inf.locs.clone() {
                inf.u
                    .unify_vec(&output.0[&l], &want.0[&l])
                    .map_err(|c| c.into_error(last, Some(&l)))
                    .map_err(|e| e.at(last))?;
            }
            inf.finish()?;
            let default = SimpleType::unit_arrow();
            let node_ty: Vec<Option<SimpleType>> =
                inf.node_ty.iter().map(|t| t.as_ref().map(|t| inf.u.ground(t, &default))).collect();
            let (typed, _) = build_typed(t, 0, &node_ty);
            Ok(Derivation { ctx: ctx.clone(), term: t.clone(), ty: ty.clone(), typed: Arc::new(typed) })
        }
    }
}

fn build_typed(t: &Term, idx: usize, tys: &[Option<SimpleType>]) -> (Typed, usize) {
    let get = |i: usize| tys[i].clone().unwrap_or_else(SimpleType::unit_arrow);
    match t {
        Term::Nil => (Typed::Nil, idx + 1),
        Term::Var(x, k) => {
            let (k2, next) = build_typed(k, idx + 1, tys);
            (Typed::Var(x.clone(), get(idx), Arc::new(k2)), next)
        }
        Term::Const(c, k) => {
            let (k2, next) = build_typed(k, idx + 1, tys);
            (Typed::Const(c.clone(), get(idx), Arc::new(k2)), next)
        }
        Term::Pop(a, x, _, k) => {
            let (k2, next) = build_typed(k, idx + 1, tys);
            (Typed::Pop(a.clone(), x.clone(), get(idx), Arc::new(k2)), next)
        }
        Term::Push(n, a, k) => {
            let (n2, mid) = build_typed(n, idx + 1, tys);
            let (k2, next) = build_typed(k, mid, tys);
            (Typed::Push(Arc::new(n2), get(idx), a.clone(), Arc::new(k2)), next)
        }
    }
}

/// Closed-term convenience: infer, then check at the ground instance (rows ε, variables `>`).
pub fn ground_type(t: &Term) -> Result<(SimpleType, Derivation), TypeError> {
    let ctx = Context::new();
    let s = infer(&ctx, t)?;
    let ty = s.ground(&SimpleType::unit_arrow());
    let d = check(&ctx, t, &ty)?;
    Ok((ty, d))
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

    #[test]
    fn example_typings() {
        let ctx = Context::new();
        check(&ctx, &p("rnd<x>.[x].c<y>.[y].+.<z>.[z]c"), &ty("rnd(Z) c(Z) > c(Z)")).unwrap();
        check(&ctx, &p("[<x>.[x]out.[x].[1].+].<f>.[0].f.f.f"), &ty("> out(Z Z Z) Z")).unwrap();
        check(&ctx, &p("*"), &ty("a(Z) > a(Z)")).unwrap();
    }

    #[test]
    fn rejects_mutations_with_positions() {
        let ctx = Context::new();
        let e = check(&ctx, &p("rnd<x>.[x].rnd<y>.[y].+.<z>.[z]c"), &ty("rnd(Z) c(Z) > c(Z)")).unwrap_err();
        assert_eq!(e.node(), 4);
        let e = check(&ctx, &p("rnd<x>.[x].[y].+.<z>.[z]c"), &ty("rnd(Z) c(Z) > c(Z)")).unwrap_err();
        assert!(matches!(e, TypeError::UnboundVariable { node: 5, .. }));
    }

    #[test]
    fn inference_shapes() {
        let ctx = Context::new();
        assert_eq!(infer(&ctx, &p("*")).unwrap().to_string(), "ρ1 > ρ1");
        assert_eq!(infer(&ctx, &p("<x:Z>.[x].[x]")).unwrap().to_string(), "Z ρ1 > ρ1 Z Z");
        assert_eq!(infer(&ctx, &p("+")).unwrap().to_string(), "Z Z ρ1 > ρ1 Z");
        assert_eq!(infer(&ctx, &p("<x>.[x]")).unwrap().to_string(), "α1 ρ1 > ρ1 α1");
    }

    #[test]
    fn deferred_function_tails() {
        // the pushed function's arity is only known after it is called
        let ctx = Context::new();
        let s = infer(&ctx, &p("[<a>.*].<f>.[*].f")).unwrap();
        assert_eq!(s.to_string(), "ρ1 > ρ1");
        let s = infer(&ctx, &p("[<f>.f].<h>.[<a>.*].h")).unwrap();
        let g = s.ground(&SimpleType::unit_arrow());
        check(&ctx, &p("[<f>.f].<h>.[<a>.*].h"), &g).unwrap();
    }

    #[test]
    fn identity_call_passes_its_stack_through() {
        let ctx = Context::new();
        check(&ctx, &p("[<a>.a].[*].<k>.k"), &ty(" > ((Z > Z) Z > Z)")).unwrap();
        check(&ctx, &p("[<a>.a].[<b>.[0]].[*].<k>.k"), &ty(" > ((Z > Z) Z > Z) (Z > Z)")).unwrap();
    }

    #[test]
    fn self_composition_of_a_growing_call_is_rejected() {
        // used to grow the row substitution without bound
        let e = infer(&Context::new(), &p("[<a>.[<b>.a]].<f>.f.f")).unwrap_err();
        assert!(e.to_string().contains("occurs"), "{e}");
    }

    #[test]
    fn unify_rows() {
        let mut u = Unifier::new();
        let r = u.fresh_row();
        let r2 = u.fresh_row();
        let z = IType::Base(name("Z"));
        u.unify_vec(&IVector::row(r), &IVector { row: Some(r2), items: vec![z.clone()] }).unwrap();
        assert_eq!(u.row_binding(r), Some(&IVector { row: Some(r2), items: vec![z.clone()] }));
        let f = IType::Arrow(Box::new(IMemory(BTreeMap::new())), Box::new(IMemory(BTreeMap::new())));
        assert!(matches!(u.unify(&z, &f), Err(Clash::Types(..))));
        assert!(u.unify_vec(&IVector::exact(vec![z.clone()]), &IVector::exact(vec![])).is_err());
    }

    #[test]
    fn signature_file() {
        let sig = Signature::parse("base Str\nconst cat : Str Str > Str\n").unwrap();
        assert!(sig.bases.contains("Str"));
        assert_eq!(sig.consts["cat"], ty("Str Str > Str"));
        assert!(Signature::parse("bogus").is_err());
    }
}
