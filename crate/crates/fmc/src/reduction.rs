//! Beta and eta rewriting through head contexts, normalisation, reduction graphs,
//! and permutation equivalence.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::parser::print_term;
use crate::syntax::{
    all_names, alpha_eq, canonical, fresh, free_vars, is_free, rename, substitute, Frame, HeadContext, Loc, Name, Term,
};

/// One step into a term: the argument of a push, or the continuation of a prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    Arg,
    Cont,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RedexKind {
    /// `[N]a.H.a<x>.M`
    Beta { arg: Term, loc: Loc, head: HeadContext, var: Name, body: Term },
    /// `a<x>.H.[x]a.M`
    Eta { loc: Loc, var: Name, head: HeadContext, body: Term },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redex {
    pub path: Vec<Dir>,
    pub kind: RedexKind,
}

impl Redex {
    pub fn is_beta(&self) -> bool {
        matches!(self.kind, RedexKind::Beta { .. })
    }

    pub fn label(&self) -> String {
        let kind = if self.is_beta() { "β" } else { "η" };
        let path: String = self.path.iter().map(|d| if *d == Dir::Arg { 'a' } else { 'c' }).collect();
        if path.is_empty() {
            kind.to_string()
        } else {
            format!("{kind}@{path}")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error("redex no longer present at its position")]
    StaleRedex,
    #[error("fuel exhausted after {steps} steps")]
    FuelExhausted { term: Term, steps: usize },
    #[error("reduction graph exceeds {0} nodes")]
    BoundExceeded(usize),
}

pub fn subterm<'a>(t: &'a Term, path: &[Dir]) -> Option<&'a Term> {
    let mut cur = t;
    for d in path {
        cur = match (cur, d) {
            (Term::Push(n, _, _), Dir::Arg) => n,
            (_, Dir::Cont) => cur.cont()?,
            _ => return None,
        };
    }
    Some(cur)
}

fn replace_at(t: &Term, path: &[Dir], new: Term) -> Option<Term> {
    let Some((d, rest)) = path.split_first() else { return Some(new) };
    match (t, d) {
        (Term::Push(n, a, k), Dir::Arg) => Some(Term::Push(Arc::new(replace_at(n, rest, new)?), a.clone(), k.clone())),
        (_, Dir::Cont) => {
            let k = t.cont()?;
            Some(t.with_cont(replace_at(k, rest, new)?))
        }
        _ => None,
    }
}

/// The beta redex rooted at `t`, scanning forward to the first pop on the pushed location.
pub fn beta_at(t: &Term) -> Option<RedexKind> {
    let Term::Push(n, a, k) = t else { return None };
    let mut frames = Vec::new();
    let mut cur: &Term = k;
    loop {
        match cur {
            Term::Push(p, b, k2) if b != a => {
                frames.push(Frame::Push((**p).clone(), b.clone()));
                cur = k2;
            }
            Term::Pop(b, y, ty, k2) if b != a => {
                frames.push(Frame::Pop(b.clone(), y.clone(), ty.clone()));
                cur = k2;
            }
            Term::Pop(_, x, _, body) => {
                return Some(RedexKind::Beta {
                    arg: (**n).clone(),
                    loc: a.clone(),
                    head: HeadContext { frames },
                    var: x.clone(),
                    body: (**body).clone(),
                })
            }
            _ => return None,
        }
    }
}

/// The eta redex rooted at `t`.
pub fn eta_at(t: &Term) -> Option<RedexKind> {
    let Term::Pop(a, x, _, k) = t else { return None };
    let mut frames = Vec::new();
    let mut cur: &Term = k;
    loop {
        match cur {
            Term::Push(p, b, k2) if b != a => {
                // the binder must not be used inside the context either
                if is_free(x, p) {
                    return None;
                }
                frames.push(Frame::Push((**p).clone(), b.clone()));
                cur = k2;
            }
            Term::Pop(b, y, ty, k2) if b != a => {
                if y == x {
                    return None;
                }
                frames.push(Frame::Pop(b.clone(), y.clone(), ty.clone()));
                cur = k2;
            }
            Term::Push(p, _, body) => {
                let is_x = matches!(&**p, Term::Var(y, k3) if y == x && k3.is_nil());
                return (is_x && !is_free(x, body)).then(|| RedexKind::Eta {
                    loc: a.clone(),
                    var: x.clone(),
                    head: HeadContext { frames },
                    body: (**body).clone(),
                });
            }
            _ => return None,
        }
    }
}

fn collect(t: &Term, path: &mut Vec<Dir>, beta: bool, eta: bool, out: &mut Vec<Redex>) {
    if beta {
        if let Some(kind) = beta_at(t) {
            out.push(Redex { path: path.clone(), kind });
        }
    }
    if eta {
        if let Some(kind) = eta_at(t) {
            out.push(Redex { path: path.clone(), kind });
        }
    }
    if let Term::Push(n, _, _) = t {
        path.push(Dir::Arg);
        collect(n, path, beta, eta, out);
        path.pop();
    }
    if let Some(k) = t.cont() {
        path.push(Dir::Cont);
        collect(k, path, beta, eta, out);
        path.pop();
    }
}

/// All beta redexes, in preorder (leftmost-outermost first).
pub fn beta_redexes(t: &Term) -> Vec<Redex> {
    let mut out = Vec::new();
    collect(t, &mut Vec::new(), true, false, &mut out);
    out
}

pub fn eta_redexes(t: &Term) -> Vec<Redex> {
    let mut out = Vec::new();
    collect(t, &mut Vec::new(), false, true, &mut out);
    out
}

pub fn redexes(t: &Term, eta: bool) -> Vec<Redex> {
    let mut out = Vec::new();
    collect(t, &mut Vec::new(), true, eta, &mut out);
    out
}

/// `H.M`, renaming binders of `H` that would capture free variables of `avoid`.
fn plug_avoiding(head: &HeadContext, var: &Name, body: Term, avoid: &BTreeSet<Name>) -> (HeadContext, Term) {
    let mut frames = head.frames.clone();
    let mut body = body;
    for i in 0..frames.len() {
        let Frame::Pop(b, y, ty) = &frames[i] else { continue };
        if !avoid.contains(y) {
            continue;
        }
        let mut taken = avoid.clone();
        all_names(&HeadContext { frames: frames.clone() }.plug(body.clone()), &mut taken);
        let y_old = y.clone();
        let y2 = fresh(y, |c| taken.contains(c));
        frames[i] = Frame::Pop(b.clone(), y2.clone(), ty.clone());
        let mut shadowed = *var == y_old;
        for f in frames.iter_mut().skip(i + 1) {
            match f {
                Frame::Push(p, l) => *f = Frame::Push(rename(p, &y_old, &y2), l.clone()),
                Frame::Pop(_, z, _) if *z == y_old => {
                    shadowed = true;
                    break;
                }
                Frame::Pop(..) => {}
            }
        }
        if !shadowed {
            body = rename(&body, &y_old, &y2);
        }
    }
    (HeadContext { frames }, body)
}

/// Contract a redex found by one of the scanners.
pub fn contract(kind: &RedexKind) -> Term {
    match kind {
        RedexKind::Beta { arg, head, var, body, .. } => {
            let fvn = free_vars(arg);
            if head.bound_vars().is_disjoint(&fvn) {
                head.plug(substitute(arg, var, body))
            } else {
                // contexts are taken up to alpha: rename the capturing binders first
                let (h2, b2) = plug_avoiding(head, var, body.clone(), &fvn);
                h2.plug(substitute(arg, var, &b2))
            }
        }
        RedexKind::Eta { head, body, .. } => head.plug(body.clone()),
    }
}

pub fn reduce_at(t: &Term, r: &Redex) -> Result<Term, ReductionError> {
    let sub = subterm(t, &r.path).ok_or(ReductionError::StaleRedex)?;
    let found = match r.kind {
        RedexKind::Beta { .. } => beta_at(sub),
        RedexKind::Eta { .. } => eta_at(sub),
    };
    if found.as_ref() != Some(&r.kind) {
        return Err(ReductionError::StaleRedex);
    }
    replace_at(t, &r.path, contract(&r.kind)).ok_or(ReductionError::StaleRedex)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    #[default]
    LeftmostOutermost,
    RightmostInnermost,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub term: Term,
    pub steps: usize,
}

pub fn normalize(t: &Term, strategy: Strategy, fuel: usize, eta: bool) -> Result<Normalized, ReductionError> {
    let mut cur = t.clone();
    let mut steps = 0;
    loop {
        let rs = redexes(&cur, eta);
        let pick = match strategy {
            Strategy::LeftmostOutermost => rs.first(),
            Strategy::RightmostInnermost => rs.last(),
        };
        let Some(r) = pick else { return Ok(Normalized { term: cur, steps }) };
        if steps == fuel {
            return Err(ReductionError::FuelExhausted { term: cur, steps });
        }
        cur = reduce_at(&cur, r)?;
        steps += 1;
    }
}

pub fn is_normal(t: &Term, eta: bool) -> bool {
    redexes(t, eta).is_empty()
}

/// Nodes are alpha-canonical terms; edges carry the redex label.
#[derive(Clone, Debug)]
pub struct ReductionGraph {
    pub nodes: Vec<Term>,
    pub edges: Vec<(usize, usize, String)>,
    pub root: usize,
}

pub fn reduction_graph(t: &Term, node_bound: usize, eta: bool) -> Result<ReductionGraph, ReductionError> {
    let mut index: HashMap<Term, usize> = HashMap::new();
    let root = canonical(t);
    let mut g = ReductionGraph { nodes: vec![root.clone()], edges: Vec::new(), root: 0 };
    index.insert(root, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let term = g.nodes[i].clone();
        for r in redexes(&term, eta) {
            let next = canonical(&reduce_at(&term, &r)?);
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if g.nodes.len() == node_bound {
                        return Err(ReductionError::BoundExceeded(node_bound));
                    }
                    g.nodes.push(next.clone());
                    index.insert(next, g.nodes.len() - 1);
                    queue.push_back(g.nodes.len() - 1);
                    g.nodes.len() - 1
                }
            };
            g.edges.push((i, j, r.label()));
        }
    }
    Ok(g)
}

impl ReductionGraph {
    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.0 == i).map(|e| e.1)
    }

    pub fn normal_forms(&self) -> Vec<usize> {
        let with_out: BTreeSet<usize> = self.edges.iter().map(|e| e.0).collect();
        (0..self.nodes.len()).filter(|i| !with_out.contains(i)).collect()
    }

    pub fn has_cycle(&self) -> bool {
        // Kahn's algorithm leaves nodes on a cycle
        let mut indeg = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            indeg[e.1] += 1;
        }
        let mut q: VecDeque<usize> = (0..self.nodes.len()).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = q.pop_front() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.0 == i) {
                indeg[e.1] -= 1;
                if indeg[e.1] == 0 {
                    q.push_back(e.1);
                }
            }
        }
        seen < self.nodes.len()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph reductions {\n");
        for (i, t) in self.nodes.iter().enumerate() {
            let shape = if self.successors(i).next().is_none() { ", shape=box" } else { "" };
            s.push_str(&format!("  n{i} [label=\"{}\"{shape}];\n", print_term(t).replace('"', "\\\"")));
        }
        for (a, b, l) in &self.edges {
            s.push_str(&format!("  n{a} -> n{b} [label=\"{l}\"];\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Unique normal form, reachable from every node.
pub fn confluent_on(g: &ReductionGraph) -> bool {
    let nfs = g.normal_forms();
    if nfs.len() != 1 {
        return false;
    }
    let nf = nfs[0];
    // reverse reachability from the normal form
    let mut reach = vec![false; g.nodes.len()];
    reach[nf] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for e in &g.edges {
            if reach[e.1] && !reach[e.0] {
                reach[e.0] = true;
                changed = true;
            }
        }
    }
    reach.into_iter().all(|b| b)
}

fn frame_loc(f: &Frame) -> &Loc {
    match f {
        Frame::Push(_, a) | Frame::Pop(a, _, _) => a,
    }
}

fn depends(x: &Frame, y: &Frame) -> bool {
    if frame_loc(x) == frame_loc(y) {
        return true;
    }
    match (x, y) {
        (Frame::Pop(_, v, _), Frame::Push(p, _)) | (Frame::Push(p, _), Frame::Pop(_, v, _)) => is_free(v, p),
        (Frame::Pop(_, v, _), Frame::Pop(_, w, _)) => v == w,
        (Frame::Push(..), Frame::Push(..)) => false,
    }
}

/// Representative of the permutation class: each maximal block of push/pop frames
/// is reordered to the least topological order by location.
pub fn perm_normal(t: &Term) -> Term {
    let mut frames = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::Push(n, a, k) => {
                frames.push(Frame::Push(perm_normal(n), a.clone()));
                cur = k;
            }
            Term::Pop(a, x, ty, k) => {
                frames.push(Frame::Pop(a.clone(), x.clone(), ty.clone()));
                cur = k;
            }
            _ => break,
        }
    }
    let tail = match cur {
        Term::Nil => Term::Nil,
        Term::Var(x, k) => Term::Var(x.clone(), Arc::new(perm_normal(k))),
        Term::Const(c, k) => Term::Const(c.clone(), Arc::new(perm_normal(k))),
        _ => unreachable!(),
    };
    let n = frames.len();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|&j| !done[j] && (0..j).all(|i| done[i] || !depends(&frames[i], &frames[j])))
            .min_by(|&i, &j| frame_loc(&frames[i]).cmp(frame_loc(&frames[j])).then(i.cmp(&j)))
            .expect("a minimal frame exists");
        done[next] = true;
        order.push(frames[next].clone());
    }
    HeadContext { frames: order }.plug(tail)
}

/// Congruence closure of the swaps `[P]a.[N]b`, `[P]a.b<y>`, `a<x>.b<y>` for `a ≠ b`.
pub fn perm_eq(a: &Term, b: &Term) -> bool {
    alpha_eq(&perm_normal(&canonical(a)), &perm_normal(&canonical(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn beta_examples() {
        let t = p("[P].<x>.x");
        let rs = beta_redexes(&t);
        assert_eq!(rs.len(), 1);
        assert!(alpha_eq(&reduce_at(&t, &rs[0]).unwrap(), &p("P")));

        let rs = beta_redexes(&p("[N]a.b<y>.a<x>.*"));
        assert_eq!(rs.len(), 1);
        let RedexKind::Beta { head, .. } = &rs[0].kind else { panic!() };
        assert_eq!(head.frames.len(), 1);

        let rs = beta_redexes(&p("[N]a.a<y>.a<x>.*"));
        assert_eq!(rs.len(), 1);
        let RedexKind::Beta { var, head, .. } = &rs[0].kind else { panic!() };
        assert_eq!(&**var, "y");
        assert!(head.frames.is_empty());
    }

    #[test]
    fn capture_is_avoided() {
        let t = p("[y]a.b<y>.a<x>.[x]");
        let rs = beta_redexes(&t);
        let out = reduce_at(&t, &rs[0]).unwrap();
        assert!(alpha_eq(&out, &p("b<z>.[y]")), "{out}");
    }

    #[test]
    fn eta_examples() {
        let t = p("<x>.[x]");
        let rs = eta_redexes(&t);
        assert_eq!(rs.len(), 1);
        assert_eq!(reduce_at(&t, &rs[0]).unwrap(), Term::Nil);
        assert!(eta_redexes(&p("<x>.[x].x")).is_empty());
        assert!(eta_redexes(&p("<x>.[x]a.[x]")).is_empty());
        assert_eq!(eta_redexes(&p("a<x>.b<y>.[x]a.[y]b")).len(), 2);
    }

    #[test]
    fn stale() {
        let t = p("[P].<x>.x");
        let r = beta_redexes(&t).remove(0);
        assert_eq!(reduce_at(&p("*"), &r), Err(ReductionError::StaleRedex));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&Term::Nil, Strategy::LeftmostOutermost, 10, false).unwrap().term, Term::Nil);
        let omega = p("[<x>.[x].x].<x>.[x].x");
        assert!(matches!(
            normalize(&omega, Strategy::LeftmostOutermost, 100, false),
            Err(ReductionError::FuelExhausted { .. })
        ));
        let g = reduction_graph(&omega, 100, false).unwrap();
        assert!(g.has_cycle());
        assert_eq!(g.nodes.len(), 1);
    }

    #[test]
    fn graph_unique_normal_form() {
        let g = reduction_graph(&p("[[<a>.*].<y>.y].<x>.[x].[x]"), 1000, false).unwrap();
        assert!(confluent_on(&g));
        assert!(g.nodes.len() > 2);
        assert!(g.to_dot().starts_with("digraph"));
    }

    #[test]
    fn permutations() {
        assert!(perm_eq(&p("[P]a.[N]b.*"), &p("[N]b.[P]a.*")));
        assert!(perm_eq(&p("a<x>.b<y>.*"), &p("b<y>.a<x>.*")));
        assert!(perm_eq(&p("[P]a.b<y>.*"), &p("b<y>.[P]a.*")));
        assert!(!perm_eq(&p("[y]a.b<y>.*"), &p("b<y>.[y]a.*")));
        assert!(!perm_eq(&p("[P]a.[N]a.*"), &p("[N]a.[P]a.*")));
        assert!(perm_eq(&p("[[P]a.[N]b].<x>.x"), &p("[[N]b.[P]a].<x>.x")));
    }
}
