//! Seeded term generators and exhaustive enumeration.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{int, name, ConstSym, Loc, Name, Term};
use crate::types::{ground_type, Derivation, SimpleType};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_size: usize,
    pub locs: Vec<Loc>,
    /// Allow integer literals and `+`.
    pub consts: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_size: 20, locs: vec![Loc::Main], consts: false }
    }
}

fn var_name(i: usize) -> Name {
    name(&format!("x{i}"))
}

fn gen(rng: &mut impl Rng, budget: usize, depth: usize, cfg: &GenConfig) -> Term {
    if budget <= 1 {
        return Term::Nil;
    }
    loop {
        let roll = rng.gen_range(0..100);
        match roll {
            0..=9 => return Term::Nil,
            10..=39 => {
                let a = cfg.locs.choose(rng).expect("a location").clone();
                let k = gen(rng, budget - 1, depth + 1, cfg);
                return Term::Pop(a, var_name(depth), None, Arc::new(k));
            }
            40..=74 if budget >= 3 => {
                let arg_budget = rng.gen_range(1..=budget - 2);
                let a = cfg.locs.choose(rng).expect("a location").clone();
                let n = if cfg.consts && rng.gen_bool(0.25) {
                    int(rng.gen_range(0..3))
                } else {
                    gen(rng, arg_budget, depth, cfg)
                };
                let k = gen(rng, budget - 1 - n.size(), depth, cfg);
                return Term::Push(Arc::new(n), a, Arc::new(k));
            }
            75..=94 if depth > 0 => {
                let x = var_name(rng.gen_range(0..depth));
                let k = gen(rng, budget - 1, depth, cfg);
                return Term::Var(x, Arc::new(k));
            }
            95..=99 if cfg.consts => {
                let k = gen(rng, budget - 1, depth, cfg);
                return Term::Const(ConstSym::add(), Arc::new(k));
            }
            _ => continue,
        }
    }
}

/// A closed term of size at most `cfg.max_size`.
pub fn random_term(rng: &mut impl Rng, cfg: &GenConfig) -> Term {
    let budget = rng.gen_range(1..=cfg.max_size);
    gen(rng, budget, 0, cfg)
}

/// A term whose free variables are among `x0 .. x{depth-1}`.
pub fn random_open(rng: &mut impl Rng, cfg: &GenConfig, depth: usize) -> Term {
    let budget = rng.gen_range(1..=cfg.max_size);
    gen(rng, budget, depth, cfg)
}

/// A closed typable term with its ground type and derivation.
pub fn random_typed(rng: &mut impl Rng, cfg: &GenConfig) -> (Term, SimpleType, Derivation) {
    loop {
        let t = random_term(rng, cfg);
        if let Ok((ty, d)) = ground_type(&t) {
            return (t, ty, d);
        }
    }
}

/// Enumerates closed terms by exact size. Binders are named by depth, so each alpha class
/// appears once.
pub struct Enumerator {
    locs: Vec<Loc>,
    literals: Vec<Term>,
    memo: HashMap<(usize, usize), Arc<Vec<Term>>>,
}

impl Enumerator {
    /// `literals` are allowed only as pushed arguments.
    pub fn new(locs: Vec<Loc>, literals: Vec<Term>) -> Enumerator {
        Enumerator { locs, literals, memo: HashMap::new() }
    }

    pub fn of_size(&mut self, n: usize) -> Arc<Vec<Term>> {
        self.at(n, 0)
    }

    pub fn up_to(&mut self, n: usize) -> Vec<Term> {
        (1..=n).flat_map(|i| self.of_size(i).iter().cloned().collect::<Vec<_>>()).collect()
    }

    /// Number of terms of size `n` at binder depth `depth`, without building them.
    pub fn count(&self, n: usize, depth: usize, memo: &mut HashMap<(usize, usize), u128>) -> u128 {
        if n == 0 {
            return 0;
        }
        if n == 1 {
            return 1;
        }
        if let Some(&c) = memo.get(&(n, depth)) {
            return c;
        }
        let l = self.locs.len() as u128;
        let mut c = l * self.count(n - 1, depth + 1, memo);
        c += depth as u128 * self.count(n - 1, depth, memo);
        if n >= 3 {
            c += l * self.literals.len() as u128 * self.count(n - 2, depth, memo);
        }
        for i in 1..n - 1 {
            c += l * self.count(i, depth, memo) * self.count(n - 1 - i, depth, memo);
        }
        memo.insert((n, depth), c);
        c
    }

    fn at(&mut self, n: usize, depth: usize) -> Arc<Vec<Term>> {
        if let Some(v) = self.memo.get(&(n, depth)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.push(Term::Nil);
        } else if n > 1 {
            for a in self.locs.clone() {
                for k in self.at(n - 1, depth + 1).iter() {
                    out.push(Term::Pop(a.clone(), var_name(depth), None, Arc::new(k.clone())));
                }
            }
            for i in 0..depth {
                for k in self.at(n - 1, depth).iter() {
                    out.push(Term::Var(var_name(i), Arc::new(k.clone())));
                }
            }
            for a in self.locs.clone() {
                if n >= 3 {
                    for lit in self.literals.clone() {
                        for k in self.at(n - 2, depth).iter() {
                            out.push(Term::Push(Arc::new(lit.clone()), a.clone(), Arc::new(k.clone())));
                        }
                    }
                }
                for i in 1..n - 1 {
                    let args = self.at(i, depth);
                    let conts = self.at(n - 1 - i, depth);
                    for arg in args.iter() {
                        for k in conts.iter() {
                            out.push(Term::Push(Arc::new(arg.clone()), a.clone(), Arc::new(k.clone())));
                        }
                    }
                }
            }
        }
        let v = Arc::new(out);
        self.memo.insert((n, depth), v.clone());
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{is_closed, nameless};
    use std::collections::HashSet;

    #[test]
    fn random_terms_are_closed_and_bounded() {
        let mut r = rng(7);
        let cfg = GenConfig::default();
        for _ in 0..200 {
            let t = random_term(&mut r, &cfg);
            assert!(is_closed(&t));
            assert!(t.size() <= cfg.max_size);
        }
    }

    #[test]
    fn same_seed_same_terms() {
        let cfg = GenConfig::default();
        let a: Vec<Term> = (0..20).map({
            let mut r = rng(3);
            move |_| random_term(&mut r, &cfg)
        }).collect();
        let cfg = GenConfig::default();
        let b: Vec<Term> = (0..20).map({
            let mut r = rng(3);
            move |_| random_term(&mut r, &cfg)
        }).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn enumeration_matches_count_and_is_alpha_distinct() {
        let mut e = Enumerator::new(vec![Loc::Main], vec![]);
        let mut memo = HashMap::new();
        for n in 1..=7 {
            let terms = e.of_size(n);
            assert_eq!(terms.len() as u128, e.count(n, 0, &mut memo));
            let classes: HashSet<_> = terms.iter().map(nameless).collect();
            assert_eq!(classes.len(), terms.len());
            assert!(terms.iter().all(|t| t.size() == n && is_closed(t)));
        }
        // *, <x>.*, then [*].*, <x>.<y>.*, <x>.x.*
        assert_eq!(e.of_size(1).len(), 1);
        assert_eq!(e.of_size(2).len(), 1);
        assert_eq!(e.of_size(3).len(), 3);
    }
}
