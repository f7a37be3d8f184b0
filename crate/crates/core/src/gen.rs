//! Term generators: exhaustive enumeration by size and seeded random terms.

use std::collections::HashMap;
use std::rc::Rc;

use rand::Rng;

use crate::syntax::{Bag, LambdaTerm, Name, Resource, Term};

/// Enumerates terms by exact size, one representative per alpha class.
/// Binders are named by depth (`v0`, `v1`, ...), so enumerated terms never
/// shadow and never capture the given free names.
pub struct Enumerator {
    free: Vec<Name>,
    binders: Vec<Name>,
    terms: HashMap<(usize, usize), Rc<Vec<Term>>>,
    resources: HashMap<(usize, usize), Rc<Vec<Resource>>>,
    bags: HashMap<(usize, usize), Rc<Vec<Bag>>>,
}

impl Enumerator {
    pub fn new(free: &[&str]) -> Self {
        Enumerator {
            free: free.iter().map(|s| Name::new(s)).collect(),
            binders: Vec::new(),
            terms: HashMap::new(),
            resources: HashMap::new(),
            bags: HashMap::new(),
        }
    }

    fn binder(&mut self, d: usize) -> Name {
        while self.binders.len() <= d {
            let n = Name::new(&format!("v{}", self.binders.len()));
            self.binders.push(n);
        }
        self.binders[d].clone()
    }

    /// Terms of exactly `size` symbols.
    pub fn terms(&mut self, size: usize) -> Rc<Vec<Term>> {
        self.terms_at(size, 0)
    }

    /// Terms of size at most `max`, smallest first.
    pub fn terms_up_to(&mut self, max: usize) -> Vec<Term> {
        (1..=max).flat_map(|n| self.terms(n).as_ref().clone()).collect()
    }

    /// Bags of exactly `size` symbols.
    pub fn bags(&mut self, size: usize) -> Rc<Vec<Bag>> {
        self.bags_at(size, 0)
    }

    fn terms_at(&mut self, n: usize, d: usize) -> Rc<Vec<Term>> {
        if let Some(v) = self.terms.get(&(n, d)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend(self.free.iter().map(|x| Term::Var(x.clone())));
            for k in 0..d {
                out.push(Term::Var(self.binder(k)));
            }
        } else if n >= 2 {
            let x = self.binder(d);
            for b in self.terms_at(n - 1, d + 1).iter() {
                out.push(Term::Abs(x.clone(), Box::new(b.clone())));
            }
            for k in 1..n {
                let funs = self.terms_at(k, d);
                if funs.is_empty() {
                    continue;
                }
                let bags = self.bags_at(n - 1 - k, d);
                for f in funs.iter() {
                    for p in bags.iter() {
                        out.push(Term::app(f.clone(), p.clone()));
                    }
                }
            }
        }
        let v = Rc::new(out);
        self.terms.insert((n, d), v.clone());
        v
    }

    /// Resources of `n` symbols: the wrapper and bag slot count 2.
    fn resources_at(&mut self, n: usize, d: usize) -> Rc<Vec<Resource>> {
        if let Some(v) = self.resources.get(&(n, d)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n >= 3 {
            for t in self.terms_at(n - 2, d).iter() {
                out.push(Resource::Linear(t.clone()));
                out.push(Resource::Reusable(t.clone()));
            }
        }
        let v = Rc::new(out);
        self.resources.insert((n, d), v.clone());
        v
    }

    fn bags_at(&mut self, n: usize, d: usize) -> Rc<Vec<Bag>> {
        if let Some(v) = self.bags.get(&(n, d)) {
            return v.clone();
        }
        // Multisets as non-decreasing sequences of (size, index) pairs.
        let mut pools = Vec::new();
        for s in 3..=n {
            pools.push((s, self.resources_at(s, d)));
        }
        let mut out = Vec::new();
        let mut cur = Vec::new();
        multisets(&pools, n, (0, 0), &mut cur, &mut out);
        let v = Rc::new(out);
        self.bags.insert((n, d), v.clone());
        v
    }
}

fn multisets(
    pools: &[(usize, Rc<Vec<Resource>>)],
    left: usize,
    from: (usize, usize),
    cur: &mut Vec<Resource>,
    out: &mut Vec<Bag>,
) {
    if left == 0 {
        out.push(Bag::from_resources(cur.iter().cloned()));
        return;
    }
    for (pi, (size, pool)) in pools.iter().enumerate().skip(from.0) {
        if *size > left {
            break;
        }
        let start = if pi == from.0 { from.1 } else { 0 };
        for (ri, r) in pool.iter().enumerate().skip(start) {
            cur.push(r.clone());
            multisets(pools, left - size, (pi, ri), cur, out);
            cur.pop();
        }
    }
}

/// Shape parameters for random terms.
#[derive(Clone, Debug)]
pub struct RandomConfig {
    pub free: Vec<String>,
    /// Maximum nesting depth.
    pub depth: usize,
    /// Maximum bag length.
    pub bag_len: usize,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig { free: vec!["x".into(), "y".into(), "z".into()], depth: 4, bag_len: 3 }
    }
}

/// A random term. Binders are drawn from a small pool so that shadowing
/// and capture situations occur.
pub fn random_term<R: Rng>(rng: &mut R, cfg: &RandomConfig) -> Term {
    random_term_in(rng, cfg, cfg.depth, &mut Vec::new())
}

/// A random bag.
pub fn random_bag<R: Rng>(rng: &mut R, cfg: &RandomConfig) -> Bag {
    random_bag_in(rng, cfg, cfg.depth, &mut Vec::new())
}

const BINDERS: [&str; 3] = ["a", "b", "x"];

fn random_var<R: Rng>(rng: &mut R, cfg: &RandomConfig, bound: &[Name]) -> Term {
    let k = rng.gen_range(0..cfg.free.len() + bound.len());
    if k < cfg.free.len() {
        Term::var(&cfg.free[k])
    } else {
        Term::Var(bound[k - cfg.free.len()].clone())
    }
}

fn random_term_in<R: Rng>(rng: &mut R, cfg: &RandomConfig, depth: usize, bound: &mut Vec<Name>) -> Term {
    if depth == 0 {
        return random_var(rng, cfg, bound);
    }
    match rng.gen_range(0..10) {
        0..=2 => random_var(rng, cfg, bound),
        3..=4 => {
            let x = Name::new(BINDERS[rng.gen_range(0..BINDERS.len())]);
            bound.push(x.clone());
            let b = random_term_in(rng, cfg, depth - 1, bound);
            bound.pop();
            Term::Abs(x, Box::new(b))
        }
        5..=6 => {
            // A redex, so that reduction has something to do.
            let x = Name::new(BINDERS[rng.gen_range(0..BINDERS.len())]);
            bound.push(x.clone());
            let b = random_term_in(rng, cfg, depth - 1, bound);
            bound.pop();
            let p = random_bag_in(rng, cfg, depth - 1, bound);
            Term::app(Term::Abs(x, Box::new(b)), p)
        }
        _ => {
            let f = random_term_in(rng, cfg, depth - 1, bound);
            let p = random_bag_in(rng, cfg, depth - 1, bound);
            Term::app(f, p)
        }
    }
}

fn random_bag_in<R: Rng>(rng: &mut R, cfg: &RandomConfig, depth: usize, bound: &mut Vec<Name>) -> Bag {
    let n = rng.gen_range(0..=cfg.bag_len);
    let mut p = Bag::empty();
    for _ in 0..n {
        let t = random_term_in(rng, cfg, depth.saturating_sub(1), bound);
        p.push(if rng.gen_bool(0.4) { Resource::Reusable(t) } else { Resource::Linear(t) });
    }
    p
}

/// A random pure lambda term with at most `depth` nesting.
pub fn random_lambda<R: Rng>(rng: &mut R, free: &[&str], depth: usize) -> LambdaTerm {
    fn go<R: Rng>(rng: &mut R, free: &[&str], depth: usize, bound: &mut Vec<String>) -> LambdaTerm {
        let var = |rng: &mut R, bound: &Vec<String>| {
            let k = rng.gen_range(0..free.len() + bound.len());
            if k < free.len() {
                LambdaTerm::var(free[k])
            } else {
                LambdaTerm::var(&bound[k - free.len()])
            }
        };
        if depth == 0 {
            return var(rng, bound);
        }
        match rng.gen_range(0..3) {
            0 => var(rng, bound),
            1 => {
                let x = BINDERS[rng.gen_range(0..BINDERS.len())].to_string();
                bound.push(x.clone());
                let b = go(rng, free, depth - 1, bound);
                bound.pop();
                LambdaTerm::abs(&x, b)
            }
            _ => {
                let f = go(rng, free, depth - 1, bound);
                let a = go(rng, free, depth - 1, bound);
                LambdaTerm::app(f, a)
            }
        }
    }
    go(rng, free, depth, &mut Vec::new())
}

/// Pure lambda terms of exactly `size` nodes (variables, abstractions and
/// binary applications each count 1), binders named by depth.
pub fn lambda_terms(size: usize, free: &[&str]) -> Vec<LambdaTerm> {
    fn go(n: usize, d: usize, free: &[&str], memo: &mut HashMap<(usize, usize), Vec<LambdaTerm>>) -> Vec<LambdaTerm> {
        if let Some(v) = memo.get(&(n, d)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend(free.iter().map(|x| LambdaTerm::var(x)));
            out.extend((0..d).map(|k| LambdaTerm::var(&format!("v{k}"))));
        } else if n >= 2 {
            let x = format!("v{d}");
            for b in go(n - 1, d + 1, free, memo) {
                out.push(LambdaTerm::abs(&x, b));
            }
            for k in 1..n - 1 {
                let fs = go(k, d, free, memo);
                let args = go(n - 1 - k, d, free, memo);
                for f in &fs {
                    for a in &args {
                        out.push(LambdaTerm::app(f.clone(), a.clone()));
                    }
                }
            }
        }
        memo.insert((n, d), out.clone());
        out
    }
    go(size, 0, free, &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::Canonical;
    use std::collections::HashSet;

    #[test]
    fn sizes_and_uniqueness() {
        let mut e = Enumerator::new(&["x", "y"]);
        for n in 1..=8 {
            let ts = e.terms(n);
            let mut seen = HashSet::new();
            for t in ts.iter() {
                assert_eq!(t.size(), n);
                assert!(seen.insert(t.canonical()), "duplicate {t}");
            }
        }
        assert_eq!(e.terms(1).len(), 2);
        // \v0.x, \v0.y, \v0.v0, x 1, y 1
        assert_eq!(e.terms(2).len(), 5);
        // x[y] and friends, plus (x 1) 1
        assert_eq!(e.terms(5).iter().filter(|t| matches!(t, Term::App(_, p, _) if p.len() == 1)).count(), 2 * 2 * 2);
    }

    #[test]
    fn bag_multisets() {
        let mut e = Enumerator::new(&["x"]);
        // [x], [!x]
        assert_eq!(e.bags(3).len(), 2);
        // [x,x], [x,!x], [!x,!x]
        assert_eq!(e.bags(6).iter().filter(|p| p.len() == 2).count(), 3);
    }

    #[test]
    fn lambda_sizes() {
        for n in 1..=6 {
            for t in lambda_terms(n, &["x"]) {
                assert_eq!(t.size(), n);
            }
        }
    }
}
