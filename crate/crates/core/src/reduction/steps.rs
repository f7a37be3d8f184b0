use crate::canon::Canonical;
use crate::error::Result;
use crate::path::{plug_sum, replace_at, Path};
use crate::sum::Sum;
use crate::syntax::Term;

use super::redex::{contract_baby, contract_giant, find_redexes, redex_at, Redex, Rule};

/// Giant step at `path`, with the surrounding context distributed over the
/// contractum.
pub fn giant_step(m: &Term, path: &Path) -> Result<Sum<Term>> {
    redex_at(m, path)?;
    let local = contract_giant(path.follow(m)?);
    plug_sum(m, path, &local)
}

/// One baby rule at `path`; returns the rule applied and the result.
pub fn baby_step(m: &Term, path: &Path) -> Result<(Rule, Sum<Term>)> {
    redex_at(m, path)?;
    let (rule, local) = contract_baby(path.follow(m)?);
    Ok((rule, plug_sum(m, path, &local)?))
}

/// The terms `n` with `m -> g n + A` by firing `path`, in canonical order.
/// Each addend of the local contractum is plugged into the unchanged
/// context. Empty when the step crashes.
pub fn nd_step(m: &Term, path: &Path) -> Result<Vec<Term>> {
    redex_at(m, path)?;
    let local = contract_giant(path.follow(m)?);
    let mut out = Sum::zero();
    for n in local.support() {
        out.add(replace_at(m, path, n.clone())?);
    }
    Ok(out.support().cloned().collect())
}

/// Baby-reduces the redex at `path` until its bag is used up and the final
/// `{0/x}` rule has fired, on every addend.
pub fn baby_expand(m: &Term, path: &Path) -> Result<Sum<Term>> {
    redex_at(m, path)?;
    let mut pending = Sum::single(path.follow(m)?.clone());
    let mut done = Sum::zero();
    while !pending.is_zero() {
        let mut next = Sum::zero();
        for (t, k) in pending.iter() {
            let (rule, s) = contract_baby(t);
            if rule == Rule::Empty {
                done.plus_scaled(&s, k);
            } else {
                next.plus_scaled(&s, k);
            }
        }
        pending = next;
    }
    plug_sum(m, path, &done)
}

/// One non-deterministic successor of a term.
#[derive(Clone, Debug)]
pub struct NdSucc {
    pub redex: Redex,
    pub term: Term,
}

/// Every `(redex, n)` with `m -> nd n`, redexes in public-path order.
pub fn nd_successors(m: &Term) -> Vec<NdSucc> {
    nd_successors_where(m, |_| true)
}

pub fn nd_successors_where(m: &Term, keep: impl Fn(&Redex) -> bool) -> Vec<NdSucc> {
    let mut out = Vec::new();
    for r in find_redexes(m) {
        if !keep(&r) {
            continue;
        }
        for n in nd_step(m, &r.path).expect("redex found in m") {
            out.push(NdSucc { redex: Redex { rule: Rule::Giant, ..r.clone() }, term: n });
        }
    }
    out
}

/// Distinct successors by canonical form, for one class of redexes.
pub fn nd_successor_set(m: &Term, keep: impl Fn(&Redex) -> bool) -> Sum<Term> {
    let mut s = Sum::zero();
    for n in nd_successors_where(m, keep) {
        if !s.contains_key(&n.term.canonical()) {
            s.add(n.term);
        }
    }
    s
}

/// Class of redexes, as used by the outer/inner and leftmost refinements.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RedexClass {
    Any,
    Outer,
    Inner,
    Leftmost,
    NotLeftmost,
}

impl RedexClass {
    pub fn admits(self, r: &Redex) -> bool {
        match self {
            RedexClass::Any => true,
            RedexClass::Outer => r.outer,
            RedexClass::Inner => !r.outer,
            RedexClass::Leftmost => r.leftmost,
            RedexClass::NotLeftmost => r.outer && !r.leftmost,
        }
    }
}
