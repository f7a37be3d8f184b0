//! Classical, partial, linear, resource and bag substitution.
//!
//! Substituting into a term yields a sum of terms and substituting into a bag
//! yields a sum of bags. Sums in argument position are pushed outward through
//! the constructors with the rules of [`crate::sum`]; in particular a reusable
//! resource whose content becomes `M1 + ... + Mk` turns into `[M1!, ..., Mk!]`.

use std::collections::BTreeSet;

use crate::canon::Canonical;
use crate::error::{Error, Result};
use crate::sum::{replace_elem_with_sum, sum_abs, sum_app_labeled, Sum};
use crate::syntax::{Bag, Elem, Name, Resource, Term};

/// Deterministic fresh name: strips trailing digits from `base` and appends
/// the first counter value that avoids `avoid`.
pub fn fresh_name(base: &Name, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.as_str().trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (0usize..).map(|i| Name::from(format!("{stem}{i}"))).find(|n| !avoid.contains(n)).expect("unbounded supply")
}

/// Replaces free occurrences of `from` by `to`, assuming `to` occurs nowhere
/// in `t`. Ids and labels are kept.
pub fn rename_free(t: &Term, from: &Name, to: &Name) -> Term {
    match t {
        Term::Var(y) if y == from => Term::Var(to.clone()),
        Term::Var(_) => t.clone(),
        Term::Abs(y, _) if y == from => t.clone(),
        Term::Abs(y, b) => Term::Abs(y.clone(), Box::new(rename_free(b, from, to))),
        Term::App(f, p, l) => {
            Term::App(Box::new(rename_free(f, from, to)), p.map_content(|c| rename_free(c, from, to)), *l)
        }
    }
}

/// Renames the binder of `\y.body` away from `avoid`, returning the new
/// binder and body.
pub(crate) fn freshen_binder(y: &Name, body: &Term, avoid: &BTreeSet<Name>) -> (Name, Term) {
    let mut taken = avoid.clone();
    body.names(&mut taken);
    taken.insert(y.clone());
    let y2 = fresh_name(y, &taken);
    let b2 = rename_free(body, y, &y2);
    (y2, b2)
}

/// Expressions that substitutions act on: terms and bags.
pub trait Substitutable: Canonical + Clone + Sized {
    /// `A{ΣN/x}`
    fn classical(&self, x: &Name, n: &Sum<Term>) -> Sum<Self>;
    /// `A<N/x>`
    fn linear(&self, x: &Name, n: &Term) -> Sum<Self>;
    fn mentions(&self, x: &Name) -> bool;
}

impl Substitutable for Term {
    fn classical(&self, x: &Name, n: &Sum<Term>) -> Sum<Term> {
        let mut fv = BTreeSet::new();
        for m in n.support() {
            fv.extend(m.free_vars());
        }
        Classical { x, n, fv: &fv }.term(self)
    }

    fn linear(&self, x: &Name, n: &Term) -> Sum<Term> {
        let fv = n.free_vars();
        Linear { x, n, fv: &fv }.term(self)
    }

    fn mentions(&self, x: &Name) -> bool {
        self.has_free(x)
    }
}

impl Substitutable for Bag {
    fn classical(&self, x: &Name, n: &Sum<Term>) -> Sum<Bag> {
        let mut fv = BTreeSet::new();
        for m in n.support() {
            fv.extend(m.free_vars());
        }
        Classical { x, n, fv: &fv }.bag(self)
    }

    fn linear(&self, x: &Name, n: &Term) -> Sum<Bag> {
        let fv = n.free_vars();
        Linear { x, n, fv: &fv }.bag(self)
    }

    fn mentions(&self, x: &Name) -> bool {
        self.has_free(x)
    }
}

struct Classical<'a> {
    x: &'a Name,
    n: &'a Sum<Term>,
    fv: &'a BTreeSet<Name>,
}

impl Classical<'_> {
    fn term(&self, t: &Term) -> Sum<Term> {
        if !t.has_free(self.x) {
            return Sum::single(t.clone());
        }
        match t {
            Term::Var(_) => self.n.clone(),
            Term::Abs(y, b) => {
                if self.fv.contains(y) {
                    let mut avoid = self.fv.clone();
                    avoid.insert(self.x.clone());
                    let (y2, b2) = freshen_binder(y, b, &avoid);
                    sum_abs(&y2, &self.term(&b2))
                } else {
                    sum_abs(y, &self.term(b))
                }
            }
            Term::App(f, p, l) => sum_app_labeled(&self.term(f), &self.bag(p), *l),
        }
    }

    fn bag(&self, p: &Bag) -> Sum<Bag> {
        let mut acc: Vec<(Bag, usize)> = vec![(Bag::empty(), 1)];
        for e in p.iter() {
            if !e.res.content().has_free(self.x) {
                for (b, _) in acc.iter_mut() {
                    b.push_elem(e.clone());
                }
                continue;
            }
            let s = self.term(e.res.content());
            if e.res.is_reusable() {
                for (k, m) in s.expanded().into_iter().enumerate() {
                    let res = Resource::Reusable(m.clone());
                    let el = if k == 0 { Elem { id: e.id, res } } else { Elem::new(res) };
                    for (b, _) in acc.iter_mut() {
                        b.push_elem(el.clone());
                    }
                }
            } else {
                let mut next = Vec::with_capacity(acc.len() * s.support_len());
                for (b, k) in &acc {
                    for (m, n) in s.iter() {
                        let mut b2 = b.clone();
                        b2.push_elem(Elem { id: e.id, res: Resource::Linear(m.clone()) });
                        next.push((b2, k * n));
                    }
                }
                acc = next;
            }
        }
        let mut out = Sum::zero();
        for (b, k) in acc {
            out.add_n(b, k);
        }
        out
    }
}

struct Linear<'a> {
    x: &'a Name,
    n: &'a Term,
    fv: &'a BTreeSet<Name>,
}

impl Linear<'_> {
    fn term(&self, t: &Term) -> Sum<Term> {
        if !t.has_free(self.x) {
            return Sum::zero();
        }
        match t {
            Term::Var(_) => Sum::single(self.n.clone()),
            Term::Abs(y, b) => {
                if self.fv.contains(y) {
                    let mut avoid = self.fv.clone();
                    avoid.insert(self.x.clone());
                    let (y2, b2) = freshen_binder(y, b, &avoid);
                    sum_abs(&y2, &self.term(&b2))
                } else {
                    sum_abs(y, &self.term(b))
                }
            }
            Term::App(f, p, l) => {
                let mut out = sum_app_labeled(&self.term(f), &Sum::single(p.clone()), *l);
                out.plus(&sum_app_labeled(&Sum::single((**f).clone()), &self.bag(p), *l));
                out
            }
        }
    }

    fn bag(&self, p: &Bag) -> Sum<Bag> {
        let mut out = Sum::zero();
        for (i, e) in p.iter().enumerate() {
            if !e.res.content().has_free(self.x) {
                continue;
            }
            let s = self.term(e.res.content());
            if e.res.is_reusable() {
                // [M!]·P  ->  [M<N/x>, M!]·P
                for (m, n) in s.iter() {
                    let mut elems = p.elems().to_vec();
                    elems.insert(i, Elem::new(Resource::Linear(m.clone())));
                    out.add_n(Bag::from_elems(elems), n);
                }
            } else {
                out.plus(&replace_elem_with_sum(p, i, false, &s));
            }
        }
        out
    }
}

/// `A{ΣN/x}`, capture-avoiding, with sums pushed outward.
pub fn classical_subst<A: Substitutable>(a: &A, x: &Name, n: &Sum<Term>) -> Sum<A> {
    a.classical(x, n)
}

/// `A{N+x/x}`
pub fn partial_subst<A: Substitutable>(a: &A, x: &Name, n: &Term) -> Sum<A> {
    let s: Sum<Term> = [n.clone(), Term::Var(x.clone())].into_iter().collect();
    a.classical(x, &s)
}

/// `A<N/x>`: replaces exactly one free occurrence of `x`, summing over the
/// choices; `0` when there is none.
pub fn linear_subst<A: Substitutable>(a: &A, x: &Name, n: &Term) -> Sum<A> {
    a.linear(x, n)
}

/// Bilinear extension of [`linear_subst`] to sums in both arguments.
pub fn linear_subst_sum<A: Substitutable>(a: &Sum<A>, x: &Name, n: &Sum<Term>) -> Sum<A> {
    let mut out = Sum::zero();
    for (ai, k) in a.iter() {
        for (nj, m) in n.iter() {
            out.plus_scaled(&ai.linear(x, nj), k * m);
        }
    }
    out
}

/// Extension of [`classical_subst`] to a sum in first position.
pub fn classical_subst_sum<A: Substitutable>(a: &Sum<A>, x: &Name, n: &Sum<Term>) -> Sum<A> {
    a.flat_map(|ai| ai.classical(x, n))
}

/// `A<N/x> := A<N/x>` for a linear resource, `A{N+x/x}` for a reusable one.
pub fn resource_subst<A: Substitutable>(a: &A, x: &Name, r: &Resource) -> Sum<A> {
    match r {
        Resource::Linear(n) => a.linear(x, n),
        Resource::Reusable(n) => partial_subst(a, x, n),
    }
}

/// `A<[r1, ..., rn]/x>`: resource substitutions composed left to right, in
/// the canonical order of the bag. Requires `x` not free in `p`.
pub fn bag_subst<A: Substitutable>(a: &A, x: &Name, p: &Bag) -> Result<Sum<A>> {
    if p.has_free(x) {
        return Err(Error::FreshnessViolation { var: x.to_string() });
    }
    Ok(bag_subst_ordered(a, x, &p.canonical_order().iter().map(|e| &e.res).collect::<Vec<_>>()))
}

/// Composition of resource substitutions in the given order.
pub fn bag_subst_ordered<A: Substitutable>(a: &A, x: &Name, order: &[&Resource]) -> Sum<A> {
    let mut acc = Sum::single(a.clone());
    for r in order {
        acc = acc.flat_map(|t| resource_subst(t, x, r));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_sum, parse_term};

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }
    fn s(s: &str) -> Sum<Term> {
        parse_sum(s).unwrap()
    }
    fn x() -> Name {
        Name::new("x")
    }
    fn bag1(src: &str) -> Bag {
        match t(&format!("h {src}")) {
            Term::App(_, p, _) => p,
            _ => unreachable!(),
        }
    }

    #[test]
    fn classical_examples() {
        assert!(classical_subst(&t("x"), &x(), &Sum::zero()).is_zero());
        assert_eq!(classical_subst(&bag1("[!x]"), &x(), &Sum::zero()), Sum::single(Bag::empty()));
        assert_eq!(classical_subst(&t("x[!x]"), &x(), &s("a + b")), s("a[!a, !b] + b[!a, !b]"));
    }

    #[test]
    fn classical_avoids_capture() {
        let out = classical_subst(&t("\\y.x[y]"), &x(), &s("y"));
        assert_eq!(out, s("\\z.y[z]"));
        assert_eq!(classical_subst(&t("\\x.x"), &x(), &s("a")), s("\\x.x"));
    }

    #[test]
    fn partial_examples() {
        let n = t("N");
        assert_eq!(partial_subst(&t("x"), &x(), &n), s("N + x"));
        assert_eq!(partial_subst(&bag1("[!x]"), &x(), &n), Sum::single(bag1("[!N, !x]")));
        assert_eq!(partial_subst(&t("y"), &x(), &n), s("y"));
    }

    #[test]
    fn linear_examples() {
        let n = t("N");
        assert_eq!(linear_subst(&t("y[x][x]"), &x(), &n), s("y[N][x] + y[x][N]"));
        assert!(linear_subst(&t("\\y.y"), &x(), &n).is_zero());
        assert_eq!(linear_subst(&bag1("[!x]"), &x(), &n), Sum::single(bag1("[N, !x]")));
        assert!(linear_subst(&t("\\x.x"), &x(), &n).is_zero());
        assert!(linear_subst(&Bag::empty(), &x(), &n).is_zero());
    }

    #[test]
    fn linear_renames_binder_against_argument() {
        let out = linear_subst(&t("\\y.x[y]"), &x(), &t("y"));
        assert_eq!(out, s("\\z.y[z]"));
    }

    #[test]
    fn resource_examples() {
        let z = t("z");
        assert_eq!(resource_subst(&t("x"), &x(), &Resource::Linear(z.clone())), s("z"));
        assert_eq!(resource_subst(&t("x"), &x(), &Resource::Reusable(z.clone())), s("z + x"));
        assert_eq!(resource_subst(&t("y[x]"), &x(), &Resource::Reusable(z)), s("y[z] + y[x]"));
    }

    #[test]
    fn bag_examples() {
        assert_eq!(bag_subst(&t("x"), &x(), &bag1("[z]")).unwrap(), s("z"));
        assert_eq!(bag_subst(&t("x"), &x(), &Bag::empty()).unwrap(), s("x"));
        assert_eq!(bag_subst(&t("x[x]"), &x(), &bag1("[a, b]")).unwrap(), s("a[b] + b[a]"));
    }

    #[test]
    fn bag_subst_rejects_captured_variable() {
        let err = bag_subst(&t("x"), &x(), &bag1("[x]")).unwrap_err();
        assert_eq!(err, Error::FreshnessViolation { var: "x".into() });
    }

    #[test]
    fn fresh_names_are_deterministic() {
        let avoid: BTreeSet<Name> = ["y", "y0", "y1"].into_iter().map(Name::new).collect();
        assert_eq!(fresh_name(&Name::new("y"), &avoid).as_str(), "y2");
        assert_eq!(fresh_name(&Name::new("y7"), &avoid).as_str(), "y2");
    }
}
