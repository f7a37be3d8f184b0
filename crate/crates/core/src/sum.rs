//! Finite formal sums with natural coefficients, and the extension of the
//! term and bag constructors to sums.

use std::collections::btree_map::{self, BTreeMap};
use std::fmt;

use crate::canon::{Canonical, CanonicalForm};
use crate::syntax::{Bag, Elem, Label, Name, Resource, Term};

/// A multiset of addends keyed by canonical form. Iteration follows the
/// canonical order of the addends.
#[derive(Clone, PartialEq, Eq)]
pub struct Sum<T> {
    addends: BTreeMap<CanonicalForm, (T, usize)>,
}

impl<T: Canonical + Clone> Sum<T> {
    pub fn zero() -> Self {
        Sum { addends: BTreeMap::new() }
    }

    pub fn single(t: T) -> Self {
        let mut s = Sum::zero();
        s.add(t);
        s
    }

    pub fn add(&mut self, t: T) {
        self.add_n(t, 1);
    }

    pub fn add_n(&mut self, t: T, n: usize) {
        if n == 0 {
            return;
        }
        match self.addends.entry(t.canonical()) {
            btree_map::Entry::Occupied(mut o) => o.get_mut().1 += n,
            btree_map::Entry::Vacant(v) => {
                v.insert((t, n));
            }
        }
    }

    /// `self + other`
    pub fn plus(&mut self, other: &Sum<T>) {
        self.plus_scaled(other, 1);
    }

    pub fn plus_scaled(&mut self, other: &Sum<T>, k: usize) {
        for (t, n) in other.iter() {
            self.add_n(t.clone(), n * k);
        }
    }

    /// Removes one copy of `t`; false if `t` is not an addend.
    pub fn remove_one(&mut self, t: &T) -> bool {
        let k = t.canonical();
        match self.addends.get_mut(&k) {
            Some((_, n)) if *n > 1 => {
                *n -= 1;
                true
            }
            Some(_) => {
                self.addends.remove(&k);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, t: &T) -> bool {
        self.addends.contains_key(&t.canonical())
    }

    pub fn contains_key(&self, k: &CanonicalForm) -> bool {
        self.addends.contains_key(k)
    }

    pub fn get(&self, k: &CanonicalForm) -> Option<&T> {
        self.addends.get(k).map(|(t, _)| t)
    }

    pub fn multiplicity(&self, t: &T) -> usize {
        self.addends.get(&t.canonical()).map_or(0, |(_, n)| *n)
    }

    pub fn map<U: Canonical + Clone>(&self, f: impl Fn(&T) -> U) -> Sum<U> {
        let mut out = Sum::zero();
        for (t, n) in self.iter() {
            out.add_n(f(t), n);
        }
        out
    }

    /// `Σ n_i · f(t_i)`
    pub fn flat_map<U: Canonical + Clone>(&self, f: impl Fn(&T) -> Sum<U>) -> Sum<U> {
        let mut out = Sum::zero();
        for (t, n) in self.iter() {
            out.plus_scaled(&f(t), n);
        }
        out
    }
}

impl<T> Sum<T> {
    pub fn is_zero(&self) -> bool {
        self.addends.is_empty()
    }

    /// Number of addends counted with multiplicity.
    pub fn len(&self) -> usize {
        self.addends.values().map(|(_, n)| n).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.addends.is_empty()
    }

    /// Number of distinct addends.
    pub fn support_len(&self) -> usize {
        self.addends.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, usize)> {
        self.addends.values().map(|(t, n)| (t, *n))
    }

    pub fn keys(&self) -> impl Iterator<Item = &CanonicalForm> {
        self.addends.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&CanonicalForm, &T, usize)> {
        self.addends.iter().map(|(k, (t, n))| (k, t, *n))
    }

    /// The distinct addends in canonical order.
    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.addends.values().map(|(t, _)| t)
    }

    /// Addends repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<&T> {
        self.addends.values().flat_map(|(t, n)| std::iter::repeat_n(t, *n)).collect()
    }

    /// The addend of a sum with exactly one addend of multiplicity 1.
    pub fn as_single(&self) -> Option<&T> {
        match self.addends.values().next() {
            Some((t, 1)) if self.addends.len() == 1 => Some(t),
            _ => None,
        }
    }
}

impl<T: Canonical + Clone> FromIterator<T> for Sum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut s = Sum::zero();
        for t in iter {
            s.add(t);
        }
        s
    }
}

impl<T: Canonical + Clone> From<T> for Sum<T> {
    fn from(t: T) -> Self {
        Sum::single(t)
    }
}

impl<T> Canonical for Sum<T> {
    fn canonical(&self) -> CanonicalForm {
        let mut s = String::from("{");
        let mut first = true;
        for (k, (_, n)) in &self.addends {
            for _ in 0..*n {
                if !first {
                    s.push('+');
                }
                first = false;
                s.push_str(k.as_str());
            }
        }
        s.push('}');
        CanonicalForm::from_raw(s)
    }
}

impl<T: fmt::Display> fmt::Display for Sum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.addends.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (t, n) in self.addends.values() {
            for _ in 0..*n {
                if !first {
                    f.write_str(" + ")?;
                }
                first = false;
                write!(f, "{t}")?;
            }
        }
        Ok(())
    }
}

impl<T: fmt::Display> fmt::Debug for Sum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `\x.(Σ M_i) := Σ \x.M_i`
pub fn sum_abs(x: &Name, s: &Sum<Term>) -> Sum<Term> {
    s.map(|m| Term::Abs(x.clone(), Box::new(m.clone())))
}

/// `(Σ M_i)(Σ P_j) := Σ M_i P_j`
pub fn sum_app(m: &Sum<Term>, p: &Sum<Bag>) -> Sum<Term> {
    sum_app_labeled(m, p, None)
}

pub(crate) fn sum_app_labeled(m: &Sum<Term>, p: &Sum<Bag>, label: Option<Label>) -> Sum<Term> {
    let mut out = Sum::zero();
    for (mi, a) in m.iter() {
        for (pj, b) in p.iter() {
            out.add_n(Term::App(Box::new(mi.clone()), pj.clone(), label), a * b);
        }
    }
    out
}

/// `[Σ M_i]·(Σ P_j) := Σ [M_i]·P_j`
pub fn sum_bag_linear(m: &Sum<Term>, p: &Sum<Bag>) -> Sum<Bag> {
    let mut out = Sum::zero();
    for (mi, a) in m.iter() {
        for (pj, b) in p.iter() {
            let mut bag = Bag::linear([mi.clone()]);
            for e in pj.iter() {
                bag.push_elem(e.clone());
            }
            out.add_n(bag, a * b);
        }
    }
    out
}

/// `[(Σ_{i≤k} M_i)^!]·(Σ P_j) := Σ [M_1^!, ..., M_k^!]·P_j`; in particular
/// `[0^!]·P = P`.
pub fn sum_bag_reusable(m: &Sum<Term>, p: &Sum<Bag>) -> Sum<Bag> {
    let copies = Bag::reusable(m.expanded().into_iter().cloned());
    let mut out = Sum::zero();
    for (pj, b) in p.iter() {
        out.add_n(copies.concat(pj), b);
    }
    out
}

/// The bag sum obtained by replacing element `at` of `p` with the sum `m`
/// wrapped like `wrap`, distributing by the rules above. The id of the
/// replaced element is kept on its first copy.
pub(crate) fn replace_elem_with_sum(p: &Bag, at: usize, reusable: bool, m: &Sum<Term>) -> Sum<Bag> {
    let id = p.elems()[at].id;
    let rest: Vec<Elem> = p.elems().iter().enumerate().filter(|(i, _)| *i != at).map(|(_, e)| e.clone()).collect();
    let mut out = Sum::zero();
    if reusable {
        let mut elems = Vec::with_capacity(p.len() + m.len());
        for (k, t) in m.expanded().into_iter().enumerate() {
            let res = Resource::Reusable(t.clone());
            elems.push(if k == 0 { Elem { id, res } } else { Elem::new(res) });
        }
        let mut bag = Bag::from_elems(elems);
        for e in &rest {
            bag.push_elem(e.clone());
        }
        out.add(bag);
    } else {
        for (t, n) in m.iter() {
            let mut elems = vec![Elem { id, res: Resource::Linear(t.clone()) }];
            elems.extend(rest.iter().cloned());
            out.add_n(Bag::from_elems(elems), n);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }

    #[test]
    fn reusable_of_zero_is_unit() {
        let r = sum_bag_reusable(&Sum::zero(), &Sum::single(Bag::empty()));
        assert_eq!(r, Sum::single(Bag::empty()));
    }

    #[test]
    fn reusable_of_two_addends() {
        let m: Sum<Term> = [v("a"), v("b")].into_iter().collect();
        let r = sum_bag_reusable(&m, &Sum::single(Bag::empty()));
        assert_eq!(r, Sum::single(Bag::reusable([v("a"), v("b")])));
    }

    #[test]
    fn application_distributes() {
        let m: Sum<Term> = [v("m1"), v("m2")].into_iter().collect();
        let p = Sum::single(Bag::linear([v("p")]));
        let out = sum_app(&m, &p);
        let expected: Sum<Term> =
            [Term::app(v("m1"), Bag::linear([v("p")])), Term::app(v("m2"), Bag::linear([v("p")]))]
                .into_iter()
                .collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn zero_is_absorbing_for_linear_constructors() {
        let p = Sum::single(Bag::empty());
        assert!(sum_app(&Sum::zero(), &p).is_zero());
        assert!(sum_bag_linear(&Sum::zero(), &p).is_zero());
        assert!(sum_abs(&Name::new("x"), &Sum::zero()).is_zero());
    }

    #[test]
    fn multiplicities_multiply() {
        let mut m = Sum::zero();
        m.add_n(v("a"), 2);
        let mut p = Sum::zero();
        p.add_n(Bag::empty(), 3);
        assert_eq!(sum_app(&m, &p).len(), 6);
    }

    #[test]
    fn sum_laws() {
        let s: Sum<Term> = [v("a"), v("b"), v("a")].into_iter().collect();
        let mut t = s.clone();
        t.plus(&Sum::zero());
        assert_eq!(t, s);
        let u: Sum<Term> = [v("c")].into_iter().collect();
        let mut st = s.clone();
        st.plus(&u);
        let mut ts = u.clone();
        ts.plus(&s);
        assert_eq!(st, ts);
        assert_eq!(s.to_string(), "a + a + b");
        assert_eq!(Sum::<Term>::zero().to_string(), "0");
    }
}
