use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::path::{Path, TermStep};
use crate::syntax::Term;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    Before,
    After,
    Incomparable,
}

impl Order {
    pub fn flip(self) -> Order {
        match self {
            Order::Before => Order::After,
            Order::After => Order::Before,
            Order::Incomparable => Order::Incomparable,
        }
    }
}

/// The linear left-to-right order between the subterms at `p1` and `p2`.
/// Equal paths are incomparable.
pub fn precedes(p1: &Path, p2: &Path, m: &Term) -> Result<Order> {
    p1.follow(m)?;
    p2.follow(m)?;
    let s1 = p1.term_steps()?;
    let s2 = p2.term_steps()?;
    Ok(compare(m, &s1, &s2))
}

/// Whether `b` is strictly after `a`; shorthand for `precedes == Before`.
pub fn strictly_precedes(a: &Path, b: &Path, m: &Term) -> Result<bool> {
    Ok(precedes(a, b, m)? == Order::Before)
}

fn linear(t: &Term, steps: &[TermStep]) -> bool {
    let mut cur = t;
    for s in steps {
        match (s, cur) {
            (TermStep::Body, Term::Abs(_, b)) => cur = b,
            (TermStep::Fun, Term::App(f, _, _)) => cur = f,
            (TermStep::Elem(id), Term::App(_, p, _)) => {
                let e = p.get(*id).expect("validated path");
                if e.res.is_reusable() {
                    return false;
                }
                cur = e.res.content();
            }
            _ => unreachable!("validated path"),
        }
    }
    true
}

fn same_step(a: &TermStep, b: &TermStep) -> bool {
    match (a, b) {
        (TermStep::Body, TermStep::Body) | (TermStep::Fun, TermStep::Fun) => true,
        (TermStep::Elem(x), TermStep::Elem(y)) => x == y,
        _ => false,
    }
}

fn compare(t: &Term, s1: &[TermStep], s2: &[TermStep]) -> Order {
    match (s1.first(), s2.first()) {
        (None, None) => return Order::Incomparable,
        (None, Some(_)) => return Order::Before,
        (Some(_), None) => return Order::After,
        _ => {}
    }
    let (l1, l2) = (linear(t, s1), linear(t, s2));
    if l1 && !l2 {
        return Order::Before;
    }
    if l2 && !l1 {
        return Order::After;
    }
    let (a, b) = (&s1[0], &s2[0]);
    if l1 && l2 {
        match (a, b) {
            (TermStep::Fun, TermStep::Elem(_)) => return Order::Before,
            (TermStep::Elem(_), TermStep::Fun) => return Order::After,
            _ => {}
        }
    }
    if !same_step(a, b) {
        return Order::Incomparable;
    }
    let child = match (a, t) {
        (TermStep::Body, Term::Abs(_, body)) => &**body,
        (TermStep::Fun, Term::App(f, _, _)) => &**f,
        (TermStep::Elem(id), Term::App(_, p, _)) => p.get(*id).expect("validated path").res.content(),
        _ => unreachable!("validated path"),
    };
    compare(child, &s1[1..], &s2[1..])
}
