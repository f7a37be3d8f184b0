//! Nameless canonical forms.
//!
//! Bound variables become de Bruijn indices, bag elements are sorted by the
//! string order of their own canonical forms (computed in the binder context
//! of the bag), and element ids and labels are dropped. Two expressions are
//! alpha-equivalent up to multiset permutation iff their canonical forms
//! coincide.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{Bag, Elem, Expression, Name, Resource, Term};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalForm(String);

impl CanonicalForm {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub(crate) fn from_raw(s: String) -> Self {
        CanonicalForm(s)
    }
}

impl fmt::Debug for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub trait Canonical {
    fn canonical(&self) -> CanonicalForm;
}

impl Canonical for Term {
    fn canonical(&self) -> CanonicalForm {
        let mut out = String::new();
        write_term(self, &mut Vec::new(), &mut out);
        CanonicalForm(out)
    }
}

impl Canonical for Bag {
    fn canonical(&self) -> CanonicalForm {
        let mut out = String::new();
        write_bag(self, &mut Vec::new(), &mut out);
        CanonicalForm(out)
    }
}

impl Canonical for Expression {
    fn canonical(&self) -> CanonicalForm {
        match self {
            Expression::Term(t) => t.canonical(),
            Expression::Bag(p) => p.canonical(),
        }
    }
}

pub fn canonicalize(e: &Expression) -> CanonicalForm {
    e.canonical()
}

/// Alpha-equivalence up to permutation of bag elements.
pub fn alpha_eq(a: &Expression, b: &Expression) -> bool {
    match (a, b) {
        (Expression::Term(_), Expression::Term(_)) | (Expression::Bag(_), Expression::Bag(_)) => {
            a.canonical() == b.canonical()
        }
        _ => false,
    }
}

pub(crate) fn write_term<'a>(t: &'a Term, env: &mut Vec<&'a Name>, out: &mut String) {
    match t {
        Term::Var(x) => match env.iter().rev().position(|b| *b == x) {
            Some(i) => {
                out.push('#');
                out.push_str(&i.to_string());
            }
            None => out.push_str(x.as_str()),
        },
        Term::Abs(x, b) => {
            out.push('\\');
            env.push(x);
            write_term(b, env, out);
            env.pop();
        }
        Term::App(f, p, _) => {
            out.push('(');
            write_term(f, env, out);
            out.push(')');
            write_bag(p, env, out);
        }
    }
}

fn write_resource<'a>(r: &'a Resource, env: &mut Vec<&'a Name>, out: &mut String) {
    if r.is_reusable() {
        out.push('!');
    }
    write_term(r.content(), env, out);
}

pub(crate) fn write_bag<'a>(p: &'a Bag, env: &mut Vec<&'a Name>, out: &mut String) {
    let keys = elem_keys(p, env);
    let mut sorted: Vec<&String> = keys.iter().collect();
    sorted.sort();
    out.push('[');
    for (i, k) in sorted.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(k);
    }
    out.push(']');
}

fn elem_keys<'a>(p: &'a Bag, env: &mut Vec<&'a Name>) -> Vec<String> {
    p.iter()
        .map(|e| {
            let mut s = String::new();
            write_resource(&e.res, env, &mut s);
            s
        })
        .collect()
}

/// Positions of the elements of `p` in canonical order, computed under the
/// binders `env` (outermost first). Ties keep storage order.
pub(crate) fn elem_order<'a>(p: &'a Bag, env: &mut Vec<&'a Name>) -> Vec<usize> {
    let keys = elem_keys(p, env);
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    idx
}

/// Canonical key of a resource taken on its own (free names kept verbatim).
pub fn resource_key(r: &Resource) -> String {
    let mut s = String::new();
    write_resource(r, &mut Vec::new(), &mut s);
    s
}

/// A named representative of the canonical form: binders renamed by depth
/// (`v0`, `v1`, ... skipping free names) and bag elements in canonical order.
pub fn canonical_term(t: &Term) -> Term {
    let free = t.free_vars();
    let mut env = Vec::new();
    rename_canon(t, &free, &mut env)
}

fn binder_name(depth: usize, free: &BTreeSet<Name>) -> Name {
    let mut k = depth;
    loop {
        let n = Name::from(format!("v{k}"));
        if !free.contains(&n) {
            return n;
        }
        k += 1000;
    }
}

fn rename_canon(t: &Term, free: &BTreeSet<Name>, env: &mut Vec<(Name, Name)>) -> Term {
    match t {
        Term::Var(x) => match env.iter().rev().find(|(old, _)| old == x) {
            Some((_, new)) => Term::Var(new.clone()),
            None => Term::Var(x.clone()),
        },
        Term::Abs(x, b) => {
            let new = binder_name(env.len(), free);
            env.push((x.clone(), new.clone()));
            let body = rename_canon(b, free, env);
            env.pop();
            Term::Abs(new, Box::new(body))
        }
        Term::App(f, p, _) => {
            let f2 = rename_canon(f, free, env);
            let elems: Vec<Elem> = p
                .iter()
                .map(|e| Elem { id: e.id, res: e.res.with_content(rename_canon(e.res.content(), free, env)) })
                .collect();
            let renamed = Bag::from_elems(elems);
            let ctx: Vec<Name> = env.iter().map(|(_, n)| n.clone()).collect();
            let order = elem_order(&renamed, &mut ctx.iter().collect());
            let sorted = order.into_iter().map(|i| renamed.elems()[i].clone()).collect();
            Term::App(Box::new(f2), Bag::from_elems(sorted), None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    fn key(s: &str) -> CanonicalForm {
        parse_term(s).unwrap().canonical()
    }

    #[test]
    fn alpha_renaming() {
        assert_eq!(key("\\x.x"), key("\\y.y"));
        assert_ne!(key("\\x.y"), key("\\y.y"));
    }

    #[test]
    fn bag_permutation_and_multiplicity() {
        let ab = Expression::Bag(Bag::from_resources([
            Resource::Linear(Term::var("a")),
            Resource::Reusable(Term::var("b")),
        ]));
        let ba = Expression::Bag(Bag::from_resources([
            Resource::Reusable(Term::var("b")),
            Resource::Linear(Term::var("a")),
        ]));
        assert!(alpha_eq(&ab, &ba));
        let aa = Expression::Bag(Bag::linear([Term::var("a"), Term::var("a")]));
        let a = Expression::Bag(Bag::linear([Term::var("a")]));
        assert!(!alpha_eq(&aa, &a));
    }

    #[test]
    fn ordered_application_positions() {
        assert_eq!(key("x[b, a]"), key("x[a, b]"));
        assert_ne!(key("y[F][I]"), key("y[I][F]"));
    }

    #[test]
    fn bag_order_depends_on_context_not_names() {
        assert_eq!(key("\\a.y[a, b]"), key("\\c.y[c, b]"));
    }

    #[test]
    fn canonical_term_is_alpha_equal() {
        let t = parse_term("\\x.\\y.x[y, !\\z.z[x]]").unwrap();
        assert_eq!(canonical_term(&t), t);
        assert_eq!(crate::print::print_term(&canonical_term(&t)), "\\v0 v1.v0[!\\v2.v2[v0], v1]");
    }
}
