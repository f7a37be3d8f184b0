//! Terms, resources, bags and expressions.
//!
//! Bags are multisets. Every bag element carries an [`ElemId`] so that a
//! [`Path`](crate::path::Path) can address one element of an unordered bag
//! across traversals. Ids never take part in equality: `PartialEq` and `Hash`
//! on terms and bags go through [`CanonicalForm`](crate::canon::CanonicalForm).

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::canon::Canonical;

/// A variable or binder name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Hidden identity of a bag element. Unique within the bag that holds it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ElemId(u64);

static NEXT_ELEM_ID: AtomicU64 = AtomicU64::new(1);

impl ElemId {
    pub fn fresh() -> Self {
        ElemId(NEXT_ELEM_ID.fetch_add(1, Ordering::Relaxed))
    }

    pub fn raw(self) -> u64 {
        self.0
    }
}

/// Marker carried by application nodes of a labeled term; used for residual
/// tracking. Ignored by equality and canonical forms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Label(pub u32);

#[derive(Clone)]
pub enum Term {
    Var(Name),
    Abs(Name, Box<Term>),
    /// Application of a term to a bag. The label slot is `None` except in
    /// [`LabeledTerm`](crate::reduction::LabeledTerm)s.
    App(Box<Term>, Bag, Option<Label>),
}

#[derive(Clone)]
pub enum Resource {
    Linear(Term),
    Reusable(Term),
}

#[derive(Clone)]
pub struct Elem {
    pub id: ElemId,
    pub res: Resource,
}

/// A finite multiset of resources. `1` is the empty bag.
#[derive(Clone, Default)]
pub struct Bag {
    elems: Vec<Elem>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expression {
    Term(Term),
    Bag(Bag),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Name::new(name))
    }

    pub fn abs(binder: &str, body: Term) -> Term {
        Term::Abs(Name::new(binder), Box::new(body))
    }

    /// `\x y z. body` as nested abstractions.
    pub fn abs_many(binders: &[&str], body: Term) -> Term {
        binders.iter().rev().fold(body, |acc, b| Term::abs(b, acc))
    }

    pub fn app(fun: Term, arg: Bag) -> Term {
        Term::App(Box::new(fun), arg, None)
    }

    /// `head P1 ... Pn`
    pub fn apps(head: Term, args: impl IntoIterator<Item = Bag>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn is_abs(&self) -> bool {
        matches!(self, Term::Abs(..))
    }

    /// True for `(\x.M) P`.
    pub fn is_redex(&self) -> bool {
        matches!(self, Term::App(f, _, _) if f.is_abs())
    }

    pub fn label(&self) -> Option<Label> {
        match self {
            Term::App(_, _, l) => *l,
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        fv_term(self, &mut bound, &mut out);
        out
    }

    pub fn has_free(&self, x: &Name) -> bool {
        match self {
            Term::Var(y) => y == x,
            Term::Abs(y, b) => y != x && b.has_free(x),
            Term::App(f, p, _) => f.has_free(x) || p.has_free(x),
        }
    }

    /// Every name occurring in the term, bound or free.
    pub fn names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(y) => {
                out.insert(y.clone());
            }
            Term::Abs(y, b) => {
                out.insert(y.clone());
                b.names(out);
            }
            Term::App(f, p, _) => {
                f.names(out);
                for e in p.iter() {
                    e.res.content().names(out);
                }
            }
        }
    }

    /// Number of symbols: every variable, abstraction, application, resource
    /// wrapper and bag cons counts one.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(f, p, _) => 1 + f.size() + p.size(),
        }
    }

    /// Copy with every label removed.
    pub fn erase_labels(&self) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::Abs(x, b) => Term::Abs(x.clone(), Box::new(b.erase_labels())),
            Term::App(f, p, _) => Term::App(Box::new(f.erase_labels()), p.map_content(Term::erase_labels), None),
        }
    }

    pub fn has_labels(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Abs(_, b) => b.has_labels(),
            Term::App(f, p, l) => l.is_some() || f.has_labels() || p.iter().any(|e| e.res.content().has_labels()),
        }
    }

    /// Splits `h P1 ... Pn` into the head and its argument bags.
    pub fn spine(&self) -> (&Term, Vec<&Bag>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, p, _) = t {
            args.push(p);
            t = f;
        }
        args.reverse();
        (t, args)
    }
}

fn fv_term(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(y) => {
            if !bound.contains(y) {
                out.insert(y.clone());
            }
        }
        Term::Abs(y, b) => {
            bound.push(y.clone());
            fv_term(b, bound, out);
            bound.pop();
        }
        Term::App(f, p, _) => {
            fv_term(f, bound, out);
            for e in p.iter() {
                fv_term(e.res.content(), bound, out);
            }
        }
    }
}

impl Resource {
    pub fn content(&self) -> &Term {
        match self {
            Resource::Linear(t) | Resource::Reusable(t) => t,
        }
    }

    pub fn into_content(self) -> Term {
        match self {
            Resource::Linear(t) | Resource::Reusable(t) => t,
        }
    }

    pub fn is_reusable(&self) -> bool {
        matches!(self, Resource::Reusable(_))
    }

    /// Same wrapper around a different content.
    pub fn with_content(&self, t: Term) -> Resource {
        match self {
            Resource::Linear(_) => Resource::Linear(t),
            Resource::Reusable(_) => Resource::Reusable(t),
        }
    }
}

impl Elem {
    pub fn new(res: Resource) -> Self {
        Elem { id: ElemId::fresh(), res }
    }
}

impl Bag {
    pub fn empty() -> Self {
        Bag { elems: Vec::new() }
    }

    pub fn from_resources(rs: impl IntoIterator<Item = Resource>) -> Self {
        Bag { elems: rs.into_iter().map(Elem::new).collect() }
    }

    pub fn linear(ts: impl IntoIterator<Item = Term>) -> Self {
        Bag::from_resources(ts.into_iter().map(Resource::Linear))
    }

    pub fn reusable(ts: impl IntoIterator<Item = Term>) -> Self {
        Bag::from_resources(ts.into_iter().map(Resource::Reusable))
    }

    pub(crate) fn from_elems(elems: Vec<Elem>) -> Self {
        Bag { elems }
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Elem> {
        self.elems.iter()
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn get(&self, id: ElemId) -> Option<&Elem> {
        self.elems.iter().find(|e| e.id == id)
    }

    pub fn position(&self, id: ElemId) -> Option<usize> {
        self.elems.iter().position(|e| e.id == id)
    }

    /// Adds a resource under a fresh id.
    pub fn push(&mut self, res: Resource) -> ElemId {
        let e = Elem::new(res);
        let id = e.id;
        self.elems.push(e);
        id
    }

    pub(crate) fn push_elem(&mut self, e: Elem) {
        if self.elems.iter().any(|o| o.id == e.id) {
            self.elems.push(Elem::new(e.res));
        } else {
            self.elems.push(e);
        }
    }

    /// Multiset union `P·Q`. Ids of `self` are kept; colliding ids of
    /// `other` are renewed.
    pub fn concat(&self, other: &Bag) -> Bag {
        let mut out = self.clone();
        for e in other.iter() {
            out.push_elem(e.clone());
        }
        out
    }

    /// Copy with the element `id` removed.
    pub fn without(&self, id: ElemId) -> Bag {
        Bag { elems: self.elems.iter().filter(|e| e.id != id).cloned().collect() }
    }

    /// Copy with the resource of element `id` replaced; the id is kept.
    pub fn replaced(&self, id: ElemId, res: Resource) -> Bag {
        Bag {
            elems: self
                .elems
                .iter()
                .map(|e| if e.id == id { Elem { id, res: res.clone() } } else { e.clone() })
                .collect(),
        }
    }

    pub fn has_free(&self, x: &Name) -> bool {
        self.elems.iter().any(|e| e.res.content().has_free(x))
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for e in &self.elems {
            out.extend(e.res.content().free_vars());
        }
        out
    }

    pub fn size(&self) -> usize {
        self.elems.iter().map(|e| 2 + e.res.content().size()).sum()
    }

    pub(crate) fn map_content(&self, f: impl Fn(&Term) -> Term) -> Bag {
        Bag {
            elems: self.elems.iter().map(|e| Elem { id: e.id, res: e.res.with_content(f(e.res.content())) }).collect(),
        }
    }

    /// Elements ordered by their standalone canonical form (free names kept).
    /// This fixes which element a baby step or the machine consumes first.
    pub fn canonical_order(&self) -> Vec<&Elem> {
        let mut keyed: Vec<(String, &Elem)> =
            self.elems.iter().map(|e| (crate::canon::resource_key(&e.res), e)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.into_iter().map(|(_, e)| e).collect()
    }
}

impl Expression {
    pub fn free_vars(&self) -> BTreeSet<Name> {
        match self {
            Expression::Term(t) => t.free_vars(),
            Expression::Bag(p) => p.free_vars(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Expression::Term(t) => t.size(),
            Expression::Bag(p) => p.size(),
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}
impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical().hash(state)
    }
}

impl PartialEq for Bag {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}
impl Eq for Bag {}

impl Hash for Bag {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical().hash(state)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::print_term(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::print::print_term(self))
    }
}

impl fmt::Debug for Bag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::print_bag(self))
    }
}

impl fmt::Display for Bag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::print::print_bag(self))
    }
}

/// Pure lambda terms, the source of the `(·)*` embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaTerm {
    Var(Name),
    Abs(Name, Box<LambdaTerm>),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
}

impl LambdaTerm {
    pub fn var(x: &str) -> Self {
        LambdaTerm::Var(Name::new(x))
    }

    pub fn abs(x: &str, b: LambdaTerm) -> Self {
        LambdaTerm::Abs(Name::new(x), Box::new(b))
    }

    pub fn app(f: LambdaTerm, a: LambdaTerm) -> Self {
        LambdaTerm::App(Box::new(f), Box::new(a))
    }

    pub fn size(&self) -> usize {
        match self {
            LambdaTerm::Var(_) => 1,
            LambdaTerm::Abs(_, b) => 1 + b.size(),
            LambdaTerm::App(f, a) => 1 + f.size() + a.size(),
        }
    }
}

/// `x* = x`, `(\x.M)* = \x.M*`, `(M N)* = M*[!N*]`.
pub fn from_lambda(t: &LambdaTerm) -> Term {
    match t {
        LambdaTerm::Var(x) => Term::Var(x.clone()),
        LambdaTerm::Abs(x, b) => Term::Abs(x.clone(), Box::new(from_lambda(b))),
        LambdaTerm::App(f, a) => Term::app(from_lambda(f), Bag::reusable([from_lambda(a)])),
    }
}
