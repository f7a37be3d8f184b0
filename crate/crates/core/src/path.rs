//! Positions of subterms.
//!
//! A [`Path`] addresses bag elements by [`ElemId`], so it stays valid while
//! the term is traversed in any order. Its public form replaces ids by the
//! element's index in canonical (printed) order; that form survives printing
//! and re-parsing.

use std::fmt;

use crate::canon::elem_order;
use crate::error::{Error, Result};
use crate::sum::{replace_elem_with_sum, sum_abs, sum_app_labeled, Sum};
use crate::syntax::{Bag, ElemId, Name, Term};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum PathStep {
    AbsBody,
    AppFun,
    AppArg,
    BagElem(ElemId),
    ResourceContent,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Path(pub Vec<PathStep>);

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| match s {
                PathStep::AbsBody => "body".to_string(),
                PathStep::AppFun => "fun".to_string(),
                PathStep::AppArg => "arg".to_string(),
                PathStep::BagElem(id) => format!("elem#{}", id.raw()),
                PathStep::ResourceContent => "content".to_string(),
            })
            .collect();
        write!(f, "/{}", parts.join("/"))
    }
}

fn invalid(path: &Path, why: &str) -> Error {
    Error::InvalidPath(format!("{path:?}: {why}"))
}

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn steps(&self) -> &[PathStep] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, s: PathStep) -> Path {
        let mut v = self.0.clone();
        v.push(s);
        Path(v)
    }

    /// Path to the content of element `id` of the argument bag.
    pub fn elem_content(&self, id: ElemId) -> Path {
        let mut v = self.0.clone();
        v.extend([PathStep::AppArg, PathStep::BagElem(id), PathStep::ResourceContent]);
        Path(v)
    }

    pub fn join(&self, tail: &Path) -> Path {
        let mut v = self.0.clone();
        v.extend_from_slice(&tail.0);
        Path(v)
    }

    pub fn is_prefix_of(&self, other: &Path) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn strip_prefix(&self, prefix: &Path) -> Option<Path> {
        prefix.is_prefix_of(self).then(|| Path(self.0[prefix.0.len()..].to_vec()))
    }

    /// The subterm at this path. Paths must end on a term, not inside a bag.
    pub fn follow<'a>(&self, t: &'a Term) -> Result<&'a Term> {
        let mut cur = t;
        let mut i = 0;
        let s = &self.0;
        while i < s.len() {
            match (s[i], cur) {
                (PathStep::AbsBody, Term::Abs(_, b)) => {
                    cur = b;
                    i += 1;
                }
                (PathStep::AppFun, Term::App(f, _, _)) => {
                    cur = f;
                    i += 1;
                }
                (PathStep::AppArg, Term::App(_, p, _)) => {
                    let (Some(PathStep::BagElem(id)), Some(PathStep::ResourceContent)) = (s.get(i + 1), s.get(i + 2))
                    else {
                        return Err(invalid(self, "bag steps must be arg/elem/content"));
                    };
                    let e = p.get(*id).ok_or_else(|| invalid(self, "no such bag element"))?;
                    cur = e.res.content();
                    i += 3;
                }
                _ => return Err(invalid(self, "step does not match the term")),
            }
        }
        Ok(cur)
    }

    pub fn is_valid(&self, t: &Term) -> bool {
        self.follow(t).is_ok()
    }

    /// True iff the position is not inside a reusable resource of `t`.
    pub fn is_linear_in(&self, t: &Term) -> Result<bool> {
        Ok(self.reusable_depth(t)? == 0)
    }

    /// Number of reusable resources the path enters.
    pub fn reusable_depth(&self, t: &Term) -> Result<usize> {
        let mut n = 0;
        self.walk(t, |_, step, p| {
            if let (PathStep::BagElem(id), Some(p)) = (step, p) {
                if p.get(id).map(|e| e.res.is_reusable()).unwrap_or(false) {
                    n += 1;
                }
            }
        })?;
        Ok(n)
    }

    /// Prefix of the path up to and including the content step of the first
    /// reusable resource it enters, if any.
    pub fn first_reusable_prefix(&self, t: &Term) -> Result<Option<Path>> {
        let mut found = None;
        let mut idx = 0;
        self.walk(t, |i, step, p| {
            if found.is_none() {
                if let (PathStep::BagElem(id), Some(p)) = (step, p) {
                    if p.get(id).map(|e| e.res.is_reusable()).unwrap_or(false) {
                        found = Some(i);
                    }
                }
            }
            idx = i;
        })?;
        let _ = idx;
        Ok(found.map(|i| Path(self.0[..i + 2].to_vec())))
    }

    /// Binder names crossed by the path, outermost first.
    pub fn binders<'a>(&self, t: &'a Term) -> Result<Vec<&'a Name>> {
        let mut out = Vec::new();
        let mut cur = t;
        for chunk in self.term_steps()? {
            match (chunk, cur) {
                (TermStep::Body, Term::Abs(x, b)) => {
                    out.push(x);
                    cur = b;
                }
                (TermStep::Fun, Term::App(f, _, _)) => cur = f,
                (TermStep::Elem(id), Term::App(_, p, _)) => {
                    cur = p.get(id).ok_or_else(|| invalid(self, "no such bag element"))?.res.content();
                }
                _ => return Err(invalid(self, "step does not match the term")),
            }
        }
        Ok(out)
    }

    fn walk<'a>(&self, t: &'a Term, mut visit: impl FnMut(usize, PathStep, Option<&'a Bag>)) -> Result<()> {
        let mut cur = t;
        let s = &self.0;
        let mut i = 0;
        while i < s.len() {
            match (s[i], cur) {
                (PathStep::AbsBody, Term::Abs(_, b)) => {
                    visit(i, s[i], None);
                    cur = b;
                    i += 1;
                }
                (PathStep::AppFun, Term::App(f, _, _)) => {
                    visit(i, s[i], None);
                    cur = f;
                    i += 1;
                }
                (PathStep::AppArg, Term::App(_, p, _)) => {
                    let (Some(PathStep::BagElem(id)), Some(PathStep::ResourceContent)) = (s.get(i + 1), s.get(i + 2))
                    else {
                        return Err(invalid(self, "bag steps must be arg/elem/content"));
                    };
                    visit(i, s[i], None);
                    visit(i + 1, s[i + 1], Some(p));
                    let e = p.get(*id).ok_or_else(|| invalid(self, "no such bag element"))?;
                    cur = e.res.content();
                    i += 3;
                }
                _ => return Err(invalid(self, "step does not match the term")),
            }
        }
        Ok(())
    }

    pub(crate) fn term_steps(&self) -> Result<Vec<TermStep>> {
        let s = &self.0;
        let mut out = Vec::new();
        let mut i = 0;
        while i < s.len() {
            match s[i] {
                PathStep::AbsBody => {
                    out.push(TermStep::Body);
                    i += 1;
                }
                PathStep::AppFun => {
                    out.push(TermStep::Fun);
                    i += 1;
                }
                PathStep::AppArg => match (s.get(i + 1), s.get(i + 2)) {
                    (Some(PathStep::BagElem(id)), Some(PathStep::ResourceContent)) => {
                        out.push(TermStep::Elem(*id));
                        i += 3;
                    }
                    _ => return Err(invalid(self, "bag steps must be arg/elem/content")),
                },
                _ => return Err(invalid(self, "dangling bag step")),
            }
        }
        Ok(out)
    }

    /// Public form: `body`, `fun`, `arg`, `elem:k`, `content`, where `k` is the
    /// element's index in canonical order.
    pub fn to_public(&self, t: &Term) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let mut cur = t;
        let mut env: Vec<&Name> = Vec::new();
        for st in self.term_steps()? {
            match (st, cur) {
                (TermStep::Body, Term::Abs(x, b)) => {
                    out.push("body".to_string());
                    env.push(x);
                    cur = b;
                }
                (TermStep::Fun, Term::App(f, _, _)) => {
                    out.push("fun".to_string());
                    cur = f;
                }
                (TermStep::Elem(id), Term::App(_, p, _)) => {
                    let pos = p.position(id).ok_or_else(|| invalid(self, "no such bag element"))?;
                    let k = elem_order(p, &mut env).iter().position(|&i| i == pos).expect("permutation");
                    out.push("arg".to_string());
                    out.push(format!("elem:{k}"));
                    out.push("content".to_string());
                    cur = p.elems()[pos].res.content();
                }
                _ => return Err(invalid(self, "step does not match the term")),
            }
        }
        Ok(out)
    }

    /// Inverse of [`Path::to_public`].
    pub fn from_public<S: AsRef<str>>(tags: &[S], t: &Term) -> Result<Path> {
        let mut out = Vec::new();
        let mut cur = t;
        let mut env: Vec<&Name> = Vec::new();
        let mut i = 0;
        let bad = |why: &str| {
            Error::InvalidPath(format!("{}: {why}", tags.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join("/")))
        };
        while i < tags.len() {
            match (tags[i].as_ref(), cur) {
                ("body", Term::Abs(x, b)) => {
                    out.push(PathStep::AbsBody);
                    env.push(x);
                    cur = b;
                    i += 1;
                }
                ("fun", Term::App(f, _, _)) => {
                    out.push(PathStep::AppFun);
                    cur = f;
                    i += 1;
                }
                ("arg", Term::App(_, p, _)) => {
                    let k: usize = tags
                        .get(i + 1)
                        .and_then(|s| s.as_ref().strip_prefix("elem:"))
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("expected elem:<index> after arg"))?;
                    if tags.get(i + 2).map(|s| s.as_ref()) != Some("content") {
                        return Err(bad("expected content after elem"));
                    }
                    let order = elem_order(p, &mut env);
                    let pos = *order.get(k).ok_or_else(|| bad("element index out of range"))?;
                    let e = &p.elems()[pos];
                    out.extend([PathStep::AppArg, PathStep::BagElem(e.id), PathStep::ResourceContent]);
                    cur = e.res.content();
                    i += 3;
                }
                _ => return Err(bad("step does not match the term")),
            }
        }
        Ok(Path(out))
    }

    /// Sort key of the public form; used to pick the canonically least path.
    pub fn public_key(&self, t: &Term) -> Result<Vec<(u8, usize)>> {
        Ok(self
            .to_public(t)?
            .iter()
            .map(|s| match s.as_str() {
                "body" => (0, 0),
                "fun" => (1, 0),
                "arg" => (2, 0),
                "content" => (4, 0),
                e => (3, e.trim_start_matches("elem:").parse().unwrap_or(0)),
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum TermStep {
    Body,
    Fun,
    Elem(ElemId),
}

/// `C[N]` for the context `C` of `t` at `path`; other nodes keep their ids
/// and labels.
pub fn replace_at(t: &Term, path: &Path, new: Term) -> Result<Term> {
    let steps = path.term_steps()?;
    replace_rec(t, &steps, new).ok_or_else(|| invalid(path, "step does not match the term"))
}

fn replace_rec(t: &Term, steps: &[TermStep], new: Term) -> Option<Term> {
    let Some((first, rest)) = steps.split_first() else {
        return Some(new);
    };
    match (first, t) {
        (TermStep::Body, Term::Abs(x, b)) => Some(Term::Abs(x.clone(), Box::new(replace_rec(b, rest, new)?))),
        (TermStep::Fun, Term::App(f, p, l)) => Some(Term::App(Box::new(replace_rec(f, rest, new)?), p.clone(), *l)),
        (TermStep::Elem(id), Term::App(f, p, l)) => {
            let e = p.get(*id)?;
            let inner = replace_rec(e.res.content(), rest, new)?;
            Some(Term::App(f.clone(), p.replaced(*id, e.res.with_content(inner)), *l))
        }
        _ => None,
    }
}

/// `C[Σ N_i]` with the sum pushed outward through the context, including the
/// non-linear rule for reusable resources.
pub fn plug_sum(t: &Term, path: &Path, local: &Sum<Term>) -> Result<Sum<Term>> {
    let steps = path.term_steps()?;
    plug_rec(t, &steps, local).ok_or_else(|| invalid(path, "step does not match the term"))
}

fn plug_rec(t: &Term, steps: &[TermStep], local: &Sum<Term>) -> Option<Sum<Term>> {
    let Some((first, rest)) = steps.split_first() else {
        return Some(local.clone());
    };
    match (first, t) {
        (TermStep::Body, Term::Abs(x, b)) => Some(sum_abs(x, &plug_rec(b, rest, local)?)),
        (TermStep::Fun, Term::App(f, p, l)) => {
            Some(sum_app_labeled(&plug_rec(f, rest, local)?, &Sum::single(p.clone()), *l))
        }
        (TermStep::Elem(id), Term::App(f, p, l)) => {
            let pos = p.position(*id)?;
            let e = &p.elems()[pos];
            let inner = plug_rec(e.res.content(), rest, local)?;
            let bags = replace_elem_with_sum(p, pos, e.res.is_reusable(), &inner);
            Some(sum_app_labeled(&Sum::single((**f).clone()), &bags, *l))
        }
        _ => None,
    }
}

/// Every position of `t` that holds a term, in preorder.
pub fn term_paths(t: &Term) -> Vec<Path> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    collect_paths(t, &mut cur, &mut out);
    out
}

fn collect_paths(t: &Term, cur: &mut Vec<PathStep>, out: &mut Vec<Path>) {
    out.push(Path(cur.clone()));
    match t {
        Term::Var(_) => {}
        Term::Abs(_, b) => {
            cur.push(PathStep::AbsBody);
            collect_paths(b, cur, out);
            cur.pop();
        }
        Term::App(f, p, _) => {
            cur.push(PathStep::AppFun);
            collect_paths(f, cur, out);
            cur.pop();
            for e in p.iter() {
                cur.extend([PathStep::AppArg, PathStep::BagElem(e.id), PathStep::ResourceContent]);
                collect_paths(e.res.content(), cur, out);
                cur.truncate(cur.len() - 3);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    #[test]
    fn public_round_trip() {
        let t = parse_term("\\x.y[b, !a[(\\z.z) 1]]").unwrap();
        for p in term_paths(&t) {
            let public = p.to_public(&t).unwrap();
            assert_eq!(Path::from_public(&public, &t).unwrap(), p);
        }
    }

    #[test]
    fn public_form_survives_reprinting() {
        let t = parse_term("y[b, !a[(\\z.z) 1]]").unwrap();
        let redex = term_paths(&t).into_iter().find(|p| p.follow(&t).unwrap().is_redex()).unwrap();
        let public = redex.to_public(&t).unwrap();
        assert_eq!(public, ["arg", "elem:0", "content", "arg", "elem:0", "content"]);
        let reparsed = parse_term(&crate::print::print_term(&t)).unwrap();
        let p2 = Path::from_public(&public, &reparsed).unwrap();
        assert!(p2.follow(&reparsed).unwrap().is_redex());
    }

    #[test]
    fn invalid_paths_are_rejected() {
        let t = parse_term("x[a]").unwrap();
        assert!(Path(vec![PathStep::AbsBody]).follow(&t).is_err());
        assert!(Path(vec![PathStep::AppArg]).follow(&t).is_err());
        assert!(Path::from_public(&["arg", "elem:3", "content"], &t).is_err());
    }

    #[test]
    fn plugging_under_a_reusable_resource_spreads_copies() {
        let t = parse_term("y[!z]").unwrap();
        let p = term_paths(&t).into_iter().find(|p| p.follow(&t).unwrap().to_string() == "z").unwrap();
        let two: Sum<Term> = [Term::var("a"), Term::var("b")].into_iter().collect();
        let out = plug_sum(&t, &p, &two).unwrap();
        assert_eq!(out, Sum::single(parse_term("y[!a, !b]").unwrap()));
        let out = plug_sum(&t, &p, &Sum::zero()).unwrap();
        assert_eq!(out, Sum::single(parse_term("y 1").unwrap()));
        assert!(p.is_linear_in(&t).is_ok_and(|l| !l));
    }
}
