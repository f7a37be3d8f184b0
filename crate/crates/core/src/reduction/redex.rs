use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{Path, PathStep};
use crate::subst::{bag_subst, classical_subst_sum, freshen_binder, linear_subst, partial_subst};
use crate::sum::{sum_abs, sum_app_labeled, Sum};
use crate::syntax::{Bag, Name, Resource, Term};

/// The rule a step applies at its redex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// `(\x.M)1 -> M{0/x}`
    Empty,
    /// `(\x.M)[N]·P -> (\x.M<N/x>)P`
    LinearHead,
    /// `(\x.M)[!N]·P -> (\x.M{N+x/x})P`
    ReusableHead,
    /// `(\x.M)P -> M<P/x>{0/x}`
    Giant,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Redex {
    pub path: Path,
    /// The baby rule that applies here, or [`Rule::Giant`] once fired in a
    /// giant or non-deterministic step.
    pub rule: Rule,
    pub outer: bool,
    pub leftmost: bool,
}

/// All redexes of `m`, ordered by their public paths.
pub fn find_redexes(m: &Term) -> Vec<Redex> {
    let lm = leftmost_set(m);
    let mut out = Vec::new();
    collect(m, &mut Vec::new(), 0, &lm, &mut out);
    sort_by_public(m, out, |r| &r.path)
}

pub(crate) fn sort_by_public<T>(m: &Term, items: Vec<T>, path: impl Fn(&T) -> &Path) -> Vec<T> {
    if items.len() < 2 {
        return items;
    }
    let mut keyed: Vec<_> = items.into_iter().map(|r| (path(&r).public_key(m).unwrap_or_default(), r)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, r)| r).collect()
}

fn collect(t: &Term, cur: &mut Vec<PathStep>, bangs: usize, lm: &[Path], out: &mut Vec<Redex>) {
    match t {
        Term::Var(_) => {}
        Term::Abs(_, b) => {
            cur.push(PathStep::AbsBody);
            collect(b, cur, bangs, lm, out);
            cur.pop();
        }
        Term::App(f, p, _) => {
            if f.is_abs() {
                let path = Path(cur.clone());
                let leftmost = lm.contains(&path);
                out.push(Redex { path, rule: baby_rule(p), outer: bangs == 0, leftmost });
            }
            cur.push(PathStep::AppFun);
            collect(f, cur, bangs, lm, out);
            cur.pop();
            for e in p.iter() {
                cur.extend([PathStep::AppArg, PathStep::BagElem(e.id), PathStep::ResourceContent]);
                collect(e.res.content(), cur, bangs + usize::from(e.res.is_reusable()), lm, out);
                cur.truncate(cur.len() - 3);
            }
        }
    }
}

fn baby_rule(p: &Bag) -> Rule {
    match p.canonical_order().first() {
        None => Rule::Empty,
        Some(e) if e.res.is_reusable() => Rule::ReusableHead,
        Some(_) => Rule::LinearHead,
    }
}

/// The leftmost redexes `L(m)`.
pub fn leftmost_set(m: &Term) -> Vec<Path> {
    let mut out = Vec::new();
    lm_term(m, &mut Vec::new(), &mut out);
    out
}

fn lm_term(t: &Term, cur: &mut Vec<PathStep>, out: &mut Vec<Path>) {
    match t {
        Term::Var(_) => {}
        Term::Abs(_, b) => {
            cur.push(PathStep::AbsBody);
            lm_term(b, cur, out);
            cur.pop();
        }
        Term::App(f, p, _) => {
            if f.is_abs() {
                out.push(Path(cur.clone()));
                return;
            }
            let before = out.len();
            cur.push(PathStep::AppFun);
            lm_term(f, cur, out);
            cur.pop();
            if out.len() > before {
                return;
            }
            for e in p.iter() {
                if let Resource::Linear(n) = &e.res {
                    cur.extend([PathStep::AppArg, PathStep::BagElem(e.id), PathStep::ResourceContent]);
                    lm_term(n, cur, out);
                    cur.truncate(cur.len() - 3);
                }
            }
        }
    }
}

/// Checks that `path` addresses a redex of `m` and classifies it.
pub fn redex_at(m: &Term, path: &Path) -> Result<Redex> {
    let t = path.follow(m)?;
    let Term::App(_, p, _) = t else {
        return Err(Error::InvalidRedex(format!("{path:?}")));
    };
    if !t.is_redex() {
        return Err(Error::InvalidRedex(format!("{path:?}")));
    }
    Ok(Redex {
        path: path.clone(),
        rule: baby_rule(p),
        outer: path.is_linear_in(m)?,
        leftmost: leftmost_set(m).contains(path),
    })
}

/// Splits a redex into binder, body, bag and label, renaming the binder
/// away from the bag's free variables.
fn open(redex: &Term) -> (Name, Term, &Bag, Option<crate::syntax::Label>) {
    let Term::App(f, p, l) = redex else { unreachable!("not a redex") };
    let Term::Abs(x, body) = &**f else { unreachable!("not a redex") };
    if p.has_free(x) {
        let mut avoid = std::collections::BTreeSet::new();
        redex.names(&mut avoid);
        let (y, b) = freshen_binder(x, body, &avoid);
        (y, b, p, *l)
    } else {
        (x.clone(), (**body).clone(), p, *l)
    }
}

/// `(\x.M)P -> M<P/x>{0/x}` at the root.
pub(crate) fn contract_giant(redex: &Term) -> Sum<Term> {
    let (x, body, p, _) = open(redex);
    let s = bag_subst(&body, &x, p).expect("binder is fresh for the bag");
    classical_subst_sum(&s, &x, &Sum::zero())
}

/// One baby rule at the root; consumes the canonically least element.
pub(crate) fn contract_baby(redex: &Term) -> (Rule, Sum<Term>) {
    let (x, body, p, label) = open(redex);
    let Some(head) = p.canonical_order().first().map(|e| (*e).clone()) else {
        return (Rule::Empty, classical_subst_sum(&Sum::single(body), &x, &Sum::zero()));
    };
    let rest = Sum::single(p.without(head.id));
    let (rule, inner) = match &head.res {
        Resource::Linear(n) => (Rule::LinearHead, linear_subst(&body, &x, n)),
        Resource::Reusable(n) => (Rule::ReusableHead, partial_subst(&body, &x, n)),
    };
    (rule, sum_app_labeled(&sum_abs(&x, &inner), &rest, label))
}
