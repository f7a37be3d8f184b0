//! Standardness of nd traces and the construction of standard traces.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::canon::{Canonical, CanonicalForm};
use crate::error::{Error, Result};
use crate::path::{replace_at, Path, PathStep};
use crate::reduction::{
    find_redexes, fire_labeled, label, nd_successors_where, precedes, sort_by_public, Mode, Order, RedexClass, Step,
    Trace,
};
use crate::syntax::{Bag, Name, Term};

/// Name of the variable standing for a hole in an outer shape skeleton.
pub const HOLE: &str = "□";

#[derive(Clone, Debug)]
pub struct Hole {
    pub id: usize,
    /// Path of the reusable content in the original term (and in the
    /// skeleton, which keeps the same element ids).
    pub path: Path,
    pub content: Term,
}

/// A term with the contents of its top-level reusable resources cut out.
#[derive(Clone, Debug)]
pub struct OuterShape {
    pub skeleton: Term,
    pub holes: Vec<Hole>,
}

impl OuterShape {
    /// Puts `contents[k]` into hole `k`.
    pub fn plug(&self, contents: &[Term]) -> Result<Term> {
        if contents.len() != self.holes.len() {
            return Err(Error::InvalidPath(format!("{} holes, {} contents", self.holes.len(), contents.len())));
        }
        let mut t = self.skeleton.clone();
        for (h, c) in self.holes.iter().zip(contents) {
            t = replace_at(&t, &h.path, c.clone())?;
        }
        Ok(t)
    }

    pub fn contents(&self) -> Vec<Term> {
        self.holes.iter().map(|h| h.content.clone()).collect()
    }
}

/// The outer shape of `m`. Holes are numbered in public-path order; every
/// hole of the skeleton is the variable [`HOLE`], so alpha-equal skeletons
/// compare equal whatever the contents.
pub fn outer_shape(m: &Term) -> OuterShape {
    let mut holes = Vec::new();
    let skeleton = shape_term(m, &mut Vec::new(), &mut holes);
    let holes = sort_by_public(m, holes, |h: &(Path, Term)| &h.0);
    OuterShape {
        skeleton,
        holes: holes.into_iter().enumerate().map(|(id, (path, content))| Hole { id, path, content }).collect(),
    }
}

fn shape_term(t: &Term, cur: &mut Vec<PathStep>, holes: &mut Vec<(Path, Term)>) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Abs(x, b) => {
            cur.push(PathStep::AbsBody);
            let b = shape_term(b, cur, holes);
            cur.pop();
            Term::Abs(x.clone(), Box::new(b))
        }
        Term::App(f, p, l) => {
            cur.push(PathStep::AppFun);
            let f = shape_term(f, cur, holes);
            cur.pop();
            let mut bag = Vec::new();
            for e in p.iter() {
                cur.extend([PathStep::AppArg, PathStep::BagElem(e.id), PathStep::ResourceContent]);
                let content = if e.res.is_reusable() {
                    holes.push((Path(cur.clone()), e.res.content().clone()));
                    Term::Var(Name::new(HOLE))
                } else {
                    shape_term(e.res.content(), cur, holes)
                };
                cur.truncate(cur.len() - 3);
                bag.push(crate::syntax::Elem { id: e.id, res: e.res.with_content(content) });
            }
            Term::App(Box::new(f), Bag::from_elems(bag), *l)
        }
    }
}

/// Witness of non-standardness: step `step` fires a residual of the redex
/// at `prior`, which precedes the redex `fired` of step `preceded`.
/// Paths are public paths in the source term of step `preceded`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub step: usize,
    pub preceded: usize,
    pub prior: Vec<String>,
    pub fired: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StdReport {
    pub standard: bool,
    pub violation: Option<Violation>,
}

/// Checks that no step of `t` fires a residual of a redex that precedes an
/// earlier fired redex.
pub fn is_standard(t: &Trace) -> Result<StdReport> {
    let terms = t.terms()?;
    for (i, si) in t.steps.iter().enumerate() {
        let m = &terms[i];
        let fired = Path::from_public(&si.redex.path.to_public(&si.before)?, m)?;
        let prior: Vec<Path> = find_redexes(m)
            .into_iter()
            .map(|r| r.path)
            .filter(|p| precedes(p, &fired, m).map(|o| o == Order::Before).unwrap_or(false))
            .collect();
        if prior.is_empty() {
            continue;
        }
        let mut l = label(m, &prior)?;
        for (j, sj) in t.steps.iter().enumerate().skip(i) {
            if j > i {
                let public = sj.redex.path.to_public(&sj.before)?;
                let here = Path::from_public(&public, &l)?;
                if let Some(lab) = here.follow(&l)?.label() {
                    return Ok(StdReport {
                        standard: false,
                        violation: Some(Violation {
                            step: j,
                            preceded: i,
                            prior: prior[lab.0 as usize].to_public(m)?,
                            fired: fired.to_public(m)?,
                        }),
                    });
                }
            }
            if j + 1 < t.steps.len() {
                l = fire_labeled(&l, sj)?;
            }
        }
    }
    Ok(StdReport { standard: true, violation: None })
}

/// Re-fires `steps` from an alpha-equivalent start, locating redexes by
/// their public paths and results by canonical form.
pub fn replay(start: &Term, steps: &[Step]) -> Result<Trace> {
    let mut cur = start.clone();
    let mut out = Vec::with_capacity(steps.len());
    for s in steps {
        let path = Path::from_public(&s.redex.path.to_public(&s.before)?, &cur)?;
        let step = Step::fire(&cur, &path, Mode::Nd, s.chosen.as_ref())?;
        cur = step.target().ok_or_else(|| Error::InvalidTrace("crashed step".into()))?.clone();
        out.push(step);
    }
    Ok(Trace::from_steps(start, out))
}

/// The sub-chain of `steps` at `prefix`; every step must fire below it.
fn restrict(steps: &[&Step], prefix: &Path) -> Result<Option<Trace>> {
    let Some(first) = steps.first() else { return Ok(None) };
    let start = prefix.follow(&first.before)?.clone();
    let mut out = Vec::new();
    let mut cur = start.clone();
    for s in steps {
        let local =
            s.redex.path.strip_prefix(prefix).ok_or_else(|| Error::InvalidTrace("step outside the part".into()))?;
        let before = prefix.follow(&s.before)?;
        let target = prefix.follow(s.target().ok_or_else(|| Error::InvalidTrace("crashed step".into()))?)?;
        if before.canonical() != cur.canonical() {
            return Err(Error::InvalidTrace("parts of the chain do not link up".into()));
        }
        let step = Step::nd(before, &local, target)?;
        cur = target.clone();
        out.push(step);
    }
    Ok(Some(Trace::from_steps(&start, out)))
}

/// Fires the chain `sub` inside `whole` at `prefix`; returns the steps and
/// the final whole term.
fn lift(whole: &Term, prefix: &Path, sub: &Trace) -> Result<(Vec<Step>, Term)> {
    let mut cur = whole.clone();
    let mut out = Vec::new();
    for s in &sub.steps {
        let inner = prefix.follow(&cur)?.clone();
        let local = Path::from_public(&s.redex.path.to_public(&s.before)?, &inner)?;
        let chosen = s.chosen.as_ref().ok_or_else(|| Error::InvalidTrace("crashed step".into()))?;
        let local_step = Step::fire(&inner, &local, Mode::Nd, Some(chosen))?;
        let next = replace_at(&cur, prefix, local_step.target().expect("not crashed").clone())?;
        let step = Step::nd(&cur, &prefix.join(&local), &next)?;
        cur = next;
        out.push(step);
    }
    Ok((out, cur))
}

fn is_outer_inner(t: &Trace) -> bool {
    let mut seen_inner = false;
    for s in &t.steps {
        if s.redex.outer && seen_inner {
            return false;
        }
        seen_inner |= !s.redex.outer;
    }
    true
}

/// Breadth-first search over nd steps of one class. Returns, for every
/// state reached within `depth` steps, its distance and a chain to it.
struct Bfs {
    nodes: Vec<(Term, Option<(usize, Step)>, usize)>,
    index: HashMap<CanonicalForm, usize>,
}

impl Bfs {
    fn run(m: &Term, class: RedexClass, depth: usize) -> Bfs {
        let mut bfs = Bfs { nodes: vec![(m.clone(), None, 0)], index: HashMap::new() };
        bfs.index.insert(m.canonical(), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let (t, _, d) = bfs.nodes[i].clone();
            if d >= depth {
                continue;
            }
            for s in nd_successors_where(&t, |r| class.admits(r)) {
                let k = s.term.canonical();
                if bfs.index.contains_key(&k) {
                    continue;
                }
                let step = Step::nd(&t, &s.redex.path, &s.term).expect("successor of t");
                bfs.index.insert(k, bfs.nodes.len());
                queue.push_back(bfs.nodes.len());
                bfs.nodes.push((s.term, Some((i, step)), d + 1));
            }
        }
        bfs
    }

    fn chain_to(&self, k: &CanonicalForm) -> Option<(Term, Vec<Step>)> {
        let mut i = *self.index.get(k)?;
        let end = self.nodes[i].0.clone();
        let mut steps = Vec::new();
        while let Some((parent, s)) = &self.nodes[i].1 {
            steps.push(s.clone());
            i = *parent;
        }
        steps.reverse();
        Ok::<_, ()>((end, steps)).ok()
    }
}

/// Splits an nd trace into an outer chain followed by an inner chain with
/// the same endpoints. Traces already of that form are split in place;
/// otherwise chains of total length at most `|t| + slack` are searched.
pub fn factor_outer_inner(t: &Trace, slack: usize) -> Result<(Trace, Trace)> {
    let terms = t.terms()?;
    let m = &terms[0];
    if is_outer_inner(t) {
        let k = t.steps.iter().take_while(|s| s.redex.outer).count();
        let outer = Trace::from_steps(m, t.steps[..k].to_vec());
        let inner = Trace::from_steps(&terms[k], t.steps[k..].to_vec());
        return Ok((outer, inner));
    }
    let n = terms.last().expect("non-empty").canonical();
    let bound = t.len() + slack;
    let outer = Bfs::run(m, RedexClass::Outer, bound);
    let mut best: Option<(usize, usize, Vec<Step>)> = None;
    for (i, (o, _, d)) in outer.nodes.iter().enumerate() {
        let budget = match &best {
            Some((total, _, _)) if *total <= *d => continue,
            Some((total, _, _)) => (*total - 1 - d).min(bound - d),
            None => bound - d,
        };
        let inner = Bfs::run(o, RedexClass::Inner, budget);
        if let Some((_, steps)) = inner.chain_to(&n) {
            best = Some((d + steps.len(), i, steps));
        }
    }
    let Some((_, i, inner_steps)) = best else {
        return Err(Error::SearchExhausted(format!("no outer-then-inner chain of length at most {bound}")));
    };
    let (mid, outer_steps) = outer.chain_to(&outer.nodes[i].0.canonical()).expect("reached");
    Ok((Trace::from_steps(m, outer_steps), Trace::from_steps(&mid, inner_steps)))
}

/// Safety cap on swaps in [`reorder_outer`]; the swap measure decreases, so
/// this is never reached on valid input.
const MAX_SWAPS: usize = 100_000;

/// Moves the leftmost steps of an outer trace to the front by swapping
/// adjacent (not leftmost, leftmost) pairs, keeping the length and the
/// endpoints.
pub fn reorder_outer(t: &Trace) -> Result<Trace> {
    let m = t.initial_term()?.clone();
    if t.steps.iter().any(|s| !s.redex.outer) {
        return Err(Error::InvalidTrace("reorder_outer needs an outer trace".into()));
    }
    let mut cur = replay(&m, &t.steps)?;
    for _ in 0..MAX_SWAPS {
        let Some(k) = cur.steps.windows(2).position(|w| !w[0].redex.leftmost && w[1].redex.leftmost) else {
            return Ok(cur);
        };
        let from = cur.steps[k].before.clone();
        let to = cur.steps[k + 1].target().expect("nd step").canonical();
        let (a, b) = swap(&from, &to)?;
        let mut steps = cur.steps[..k].to_vec();
        steps.push(a);
        steps.push(b.clone());
        let rest = replay(b.target().expect("nd step"), &cur.steps[k + 2..])?;
        steps.extend(rest.steps);
        cur = Trace::from_steps(&m, steps);
    }
    Err(Error::SearchExhausted("reordering did not terminate".into()))
}

/// A leftmost step `from -> m''` and an outer step `m'' -> to`, preferring a
/// leftmost second step.
fn swap(from: &Term, to: &CanonicalForm) -> Result<(Step, Step)> {
    let mut fallback = None;
    for lm in nd_successors_where(from, |r| r.leftmost) {
        for o in nd_successors_where(&lm.term, |r| r.outer) {
            if &o.term.canonical() != to {
                continue;
            }
            let a = Step::nd(from, &lm.redex.path, &lm.term)?;
            let b = Step::nd(&lm.term, &o.redex.path, &o.term)?;
            if o.redex.leftmost {
                return Ok((a, b));
            }
            fallback.get_or_insert((a, b));
        }
    }
    fallback.ok_or_else(|| Error::SearchExhausted(format!("no leftmost-then-outer chain from {from} to the same term")))
}

/// A standard outer trace with the same endpoints as the outer trace `t`.
pub fn standardize_outer(t: &Trace) -> Result<Trace> {
    let m = t.initial_term()?.clone();
    if t.is_empty() {
        return Ok(Trace::empty(&m));
    }
    let r = reorder_outer(t)?;
    let k = r.steps.iter().take_while(|s| s.redex.leftmost).count();
    if k > 0 {
        let mid = r.terms()?[k].clone();
        let rest = standardize_outer(&Trace::from_steps(&mid, r.steps[k..].to_vec()))?;
        let mut steps = r.steps[..k].to_vec();
        steps.extend(rest.steps);
        return Ok(Trace::from_steps(&m, steps));
    }
    // Only non-leftmost steps: split by the immediate subterms they touch.
    let steps = &r.steps;
    let parts: Vec<Path> = match &m {
        Term::Var(_) => return Err(Error::InvalidTrace("reduction of a variable".into())),
        Term::Abs(..) => vec![Path(vec![PathStep::AbsBody])],
        Term::App(_, p, _) => {
            let mut parts = vec![Path(vec![PathStep::AppFun])];
            let elems: Vec<Path> =
                p.iter().filter(|e| !e.res.is_reusable()).map(|e| Path::root().elem_content(e.id)).collect();
            parts.extend(sort_by_public(&m, elems, |p| p));
            parts
        }
    };
    let mut whole = m.clone();
    let mut out = Vec::new();
    let mut used = 0;
    for prefix in &parts {
        let mine: Vec<&Step> = steps.iter().filter(|s| prefix.is_prefix_of(&s.redex.path)).collect();
        used += mine.len();
        let Some(sub) = restrict(&mine, prefix)? else { continue };
        let sub = standardize_outer(&sub)?;
        let (lifted, next) = lift(&whole, prefix, &sub)?;
        out.extend(lifted);
        whole = next;
    }
    if used != steps.len() {
        return Err(Error::InvalidTrace("non-leftmost outer step at an unexpected position".into()));
    }
    Ok(Trace::from_steps(&m, out))
}

/// A standard trace with the same endpoints as the nd trace `t`.
pub fn standardize_trace(t: &Trace, slack: usize) -> Result<Trace> {
    let m = t.initial_term()?.clone();
    if t.is_empty() {
        return Ok(Trace::empty(&m));
    }
    let (outer, inner) = factor_outer_inner(t, slack)?;
    let outer = standardize_outer(&outer)?;
    let mid = outer.last_term()?;
    let inner = replay(&mid, &inner.steps)?;
    let inner = standardize_inner(&inner, slack)?;
    Ok(Trace::from_steps(&m, outer.steps).then(inner))
}

/// Standardizes an inner chain hole by hole, gluing the holes in order.
fn standardize_inner(t: &Trace, slack: usize) -> Result<Trace> {
    let m = t.initial_term()?.clone();
    let mut groups: BTreeMap<usize, Vec<&Step>> = BTreeMap::new();
    let shape = outer_shape(&m);
    for s in &t.steps {
        let k = shape
            .holes
            .iter()
            .position(|h| h.path.is_prefix_of(&s.redex.path))
            .ok_or_else(|| Error::InvalidTrace("inner step outside every hole".into()))?;
        groups.entry(k).or_default().push(s);
    }
    let mut whole = m.clone();
    let mut out = Vec::new();
    for (k, steps) in groups {
        let prefix = &shape.holes[k].path;
        let sub = restrict(&steps, prefix)?.expect("non-empty group");
        let sub = standardize_trace(&sub, slack)?;
        let (lifted, next) = lift(&whole, prefix, &sub)?;
        out.extend(lifted);
        whole = next;
    }
    Ok(Trace::from_steps(&m, out))
}

/// Default extra length allowed when searching for an outer-then-inner
/// factorization.
pub const DEFAULT_SLACK: usize = 2;

/// Finds an nd chain from `m` to `n` of at most `bound` steps and returns a
/// standard chain with the same endpoints.
pub fn standardize(m: &Term, n: &Term, bound: usize) -> Result<Trace> {
    let bfs = Bfs::run(m, RedexClass::Any, bound);
    let (_, steps) = bfs.chain_to(&n.canonical()).ok_or(Error::NoChainFound { bound })?;
    standardize_trace(&Trace::from_steps(m, steps), DEFAULT_SLACK)
}

/// Every nd chain from `m` of length at most `depth` (states may repeat).
pub fn nd_chains(m: &Term, depth: usize) -> Vec<Trace> {
    let mut out = vec![Trace::empty(m)];
    let mut frontier = vec![(m.clone(), Vec::<Step>::new())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (t, steps) in frontier {
            for s in nd_successors_where(&t, |_| true) {
                let mut v = steps.clone();
                v.push(Step::nd(&t, &s.redex.path, &s.term).expect("successor of t"));
                out.push(Trace::from_steps(m, v.clone()));
                next.push((s.term, v));
            }
        }
        frontier = next;
    }
    out
}
