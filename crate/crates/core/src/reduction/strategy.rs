use std::collections::HashSet;

use crate::canon::{Canonical, CanonicalForm};
use crate::error::{Error, Result};
use crate::path::Path;
use crate::sum::Sum;
use crate::syntax::Term;

use super::redex::{find_redexes, leftmost_set, sort_by_public};
use super::trace::{Mode, Step, Trace, TraceEnd};

/// One step of a given-paths run: a public path into the first addend where
/// it names a redex, and for nd steps the index of the result to keep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GivenStep {
    pub path: Vec<String>,
    pub choice: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pick {
    /// The canonically least leftmost redex of the first addend that has one;
    /// nd steps keep the first result.
    LeftmostFirst,
    GivenPaths(Vec<GivenStep>),
    /// Every redex of every addend and every nd result, states deduplicated.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub mode: Mode,
    pub pick: Pick,
}

impl Strategy {
    pub fn new(mode: Mode, pick: Pick) -> Self {
        Strategy { mode, pick }
    }
}

/// Runs `strategy` from `m` for at most `budget` steps per trace.
pub fn strategy_run(m: &Sum<Term>, strategy: &Strategy, budget: usize) -> Result<Vec<Trace>> {
    if strategy.mode == Mode::Nd && m.as_single().is_none() {
        return Err(Error::InvalidTrace("nd reduction starts from a single term".into()));
    }
    match &strategy.pick {
        Pick::LeftmostFirst => Ok(vec![leftmost_run(m, strategy.mode, budget)]),
        Pick::GivenPaths(steps) => Ok(vec![given_run(m, strategy.mode, steps, budget)?]),
        Pick::Exhaustive => Ok(exhaustive_run(m, strategy.mode, budget)),
    }
}

/// `strategy_run` on a single term.
pub fn run_term(m: &Term, strategy: &Strategy, budget: usize) -> Result<Vec<Trace>> {
    strategy_run(&Sum::single(m.clone()), strategy, budget)
}

fn resting_end(state: &Sum<Term>) -> TraceEnd {
    if state.is_zero() {
        TraceEnd::Crashed
    } else if state.support().all(|t| find_redexes(t).is_empty()) {
        TraceEnd::Normal
    } else {
        TraceEnd::OuterNormal
    }
}

fn apply(state: &mut Sum<Term>, s: &Step) {
    state.remove_one(&s.before);
    state.plus(&s.after);
}

fn fire_first(t: &Term, path: &Path, mode: Mode, choice: usize) -> Result<Step> {
    if mode != Mode::Nd {
        return Step::fire(t, path, mode, None);
    }
    let succ = super::steps::nd_step(t, path)?;
    match succ.get(choice) {
        Some(n) => Step::nd(t, path, n),
        None if succ.is_empty() => Step::fire(t, path, mode, None),
        None => Err(Error::InvalidTrace(format!("step has {} results, no index {choice}", succ.len()))),
    }
}

fn leftmost_run(m: &Sum<Term>, mode: Mode, budget: usize) -> Trace {
    let mut state = m.clone();
    let mut steps = Vec::new();
    let end = loop {
        let pick = state.support().find_map(|t| {
            let lm = sort_by_public(t, leftmost_set(t), |p| p);
            lm.into_iter().next().map(|p| (t.clone(), p))
        });
        let Some((t, p)) = pick else { break resting_end(&state) };
        if steps.len() >= budget {
            break TraceEnd::BudgetExhausted;
        }
        let s = fire_first(&t, &p, mode, 0).expect("leftmost redex is valid");
        apply(&mut state, &s);
        steps.push(s);
        if state.is_zero() {
            break TraceEnd::Crashed;
        }
    };
    Trace { initial: m.clone(), steps, end }
}

fn given_run(m: &Sum<Term>, mode: Mode, given: &[GivenStep], budget: usize) -> Result<Trace> {
    let mut state = m.clone();
    let mut steps = Vec::new();
    for g in given {
        if steps.len() >= budget {
            return Ok(Trace { initial: m.clone(), steps, end: TraceEnd::BudgetExhausted });
        }
        let found = state.support().find_map(|t| {
            let p = Path::from_public(&g.path, t).ok()?;
            p.follow(t).ok()?.is_redex().then(|| (t.clone(), p))
        });
        let (t, p) = found.ok_or_else(|| Error::InvalidRedex(g.path.join("/")))?;
        let s = fire_first(&t, &p, mode, g.choice)?;
        apply(&mut state, &s);
        steps.push(s);
        if state.is_zero() {
            return Ok(Trace { initial: m.clone(), steps, end: TraceEnd::Crashed });
        }
    }
    Ok(Trace { initial: m.clone(), steps, end: TraceEnd::Completed })
}

fn exhaustive_run(m: &Sum<Term>, mode: Mode, budget: usize) -> Vec<Trace> {
    let mut seen: HashSet<CanonicalForm> = HashSet::new();
    seen.insert(m.canonical());
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    explore(m, m, mode, budget, &mut seen, &mut prefix, &mut out);
    out
}

fn successors(state: &Sum<Term>, mode: Mode) -> Vec<Step> {
    let mut out = Vec::new();
    for t in state.support() {
        for r in find_redexes(t) {
            match mode {
                Mode::Nd => {
                    let succ = super::steps::nd_step(t, &r.path).expect("redex of t");
                    if succ.is_empty() {
                        out.push(Step::fire(t, &r.path, mode, None).expect("crash step"));
                    }
                    for n in succ {
                        out.push(Step::nd(t, &r.path, &n).expect("result of the step"));
                    }
                }
                _ => out.push(Step::fire(t, &r.path, mode, None).expect("redex of t")),
            }
        }
    }
    out
}

fn explore(
    initial: &Sum<Term>,
    state: &Sum<Term>,
    mode: Mode,
    budget: usize,
    seen: &mut HashSet<CanonicalForm>,
    prefix: &mut Vec<Step>,
    out: &mut Vec<Trace>,
) {
    let succ = successors(state, mode);
    if succ.is_empty() {
        out.push(Trace { initial: initial.clone(), steps: prefix.clone(), end: resting_end(state) });
        return;
    }
    if prefix.len() >= budget {
        out.push(Trace { initial: initial.clone(), steps: prefix.clone(), end: TraceEnd::BudgetExhausted });
        return;
    }
    let mut extended = false;
    for s in succ {
        let mut next = state.clone();
        apply(&mut next, &s);
        if !seen.insert(next.canonical()) {
            continue;
        }
        extended = true;
        prefix.push(s);
        explore(initial, &next, mode, budget, seen, prefix, out);
        prefix.pop();
    }
    if !extended {
        // Every successor was reached along another trace.
        out.push(Trace { initial: initial.clone(), steps: prefix.clone(), end: TraceEnd::Completed });
    }
}
