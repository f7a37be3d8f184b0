use serde::{Deserialize, Serialize};

use crate::canon::{Canonical, CanonicalForm};
use crate::error::{Error, Result};
use crate::parse::{parse_sum, parse_term};
use crate::path::Path;
use crate::print::print_term;
use crate::sum::Sum;
use crate::syntax::Term;

use super::redex::{redex_at, Redex, Rule};
use super::steps::{baby_step, giant_step, nd_step};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Baby,
    Giant,
    Nd,
}

/// One fired redex. `before` is the addend that was reduced and `after` its
/// result: the whole contractum for baby and giant steps, the chosen term
/// (or `0` on a crash) for nd steps.
#[derive(Clone, Debug)]
pub struct Step {
    pub before: Term,
    pub redex: Redex,
    pub mode: Mode,
    pub chosen: Option<CanonicalForm>,
    pub after: Sum<Term>,
}

impl Step {
    /// Fires `path` in `before`. For nd steps `chosen` selects the result;
    /// `None` there records a crash and is only valid if the step crashes.
    pub fn fire(before: &Term, path: &Path, mode: Mode, chosen: Option<&CanonicalForm>) -> Result<Step> {
        let mut redex = redex_at(before, path)?;
        let after = match mode {
            Mode::Giant => {
                redex.rule = Rule::Giant;
                giant_step(before, path)?
            }
            Mode::Baby => {
                let (rule, s) = baby_step(before, path)?;
                redex.rule = rule;
                s
            }
            Mode::Nd => {
                redex.rule = Rule::Giant;
                let succ = nd_step(before, path)?;
                match chosen {
                    Some(k) => {
                        let n = succ.into_iter().find(|n| &n.canonical() == k).ok_or_else(|| {
                            Error::InvalidTrace(format!(
                                "{} is not a result of firing {path:?} in {before}",
                                k.as_str()
                            ))
                        })?;
                        Sum::single(n)
                    }
                    None if succ.is_empty() => Sum::zero(),
                    None => return Err(Error::InvalidTrace(format!("nd step at {path:?} needs a chosen addend"))),
                }
            }
        };
        let chosen = match mode {
            Mode::Nd => after.as_single().map(|n| n.canonical()),
            _ => None,
        };
        Ok(Step { before: before.clone(), redex, mode, chosen, after })
    }

    /// Nd step to a given successor.
    pub fn nd(before: &Term, path: &Path, to: &Term) -> Result<Step> {
        Step::fire(before, path, Mode::Nd, Some(&to.canonical()))
    }

    /// The single result of an nd step, if it did not crash.
    pub fn target(&self) -> Option<&Term> {
        self.after.as_single()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceEnd {
    /// No redex left.
    Normal,
    /// Only redexes under `!` left.
    OuterNormal,
    /// The state became the empty sum.
    Crashed,
    BudgetExhausted,
    /// A given sequence of paths was fully used.
    Completed,
}

/// A reduction sequence. States are sums; nd traces start from a single
/// term and every state stays a single term.
#[derive(Clone, Debug)]
pub struct Trace {
    pub initial: Sum<Term>,
    pub steps: Vec<Step>,
    pub end: TraceEnd,
}

impl Trace {
    pub fn empty(m: &Term) -> Trace {
        Trace { initial: Sum::single(m.clone()), steps: Vec::new(), end: TraceEnd::Completed }
    }

    /// Nd trace from explicit steps; `end` is `Completed`.
    pub fn from_steps(m: &Term, steps: Vec<Step>) -> Trace {
        Trace { initial: Sum::single(m.clone()), steps, end: TraceEnd::Completed }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// States `s_0, ..., s_n`.
    pub fn states(&self) -> Vec<Sum<Term>> {
        let mut out = vec![self.initial.clone()];
        let mut cur = self.initial.clone();
        for s in &self.steps {
            cur.remove_one(&s.before);
            cur.plus(&s.after);
            out.push(cur.clone());
        }
        out
    }

    pub fn final_state(&self) -> Sum<Term> {
        self.states().pop().expect("at least the initial state")
    }

    /// The terms of an nd trace, `m_0, ..., m_n`.
    pub fn terms(&self) -> Result<Vec<Term>> {
        let mut out = vec![self.initial_term()?.clone()];
        for (i, s) in self.steps.iter().enumerate() {
            if s.mode != Mode::Nd {
                return Err(Error::InvalidTrace(format!("step {i} is not an nd step")));
            }
            let t = s.target().ok_or_else(|| Error::InvalidTrace(format!("step {i} crashed")))?;
            out.push(t.clone());
        }
        Ok(out)
    }

    pub fn initial_term(&self) -> Result<&Term> {
        self.initial.as_single().ok_or_else(|| Error::InvalidTrace("initial state is not a single term".into()))
    }

    pub fn last_term(&self) -> Result<Term> {
        Ok(self.terms()?.pop().expect("non-empty"))
    }

    /// Checks that consecutive states link up and each step is reproducible.
    pub fn validate(&self) -> Result<()> {
        let mut cur = self.initial.clone();
        for (i, s) in self.steps.iter().enumerate() {
            if !cur.contains(&s.before) {
                return Err(Error::InvalidTrace(format!("step {i} reduces {} which is not in the state", s.before)));
            }
            let again = Step::fire(&s.before, &s.redex.path, s.mode, s.chosen.as_ref())?;
            if again.after.canonical() != s.after.canonical() {
                return Err(Error::InvalidTrace(format!("step {i} does not reproduce")));
            }
            cur.remove_one(&s.before);
            cur.plus(&s.after);
        }
        Ok(())
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn then(mut self, other: Trace) -> Trace {
        self.steps.extend(other.steps);
        self.end = other.end;
        self
    }

    pub fn to_records(&self) -> Vec<StepRecord> {
        let states = self.states();
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| StepRecord {
                index: i,
                rule: s.redex.rule,
                mode: s.mode,
                redex_path: s.redex.path.to_public(&s.before).expect("valid step"),
                chosen_addend: s.chosen.as_ref().map(|k| k.as_str().to_string()),
                addend: print_term(&s.before),
                term_before: states[i].to_string(),
                term_after: states[i + 1].to_string(),
            })
            .collect()
    }

    pub fn to_record(&self) -> TraceRecord {
        TraceRecord { initial: self.initial.to_string(), end: self.end, steps: self.to_records() }
    }

    /// Rebuilds a trace by re-firing every recorded step.
    pub fn from_record(r: &TraceRecord) -> Result<Trace> {
        let initial = parse_sum(&r.initial)?;
        let mut steps: Vec<Step> = Vec::new();
        for rec in &r.steps {
            // Reuse the term the previous step produced, so element ids stay
            // consistent along the trace.
            let parsed = parse_term(&rec.addend)?;
            let k = parsed.canonical();
            let before = match steps.last() {
                Some(prev) => prev.after.get(&k),
                None => initial.get(&k),
            }
            .cloned()
            .unwrap_or(parsed);
            let path = Path::from_public(&rec.redex_path, &before)?;
            let chosen = rec.chosen_addend.clone().map(CanonicalForm::from_raw);
            steps.push(Step::fire(&before, &path, rec.mode, chosen.as_ref())?);
        }
        let t = Trace { initial, steps, end: r.end };
        t.validate()?;
        Ok(t)
    }
}

/// Serialized form of one step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub rule: Rule,
    pub mode: Mode,
    pub redex_path: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chosen_addend: Option<String>,
    /// The addend reduced; equals `term_before` for nd traces.
    pub addend: String,
    pub term_before: String,
    pub term_after: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub initial: String,
    pub end: TraceEnd,
    pub steps: Vec<StepRecord>,
}
