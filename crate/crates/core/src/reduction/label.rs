//! Residuals, tracked by labels on application nodes.

use std::collections::BTreeMap;

use crate::canon::Canonical;
use crate::error::{Error, Result};
use crate::path::{replace_at, term_paths, Path};
use crate::syntax::{Label, Term};

use super::steps::nd_step;
use super::trace::{Mode, Step};

/// A term whose application nodes may carry labels.
pub type LabeledTerm = Term;

/// Attaches `Label(k)` to the application at `targets[k]`.
pub fn label(m: &Term, targets: &[Path]) -> Result<LabeledTerm> {
    let mut out = m.clone();
    for (k, p) in targets.iter().enumerate() {
        let Term::App(f, bag, _) = p.follow(&out)? else {
            return Err(Error::InvalidPath(format!("{p:?} is not an application")));
        };
        let node = Term::App(f.clone(), bag.clone(), Some(Label(k as u32)));
        out = replace_at(&out, p, node)?;
    }
    Ok(out)
}

/// Paths of the labeled applications of `l`, by label.
pub fn labeled_paths(l: &LabeledTerm) -> BTreeMap<Label, Vec<Path>> {
    let mut out: BTreeMap<Label, Vec<Path>> = BTreeMap::new();
    for p in term_paths(l) {
        if let Some(lab) = p.follow(l).expect("own path").label() {
            out.entry(lab).or_default().push(p);
        }
    }
    out
}

/// Replays the nd step `s` on a labeled copy of `s.before`. The redex is
/// located through its public path and the result is the addend alpha-equal
/// to the recorded choice.
pub fn fire_labeled(l: &LabeledTerm, s: &Step) -> Result<LabeledTerm> {
    if s.mode != Mode::Nd {
        return Err(Error::InvalidTrace("residuals are tracked for nd steps only".into()));
    }
    if l.canonical() != s.before.canonical() {
        return Err(Error::InvalidTrace(format!("labeled term {l} is not the source of the step")));
    }
    let public = s.redex.path.to_public(&s.before)?;
    let path = Path::from_public(&public, l)?;
    let target = s.chosen.as_ref().ok_or_else(|| Error::InvalidTrace("crashed step has no result".into()))?;
    nd_step(l, &path)?
        .into_iter()
        .find(|n| &n.canonical() == target)
        .ok_or_else(|| Error::InvalidTrace("recorded choice is not a result of the step".into()))
}

/// Where each label of `l` ends up after firing `s`. A fired labeled redex
/// has no residual.
pub fn residuals(l: &LabeledTerm, s: &Step) -> Result<BTreeMap<Label, Vec<Path>>> {
    let after = fire_labeled(l, s)?;
    let mut out = labeled_paths(&after);
    for lab in labeled_paths(l).into_keys() {
        out.entry(lab).or_default();
    }
    Ok(out)
}
