//! Redexes, the linear left-to-right order, reduction steps, residuals and
//! strategies.

mod label;
mod order;
mod redex;
mod steps;
mod strategy;
mod trace;

pub use label::{fire_labeled, label, labeled_paths, residuals, LabeledTerm};
pub use order::{precedes, strictly_precedes, Order};
pub use redex::{find_redexes, leftmost_set, redex_at, Redex, Rule};
pub use steps::{
    baby_expand, baby_step, giant_step, nd_step, nd_successor_set, nd_successors, nd_successors_where, NdSucc,
    RedexClass,
};
pub use strategy::{run_term, strategy_run, GivenStep, Pick, Strategy};
pub use trace::{Mode, Step, StepRecord, Trace, TraceEnd, TraceRecord};

pub(crate) use redex::sort_by_public;
