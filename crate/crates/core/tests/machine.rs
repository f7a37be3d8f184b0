use std::collections::BTreeSet;

use rescalc::gen::Enumerator;
use rescalc::machine::*;
use rescalc::reduction::{Step, Trace};
use rescalc::standardization::is_standard;
use rescalc::{parse_term, Bag, Canonical, Term};

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

fn bag(s: &str) -> Bag {
    match t(&format!("z {s}")) {
        Term::App(_, p, _) => p,
        _ => unreachable!(),
    }
}

const I: &str = "(\\x.x)";
const F: &str = "(\\x y.y)";

fn det(policy: Policy) -> MachineConfig {
    MachineConfig::new(policy, 1000)
}

#[test]
fn stuck_on_a_vanishing_substitution() {
    let m = t("(\\z.\\y.y)[x]");
    let run = machine_step_run(&m, &det(Policy::CanonicalFirst));
    assert!(matches!(&run.outcomes[..], [Outcome::Undefined { .. }]));
    let v = may_solvable(&m, 1000);
    assert!(matches!(v, SolvabilityVerdict::NotWithinBudget { exhaustive: true, .. }));
}

#[test]
fn divergent_term_never_stops() {
    let omega = t("(\\x.x[!x])[!(\\x.x[!x])]");
    for budget in [1, 10, 500] {
        let run = machine_step_run(&omega, &MachineConfig::new(Policy::CanonicalFirst, budget));
        assert!(matches!(&run.outcomes[..], [Outcome::BudgetExhausted]));
    }
    let v = may_solvable(&omega, 2000);
    assert!(matches!(v, SolvabilityVerdict::NotWithinBudget { exhaustive: false, .. }));
}

#[test]
fn two_computations_for_two_linear_arguments() {
    let m = t(&format!("(\\x.y[x][x])[{F}, {I}]"));
    let run = machine_step_run(&m, &det(Policy::EnumerateAll));
    let mut got: Vec<_> = run.converged().map(|(r, _)| r.canonical()).collect();
    got.sort();
    let mut want = vec![t(&format!("y[{F}][{I}]")).canonical(), t(&format!("y[{I}][{F}]")).canonical()];
    want.sort();
    assert_eq!(got, want);
    assert!(run.exhaustive);
}

#[test]
fn unique_computation_with_reusable_arguments() {
    let m = t(&format!("(\\x.y[!x])[!{I}, !{F}]"));
    let run = machine_step_run(&m, &det(Policy::EnumerateAll));
    let got: Vec<_> = run.converged().map(|(r, _)| r.canonical()).collect();
    assert_eq!(got, vec![t(&format!("y[!{I}, !{F}]")).canonical()]);
    let (_, tree) = run.converged().next().unwrap();
    let tr = reconstruct_trace(tree).unwrap();
    assert_eq!(tr.len(), 1);
    assert_eq!(tr.last_term().unwrap().canonical(), t(&format!("y[!{I}, !{F}]")).canonical());
}

#[test]
fn onf_is_its_own_result() {
    let m = t("\\x.x[!((\\y.y)[z])]");
    let run = machine_step_run(&m, &det(Policy::CanonicalFirst));
    let (r, tree) = run.converged().next().unwrap();
    assert_eq!(r, &m);
    assert_eq!(tree.rule, MachineRule::End);
    assert!(reconstruct_trace(tree).unwrap().is_empty());
    assert!(may_solvable(&t("\\x.x"), 10).is_may_solvable());
}

#[test]
fn bag_machine() {
    let cfg = det(Policy::CanonicalFirst);
    let run = b_machine_run(&Bag::empty(), &cfg);
    let (r, tree) = run.converged().next().unwrap();
    assert!(r.is_empty());
    assert_eq!(tree.rule, MachineRule::OneB);

    let p = bag("[!((\\x.x)[z])]");
    let (r, _) = b_machine_run(&p, &cfg).converged().next().map(|(r, n)| (r.clone(), n.clone())).unwrap();
    assert_eq!(r, p);

    let p = bag("[(\\x.x)[z]]");
    let (r, _) = b_machine_run(&p, &cfg).converged().next().map(|(r, n)| (r.clone(), n.clone())).unwrap();
    assert_eq!(r, bag("[z]"));
}

#[test]
fn reconstructed_runs_are_leftmost_and_standard() {
    let m = t(&format!("(\\x.y[x][x])[{F}, {I}]"));
    let run = machine_step_run(&m, &det(Policy::EnumerateAll));
    for (r, tree) in run.converged() {
        let tr: Trace = reconstruct_trace(tree).unwrap();
        tr.validate().unwrap();
        assert_eq!(tr.len(), 1);
        assert!(tr.steps.iter().all(|s: &Step| s.redex.leftmost));
        assert_eq!(tr.last_term().unwrap().canonical(), r.canonical());
        assert!(is_standard(&tr).unwrap().standard);
    }
}

#[test]
fn seeded_runs_are_reproducible() {
    let m = t(&format!("(\\x.y[x][x][!x])[!{F}, !{I}]"));
    let a = machine_step_run(&m, &det(Policy::SeededRandom(7)));
    let b = machine_step_run(&m, &det(Policy::SeededRandom(7)));
    let key = |r: &MachineRun<Term>| match &r.outcomes[0] {
        Outcome::Converged { result, .. } => format!("ok {}", result.canonical().as_str()),
        Outcome::Undefined { .. } => "undefined".to_string(),
        Outcome::BudgetExhausted => "budget".to_string(),
    };
    assert_eq!(key(&a), key(&b));
}

#[test]
fn tree_records_round_trip() {
    let m = t(&format!("(\\x.y[x][(\\u.u)[w]])[{F}]"));
    let run = machine_step_run(&m, &det(Policy::CanonicalFirst));
    let (_, tree) = run.converged().next().unwrap();
    let rec = tree.to_record();
    let json = serde_json::to_string(&rec).unwrap();
    let back = MachineNode::from_record(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(back.to_record(), rec);
    let tr = reconstruct_trace(&back).unwrap();
    assert!(tr.steps.iter().all(|s| s.redex.leftmost));
}

fn results(m: &Term, branch_elements: bool) -> (BTreeSet<String>, bool) {
    let mut cfg = MachineConfig::new(Policy::EnumerateAll, 4000);
    cfg.branch_elements = branch_elements;
    let run = machine_step_run(m, &cfg);
    (run.converged().map(|(n, _)| n.canonical().as_str().to_string()).collect(), run.exhaustive)
}

#[test]
fn element_choice_regimes() {
    // Branching over which element (beta) and (!beta) consume adds no
    // outcome that choosing the least element misses.
    let mut e = Enumerator::new(&["y", "z"]);
    let mut compared = 0;
    for m in e.terms_up_to(10) {
        let (with, ok1) = results(&m, true);
        let (without, ok2) = results(&m, false);
        if ok1 && ok2 {
            compared += 1;
            assert_eq!(with, without, "{m}");
        }
    }
    assert!(compared > 20_000, "{compared}");
}
