use rescalc::reduction::*;
use rescalc::standardization::*;
use rescalc::{parse_term, Canonical, Path, Term};

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

/// Nd chain through the given terms, each reached by some redex.
fn chain(terms: &[&str]) -> Trace {
    let ts: Vec<Term> = terms.iter().map(|s| t(s)).collect();
    let mut cur = ts[0].clone();
    let mut steps = Vec::new();
    for next in &ts[1..] {
        let k = next.canonical();
        let s = nd_successors(&cur).into_iter().find(|s| s.term.canonical() == k).expect("reachable in one step");
        let step = Step::nd(&cur, &s.redex.path, &s.term).unwrap();
        cur = s.term;
        steps.push(step);
    }
    Trace::from_steps(&ts[0], steps)
}

const I: &str = "(\\x.x)";

#[test]
fn leftmost_chain_of_the_example_is_standard() {
    let m1 = format!("{I}[!((\\x y.x)[!{I}][!{I}])]");
    let tr = chain(&[&m1, &format!("(\\x y.x)[!{I}][!{I}]"), &format!("(\\y.{I})[!{I}]"), I]);
    assert!(tr.steps.iter().all(|s| s.redex.leftmost));
    assert_eq!(is_standard(&tr).unwrap(), StdReport { standard: true, violation: None });
}

#[test]
fn interleaved_inner_chain_of_the_example_is_standard() {
    let m1 = format!("{I}[!((\\x y.x)[!{I}][!{I}])]");
    let k = format!("(\\x y.x)[!{I}][!{I}]");
    let m2 = format!("{I}[!{I}]");
    let tr = chain(&[
        &format!("\\x.x[!({m1}), !({m2})]"),
        &format!("\\x.x[!({k}), !({m2})]"),
        &format!("\\x.x[!({k}), !{I}]"),
        &format!("\\x.x[!((\\y.{I})[!{I}]), !{I}]"),
        &format!("\\x.x[!{I}, !{I}]"),
    ]);
    assert!(tr.steps.iter().all(|s| !s.redex.outer));
    assert!(is_standard(&tr).unwrap().standard);

    let direct = standardize(&tr.terms().unwrap()[0], &tr.last_term().unwrap(), 6).unwrap();
    assert_eq!(direct.len(), 4);
    assert!(is_standard(&direct).unwrap().standard);
}

#[test]
fn inner_then_root_is_not_standard() {
    let m = format!("{I}[{I}[!x, !y]]");
    let tr = chain(&[&m, &format!("{I}[x]"), "x"]);
    let rep = is_standard(&tr).unwrap();
    assert!(!rep.standard);
    let v = rep.violation.unwrap();
    assert_eq!((v.step, v.preceded), (1, 0));
    assert!(v.prior.is_empty());
    assert_eq!(v.fired, vec!["arg", "elem:0", "content"]);

    let std = standardize_trace(&tr, DEFAULT_SLACK).unwrap();
    assert!(is_standard(&std).unwrap().standard);
    assert_eq!(std.last_term().unwrap().canonical(), t("x").canonical());
    assert!(std.steps.iter().all(|s| s.redex.leftmost));
}

#[test]
fn outer_shapes() {
    let m = t("y[!a[b]][c[!d]]");
    let sh = outer_shape(&m);
    assert_eq!(rescalc::print_term(&sh.skeleton), "y[!□][c[!□]]");
    assert_eq!(sh.holes.len(), 2);
    assert_eq!(sh.holes[0].content, t("a[b]"));
    assert_eq!(sh.plug(&sh.contents()).unwrap(), m);

    let sh = outer_shape(&t("x"));
    assert!(sh.holes.is_empty());
    assert_eq!(sh.skeleton, t("x"));
}

#[test]
fn factorization() {
    let m = "x[(\\y.y)[a]][!((\\z.z)[b])]";
    let tr = chain(&[m, "x[(\\y.y)[a]][!b]", "x[a][!b]"]);
    assert!(!tr.steps[0].redex.outer && tr.steps[1].redex.outer);
    let (o, i) = factor_outer_inner(&tr, DEFAULT_SLACK).unwrap();
    assert_eq!((o.len(), i.len()), (1, 1));
    assert!(o.steps.iter().all(|s| s.redex.outer) && i.steps.iter().all(|s| !s.redex.outer));
    assert_eq!(i.last_term().unwrap().canonical(), t("x[a][!b]").canonical());

    let outer_only = chain(&["(\\y.y)[(\\z.z)[a]]", "(\\z.z)[a]", "a"]);
    let (o, i) = factor_outer_inner(&outer_only, 0).unwrap();
    assert_eq!((o.len(), i.len()), (2, 0));
}

#[test]
fn reorder_swaps_a_late_leftmost_step() {
    let m = "(\\x.x[u])[v][(\\z.z)[w]]";
    let tr = chain(&[m, "(\\x.x[u])[v][w]", "v[u][w]"]);
    assert!(!tr.steps[0].redex.leftmost && tr.steps[1].redex.leftmost);
    let r = reorder_outer(&tr).unwrap();
    assert_eq!(r.len(), 2);
    assert!(r.steps[0].redex.leftmost);
    assert_eq!(r.last_term().unwrap().canonical(), t("v[u][w]").canonical());
}

#[test]
fn reordering_alone_does_not_make_every_trace_standard() {
    // Firing the later argument before the earlier one is not leftmost in
    // either step, so reordering leaves it unchanged; the structural pass
    // of standardize_outer fixes it.
    let m = "x[(\\a.a)[p]][y[(\\b.b)[q]][(\\c.c)[r]]]";
    let tr = chain(&[m, "x[(\\a.a)[p]][y[(\\b.b)[q]][r]]", "x[(\\a.a)[p]][y[q][r]]"]);
    let r = reorder_outer(&tr).unwrap();
    assert!(!is_standard(&r).unwrap().standard);
    let s = standardize_outer(&tr).unwrap();
    assert!(is_standard(&s).unwrap().standard);
    assert_eq!(s.last_term().unwrap().canonical(), tr.last_term().unwrap().canonical());
}

#[test]
fn standardize_trivial_and_search() {
    let m = t("(\\w.w)[(\\w.w)[!x, !y]]");
    assert!(standardize(&m, &m, 3).unwrap().is_empty());
    let s = standardize(&m, &t("x"), 3).unwrap();
    assert_eq!(s.len(), 2);
    assert!(is_standard(&s).unwrap().standard);
    assert!(matches!(standardize(&m, &t("z"), 3), Err(rescalc::Error::NoChainFound { bound: 3 })));
}

#[test]
fn inner_chains_keep_the_outer_shape() {
    let m = t("x[!((\\a.a)[(\\b.b)[c]])][(\\d.d)[e]]");
    for tr in nd_chains(&m, 3) {
        if tr.steps.iter().any(|s| s.redex.outer) {
            continue;
        }
        let (a, b) = (outer_shape(&m), outer_shape(&tr.last_term().unwrap()));
        assert_eq!(a.skeleton.canonical(), b.skeleton.canonical());
        assert_eq!(a.holes.len(), b.holes.len());
        for (h, g) in a.holes.iter().zip(&b.holes) {
            assert_eq!(h.path, g.path);
        }
    }
    let _ = Path::root();
}

#[test]
fn verdicts_survive_a_record_round_trip() {
    let m = format!("{I}[{I}[!x, !y]]");
    let tr = chain(&[&m, &format!("{I}[x]"), "x"]);
    let back = Trace::from_record(&tr.to_record()).unwrap();
    assert_eq!(is_standard(&back).unwrap(), is_standard(&tr).unwrap());
    assert!(is_standard(&standardize_trace(&back, DEFAULT_SLACK).unwrap()).unwrap().standard);
}
