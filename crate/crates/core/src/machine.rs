//! The ND machine, its auxiliary bag machine, and may-solvability.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canon::{resource_key, Canonical, CanonicalForm};
use crate::error::{Error, Result};
use crate::parse::{parse_sum, parse_term};
use crate::path::{replace_at, Path, PathStep};
use crate::print::print_expression;
use crate::reduction::{leftmost_set, Step, Trace};
use crate::subst::{classical_subst, freshen_binder, linear_subst, partial_subst};
use crate::sum::Sum;
use crate::syntax::{Bag, Elem, Expression, Name, Resource, Term};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum MachineRule {
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "end")]
    End,
    #[serde(rename = "head")]
    Head,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "!beta")]
    BangBeta,
    #[serde(rename = "1b")]
    OneB,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "!b")]
    BangB,
}

/// A derivation of `judgment_in ⇓ judgment_out` (or `⇓b` for bags).
#[derive(Clone, Debug)]
pub struct MachineNode {
    pub rule: MachineRule,
    pub judgment_in: Expression,
    pub judgment_out: Expression,
    /// Canonical form of the addend kept by a (β) or (!β) rule whose
    /// substitution had several addends.
    pub choice: Option<CanonicalForm>,
    pub children: Vec<MachineNode>,
}

impl MachineNode {
    fn out_term(&self) -> &Term {
        match &self.judgment_out {
            Expression::Term(t) => t,
            Expression::Bag(_) => unreachable!("term judgment"),
        }
    }

    fn out_bag(&self) -> &Bag {
        match &self.judgment_out {
            Expression::Bag(b) => b,
            Expression::Term(_) => unreachable!("bag judgment"),
        }
    }

    /// Number of rule applications in the derivation.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn to_record(&self) -> MachineNodeRecord {
        MachineNodeRecord {
            rule: self.rule,
            judgment_in: print_expression(&self.judgment_in),
            judgment_out: print_expression(&self.judgment_out),
            choice: self.choice.as_ref().map(|c| c.as_str().to_string()),
            children: self.children.iter().map(|c| c.to_record()).collect(),
        }
    }

    pub fn from_record(r: &MachineNodeRecord) -> Result<MachineNode> {
        let bag_rule = matches!(r.rule, MachineRule::OneB | MachineRule::B | MachineRule::BangB);
        let parse = |s: &str| -> Result<Expression> {
            if bag_rule {
                parse_bag(s).map(Expression::Bag)
            } else {
                Ok(Expression::Term(parse_term(s)?))
            }
        };
        Ok(MachineNode {
            rule: r.rule,
            judgment_in: parse(&r.judgment_in)?,
            judgment_out: parse(&r.judgment_out)?,
            choice: r.choice.clone().map(CanonicalForm::from_raw),
            children: r.children.iter().map(MachineNode::from_record).collect::<Result<_>>()?,
        })
    }
}

fn parse_bag(s: &str) -> Result<Bag> {
    let t = parse_sum(&format!("z {s}"))?;
    match t.as_single() {
        Some(Term::App(_, p, _)) => Ok(p.clone()),
        _ => Err(Error::MalformedTree(format!("not a bag: {s}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineNodeRecord {
    pub rule: MachineRule,
    pub judgment_in: String,
    pub judgment_out: String,
    pub choice: Option<String>,
    pub children: Vec<MachineNodeRecord>,
}

#[derive(Clone, Debug)]
pub enum Outcome<T> {
    Converged {
        result: T,
        tree: MachineNode,
    },
    /// A substitution returned `0` at the given judgment.
    Undefined {
        stuck: Expression,
    },
    BudgetExhausted,
}

pub type MachineOutcome = Outcome<Term>;
pub type BagOutcome = Outcome<Bag>;

impl<T> Outcome<T> {
    pub fn is_converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Policy {
    /// Least bag element, first addend in canonical order.
    CanonicalFirst,
    /// Least bag element, addend drawn with a seeded generator.
    SeededRandom(u64),
    /// Every run.
    EnumerateAll,
}

/// Order in which (head) submits the argument bags to the bag machine.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HeadOrder {
    LeftToRight,
    RightToLeft,
}

#[derive(Clone, Copy, Debug)]
pub struct MachineConfig {
    pub policy: Policy,
    /// Total rule applications allowed, over both machines.
    pub budget: usize,
    /// Under `EnumerateAll`, also branch over which bag element (β) and
    /// (!β) consume.
    pub branch_elements: bool,
    pub head_order: HeadOrder,
}

pub const DEFAULT_BUDGET: usize = 10_000;

impl MachineConfig {
    pub fn new(policy: Policy, budget: usize) -> Self {
        MachineConfig { policy, budget, branch_elements: true, head_order: HeadOrder::LeftToRight }
    }
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig::new(Policy::CanonicalFirst, DEFAULT_BUDGET)
    }
}

/// Outcomes of a machine run. Deterministic policies give one outcome;
/// `EnumerateAll` gives one per distinct result, plus `Undefined` and
/// `BudgetExhausted` entries when some run got stuck or did not finish.
#[derive(Clone, Debug)]
pub struct MachineRun<T> {
    pub outcomes: Vec<Outcome<T>>,
    /// Rule applications performed.
    pub applications: usize,
    /// Every run terminated within the budget.
    pub exhaustive: bool,
}

impl<T> MachineRun<T> {
    pub fn converged(&self) -> impl Iterator<Item = (&T, &MachineNode)> {
        self.outcomes.iter().filter_map(|o| match o {
            Outcome::Converged { result, tree } => Some((result, tree)),
            _ => None,
        })
    }
}

/// A term is an outer normal form iff it has no leftmost redex.
pub fn is_onf(m: &Term) -> bool {
    leftmost_set(m).is_empty()
}

/// Runs the ND machine on `m`.
pub fn machine_step_run(m: &Term, cfg: &MachineConfig) -> MachineRun<Term> {
    match cfg.policy {
        Policy::EnumerateAll => with_big_stack(|| Enumerator::new(cfg).run_term(m)),
        _ => with_big_stack(|| {
            let mut d = Det::new(cfg);
            let r = d.nd(m);
            MachineRun { outcomes: vec![det_outcome(r)], applications: d.used, exhaustive: d.used <= cfg.budget }
        }),
    }
}

/// Runs the bag machine on `p`.
pub fn b_machine_run(p: &Bag, cfg: &MachineConfig) -> MachineRun<Bag> {
    match cfg.policy {
        Policy::EnumerateAll => with_big_stack(|| Enumerator::new(cfg).run_bag(p)),
        _ => {
            let mut d = Det::new(cfg);
            let r = d.bag(p).map(|n| (n.out_bag().clone(), n));
            let outcome = match r {
                Ok((result, tree)) => Outcome::Converged { result, tree },
                Err(Stop::Undefined(stuck)) => Outcome::Undefined { stuck },
                Err(Stop::Budget) => Outcome::BudgetExhausted,
            };
            MachineRun { outcomes: vec![outcome], applications: d.used, exhaustive: d.used <= cfg.budget }
        }
    }
}

fn det_outcome(r: Result<MachineNode, Stop>) -> MachineOutcome {
    match r {
        Ok(tree) => Outcome::Converged { result: tree.out_term().clone(), tree },
        Err(Stop::Undefined(stuck)) => Outcome::Undefined { stuck },
        Err(Stop::Budget) => Outcome::BudgetExhausted,
    }
}

/// Deep derivations recurse deeply; run them on a thread with a large stack.
fn with_big_stack<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, f)
            .expect("spawn machine thread")
            .join()
            .expect("machine thread panicked")
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SolvabilityVerdict {
    MaySolvable { witness: MachineNodeRecord, explored: usize },
    NotWithinBudget { explored: usize, exhaustive: bool },
}

impl SolvabilityVerdict {
    pub fn is_may_solvable(&self) -> bool {
        matches!(self, SolvabilityVerdict::MaySolvable { .. })
    }
}

/// Searches every machine run of `m` for one that converges.
pub fn may_solvable(m: &Term, budget: usize) -> SolvabilityVerdict {
    let cfg = MachineConfig::new(Policy::EnumerateAll, budget);
    let run = with_big_stack(|| {
        let mut e = Enumerator::new(&cfg);
        e.stop_at_first = true;
        e.run_term(m)
    });
    let witness = run.converged().next().map(|(_, tree)| tree.to_record());
    match witness {
        Some(witness) => SolvabilityVerdict::MaySolvable { witness, explored: run.applications },
        None => SolvabilityVerdict::NotWithinBudget { explored: run.applications, exhaustive: run.exhaustive },
    }
}

// One (0), (β) or (!β) transition on a head redex `(\x.M) P P1 ... Pm`.

struct Transition {
    rule: MachineRule,
    /// The addends of the substitution, in canonical order, each with the
    /// whole term it leads to and its multiplicity. Empty means undefined.
    results: Vec<(CanonicalForm, Term, usize)>,
}

impl Transition {
    fn is_undefined(&self) -> bool {
        self.results.is_empty()
    }

    /// Whether the rule records which addend it kept.
    fn chooses(&self) -> bool {
        self.rule != MachineRule::Zero && self.results.len() > 1
    }
}

/// The transitions available at a head redex: one for an empty bag, else
/// one per consumable element (only the least unless `all_elements`).
fn transitions(m: &Term, all_elements: bool) -> Vec<Transition> {
    let (head, bags) = m.spine();
    let Term::Abs(x, body) = head else { unreachable!("head redex") };
    let p = bags[0];
    let rest: Vec<Bag> = bags[1..].iter().map(|b| (*b).clone()).collect();
    if p.is_empty() {
        let s = classical_subst(&**body, x, &Sum::zero());
        let results =
            s.entries().map(|(k, t, n)| (k.clone(), Term::apps(t.clone(), rest.iter().cloned()), n)).collect();
        return vec![Transition { rule: MachineRule::Zero, results }];
    }
    let (x, body) = if p.has_free(x) {
        let mut avoid = BTreeSet::new();
        m.names(&mut avoid);
        freshen_binder(x, body, &avoid)
    } else {
        (x.clone(), (**body).clone())
    };
    let order = p.canonical_order();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for e in order {
        if !seen.insert(resource_key(&e.res)) {
            continue;
        }
        let (rule, s) = match &e.res {
            Resource::Linear(n) => (MachineRule::Beta, linear_subst(&body, &x, n)),
            Resource::Reusable(n) => (MachineRule::BangBeta, partial_subst(&body, &x, n)),
        };
        let remaining = p.without(e.id);
        let results = s
            .entries()
            .map(|(k, b, n)| {
                let f = Term::Abs(x.clone(), Box::new(b.clone()));
                (k.clone(), Term::apps(Term::app(f, remaining.clone()), rest.iter().cloned()), n)
            })
            .collect();
        out.push(Transition { rule, results });
        if !all_elements {
            break;
        }
    }
    out
}

fn rebuild_head(head: &Term, bags: Vec<Bag>) -> Term {
    Term::apps(head.clone(), bags)
}

fn head_indices(n: usize, order: HeadOrder) -> Vec<usize> {
    match order {
        HeadOrder::LeftToRight => (0..n).collect(),
        HeadOrder::RightToLeft => (0..n).rev().collect(),
    }
}

enum Stop {
    Undefined(Expression),
    Budget,
}

/// Single-run machine for the deterministic policies.
struct Det {
    budget: usize,
    used: usize,
    rng: Option<ChaCha8Rng>,
    head_order: HeadOrder,
}

enum Frame {
    Lambda(Name, Term),
    Step(MachineRule, Term, Option<CanonicalForm>),
}

impl Det {
    fn new(cfg: &MachineConfig) -> Det {
        let rng = match cfg.policy {
            Policy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Det { budget: cfg.budget, used: 0, rng, head_order: cfg.head_order }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.used += 1;
        if self.used > self.budget {
            Err(Stop::Budget)
        } else {
            Ok(())
        }
    }

    fn pick(&mut self, tr: &Transition) -> (CanonicalForm, Term) {
        let k = match &mut self.rng {
            None => 0,
            Some(rng) => {
                let total: usize = tr.results.iter().map(|r| r.2).sum();
                let mut draw = rng.gen_range(0..total);
                tr.results
                    .iter()
                    .position(|r| {
                        draw < r.2 || {
                            draw -= r.2;
                            false
                        }
                    })
                    .expect("draw below total")
            }
        };
        let (key, t, _) = &tr.results[k];
        (key.clone(), t.clone())
    }

    fn nd(&mut self, m: &Term) -> Result<MachineNode, Stop> {
        let mut frames = Vec::new();
        let mut cur = m.clone();
        let leaf = loop {
            self.tick()?;
            if is_onf(&cur) {
                break MachineNode {
                    rule: MachineRule::End,
                    judgment_in: Expression::Term(cur.clone()),
                    judgment_out: Expression::Term(cur),
                    choice: None,
                    children: Vec::new(),
                };
            }
            if let Term::Abs(x, b) = &cur {
                let next = (**b).clone();
                frames.push(Frame::Lambda(x.clone(), cur.clone()));
                cur = next;
                continue;
            }
            let (head, bags) = cur.spine();
            if let Term::Var(_) = head {
                let mut children: Vec<Option<MachineNode>> = vec![None; bags.len()];
                for i in head_indices(bags.len(), self.head_order) {
                    children[i] = Some(self.bag(bags[i])?);
                }
                let children: Vec<MachineNode> = children.into_iter().map(|c| c.expect("every bag")).collect();
                let out = rebuild_head(head, children.iter().map(|c| c.out_bag().clone()).collect());
                break MachineNode {
                    rule: MachineRule::Head,
                    judgment_in: Expression::Term(cur.clone()),
                    judgment_out: Expression::Term(out),
                    choice: None,
                    children,
                };
            }
            let tr = transitions(&cur, false).pop().expect("one transition");
            if tr.is_undefined() {
                return Err(Stop::Undefined(Expression::Term(cur)));
            }
            let (key, next) = self.pick(&tr);
            let choice = tr.chooses().then_some(key);
            frames.push(Frame::Step(tr.rule, cur, choice));
            cur = next;
        };
        Ok(fold_frames(frames, leaf))
    }

    fn bag(&mut self, p: &Bag) -> Result<MachineNode, Stop> {
        let order: Vec<Elem> = p.canonical_order().into_iter().cloned().collect();
        let mut results = Vec::with_capacity(order.len());
        for e in &order {
            self.tick()?;
            results.push(match &e.res {
                Resource::Linear(n) => Some(self.nd(n)?),
                Resource::Reusable(_) => None,
            });
        }
        self.tick()?;
        Ok(build_bag_nodes(&order, results))
    }
}

fn fold_frames(frames: Vec<Frame>, leaf: MachineNode) -> MachineNode {
    let mut node = leaf;
    for f in frames.into_iter().rev() {
        node = match f {
            Frame::Lambda(x, input) => {
                let out = Term::Abs(x, Box::new(node.out_term().clone()));
                MachineNode {
                    rule: MachineRule::Lambda,
                    judgment_in: Expression::Term(input),
                    judgment_out: Expression::Term(out),
                    choice: None,
                    children: vec![node],
                }
            }
            Frame::Step(rule, input, choice) => MachineNode {
                rule,
                judgment_in: Expression::Term(input),
                judgment_out: node.judgment_out.clone(),
                choice,
                children: vec![node],
            },
        };
    }
    node
}

/// Nested (b)/(!b) nodes over `order`, ending in (1b); `results[k]` is the
/// derivation for the k-th element when it is linear.
fn build_bag_nodes(order: &[Elem], results: Vec<Option<MachineNode>>) -> MachineNode {
    let empty = Bag::empty();
    let mut node = MachineNode {
        rule: MachineRule::OneB,
        judgment_in: Expression::Bag(empty.clone()),
        judgment_out: Expression::Bag(empty),
        choice: None,
        children: Vec::new(),
    };
    for (k, r) in results.into_iter().enumerate().rev() {
        let e = &order[k];
        let rest_in = match &node.judgment_in {
            Expression::Bag(b) => b.clone(),
            _ => unreachable!(),
        };
        let rest_out = node.out_bag().clone();
        let mut bag_in = Bag::from_elems(vec![e.clone()]);
        bag_in = bag_in.concat(&rest_in);
        node = match r {
            Some(child) => {
                let bag_out = Bag::linear([child.out_term().clone()]).concat(&rest_out);
                MachineNode {
                    rule: MachineRule::B,
                    judgment_in: Expression::Bag(bag_in),
                    judgment_out: Expression::Bag(bag_out),
                    choice: None,
                    children: vec![child, node],
                }
            }
            None => {
                let bag_out = Bag::from_resources([e.res.clone()]).concat(&rest_out);
                MachineNode {
                    rule: MachineRule::BangB,
                    judgment_in: Expression::Bag(bag_in),
                    judgment_out: Expression::Bag(bag_out),
                    choice: None,
                    children: vec![node],
                }
            }
        };
    }
    node
}

/// Results of all runs on one judgment.
#[derive(Clone, Default)]
struct Found<T> {
    converged: BTreeMap<CanonicalForm, (T, MachineNode)>,
    undefined: Option<Expression>,
    /// Some run was cut by the nesting fuel or the budget.
    cut: bool,
    /// Some run revisits a judgment it is already proving.
    cyclic: bool,
}

impl<T: Clone> Found<T> {
    fn none() -> Self {
        Found { converged: BTreeMap::new(), undefined: None, cut: false, cyclic: false }
    }

    fn absorb_flags<U>(&mut self, other: &Found<U>) {
        self.cut |= other.cut;
        self.cyclic |= other.cyclic;
        if self.undefined.is_none() {
            self.undefined = other.undefined.clone();
        }
    }

    fn complete(&self) -> bool {
        !self.cut && !self.cyclic
    }
}

/// Exhaustive exploration of machine runs by iterative deepening on the
/// number of (0)/(β)/(!β) transitions along a derivation.
struct Enumerator {
    budget: usize,
    used: usize,
    branch_elements: bool,
    head_order: HeadOrder,
    stop_at_first: bool,
    memo: HashMap<CanonicalForm, Rc<Found<Term>>>,
    active: HashSet<CanonicalForm>,
}

const INITIAL_FUEL: usize = 16;

impl Enumerator {
    fn new(cfg: &MachineConfig) -> Self {
        Enumerator {
            budget: cfg.budget,
            used: 0,
            branch_elements: cfg.branch_elements,
            head_order: cfg.head_order,
            stop_at_first: false,
            memo: HashMap::new(),
            active: HashSet::new(),
        }
    }

    fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    fn tick(&mut self) -> bool {
        if self.exhausted() {
            return false;
        }
        self.used += 1;
        true
    }

    fn deepen<T: Clone>(&mut self, mut go: impl FnMut(&mut Self, usize) -> Found<T>) -> Found<T> {
        let mut fuel = INITIAL_FUEL;
        loop {
            let f = go(self, fuel);
            let done = !f.cut || self.exhausted() || (self.stop_at_first && !f.converged.is_empty());
            if done {
                return f;
            }
            fuel = fuel.saturating_mul(2);
        }
    }

    fn finish<T: Clone>(&self, f: Found<T>) -> MachineRun<T> {
        let exhaustive = f.complete();
        let mut outcomes: Vec<Outcome<T>> =
            f.converged.into_values().map(|(result, tree)| Outcome::Converged { result, tree }).collect();
        if let Some(stuck) = f.undefined {
            outcomes.push(Outcome::Undefined { stuck });
        }
        if !exhaustive {
            outcomes.push(Outcome::BudgetExhausted);
        }
        MachineRun { outcomes, applications: self.used, exhaustive }
    }

    fn run_term(mut self, m: &Term) -> MachineRun<Term> {
        let f = self.deepen(|e, fuel| e.nd(m, fuel).as_ref().clone());
        self.finish(f)
    }

    fn run_bag(mut self, p: &Bag) -> MachineRun<Bag> {
        let f = self.deepen(|e, fuel| e.bag(p, fuel));
        self.finish(f)
    }

    fn nd(&mut self, m: &Term, fuel: usize) -> Rc<Found<Term>> {
        let key = m.canonical();
        if let Some(f) = self.memo.get(&key) {
            return f.clone();
        }
        if self.active.contains(&key) {
            let mut f = Found::none();
            f.cyclic = true;
            return Rc::new(f);
        }
        if !self.tick() {
            let mut f = Found::none();
            f.cut = true;
            return Rc::new(f);
        }
        self.active.insert(key.clone());
        let f = self.nd_uncached(m, fuel);
        self.active.remove(&key);
        let f = Rc::new(f);
        if f.complete() {
            self.memo.insert(key, f.clone());
        }
        f
    }

    fn nd_uncached(&mut self, m: &Term, fuel: usize) -> Found<Term> {
        let mut out = Found::none();
        if is_onf(m) {
            let tree = MachineNode {
                rule: MachineRule::End,
                judgment_in: Expression::Term(m.clone()),
                judgment_out: Expression::Term(m.clone()),
                choice: None,
                children: Vec::new(),
            };
            out.converged.insert(m.canonical(), (m.clone(), tree));
            return out;
        }
        if let Term::Abs(x, b) = m {
            let inner = self.nd(b, fuel);
            out.absorb_flags(&inner);
            for (r, tree) in inner.converged.values() {
                let result = Term::Abs(x.clone(), Box::new(r.clone()));
                let node = MachineNode {
                    rule: MachineRule::Lambda,
                    judgment_in: Expression::Term(m.clone()),
                    judgment_out: Expression::Term(result.clone()),
                    choice: None,
                    children: vec![tree.clone()],
                };
                out.converged.entry(result.canonical()).or_insert((result, node));
            }
            return out;
        }
        let (head, bags) = m.spine();
        if let Term::Var(_) = head {
            let mut per_bag: Vec<Found<Bag>> = vec![Found::none(); bags.len()];
            for i in head_indices(bags.len(), self.head_order) {
                per_bag[i] = self.bag(bags[i], fuel);
                if per_bag[i].converged.is_empty() {
                    break;
                }
            }
            for f in &per_bag {
                out.absorb_flags(f);
            }
            if per_bag.iter().any(|f| f.converged.is_empty()) {
                return out;
            }
            let mut partial: Vec<(Vec<Bag>, Vec<MachineNode>)> = vec![(Vec::new(), Vec::new())];
            for f in &per_bag {
                let mut next = Vec::new();
                for (bs, ns) in &partial {
                    for (b, n) in f.converged.values() {
                        let mut bs = bs.clone();
                        bs.push(b.clone());
                        let mut ns = ns.clone();
                        ns.push(n.clone());
                        next.push((bs, ns));
                    }
                }
                partial = next;
            }
            for (bs, ns) in partial {
                let result = rebuild_head(head, bs);
                let node = MachineNode {
                    rule: MachineRule::Head,
                    judgment_in: Expression::Term(m.clone()),
                    judgment_out: Expression::Term(result.clone()),
                    choice: None,
                    children: ns,
                };
                out.converged.entry(result.canonical()).or_insert((result, node));
            }
            return out;
        }
        if fuel == 0 {
            out.cut = true;
            return out;
        }
        for tr in transitions(m, self.branch_elements) {
            if tr.is_undefined() {
                out.undefined.get_or_insert(Expression::Term(m.clone()));
                continue;
            }
            let many = tr.chooses();
            for (key, next, _) in &tr.results {
                let sub = self.nd(next, fuel - 1);
                out.absorb_flags(&sub);
                for (r, tree) in sub.converged.values() {
                    let node = MachineNode {
                        rule: tr.rule,
                        judgment_in: Expression::Term(m.clone()),
                        judgment_out: Expression::Term(r.clone()),
                        choice: many.then(|| key.clone()),
                        children: vec![tree.clone()],
                    };
                    out.converged.entry(r.canonical()).or_insert((r.clone(), node));
                }
                if self.stop_at_first && !out.converged.is_empty() {
                    return out;
                }
            }
        }
        out
    }

    fn bag(&mut self, p: &Bag, fuel: usize) -> Found<Bag> {
        let order: Vec<Elem> = p.canonical_order().into_iter().cloned().collect();
        let mut out = Found::none();
        let mut per_elem: Vec<Option<Rc<Found<Term>>>> = Vec::new();
        for e in &order {
            if !self.tick() {
                out.cut = true;
                return out;
            }
            match &e.res {
                Resource::Linear(n) => {
                    let f = self.nd(n, fuel);
                    out.absorb_flags(&f);
                    if f.converged.is_empty() {
                        return out;
                    }
                    per_elem.push(Some(f));
                }
                Resource::Reusable(_) => per_elem.push(None),
            }
        }
        if !self.tick() {
            out.cut = true;
            return out;
        }
        let mut combos: Vec<Vec<Option<MachineNode>>> = vec![Vec::new()];
        for f in &per_elem {
            let mut next = Vec::new();
            for c in &combos {
                match f {
                    None => {
                        let mut c = c.clone();
                        c.push(None);
                        next.push(c);
                    }
                    Some(f) => {
                        for (_, n) in f.converged.values() {
                            let mut c = c.clone();
                            c.push(Some(n.clone()));
                            next.push(c);
                        }
                    }
                }
            }
            combos = next;
        }
        for c in combos {
            let node = build_bag_nodes(&order, c);
            let result = node.out_bag().clone();
            out.converged.entry(result.canonical()).or_insert((result, node));
        }
        out
    }
}

/// The leftmost nd trace denoted by a converged run: each maximal group of
/// (β)/(!β) transitions closed by (0) is one nd step at that head redex.
pub fn reconstruct_trace(tree: &MachineNode) -> Result<Trace> {
    let Expression::Term(m) = &tree.judgment_in else {
        return Err(Error::MalformedTree("root judgment is not a term".into()));
    };
    let mut whole = m.clone();
    let mut steps = Vec::new();
    walk_nd(tree, &Path::root(), &mut whole, &mut steps)?;
    let t = Trace::from_steps(m, steps);
    if let Expression::Term(out) = &tree.judgment_out {
        if t.last_term()?.canonical() != out.canonical() {
            return Err(Error::MalformedTree("run does not end at its result".into()));
        }
    }
    Ok(t)
}

fn malformed(why: &str) -> Error {
    Error::MalformedTree(why.to_string())
}

fn node_term(n: &MachineNode) -> Result<&Term> {
    match &n.judgment_in {
        Expression::Term(t) => Ok(t),
        Expression::Bag(_) => Err(malformed("expected a term judgment")),
    }
}

fn walk_nd(node: &MachineNode, ctx: &Path, whole: &mut Term, steps: &mut Vec<Step>) -> Result<()> {
    let here = node_term(node)?;
    if ctx.follow(whole)?.canonical() != here.canonical() {
        return Err(malformed("judgment does not match the reduced term"));
    }
    match node.rule {
        MachineRule::End => Ok(()),
        MachineRule::Lambda => {
            let child = node.children.first().ok_or_else(|| malformed("(λ) without premise"))?;
            walk_nd(child, &ctx.child(PathStep::AbsBody), whole, steps)
        }
        MachineRule::Head => {
            let (_, bags) = here.spine();
            if node.children.len() != bags.len() {
                return Err(malformed("(head) premise count"));
            }
            let m = bags.len();
            for (i, child) in node.children.iter().enumerate() {
                let mut app = ctx.clone();
                for _ in 0..(m - 1 - i) {
                    app = app.child(PathStep::AppFun);
                }
                let mut used = HashSet::new();
                walk_bag(child, &app, whole, steps, &mut used)?;
            }
            Ok(())
        }
        MachineRule::Zero | MachineRule::Beta | MachineRule::BangBeta => {
            let (_, bags) = here.spine();
            let mut redex = ctx.clone();
            for _ in 0..bags.len() - 1 {
                redex = redex.child(PathStep::AppFun);
            }
            let mut n = node;
            while n.rule != MachineRule::Zero {
                if !matches!(n.rule, MachineRule::Beta | MachineRule::BangBeta) {
                    return Err(malformed("transition chain broken"));
                }
                n = n.children.first().ok_or_else(|| malformed("(β) without premise"))?;
            }
            let after = n.children.first().ok_or_else(|| malformed("(0) without premise"))?;
            let contracted = node_term(after)?;
            let next = replace_at(whole, ctx, contracted.clone())?;
            let step = Step::nd(whole, &redex, &next)
                .map_err(|e| Error::MalformedTree(format!("transitions do not form an nd step: {e}")))?;
            steps.push(step);
            *whole = next;
            walk_nd(after, ctx, whole, steps)
        }
        _ => Err(malformed("bag rule in a term judgment")),
    }
}

fn walk_bag(
    node: &MachineNode,
    app: &Path,
    whole: &mut Term,
    steps: &mut Vec<Step>,
    used: &mut HashSet<crate::syntax::ElemId>,
) -> Result<()> {
    match node.rule {
        MachineRule::OneB => Ok(()),
        MachineRule::BangB => {
            walk_bag(node.children.first().ok_or_else(|| malformed("(!b) premise"))?, app, whole, steps, used)
        }
        MachineRule::B => {
            let [elem, rest] = node.children.as_slice() else {
                return Err(malformed("(b) needs two premises"));
            };
            let content = node_term(elem)?;
            let key = resource_key(&Resource::Linear(content.clone()));
            let Term::App(_, p, _) = app.follow(whole)? else {
                return Err(malformed("bag position is not an application"));
            };
            let e = p
                .iter()
                .find(|e| !used.contains(&e.id) && resource_key(&e.res) == key)
                .ok_or_else(|| malformed("(b) element not found in the bag"))?;
            let id = e.id;
            used.insert(id);
            walk_nd(elem, &app.elem_content(id), whole, steps)?;
            walk_bag(rest, app, whole, steps, used)
        }
        _ => Err(malformed("term rule in a bag judgment")),
    }
}
