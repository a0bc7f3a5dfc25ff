//! Reference semantics for condition trees over a small numeric domain.
//!
//! Truth is encoded as 0 (false), 1 (unknown) and 2 (true); conjunction is `min`,
//! disjunction is `max` and negation is `2 - x`. Nothing here calls into the evaluator.
#![allow(dead_code)]

use std::rc::Rc;

use aku_core::condition::parse_condition;
use aku_core::eval::SituationView;
use aku_core::fixtures;
use aku_core::unit::{Assertion, ContextUnit, Quality};
use aku_core::{ConditionExpr, Engine, SlotValue, TriValue, UnitStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum State {
    Absent,
    Below,
    Inside,
    Above,
}

pub const STATES: [State; 4] = [State::Absent, State::Below, State::Inside, State::Above];

#[derive(Debug)]
pub enum Tree {
    Leaf(usize),
    Not(Rc<Tree>),
    And(Rc<Tree>, Rc<Tree>),
    Or(Rc<Tree>, Rc<Tree>),
}

/// Leaf clause over path `i`; four different clause shapes rotate over the paths.
pub fn leaf_source(i: usize) -> String {
    match i % 4 {
        0 => format!("s.p{i} BETWEEN 20 pct AND 75 pct"),
        1 => format!("s.p{i} > 75 pct"),
        2 => format!("s.p{i} < 20 pct"),
        _ => format!("EXISTS s.p{i}"),
    }
}

pub fn leaf_truth(i: usize, state: State) -> u8 {
    let holds = match (i % 4, state) {
        (3, State::Absent) => return 0,
        (_, State::Absent) => return 1,
        (0, s) => s == State::Inside,
        (1, s) => s == State::Above,
        (2, s) => s == State::Below,
        _ => true,
    };
    if holds {
        2
    } else {
        0
    }
}

pub fn oracle(tree: &Tree, states: &[State]) -> u8 {
    match tree {
        Tree::Leaf(i) => leaf_truth(*i, states[*i]),
        Tree::Not(t) => 2 - oracle(t, states),
        Tree::And(a, b) => oracle(a, states).min(oracle(b, states)),
        Tree::Or(a, b) => oracle(a, states).max(oracle(b, states)),
    }
}

pub fn tri(t: u8) -> TriValue {
    match t {
        0 => TriValue::Unsat,
        1 => TriValue::Unknown,
        _ => TriValue::Sat,
    }
}

/// All trees of depth at most `depth` (a leaf has depth 1) over `paths` leaves.
pub fn enumerate(depth: usize, paths: usize) -> Vec<Rc<Tree>> {
    let leaves: Vec<Rc<Tree>> = (0..paths).map(|i| Rc::new(Tree::Leaf(i))).collect();
    let mut all = leaves.clone();
    for _ in 1..depth {
        let prev = all.clone();
        let mut next = leaves.clone();
        next.extend(prev.iter().map(|t| Rc::new(Tree::Not(t.clone()))));
        for a in &prev {
            for b in &prev {
                next.push(Rc::new(Tree::And(a.clone(), b.clone())));
                next.push(Rc::new(Tree::Or(a.clone(), b.clone())));
            }
        }
        all = next;
    }
    all
}

/// Number of trees `enumerate(depth, paths)` yields, from the recurrence n' = L + n + 2n².
pub fn tree_count(depth: usize, paths: usize) -> u64 {
    let l = paths as u64;
    (1..depth).fold(l, |n, _| l + n + 2 * n * n)
}

pub fn leaf_exprs(paths: usize) -> Vec<ConditionExpr> {
    (0..paths)
        .map(|i| parse_condition(&leaf_source(i)).expect("leaf parses"))
        .collect()
}

pub fn to_expr(tree: &Tree, leaves: &[ConditionExpr]) -> ConditionExpr {
    match tree {
        Tree::Leaf(i) => leaves[*i].clone(),
        Tree::Not(t) => ConditionExpr::negate(to_expr(t, leaves)),
        Tree::And(a, b) => ConditionExpr::and(to_expr(a, leaves), to_expr(b, leaves)),
        Tree::Or(a, b) => ConditionExpr::or(to_expr(a, leaves), to_expr(b, leaves)),
    }
}

pub fn assignments(paths: usize) -> Vec<Vec<State>> {
    let mut out = vec![vec![]];
    for _ in 0..paths {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                STATES.iter().map(move |s| {
                    let mut v = prefix.clone();
                    v.push(*s);
                    v
                })
            })
            .collect();
    }
    out
}

pub fn context_for(states: &[State]) -> ContextUnit {
    let mut ctx = ContextUnit::situation(fixtures::id("ex:oracle"), "oracle");
    for (i, s) in states.iter().enumerate() {
        let magnitude = match s {
            State::Absent => continue,
            State::Below => "10",
            State::Inside => "40",
            State::Above => "90",
        };
        ctx.assertions.push(Assertion::new(
            "s",
            &format!("p{i}"),
            SlotValue::decimal(magnitude, "pct"),
            Quality::Observed,
            fixtures::surveyed_at(),
        ));
    }
    ctx
}

/// Evaluates every tree under every assignment and counts (cases, disagreements).
pub fn compare(trees: &[Rc<Tree>], paths: usize) -> (u64, u64) {
    let engine = Engine::default();
    let store = UnitStore::new();
    let leaves = leaf_exprs(paths);
    let contexts: Vec<(Vec<State>, ContextUnit)> = assignments(paths)
        .into_iter()
        .map(|a| {
            let c = context_for(&a);
            (a, c)
        })
        .collect();
    let mut cases = 0;
    let mut wrong = 0;
    for tree in trees {
        let expr = to_expr(tree, &leaves);
        for (states, ctx) in &contexts {
            let got = engine
                .evaluate_condition_in(&store, &expr, &SituationView::new(ctx))
                .expect("evaluation never fails on this domain")
                .value;
            cases += 1;
            if got != tri(oracle(tree, states)) {
                wrong += 1;
            }
        }
    }
    (cases, wrong)
}

/// A random tree of depth at most `depth` over `paths` leaves, drawn with `next(n)` ∈ [0, n).
pub fn random_tree(depth: usize, paths: usize, next: &mut impl FnMut(u32) -> u32) -> Rc<Tree> {
    if depth == 1 {
        return Rc::new(Tree::Leaf(next(paths as u32) as usize));
    }
    match next(8) {
        0 => Rc::new(Tree::Leaf(next(paths as u32) as usize)),
        1 => Rc::new(Tree::Not(random_tree(depth - 1, paths, next))),
        2..=4 => Rc::new(Tree::And(
            random_tree(depth - 1, paths, next),
            random_tree(depth - 1, paths, next),
        )),
        _ => Rc::new(Tree::Or(
            random_tree(depth - 1, paths, next),
            random_tree(depth - 1, paths, next),
        )),
    }
}
