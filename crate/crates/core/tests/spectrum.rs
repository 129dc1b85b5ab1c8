//! Verdicts over the notion lattice on random systems.

mod common;

use std::collections::HashSet;

use spectroscopy::lts::{LtsBuilder, ProcessSet};
use spectroscopy::spectroscopy::GameVariant;
use spectroscopy::spectrum::{builtin_table, frontier, verdicts, Notion};

use common::{all_pairs, random_lts, rng, solve_pairs, tau_choice};

/// All `(finer, coarser)` pairs reachable through the table's edges.
fn edge_closure(table: &[Notion]) -> HashSet<(String, String)> {
    let mut out: HashSet<(String, String)> = table
        .iter()
        .flat_map(|n| n.finer_than.iter().map(move |m| (n.name.clone(), m.clone())))
        .collect();
    loop {
        let extra: Vec<(String, String)> = out
            .iter()
            .flat_map(|(a, b)| out.iter().filter(move |(c, _)| c == b).map(move |(_, d)| (a.clone(), d.clone())))
            .filter(|p| !out.contains(p))
            .collect();
        if extra.is_empty() {
            return out;
        }
        out.extend(extra);
    }
}

#[test]
fn edges_agree_with_coordinate_order() {
    let table = builtin_table();
    let closure = edge_closure(&table);
    for n in &table {
        for m in &table {
            let dominates = n.name != m.name && m.coordinate.leq(&n.coordinate);
            assert_eq!(
                dominates,
                closure.contains(&(n.name.clone(), m.name.clone())),
                "{} over {}",
                n.name,
                m.name
            );
        }
    }
}

#[test]
fn verdicts_respect_the_lattice() {
    let table = builtin_table();
    let closure = edge_closure(&table);
    let mut r = rng(61);
    for _ in 0..120 {
        let l = random_lts(&mut r, 5);
        let pairs = all_pairs(&l);
        let solved = solve_pairs(&l, GameVariant::Full, &pairs);
        for (p, q) in &pairs {
            let v = verdicts(solved.front(*p, &ProcessSet::singleton(*q)), &table);
            for (finer, coarser) in &closure {
                if v.get(finer).unwrap() {
                    assert!(v.get(coarser).unwrap(), "{finer} holds but {coarser} fails");
                }
            }
            if p == q {
                assert!(v.preordered.iter().all(|(_, b)| *b), "reflexivity fails at {}", l.process_name(*p));
            }
        }
    }
}

#[test]
fn different_actions_violate_everything() {
    let mut b = LtsBuilder::new();
    b.transition("A", "a", "0");
    b.transition("B", "b", "0");
    let l = b.build();
    let (a, bb) = (l.process("A").unwrap(), l.process("B").unwrap());
    let solved = solve_pairs(&l, GameVariant::Full, &[(a, bb), (bb, a)]);
    let table = builtin_table();
    for (x, y) in [(a, bb), (bb, a)] {
        let v = verdicts(solved.front(x, &ProcessSet::singleton(y)), &table);
        assert!(v.preordered.iter().all(|(_, b)| !b));
        let f = frontier(&v, &table);
        assert!(f.finest_preserved.is_empty());
        assert_eq!(f.coarsest_violated, ["weak-trace"]);
    }
}

#[test]
fn frontier_is_an_antichain() {
    let table = builtin_table();
    let closure = edge_closure(&table);
    let mut r = rng(62);
    for _ in 0..60 {
        let l = random_lts(&mut r, 4);
        let pairs = all_pairs(&l);
        let solved = solve_pairs(&l, GameVariant::Full, &pairs);
        for (p, q) in &pairs {
            let v = verdicts(solved.front(*p, &ProcessSet::singleton(*q)), &table);
            let f = frontier(&v, &table);
            for list in [&f.finest_preserved, &f.coarsest_violated] {
                for x in list {
                    for y in list {
                        assert!(!closure.contains(&(x.clone(), y.clone())), "{x} and {y} are comparable");
                    }
                }
            }
        }
    }
}

/// Without top-level negation the bisimulation preorders are not symmetric:
/// `τ.a` sits below `τ + τ.a` but not the other way round.
#[test]
fn bisimulation_preorders_can_be_one_sided() {
    let l = tau_choice();
    let (left, right) = (l.process("L").unwrap(), l.process("R").unwrap());
    let solved = solve_pairs(&l, GameVariant::Full, &[(left, right), (right, left)]);
    let table = builtin_table();
    let down = verdicts(solved.front(right, &ProcessSet::singleton(left)), &table);
    let up = verdicts(solved.front(left, &ProcessSet::singleton(right)), &table);
    assert_eq!(down.get("weak-bisimulation"), Some(true));
    assert_eq!(up.get("weak-bisimulation"), Some(false));
    assert_eq!(down.conjoin(&up).get("weak-bisimulation"), Some(false));
}
