//! CCS expansion against a separately written SOS enumerator, on random
//! guarded programs.

mod common;

use std::collections::{BTreeSet, HashSet};

use rand::Rng;

use spectroscopy::ccs::{expand_lts, parse_ccs, Act, CcsError, CcsProgram, Term};
use spectroscopy::lts::Lts;

use common::rng;

const DEFS: usize = 3;
const BOUND: usize = 60;

fn random_act(r: &mut impl Rng) -> Act {
    let chan = ["a", "b", "c"][r.gen_range(0..3)].to_string();
    match r.gen_range(0..5) {
        0 => Act::Tau,
        1 | 2 => Act::Name(chan),
        _ => Act::CoName(chan),
    }
}

/// `guarded` tells whether a definition reference is allowed here.
fn random_term(r: &mut impl Rng, depth: u32, guarded: bool) -> Term {
    let pick = if depth == 0 { r.gen_range(0..3) } else { r.gen_range(0..7) };
    match pick {
        0 => Term::Nil,
        1 if guarded => Term::Name(format!("X{}", r.gen_range(0..DEFS))),
        1 | 2 => Term::Prefix(random_act(r), Box::new(random_term(r, depth.saturating_sub(1), true))),
        3 => Term::Prefix(random_act(r), Box::new(random_term(r, depth - 1, true))),
        4 => Term::Choice(
            Box::new(random_term(r, depth - 1, guarded)),
            Box::new(random_term(r, depth - 1, guarded)),
        ),
        5 => Term::Parallel(
            Box::new(random_term(r, depth - 1, guarded)),
            Box::new(random_term(r, depth - 1, guarded)),
        ),
        _ => {
            let mut set: BTreeSet<String> = ["a", "b", "c"]
                .iter()
                .filter(|_| r.gen_bool(0.4))
                .map(|c| c.to_string())
                .collect();
            if set.is_empty() {
                set.insert("a".into());
            }
            Term::Restrict(Box::new(random_term(r, depth - 1, guarded)), set)
        }
    }
}

fn random_program(r: &mut impl Rng) -> String {
    (0..DEFS)
        .map(|k| format!("X{k} = {}\n", random_term(r, 3, false)))
        .collect()
}

fn co(a: &Act, b: &Act) -> bool {
    match (a, b) {
        (Act::Name(x), Act::CoName(y)) | (Act::CoName(x), Act::Name(y)) => x == y,
        _ => false,
    }
}

fn label(a: &Act) -> String {
    match a {
        Act::Tau => "tau".into(),
        Act::Name(c) => c.clone(),
        Act::CoName(c) => format!("'{c}"),
    }
}

/// Structural operational semantics, one rule per operator.
fn sos(prog: &CcsProgram, t: &Term) -> Vec<(Act, Term)> {
    match t {
        Term::Nil => vec![],
        Term::Prefix(a, k) => vec![(a.clone(), (**k).clone())],
        Term::Choice(x, y) => [sos(prog, x), sos(prog, y)].concat(),
        Term::Parallel(x, y) => {
            let (sx, sy) = (sos(prog, x), sos(prog, y));
            let mut out = Vec::new();
            for (a, x2) in &sx {
                out.push((a.clone(), Term::Parallel(Box::new(x2.clone()), y.clone())));
            }
            for (a, y2) in &sy {
                out.push((a.clone(), Term::Parallel(x.clone(), Box::new(y2.clone()))));
            }
            for (a, x2) in &sx {
                for (b, y2) in &sy {
                    if co(a, b) {
                        out.push((Act::Tau, Term::Parallel(Box::new(x2.clone()), Box::new(y2.clone()))));
                    }
                }
            }
            out
        }
        Term::Restrict(x, set) => sos(prog, x)
            .into_iter()
            .filter(|(a, _)| match a {
                Act::Tau => true,
                Act::Name(c) | Act::CoName(c) => !set.contains(c),
            })
            .map(|(a, x2)| (a, Term::Restrict(Box::new(x2), set.clone())))
            .collect(),
        Term::Name(n) => sos(prog, prog.get(n).unwrap()),
    }
}

type Edges = BTreeSet<(String, String, String)>;

/// Reachable states and transitions, or `None` beyond `BOUND` states.
fn reference(prog: &CcsProgram, root: &str) -> Option<(BTreeSet<String>, Edges)> {
    let start = Term::Name(root.to_string());
    let mut seen: HashSet<Term> = HashSet::from([start.clone()]);
    let mut stack = vec![start];
    let mut edges = Edges::new();
    while let Some(t) = stack.pop() {
        for (a, t2) in sos(prog, &t) {
            edges.insert((t.to_string(), label(&a), t2.to_string()));
            if seen.insert(t2.clone()) {
                if seen.len() > BOUND {
                    return None;
                }
                stack.push(t2);
            }
        }
    }
    Some((seen.iter().map(Term::to_string).collect(), edges))
}

fn observed(l: &Lts) -> (BTreeSet<String>, Edges) {
    let states = l.processes().map(|p| l.process_name(p).to_string()).collect();
    let edges = l
        .all_transitions()
        .map(|(s, a, t)| {
            (
                l.process_name(s).to_string(),
                l.action_name(a).to_string(),
                l.process_name(t).to_string(),
            )
        })
        .collect();
    (states, edges)
}

#[test]
fn expansion_matches_reference_semantics() {
    let mut r = rng(21);
    let mut compared = 0;
    for round in 0..300 {
        let text = random_program(&mut r);
        let prog = parse_ccs(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        for k in 0..DEFS {
            let root = format!("X{k}");
            match (reference(&prog, &root), expand_lts(&prog, &[&root], BOUND)) {
                (Some(want), Ok(l)) => {
                    assert_eq!(observed(&l), want, "round {round}, root {root}\n{text}");
                    compared += 1;
                }
                (None, Err(CcsError::BoundExceeded(_))) => {}
                (want, got) => panic!(
                    "round {round}, root {root}: reference bounded {}, expansion {:?}\n{text}",
                    want.is_some(),
                    got.map(|l| l.num_processes())
                ),
            }
        }
    }
    assert!(compared > 300, "only {compared} comparisons");
}

#[test]
fn printed_terms_parse_back() {
    let mut r = rng(22);
    for _ in 0..300 {
        let text = random_program(&mut r);
        let prog = parse_ccs(&text).unwrap();
        let printed: String = prog.definitions().map(|(n, t)| format!("{n} = {t}\n")).collect();
        let again = parse_ccs(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(prog, again);
    }
}

fn rename_channel(t: &Term, from: &str, to: &str) -> Term {
    let act = |a: &Act| match a {
        Act::Name(c) if c == from => Act::Name(to.into()),
        Act::CoName(c) if c == from => Act::CoName(to.into()),
        other => other.clone(),
    };
    let rec = |x: &Term| Box::new(rename_channel(x, from, to));
    match t {
        Term::Nil | Term::Name(_) => t.clone(),
        Term::Prefix(a, k) => Term::Prefix(act(a), rec(k)),
        Term::Choice(x, y) => Term::Choice(rec(x), rec(y)),
        Term::Parallel(x, y) => Term::Parallel(rec(x), rec(y)),
        Term::Restrict(x, set) => Term::Restrict(
            rec(x),
            set.iter().map(|c| if c == from { to.to_string() } else { c.clone() }).collect(),
        ),
    }
}

/// Renaming a channel to a fresh one everywhere only renames labels.
#[test]
fn channel_renaming_preserves_shape() {
    let mut r = rng(23);
    for _ in 0..200 {
        let prog = parse_ccs(&random_program(&mut r)).unwrap();
        let renamed_text: String = prog
            .definitions()
            .map(|(n, t)| format!("{n} = {}\n", rename_channel(t, "a", "fresh")))
            .collect();
        let renamed = parse_ccs(&renamed_text).unwrap();
        let (Ok(l), Ok(m)) = (expand_lts(&prog, &["X0"], BOUND), expand_lts(&renamed, &["X0"], BOUND)) else {
            continue;
        };
        assert_eq!(l.num_processes(), m.num_processes());
        let labels = |l: &Lts, p| {
            let mut v: Vec<String> = l.transitions(p).iter().map(|(a, _)| l.action_name(*a).to_string()).collect();
            v.sort();
            v
        };
        // Breadth-first numbering makes the states line up one to one.
        for (p, q) in l.processes().zip(m.processes()) {
            let expected: Vec<String> = labels(&l, p)
                .into_iter()
                .map(|a| match a.as_str() {
                    "a" => "fresh".to_string(),
                    "'a" => "'fresh".to_string(),
                    _ => a,
                })
                .collect();
            let mut expected = expected;
            expected.sort();
            assert_eq!(expected, labels(&m, q));
        }
    }
}

#[test]
fn unguarded_recursion_is_reported() {
    let prog = parse_ccs("X = a.X + X\n").unwrap();
    assert!(matches!(expand_lts(&prog, &["X"], BOUND), Err(CcsError::UnguardedRecursion(_))));
}

#[test]
fn communication_under_restriction_becomes_silent() {
    let prog = parse_ccs("P = (a.b | 'a) \\ {a}\n").unwrap();
    let l = expand_lts(&prog, &["P"], BOUND).unwrap();
    let p = l.process("P").unwrap();
    let acts: Vec<&str> = l.transitions(p).iter().map(|(a, _)| l.action_name(*a)).collect();
    assert_eq!(acts, ["tau"]);
}

