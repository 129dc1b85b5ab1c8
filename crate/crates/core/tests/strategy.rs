//! Formula extraction and certificate checking.

mod common;

use spectroscopy::energy::{Energy, ExtendedEnergy};
use spectroscopy::hml::{parse_formula, Formula};
use spectroscopy::lts::ProcessSet;
use spectroscopy::oracle::{Oracle, BASE_CAP};
use spectroscopy::spectroscopy::GameVariant;
use spectroscopy::spectrum::builtin_table;
use spectroscopy::strategy::{check_certificate, extract, merge, Certificate, SIMPLIFIED_CAVEAT};

use common::{all_pairs, philosophers, random_lts, rng, solve_pairs, tau_choice, PHI_CP};

#[test]
fn tau_choice_certificate() {
    let l = tau_choice();
    let (left, right) = (l.process("L").unwrap(), l.process("R").unwrap());
    let solved = solve_pairs(&l, GameVariant::Full, &[(left, right)]);
    let q = ProcessSet::singleton(right);
    let budget: ExtendedEnergy = "(1,0,1,0,0,0,1,1)".parse().unwrap();
    let f = extract(&solved, left, &q, &budget).unwrap();
    assert_eq!(f.to_string(), "<e>/\\{~<e><a>T}");
    // unbounded, the cheapest minimum in lexicographic order wins
    let g = extract(&solved, left, &q, &ExtendedEnergy::INFINITE).unwrap();
    assert_eq!(g.to_string(), "<e>/\\{!t, ~<e><a>T}");
}

#[test]
fn philosophers_certificate() {
    let l = philosophers();
    let (pc, pp) = (l.process("P_c").unwrap(), l.process("P_p").unwrap());
    let solved = solve_pairs(&l, GameVariant::Full, &[(pc, pp)]);
    let q = ProcessSet::singleton(pp);
    let budget: Energy = "(2,0,1,0,0,1,0,0)".parse().unwrap();
    let f = extract(&solved, pc, &q, &budget.to_extended()).unwrap();
    assert_eq!(f, parse_formula(PHI_CP).unwrap());
}

#[test]
fn no_formula_below_the_front() {
    let l = tau_choice();
    let (left, right) = (l.process("L").unwrap(), l.process("R").unwrap());
    let solved = solve_pairs(&l, GameVariant::Full, &[(left, right)]);
    let q = ProcessSet::singleton(right);
    let weak_sim: ExtendedEnergy = "(∞,0,0,0,0,0,0,0)".parse().unwrap();
    assert_eq!(extract(&solved, left, &q, &weak_sim), None);
}

#[test]
fn tampered_certificates_are_rejected() {
    let l = tau_choice();
    let (left, right) = (l.process("L").unwrap(), l.process("R").unwrap());
    let solved = solve_pairs(&l, GameVariant::Full, &[(left, right)]);
    let q = ProcessSet::singleton(right);
    let budget = solved.front(left, &q).minima()[0];
    let good = Certificate::from_budget(&solved, left, &q, budget, &builtin_table()).unwrap();
    assert!(check_certificate(&good, &l));

    let mut trivial = good.clone();
    trivial.formula = Formula::True;
    assert!(!check_certificate(&trivial, &l));

    let mut swapped = good.clone();
    swapped.p = right;
    swapped.q = ProcessSet::singleton(left);
    assert!(!check_certificate(&swapped, &l));

    let mut cheap = good.clone();
    cheap.budget = Energy::ZERO;
    assert!(!check_certificate(&cheap, &l));
}

#[test]
fn every_minimum_yields_a_valid_certificate() {
    let mut r = rng(51);
    for _ in 0..80 {
        let l = random_lts(&mut r, 5);
        let pairs = all_pairs(&l);
        for variant in [GameVariant::Full, GameVariant::Simplified] {
            let solved = solve_pairs(&l, variant, &pairs);
            for (p, q) in &pairs {
                let qs = ProcessSet::singleton(*q);
                for e in solved.front(*p, &qs).iter() {
                    let c = Certificate::from_budget(&solved, *p, &qs, *e, &[]).unwrap();
                    assert!(check_certificate(&c, &l), "{variant}: {}", c.render(&l));
                    assert_eq!(c.caveat.is_some(), variant == GameVariant::Simplified);
                }
            }
        }
    }
}

/// Every distinguishing formula the brute-force search finds is paid for by
/// some attacker budget of the full game.
#[test]
fn game_covers_every_found_formula() {
    let mut r = rng(52);
    let cap = BASE_CAP.to_extended();
    for _ in 0..60 {
        let l = random_lts(&mut r, 4);
        let pairs = all_pairs(&l);
        let solved = solve_pairs(&l, GameVariant::Full, &pairs);
        let oracle = Oracle::build(&l, &cap).unwrap();
        for (p, q) in &pairs {
            let qs = ProcessSet::singleton(*q);
            for (price, f) in oracle.distinguishing(*p, &qs) {
                assert!(f.distinguishes(&l, *p, &qs), "{f}");
                assert_eq!(f.price(), price);
                assert!(solved.attacker_wins_finite(*p, &qs, &price), "{f} at {price}");
            }
        }
    }
}

#[test]
fn merge_cases() {
    let f = |s: &str| parse_formula(s).unwrap();
    assert_eq!(merge(vec![]), Formula::True);
    assert_eq!(merge(vec![Formula::True, Formula::True]), Formula::True);
    assert_eq!(merge(vec![f("<e><a>T"), Formula::True]), f("<e><a>T"));
    assert_eq!(merge(vec![f("<e><a>T"), f("<e><b>T")]), f("<e>/\\{<e><a>T, <e><b>T}"));
    assert_eq!(
        merge(vec![f("/\\{~<e><a>T}"), f("<e><b>T")]),
        f("/\\{~<e><a>T, <e><b>T}")
    );
}

#[test]
fn simplified_certificates_carry_the_caveat() {
    let l = tau_choice();
    let (left, right) = (l.process("L").unwrap(), l.process("R").unwrap());
    let solved = solve_pairs(&l, GameVariant::Simplified, &[(left, right)]);
    let q = ProcessSet::singleton(right);
    let budget = solved.front(left, &q).minima()[0];
    let c = Certificate::from_budget(&solved, left, &q, budget, &builtin_table()).unwrap();
    assert_eq!(c.caveat, Some(SIMPLIFIED_CAVEAT));
    assert!(c.render(&l).contains("caveat: "));
}
