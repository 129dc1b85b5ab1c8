#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectroscopy::ccs::{expand_lts, parse_ccs, DEFAULT_STATE_BOUND};
use spectroscopy::lts::{Lts, LtsBuilder, ProcId, ProcessSet};
use spectroscopy::spectroscopy::{GameVariant, SolvedGame, DEFAULT_MAX_POSITIONS};

pub const PHILOSOPHERS: &str = "
P_c = (pl.sp.aEats | pl.sp.bEats | 'pl | op.'sp) \\ {pl, sp}
P_p = (pl.op.sp.aEats | pl.op.sp.bEats | 'pl | 'sp) \\ {pl, sp}
";

pub const PHI_CP: &str = "<e><op><e>/\\{<e><aEats>T, <e><bEats>T}";

pub fn philosophers() -> Lts {
    expand_lts(&parse_ccs(PHILOSOPHERS).unwrap(), &["P_c", "P_p"], DEFAULT_STATE_BOUND).unwrap()
}

/// `τ + τ.a` as `L` and `τ.a` as `R`.
pub fn tau_choice() -> Lts {
    let mut b = LtsBuilder::new();
    b.transition("L", "tau", "0");
    b.transition("L", "tau", "A");
    b.transition("R", "tau", "A");
    b.transition("A", "a", "0");
    b.build()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random system over `tau`, `a`, `b` with up to `max_states` states.
/// Every process is named `S<k>`; isolated states are kept.
pub fn random_lts(r: &mut impl Rng, max_states: usize) -> Lts {
    let n = r.gen_range(1..=max_states);
    let density = r.gen_range(0.1..0.45);
    let mut b = LtsBuilder::new();
    for k in 0..n {
        b.process(&format!("S{k}"));
    }
    for s in 0..n {
        for a in ["tau", "a", "b"] {
            for t in 0..n {
                let p = if a == "tau" { density * 0.8 } else { density * 0.6 };
                if r.gen_bool(p) {
                    b.transition(&format!("S{s}"), a, &format!("S{t}"));
                }
            }
        }
    }
    b.build()
}

/// Every ordered pair of distinct processes plus each process against itself.
pub fn all_pairs(l: &Lts) -> Vec<(ProcId, ProcId)> {
    l.processes()
        .flat_map(|p| l.processes().map(move |q| (p, q)))
        .collect()
}

pub fn solve_pairs<'a>(l: &'a Lts, variant: GameVariant, pairs: &[(ProcId, ProcId)]) -> SolvedGame<'a> {
    let roots: Vec<(ProcId, ProcessSet)> = pairs
        .iter()
        .map(|(p, q)| (*p, ProcessSet::singleton(*q)))
        .collect();
    SolvedGame::new(l, variant, &roots, DEFAULT_MAX_POSITIONS).unwrap()
}

pub fn mask_of(set: &ProcessSet, n: usize) -> Vec<bool> {
    let mut m = vec![false; n];
    for p in set.iter() {
        m[p.index()] = true;
    }
    m
}
