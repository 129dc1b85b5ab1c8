//! Brute-force distinguishing-formula search, independent of the games.
//!
//! Formulas are built bottom-up over denotations: for every set of
//! processes (as a bitmask) and every stratum, we keep the minimal prices of
//! formulas denoting exactly that set, each with one witness. Prices only
//! grow under the formula constructors, so anything above the cap can be
//! dropped, and a dominated entry can never lead to a cheaper formula than
//! the entry dominating it. The search runs to a fixpoint.

use thiserror::Error;

use crate::energy::{BudgetFront, Coord, Energy, ExtendedEnergy, DIMS};
use crate::hml::{price, price_clause, price_eps, Chi, Clause, Formula};
use crate::lts::{ActionId, Lts, ProcId, ProcessSet};

/// Largest system the oracle accepts.
pub const MAX_ORACLE_STATES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("oracle refuses systems with more than {limit} states (got {states})")]
pub struct OracleTooLarge {
    pub states: usize,
    pub limit: usize,
}

type Mask = u32;

struct Table<W> {
    by_mask: Vec<Vec<(Energy, W)>>,
}

impl<W: Clone> Table<W> {
    fn new(n: usize) -> Self {
        Table {
            by_mask: vec![Vec::new(); 1 << n],
        }
    }

    fn insert(&mut self, mask: Mask, e: Energy, w: impl FnOnce() -> W) -> bool {
        let front = &mut self.by_mask[mask as usize];
        if front.iter().any(|(f, _)| f.leq(&e)) {
            return false;
        }
        front.retain(|(f, _)| !e.leq(f));
        front.push((e, w()));
        true
    }

    fn entries(&self) -> impl Iterator<Item = (Mask, &Energy, &W)> + '_ {
        self.by_mask
            .iter()
            .enumerate()
            .flat_map(|(m, v)| v.iter().map(move |(e, w)| (m as Mask, e, w)))
    }

    fn snapshot(&self) -> Vec<(Mask, Energy, W)> {
        self.entries().map(|(m, e, w)| (m, *e, w.clone())).collect()
    }
}

struct Sem<'a> {
    lts: &'a Lts,
    stable: Mask,
    closure: Vec<Mask>,
}

impl Sem<'_> {
    fn pre_closure(&self, m: Mask) -> Mask {
        (0..self.closure.len())
            .filter(|&p| self.closure[p] & m != 0)
            .fold(0, |acc, p| acc | 1 << p)
    }

    fn pre_image(&self, a: ActionId, m: Mask) -> Mask {
        self.lts
            .all_transitions()
            .filter(|&(_, b, t)| b == a && m & (1 << t.index()) != 0)
            .fold(0, |acc, (s, _, _)| acc | 1 << s.index())
    }

    fn soft_pre_image(&self, a: ActionId, m: Mask) -> Mask {
        let pre = self.pre_image(a, m);
        if a.is_tau() {
            pre | m
        } else {
            pre
        }
    }
}

/// Minimal-price formulas of every stratum, per denotation.
pub struct Oracle {
    phi: Table<Formula>,
}

impl Oracle {
    /// Runs the search on `l`, keeping only formulas priced within `cap`.
    pub fn build(l: &Lts, cap: &ExtendedEnergy) -> Result<Oracle, OracleTooLarge> {
        Self::build_with_limit(l, cap, MAX_ORACLE_STATES)
    }

    /// Like [`Oracle::build`] with a different state limit (at most 24).
    /// Memory and time grow with `2^states`; a tight cap keeps it usable.
    pub fn build_with_limit(l: &Lts, cap: &ExtendedEnergy, limit: usize) -> Result<Oracle, OracleTooLarge> {
        let n = l.num_processes();
        let limit = limit.min(24);
        if n > limit {
            return Err(OracleTooLarge { states: n, limit });
        }
        let all: Mask = if n == 0 { 0 } else { (1 << n) - 1 };
        let to_mask = |s: &ProcessSet| s.iter().fold(0, |acc, p| acc | 1 << p.index());
        let sem = Sem {
            lts: l,
            stable: l.processes().filter(|p| l.is_stable(*p)).fold(0, |acc, p| acc | 1 << p.index()),
            closure: l.processes().map(|p| to_mask(l.closure_of(p))).collect(),
        };
        let fits = |e: &Energy| cap.dominates(e);

        let mut phi: Table<Formula> = Table::new(n);
        let mut chi: Table<Chi> = Table::new(n);
        let mut clause: Table<Clause> = Table::new(n);
        phi.insert(all, Energy::ZERO, || Formula::True);
        chi.insert(all, Energy::ZERO, || Chi::Conj(Vec::new()));

        let visible: Vec<ActionId> = l.visible_actions().collect();
        let actions: Vec<ActionId> = l.actions().collect();
        loop {
            let mut changed = false;

            for (m, _, c) in chi.snapshot() {
                let pos = Clause::Pos(c.clone());
                let e = price_clause(&pos);
                let pm = sem.pre_closure(m);
                if fits(&e) {
                    changed |= clause.insert(pm, e, || pos);
                }
                let neg = Clause::Neg(c);
                let e = price_clause(&neg);
                if fits(&e) {
                    changed |= clause.insert(all & !pm, e, || neg);
                }
            }

            // nonempty conjunctions of clauses, by denotation and sup-price
            let mut conj: Table<Vec<Clause>> = Table::new(n);
            for (m, e, c) in clause.snapshot() {
                for (m2, e2, cs) in conj.snapshot() {
                    let sup = e.sup(&e2);
                    if fits(&sup) {
                        conj.insert(m & m2, sup, || {
                            let mut cs = cs.clone();
                            cs.push(c.clone());
                            cs
                        });
                    }
                }
                conj.insert(m, e, || vec![c.clone()]);
            }
            let conj = conj.snapshot();

            for (m, _, cs) in &conj {
                let candidates = [
                    (*m, Chi::conj(cs.clone())),
                    (*m & sem.stable, Chi::stable_conj(cs.clone())),
                ];
                for (mask, c) in candidates {
                    let e = price_eps(&c);
                    if fits(&e) {
                        changed |= chi.insert(mask, e, || c);
                    }
                }
                let f = Formula::conj(cs.clone());
                let e = price(&f);
                if fits(&e) {
                    changed |= phi.insert(*m, e, || f);
                }
            }
            let stable_only = Chi::stable_conj(Vec::new());
            changed |= fits(&price_eps(&stable_only)) && chi.insert(sem.stable, price_eps(&stable_only), || stable_only);

            for (m, _, f) in phi.snapshot() {
                for &a in &actions {
                    let head = sem.soft_pre_image(a, m);
                    let name = l.action_name(a);
                    let c = Chi::branch_conj(name, f.clone(), Vec::new());
                    let e = price_eps(&c);
                    if fits(&e) {
                        changed |= chi.insert(head, e, || c);
                    }
                    for (m2, _, cs) in &conj {
                        let c = Chi::branch_conj(name, f.clone(), cs.clone());
                        let e = price_eps(&c);
                        if fits(&e) {
                            changed |= chi.insert(head & m2, e, || c);
                        }
                    }
                }
                for &a in &visible {
                    let c = Chi::obs(l.action_name(a), f.clone());
                    let e = price_eps(&c);
                    if fits(&e) {
                        changed |= chi.insert(sem.pre_image(a, m), e, || c);
                    }
                }
            }

            for (m, e, c) in chi.snapshot() {
                changed |= phi.insert(sem.pre_closure(m), e, || Formula::delay(c));
            }

            if !changed {
                return Ok(Oracle { phi });
            }
        }
    }

    /// Pareto-minimal formulas distinguishing `p` from `q`, with prices.
    pub fn distinguishing(&self, p: ProcId, q: &ProcessSet) -> Vec<(Energy, &Formula)> {
        let qmask: Mask = q.iter().fold(0, |acc, r| acc | 1 << r.index());
        let mut out: Vec<(Energy, &Formula)> = self
            .phi
            .entries()
            .filter(|(m, _, _)| m & (1 << p.index()) != 0 && m & qmask == 0)
            .map(|(_, e, f)| (*e, f))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.to_string().cmp(&b.1.to_string())));
        out
    }

    /// Minimal prices of formulas distinguishing `p` from `q`.
    pub fn front(&self, p: ProcId, q: &ProcessSet) -> BudgetFront {
        BudgetFront::from_energies(self.distinguishing(p, q).into_iter().map(|(e, _)| e))
    }

    /// True iff some formula priced within `e` distinguishes `p` from `q`.
    pub fn finds(&self, p: ProcId, q: &ProcessSet, e: &ExtendedEnergy) -> bool {
        self.distinguishing(p, q).iter().any(|(price, _)| e.dominates(price))
    }
}

/// Distinguishing formulas for `p` against `q` priced within `cap`.
pub fn enumerate_oracle(
    l: &Lts,
    p: ProcId,
    q: &ProcessSet,
    cap: &ExtendedEnergy,
) -> Result<Vec<Formula>, OracleTooLarge> {
    let oracle = Oracle::build(l, cap)?;
    Ok(oracle
        .distinguishing(p, q)
        .into_iter()
        .map(|(_, f)| f.clone())
        .collect())
}

/// Default search cap for cross-checks.
pub const BASE_CAP: Energy = Energy::new([3, 2, 3, 2, 2, 3, 3, 3]);

/// A cap wide enough for the given game fronts: the componentwise maximum
/// of [`BASE_CAP`] and every front minimum.
pub fn cap_for<'a>(fronts: impl IntoIterator<Item = &'a BudgetFront>) -> ExtendedEnergy {
    let mut cap = BASE_CAP;
    for f in fronts {
        for e in f.iter() {
            cap = cap.sup(e);
        }
    }
    cap.to_extended()
}

/// Check grid: at most three dimensions range over `{0, 1, 2, ∞}` while
/// the others sit at a common background of `0` or `∞`. Sorted, no repeats.
pub fn grid() -> Vec<ExtendedEnergy> {
    let values = [Coord::Finite(0), Coord::Finite(1), Coord::Finite(2), Coord::Infinite];
    let mut out = std::collections::BTreeSet::new();
    for background in [Coord::Finite(0), Coord::Infinite] {
        for mask in 0u32..(1 << DIMS) {
            let dims: Vec<usize> = (0..DIMS).filter(|d| mask & (1 << d) != 0).collect();
            if dims.len() > 3 {
                continue;
            }
            for k in 0..values.len().pow(dims.len() as u32) {
                let mut e = [background; DIMS];
                let mut rest = k;
                for &d in &dims {
                    e[d] = values[rest % values.len()];
                    rest /= values.len();
                }
                out.insert(e);
            }
        }
    }
    out.into_iter().map(ExtendedEnergy).collect()
}

/// Grid points where the game front and the oracle front disagree.
pub fn mismatches(game: &BudgetFront, oracle: &BudgetFront, grid: &[ExtendedEnergy]) -> Vec<ExtendedEnergy> {
    grid.iter()
        .filter(|e| game.covers_extended(e) != oracle.covers_extended(e))
        .copied()
        .collect()
}
