//! Declining energy games and the attacker winning-budget solver.
//!
//! Games are explored eagerly from a set of roots into a [`GameGraph`]
//! with interned positions. [`solve`] computes, for every position, the
//! antichain of minimal attacker winning budgets as a least fixpoint.
//!
//! Every minimum the solver inserts is recorded in an append-only arena
//! together with the child minima it was derived from. Children are always
//! older than their parents, so following these derivations terminates,
//! which is what strategy extraction relies on.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use thiserror::Error;

use crate::energy::{BudgetFront, Energy, ExtendedEnergy, Update, UpdateEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("game graph exceeds {0} positions")]
    TooLarge(usize),
    #[error("move weight {0} is not declining")]
    NotDeclining(Update),
}

/// A game given by its successor relation.
pub trait Game {
    type Position: Clone + Eq + Hash + fmt::Debug;

    fn is_defender(&self, pos: &Self::Position) -> bool;

    /// Outgoing moves in a deterministic order.
    fn moves(&self, pos: &Self::Position) -> Vec<(Self::Position, Update)>;
}

/// The reachable part of a game with positions interned to indices.
#[derive(Clone, Debug)]
pub struct GameGraph<P> {
    positions: Vec<P>,
    index: HashMap<P, usize>,
    defender: Vec<bool>,
    moves: Vec<Vec<(usize, Update)>>,
    preds: Vec<Vec<usize>>,
}

impl<P: Clone + Eq + Hash + fmt::Debug> GameGraph<P> {
    /// Breadth-first exploration from `roots`, failing beyond `max_positions`.
    pub fn explore<G: Game<Position = P>>(
        game: &G,
        roots: &[P],
        max_positions: usize,
    ) -> Result<Self, GameError> {
        let mut g = GameGraph {
            positions: Vec::new(),
            index: HashMap::new(),
            defender: Vec::new(),
            moves: Vec::new(),
            preds: Vec::new(),
        };
        let mut queue = VecDeque::new();
        for r in roots {
            if let (i, true) = g.intern(r.clone(), game.is_defender(r), max_positions)? {
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let pos = g.positions[i].clone();
            let mut out = Vec::new();
            for (t, u) in game.moves(&pos) {
                check_declining(&u)?;
                let d = game.is_defender(&t);
                let (j, fresh) = g.intern(t, d, max_positions)?;
                if fresh {
                    queue.push_back(j);
                }
                out.push((j, u));
            }
            for &(j, _) in &out {
                if g.preds[j].last() != Some(&i) {
                    g.preds[j].push(i);
                }
            }
            g.moves[i] = out;
        }
        for p in &mut g.preds {
            p.sort_unstable();
            p.dedup();
        }
        Ok(g)
    }

    fn intern(&mut self, p: P, defender: bool, max: usize) -> Result<(usize, bool), GameError> {
        if let Some(&i) = self.index.get(&p) {
            return Ok((i, false));
        }
        if self.positions.len() >= max {
            return Err(GameError::TooLarge(max));
        }
        let i = self.positions.len();
        self.index.insert(p.clone(), i);
        self.positions.push(p);
        self.defender.push(defender);
        self.moves.push(Vec::new());
        self.preds.push(Vec::new());
        Ok((i, true))
    }

    pub fn index_of(&self, p: &P) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn position(&self, i: usize) -> &P {
        &self.positions[i]
    }

}

impl GameGraph<usize> {
    /// A hand-built game over positions `0..defender.len()`.
    pub fn from_edges(defender: &[bool], edges: &[(usize, usize, Update)]) -> Result<Self, GameError> {
        let n = defender.len();
        let mut moves = vec![Vec::new(); n];
        let mut preds = vec![Vec::new(); n];
        for &(s, t, u) in edges {
            check_declining(&u)?;
            moves[s].push((t, u));
            preds[t].push(s);
        }
        for p in &mut preds {
            p.sort_unstable();
            p.dedup();
        }
        Ok(GameGraph {
            positions: (0..n).collect(),
            index: (0..n).map(|i| (i, i)).collect(),
            defender: defender.to_vec(),
            moves,
            preds,
        })
    }
}

impl<P> GameGraph<P> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn is_defender(&self, i: usize) -> bool {
        self.defender[i]
    }

    pub fn moves(&self, i: usize) -> &[(usize, Update)] {
        &self.moves[i]
    }

    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.preds[i]
    }

    pub fn move_count(&self) -> usize {
        self.moves.iter().map(Vec::len).sum()
    }

    /// Renders one line per position: `kind | description | minima`.
    pub fn dump(&self, map: &WinMap, describe: impl Fn(&P) -> String) -> String {
        let mut out = String::new();
        for (i, p) in self.positions.iter().enumerate() {
            let kind = if self.defender[i] { "defender" } else { "attacker" };
            out.push_str(&format!("{kind} | {} | {}\n", describe(p), map.front(i)));
        }
        out
    }
}

fn check_declining(u: &Update) -> Result<(), GameError> {
    if u.entries()
        .iter()
        .any(|e| matches!(e, UpdateEntry::Relative(r) if *r > 0))
    {
        return Err(GameError::NotDeclining(*u));
    }
    Ok(())
}

pub type EntryId = usize;

/// How a minimum was derived.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    /// The attacker takes move `mv` and wins with the budget of `child`.
    Attacker { mv: usize, child: EntryId },
    /// One child budget per defender move, in move order.
    Defender { children: Vec<EntryId> },
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub position: usize,
    pub energy: Energy,
    pub derivation: Derivation,
}

/// Minimal attacker winning budgets for every explored position.
#[derive(Clone, Debug)]
pub struct WinMap {
    fronts: Vec<BudgetFront>,
    live: Vec<Vec<EntryId>>,
    arena: Vec<Entry>,
}

impl WinMap {
    pub fn front(&self, i: usize) -> &BudgetFront {
        &self.fronts[i]
    }

    pub fn wins(&self, i: usize, e: &Energy) -> bool {
        self.fronts[i].covers(e)
    }

    pub fn wins_extended(&self, i: usize, e: &ExtendedEnergy) -> bool {
        self.fronts[i].covers_extended(e)
    }

    pub fn entry(&self, id: EntryId) -> &Entry {
        &self.arena[id]
    }

    /// Entries currently forming the front of position `i`.
    pub fn live_entries(&self, i: usize) -> &[EntryId] {
        &self.live[i]
    }

    /// The first live minimum at `i` lying below `e`.
    pub fn witness(&self, i: usize, e: &ExtendedEnergy) -> Option<EntryId> {
        self.live[i]
            .iter()
            .copied()
            .filter(|&id| e.dominates(&self.arena[id].energy))
            .min_by(|&a, &b| self.arena[a].energy.cmp(&self.arena[b].energy))
    }

    /// A winning attacker move from `i` with budget `e`: the lowest move
    /// index whose residual energy still wins, and that residual.
    pub fn winning_move<P>(&self, g: &GameGraph<P>, i: usize, e: &Energy) -> Option<(usize, Energy)> {
        assert!(!g.is_defender(i), "winning_move asked at a defender position");
        g.moves(i).iter().enumerate().find_map(|(k, (t, u))| {
            u.apply(e)
                .filter(|r| self.wins(*t, r))
                .map(|r| (k, r))
        })
    }

    fn try_insert(&mut self, i: usize, energy: Energy, derivation: Derivation) -> bool {
        if !self.fronts[i].insert(energy) {
            return false;
        }
        let id = self.arena.len();
        self.arena.push(Entry {
            position: i,
            energy,
            derivation,
        });
        let arena = &self.arena;
        self.live[i].retain(|&old| !energy.leq(&arena[old].energy));
        self.live[i].push(id);
        true
    }
}

/// Least fixpoint of the attacker winning-budget rules over the whole graph.
pub fn solve<P>(g: &GameGraph<P>) -> WinMap {
    let n = g.len();
    let mut map = WinMap {
        fronts: vec![BudgetFront::new(); n],
        live: vec![Vec::new(); n],
        arena: Vec::new(),
    };
    let mut queued = vec![true; n];
    let mut work: VecDeque<usize> = (0..n).collect();
    while let Some(i) = work.pop_front() {
        queued[i] = false;
        let grew = if g.is_defender(i) {
            update_defender(g, &mut map, i)
        } else {
            update_attacker(g, &mut map, i)
        };
        if grew {
            for &p in g.predecessors(i) {
                if !queued[p] {
                    queued[p] = true;
                    work.push_back(p);
                }
            }
        }
    }
    map
}

fn update_attacker<P>(g: &GameGraph<P>, map: &mut WinMap, i: usize) -> bool {
    let mut grew = false;
    for (k, (t, u)) in g.moves(i).iter().enumerate() {
        let children = map.live[*t].clone();
        for c in children {
            let need = u.inverse(&map.arena[c].energy);
            grew |= map.try_insert(i, need, Derivation::Attacker { mv: k, child: c });
        }
    }
    grew
}

fn update_defender<P>(g: &GameGraph<P>, map: &mut WinMap, i: usize) -> bool {
    let moves = g.moves(i);
    if moves.iter().any(|(t, _)| map.live[*t].is_empty()) {
        return false;
    }
    // partial sup-combinations over a prefix of the moves, kept minimal
    let mut partial: Vec<(Energy, Vec<EntryId>)> = vec![(Energy::ZERO, Vec::new())];
    for (t, u) in moves {
        let mut next: Vec<(Energy, Vec<EntryId>)> = Vec::new();
        for (acc, ids) in &partial {
            for &c in &map.live[*t] {
                let e = acc.sup(&u.inverse(&map.arena[c].energy));
                if map.fronts[i].covers(&e) || next.iter().any(|(f, _)| f.leq(&e)) {
                    continue;
                }
                next.retain(|(f, _)| !e.leq(f));
                let mut ids = ids.clone();
                ids.push(c);
                next.push((e, ids));
            }
        }
        if next.is_empty() {
            return false;
        }
        partial = next;
    }
    partial.sort_by_key(|a| a.0);
    let mut grew = false;
    for (e, children) in partial {
        grew |= map.try_insert(i, e, Derivation::Defender { children });
    }
    grew
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(c: [u32; 8]) -> Energy {
        Energy::new(c)
    }

    #[test]
    fn single_step() {
        let g = GameGraph::from_edges(&[false, true], &[(0, 1, Update::decrement(&[1]))]).unwrap();
        let m = solve(&g);
        assert_eq!(m.front(0).minima(), &[e([1, 0, 0, 0, 0, 0, 0, 0])]);
        assert_eq!(m.front(1).minima(), &[Energy::ZERO]);
        assert!(m.wins(1, &Energy::ZERO));
        assert!(!m.wins(0, &Energy::ZERO));
    }

    #[test]
    fn stuck_attacker_loses() {
        let g = GameGraph::from_edges(&[false], &[]).unwrap();
        assert!(solve(&g).front(0).is_empty());
    }

    #[test]
    fn defender_needs_all_moves() {
        // defender 0 -> attacker 1 (needs ê1) and attacker 2 (needs ê2)
        let edges = [
            (0, 1, Update::ZERO),
            (0, 2, Update::ZERO),
            (1, 3, Update::decrement(&[1])),
            (2, 3, Update::decrement(&[2])),
        ];
        let g = GameGraph::from_edges(&[true, false, false, true], &edges).unwrap();
        let m = solve(&g);
        assert_eq!(m.front(0).minima(), &[e([1, 1, 0, 0, 0, 0, 0, 0])]);
    }

    #[test]
    fn zero_cycles_do_not_win() {
        let edges = [(0, 1, Update::ZERO), (1, 0, Update::ZERO)];
        let g = GameGraph::from_edges(&[false, false], &edges).unwrap();
        let m = solve(&g);
        assert!(m.front(0).is_empty() && m.front(1).is_empty());
    }

    #[test]
    fn winning_move_prefers_lowest_index() {
        let edges = [
            (0, 1, Update::decrement(&[2])),
            (0, 1, Update::decrement(&[1])),
            (0, 1, Update::ZERO),
        ];
        let g = GameGraph::from_edges(&[false, true], &edges).unwrap();
        let m = solve(&g);
        assert_eq!(m.front(0).minima(), &[Energy::ZERO]);
        let (k, r) = m.winning_move(&g, 0, &e([1, 1, 0, 0, 0, 0, 0, 0])).unwrap();
        assert_eq!(k, 0);
        assert_eq!(r, e([1, 0, 0, 0, 0, 0, 0, 0]));
        let (k, _) = m.winning_move(&g, 0, &Energy::ZERO).unwrap();
        assert_eq!(k, 2);
    }

    #[test]
    fn rejects_increasing_weights() {
        let mut entries = [UpdateEntry::Relative(0); 8];
        entries[0] = UpdateEntry::Relative(1);
        let u = Update(entries);
        assert_eq!(
            GameGraph::from_edges(&[false, true], &[(0, 1, u)]).unwrap_err(),
            GameError::NotDeclining(u)
        );
    }

    #[test]
    fn derivations_point_backwards() {
        let edges = [
            (0, 1, Update::decrement(&[1])),
            (1, 0, Update::ZERO),
            (1, 2, Update::decrement(&[3])),
            (0, 2, Update::decrement(&[1, 2])),
        ];
        let g = GameGraph::from_edges(&[false, false, true], &edges).unwrap();
        let m = solve(&g);
        for id in 0..m.arena.len() {
            match &m.entry(id).derivation {
                Derivation::Attacker { child, .. } => assert!(*child < id),
                Derivation::Defender { children } => assert!(children.iter().all(|c| *c < id)),
            }
        }
        assert_eq!(m.front(0).len(), 2);
    }
}
