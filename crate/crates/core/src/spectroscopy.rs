//! The spectroscopy energy games over an [`Lts`].
//!
//! Four variants are layered: the delay game, the stability game on top of
//! it, and on top of that either the full branching layer or the simplified
//! branching layer. Positions are explored from roots `(p, Q)_a` and solved
//! together, so one solve answers every root at once.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::energy::{Energy, ExtendedEnergy, Update};
use crate::game::{solve, Game, GameError, GameGraph, WinMap};
use crate::lts::{ActionId, Lts, ProcId, ProcessSet};

/// Default cap on explored game positions.
pub const DEFAULT_MAX_POSITIONS: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum GameVariant {
    Delay,
    Stability,
    #[default]
    Full,
    Simplified,
}

impl GameVariant {
    pub const ALL: [GameVariant; 4] = [
        GameVariant::Delay,
        GameVariant::Stability,
        GameVariant::Full,
        GameVariant::Simplified,
    ];

    fn has_stability(self) -> bool {
        self != GameVariant::Delay
    }
}

impl fmt::Display for GameVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameVariant::Delay => "delay",
            GameVariant::Stability => "stability",
            GameVariant::Full => "full",
            GameVariant::Simplified => "simplified",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown game variant `{0}` (expected full, simplified, delay or stability)")]
pub struct UnknownVariant(pub String);

impl FromStr for GameVariant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delay" => Ok(GameVariant::Delay),
            "stability" => Ok(GameVariant::Stability),
            "full" => Ok(GameVariant::Full),
            "simplified" => Ok(GameVariant::Simplified),
            other => Err(UnknownVariant(other.to_string())),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SpectroPosition {
    /// `(p, Q)_a`
    AttackerImmediate(ProcId, ProcessSet),
    /// `(p, Q)^ε_a`, with `Q` closed under ↠.
    AttackerDelayed(ProcId, ProcessSet),
    /// `(p, q)^∧_a`
    AttackerClause(ProcId, ProcId),
    /// `(p, Q)_d`
    DefenderConj(ProcId, ProcessSet),
    /// `(p, Q)^s_d`
    DefenderStable(ProcId, ProcessSet),
    /// `(p, α, p', Q \ Q_α, Q_α)^η_d`; `q` already excludes `q_alpha`.
    DefenderBranch {
        p: ProcId,
        action: ActionId,
        target: ProcId,
        q: ProcessSet,
        q_alpha: ProcessSet,
    },
    /// `(p, Q)^η_a`
    AttackerBranch(ProcId, ProcessSet),
    /// `(p, α, p', Q)^η_d` of the simplified game.
    DefenderBranchSimple {
        p: ProcId,
        action: ActionId,
        target: ProcId,
        q: ProcessSet,
    },
    /// `(p, α, p', q)^η_a` of the simplified game.
    AttackerBranchClause {
        p: ProcId,
        action: ActionId,
        target: ProcId,
        q: ProcId,
    },
}

impl SpectroPosition {
    pub fn is_defender(&self) -> bool {
        matches!(
            self,
            SpectroPosition::DefenderConj(..)
                | SpectroPosition::DefenderStable(..)
                | SpectroPosition::DefenderBranch { .. }
                | SpectroPosition::DefenderBranchSimple { .. }
        )
    }

    /// Renders with process and action names, e.g. `(p,{q1,q2})_a^eps`.
    pub fn describe(&self, l: &Lts) -> String {
        let n = |p: &ProcId| l.process_name(*p).to_string();
        let set = |s: &ProcessSet| {
            let names: Vec<&str> = s.iter().map(|p| l.process_name(p)).collect();
            format!("{{{}}}", names.join(","))
        };
        let a = |a: &ActionId| l.action_name(*a).to_string();
        match self {
            SpectroPosition::AttackerImmediate(p, q) => format!("({},{})_a", n(p), set(q)),
            SpectroPosition::AttackerDelayed(p, q) => format!("({},{})_a^eps", n(p), set(q)),
            SpectroPosition::AttackerClause(p, q) => format!("({},{})_a^and", n(p), n(q)),
            SpectroPosition::DefenderConj(p, q) => format!("({},{})_d", n(p), set(q)),
            SpectroPosition::DefenderStable(p, q) => format!("({},{})_d^s", n(p), set(q)),
            SpectroPosition::DefenderBranch {
                p,
                action,
                target,
                q,
                q_alpha,
            } => format!(
                "({},{},{},{},{})_d^eta",
                n(p),
                a(action),
                n(target),
                set(q),
                set(q_alpha)
            ),
            SpectroPosition::AttackerBranch(p, q) => format!("({},{})_a^eta", n(p), set(q)),
            SpectroPosition::DefenderBranchSimple {
                p,
                action,
                target,
                q,
            } => format!("({},{},{},{})_d^eta", n(p), a(action), n(target), set(q)),
            SpectroPosition::AttackerBranchClause {
                p,
                action,
                target,
                q,
            } => format!("({},{},{},{})_a^eta", n(p), a(action), n(target), n(q)),
        }
    }
}

/// The rule a move instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Delay,
    Procrastination,
    Observation(ActionId),
    Finishing,
    EarlyConj,
    LateConj,
    ConjAnswer,
    PositiveClause,
    NegativeClause,
    LateStableConj,
    StableAnswer,
    BranchConj(ActionId),
    BranchAnswer,
    BranchObservation,
    BranchAccounting,
    BranchReset,
    EarlyBranchAccounting,
    EarlyBranchFinishing,
    LateBranchAccounting,
}

fn min_select(dim: usize, other: usize) -> Update {
    Update::ZERO.with_min_select(dim, &[dim, other])
}

#[derive(Clone, Copy)]
pub struct SpectroscopyGame<'a> {
    lts: &'a Lts,
    variant: GameVariant,
}

impl<'a> SpectroscopyGame<'a> {
    pub fn new(lts: &'a Lts, variant: GameVariant) -> Self {
        SpectroscopyGame { lts, variant }
    }

    pub fn lts(&self) -> &'a Lts {
        self.lts
    }

    pub fn variant(&self) -> GameVariant {
        self.variant
    }

    /// Moves with their rule names, in the order the solver sees them.
    pub fn labeled_moves(&self, pos: &SpectroPosition) -> Vec<(SpectroPosition, Update, MoveKind)> {
        use SpectroPosition::*;
        let l = self.lts;
        let mut out = Vec::new();
        match pos {
            AttackerImmediate(p, q) => {
                out.push((AttackerDelayed(*p, l.tau_closure(q)), Update::ZERO, MoveKind::Delay));
                if q.is_empty() {
                    out.push((DefenderConj(*p, q.clone()), Update::ZERO, MoveKind::Finishing));
                } else {
                    out.push((
                        DefenderConj(*p, q.clone()),
                        Update::decrement(&[5]),
                        MoveKind::EarlyConj,
                    ));
                }
            }
            AttackerDelayed(p, q) => {
                for &(a, p2) in l.transitions(*p) {
                    if a.is_tau() && p2 != *p {
                        out.push((
                            AttackerDelayed(p2, q.clone()),
                            Update::ZERO,
                            MoveKind::Procrastination,
                        ));
                    }
                }
                for &(a, p2) in l.transitions(*p) {
                    if !a.is_tau() {
                        out.push((
                            AttackerImmediate(p2, l.step_image(q, a)),
                            Update::decrement(&[1]),
                            MoveKind::Observation(a),
                        ));
                    }
                }
                out.push((DefenderConj(*p, q.clone()), Update::ZERO, MoveKind::LateConj));
                if self.variant.has_stability() && l.is_stable(*p) {
                    let stable: ProcessSet = q.iter().filter(|r| l.is_stable(*r)).collect();
                    // ê4 is paid here rather than on each answer, so that a
                    // stable conjunction without clauses still costs it.
                    out.push((DefenderStable(*p, stable), Update::decrement(&[4]), MoveKind::LateStableConj));
                }
                match self.variant {
                    GameVariant::Full => {
                        for &(a, p2) in l.transitions(*p) {
                            for q_alpha in q.nonempty_subsets() {
                                out.push((
                                    DefenderBranch {
                                        p: *p,
                                        action: a,
                                        target: p2,
                                        q: q.difference(&q_alpha),
                                        q_alpha,
                                    },
                                    Update::ZERO,
                                    MoveKind::BranchConj(a),
                                ));
                            }
                        }
                    }
                    GameVariant::Simplified if !q.is_empty() => {
                        for &(a, p2) in l.transitions(*p) {
                            out.push((
                                DefenderBranchSimple {
                                    p: *p,
                                    action: a,
                                    target: p2,
                                    q: q.clone(),
                                },
                                Update::ZERO,
                                MoveKind::BranchConj(a),
                            ));
                        }
                    }
                    _ => {}
                }
            }
            AttackerClause(p, q) => {
                out.push((
                    AttackerDelayed(*p, l.closure_of(*q).clone()),
                    min_select(1, 6),
                    MoveKind::PositiveClause,
                ));
                if p != q {
                    out.push((
                        AttackerDelayed(*q, l.closure_of(*p).clone()),
                        Update::decrement(&[8]).with_min_select(1, &[1, 7]),
                        MoveKind::NegativeClause,
                    ));
                }
            }
            DefenderConj(p, q) => {
                for r in q.iter() {
                    out.push((AttackerClause(*p, r), Update::decrement(&[3]), MoveKind::ConjAnswer));
                }
            }
            DefenderStable(p, q) => {
                for r in q.iter() {
                    out.push((AttackerClause(*p, r), Update::ZERO, MoveKind::StableAnswer));
                }
            }
            DefenderBranch {
                p,
                action,
                target,
                q,
                q_alpha,
            } => {
                for r in q.iter() {
                    out.push((
                        AttackerClause(*p, r),
                        Update::decrement(&[2, 3]),
                        MoveKind::BranchAnswer,
                    ));
                }
                out.push((
                    AttackerBranch(*target, l.soft_step_image(q_alpha, *action)),
                    Update::decrement(&[2, 3]).with_min_select(1, &[1, 6]),
                    MoveKind::BranchObservation,
                ));
            }
            AttackerBranch(p, q) => match self.variant {
                GameVariant::Simplified => {
                    if q.is_empty() {
                        out.push((
                            DefenderConj(*p, q.clone()),
                            Update::decrement(&[1]),
                            MoveKind::EarlyBranchFinishing,
                        ));
                    } else {
                        out.push((
                            DefenderConj(*p, q.clone()),
                            Update::decrement(&[1, 5]),
                            MoveKind::EarlyBranchAccounting,
                        ));
                    }
                    out.push((
                        AttackerDelayed(*p, l.tau_closure(q)),
                        Update::decrement(&[1, 3]),
                        MoveKind::LateBranchAccounting,
                    ));
                }
                _ => out.push((
                    AttackerImmediate(*p, q.clone()),
                    Update::decrement(&[1]),
                    MoveKind::BranchAccounting,
                )),
            },
            DefenderBranchSimple {
                p,
                action,
                target,
                q,
            } => {
                for r in q.iter() {
                    out.push((
                        AttackerBranchClause {
                            p: *p,
                            action: *action,
                            target: *target,
                            q: r,
                        },
                        Update::decrement(&[2, 3]),
                        MoveKind::BranchAnswer,
                    ));
                }
            }
            AttackerBranchClause {
                p,
                action,
                target,
                q,
            } => {
                out.push((
                    AttackerBranch(*target, l.soft_step_image(&ProcessSet::singleton(*q), *action)),
                    min_select(1, 6),
                    MoveKind::BranchObservation,
                ));
                out.push((AttackerClause(*p, *q), Update::ZERO, MoveKind::BranchReset));
            }
        }
        out
    }
}

impl Game for SpectroscopyGame<'_> {
    type Position = SpectroPosition;

    fn is_defender(&self, pos: &SpectroPosition) -> bool {
        pos.is_defender()
    }

    fn moves(&self, pos: &SpectroPosition) -> Vec<(SpectroPosition, Update)> {
        self.labeled_moves(pos)
            .into_iter()
            .map(|(t, u, _)| (t, u))
            .collect()
    }
}

/// A solved spectroscopy game: the explored graph plus its budgets.
pub struct SolvedGame<'a> {
    pub game: SpectroscopyGame<'a>,
    pub graph: GameGraph<SpectroPosition>,
    pub map: WinMap,
}

impl<'a> SolvedGame<'a> {
    /// Explores from every `(p, Q)_a` in `roots` and solves once.
    pub fn new(
        lts: &'a Lts,
        variant: GameVariant,
        roots: &[(ProcId, ProcessSet)],
        max_positions: usize,
    ) -> Result<Self, GameError> {
        let game = SpectroscopyGame::new(lts, variant);
        let roots: Vec<SpectroPosition> = roots
            .iter()
            .map(|(p, q)| SpectroPosition::AttackerImmediate(*p, q.clone()))
            .collect();
        let graph = GameGraph::explore(&game, &roots, max_positions)?;
        let map = solve(&graph);
        Ok(SolvedGame { game, graph, map })
    }

    pub fn lts(&self) -> &'a Lts {
        self.game.lts()
    }

    pub fn index(&self, pos: &SpectroPosition) -> Option<usize> {
        self.graph.index_of(pos)
    }

    fn root(&self, p: ProcId, q: &ProcessSet) -> usize {
        self.index(&SpectroPosition::AttackerImmediate(p, q.clone()))
            .expect("root was not explored")
    }

    /// Minimal attacker budgets at `(p, Q)_a`.
    pub fn front(&self, p: ProcId, q: &ProcessSet) -> &crate::energy::BudgetFront {
        self.map.front(self.root(p, q))
    }

    pub fn attacker_wins(&self, p: ProcId, q: &ProcessSet, e: &ExtendedEnergy) -> bool {
        self.map.wins_extended(self.root(p, q), e)
    }

    pub fn attacker_wins_finite(&self, p: ProcId, q: &ProcessSet, e: &Energy) -> bool {
        self.map.wins(self.root(p, q), e)
    }

    pub fn dump(&self) -> String {
        self.graph.dump(&self.map, |p| p.describe(self.lts()))
    }
}
