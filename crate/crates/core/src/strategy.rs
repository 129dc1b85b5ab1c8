//! Distinguishing formulas from attacker winning budgets, and certificates.
//!
//! Extraction follows the derivations recorded by the solver (see
//! [`crate::game`]) instead of re-searching for winning moves, so it always
//! terminates, even in the presence of zero-weight cycles.

use std::fmt;

use crate::energy::{Energy, ExtendedEnergy};
use crate::game::{Derivation, EntryId};
use crate::hml::{price, Chi, Clause, Formula};
use crate::lts::{Lts, ProcId, ProcessSet};
use crate::spectroscopy::{GameVariant, MoveKind, SolvedGame, SpectroPosition};

/// Warning attached to formulas extracted from the simplified game.
pub const SIMPLIFIED_CAVEAT: &str =
    "simplified game: conjunction counting may exceed the formula price bound";

/// A strategy formula of the stratum matching its position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategyFormula {
    Phi(Formula),
    Chi(Chi),
    Clause(Clause),
}

impl fmt::Display for StrategyFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyFormula::Phi(x) => write!(f, "{x}"),
            StrategyFormula::Chi(x) => write!(f, "{x}"),
            StrategyFormula::Clause(x) => write!(f, "{x}"),
        }
    }
}

struct Extractor<'s, 'a> {
    solved: &'s SolvedGame<'a>,
}

impl Extractor<'_, '_> {
    fn pos(&self, id: EntryId) -> &SpectroPosition {
        self.solved.graph.position(self.solved.map.entry(id).position)
    }

    fn kind_of(&self, id: EntryId, mv: usize) -> MoveKind {
        self.solved.game.labeled_moves(self.pos(id))[mv].2
    }

    fn attacker_step(&self, id: EntryId) -> (MoveKind, EntryId) {
        match &self.solved.map.entry(id).derivation {
            Derivation::Attacker { mv, child } => (self.kind_of(id, *mv), *child),
            Derivation::Defender { .. } => unreachable!("attacker entry with defender derivation"),
        }
    }

    fn defender_children(&self, id: EntryId) -> Vec<(MoveKind, EntryId)> {
        match &self.solved.map.entry(id).derivation {
            Derivation::Defender { children } => children
                .iter()
                .enumerate()
                .map(|(k, c)| (self.kind_of(id, k), *c))
                .collect(),
            Derivation::Attacker { .. } => unreachable!("defender entry with attacker derivation"),
        }
    }

    fn any(&self, id: EntryId) -> StrategyFormula {
        match self.pos(id) {
            SpectroPosition::AttackerImmediate(..) => StrategyFormula::Phi(self.phi(id)),
            SpectroPosition::AttackerBranch(..) => StrategyFormula::Phi(self.branch_phi(id)),
            SpectroPosition::AttackerClause(..) => StrategyFormula::Clause(self.clause(id)),
            SpectroPosition::AttackerBranchClause { .. } => match self.branch_clause(id) {
                Ok(phi) => StrategyFormula::Phi(phi),
                Err(c) => StrategyFormula::Clause(c),
            },
            _ => StrategyFormula::Chi(self.chi(id)),
        }
    }

    /// `(p, Q)_a`
    fn phi(&self, id: EntryId) -> Formula {
        let (kind, child) = self.attacker_step(id);
        match kind {
            MoveKind::Delay => Formula::delay(self.chi(child)),
            MoveKind::Finishing | MoveKind::EarlyConj => Formula::conj(self.conj_clauses(child)),
            other => unreachable!("{other:?} from an immediate attacker position"),
        }
    }

    /// `(p, Q)^ε_a` and defender positions.
    fn chi(&self, id: EntryId) -> Chi {
        let l = self.solved.lts();
        match self.pos(id) {
            SpectroPosition::DefenderConj(..) => Chi::conj(self.conj_clauses(id)),
            SpectroPosition::DefenderStable(..) => Chi::stable_conj(self.conj_clauses(id)),
            SpectroPosition::DefenderBranch { action, .. } => {
                let mut clauses = Vec::new();
                let mut head = None;
                for (kind, c) in self.defender_children(id) {
                    match kind {
                        MoveKind::BranchAnswer => clauses.push(self.clause(c)),
                        MoveKind::BranchObservation => head = Some(self.branch_phi(c)),
                        other => unreachable!("{other:?} from a branching defender position"),
                    }
                }
                let head = head.expect("branching position without observation move");
                Chi::branch_conj(l.action_name(*action), head, clauses)
            }
            SpectroPosition::DefenderBranchSimple { action, .. } => {
                let mut clauses = Vec::new();
                let mut observed = Vec::new();
                for (_, c) in self.defender_children(id) {
                    match self.branch_clause(c) {
                        Ok(phi) => observed.push(phi),
                        Err(clause) => clauses.push(clause),
                    }
                }
                Chi::branch_conj(l.action_name(*action), merge(observed), clauses)
            }
            SpectroPosition::AttackerDelayed(..) => {
                let (kind, child) = self.attacker_step(id);
                match kind {
                    MoveKind::Procrastination
                    | MoveKind::LateConj
                    | MoveKind::LateStableConj
                    | MoveKind::BranchConj(_) => self.chi(child),
                    MoveKind::Observation(a) => {
                        Chi::Obs(l.action_name(a).to_string(), Box::new(self.phi(child)))
                    }
                    other => unreachable!("{other:?} from a delayed attacker position"),
                }
            }
            other => unreachable!("no χ-formula at {other:?}"),
        }
    }

    fn conj_clauses(&self, id: EntryId) -> Vec<Clause> {
        self.defender_children(id)
            .into_iter()
            .map(|(_, c)| self.clause(c))
            .collect()
    }

    /// `(p, q)^∧_a`
    fn clause(&self, id: EntryId) -> Clause {
        let (kind, child) = self.attacker_step(id);
        match kind {
            MoveKind::PositiveClause => Clause::Pos(self.chi(child)),
            MoveKind::NegativeClause => Clause::Neg(self.chi(child)),
            other => unreachable!("{other:?} from a clause position"),
        }
    }

    /// `(p, Q)^η_a`, giving the formula under the soft modality.
    fn branch_phi(&self, id: EntryId) -> Formula {
        let (kind, child) = self.attacker_step(id);
        match kind {
            MoveKind::BranchAccounting => self.phi(child),
            MoveKind::EarlyBranchAccounting | MoveKind::EarlyBranchFinishing => {
                Formula::conj(self.conj_clauses(child))
            }
            MoveKind::LateBranchAccounting => Formula::delay(self.chi(child)),
            other => unreachable!("{other:?} from a branching attacker position"),
        }
    }

    /// `(p, α, p', q)^η_a`: an observed continuation or a reset clause.
    fn branch_clause(&self, id: EntryId) -> Result<Formula, Clause> {
        let (kind, child) = self.attacker_step(id);
        match kind {
            MoveKind::BranchObservation => Ok(self.branch_phi(child)),
            MoveKind::BranchReset => Err(self.clause(child)),
            other => unreachable!("{other:?} from a branching clause position"),
        }
    }
}

/// Joins the continuations of a simplified branching conjunction.
///
/// A single continuation is kept as is. Otherwise the parts are flattened
/// into one conjunction, delayed if every non-`T` part is delayed.
pub fn merge(parts: Vec<Formula>) -> Formula {
    let parts: Vec<Formula> = parts.into_iter().filter(|f| *f != Formula::True).collect();
    if parts.len() == 1 {
        return parts.into_iter().next().unwrap();
    }
    let all_delayed = parts.iter().all(|f| matches!(f, Formula::DelayObs(_)));
    let mut clauses = Vec::new();
    for f in parts {
        match f {
            Formula::ImmediateConj(cs) => clauses.extend(cs),
            Formula::DelayObs(chi) => clauses.push(Clause::Pos(*chi)),
            Formula::True => {}
        }
    }
    if clauses.is_empty() {
        Formula::True
    } else if all_delayed {
        Formula::delay(Chi::conj(clauses))
    } else {
        Formula::conj(clauses)
    }
}

/// A strategy formula for the solved position at index `i`, built from the
/// cheapest minimum below `budget`. `None` if the attacker does not win.
pub fn extract_at(solved: &SolvedGame<'_>, i: usize, budget: &ExtendedEnergy) -> Option<StrategyFormula> {
    let id = solved.map.witness(i, budget)?;
    Some(Extractor { solved }.any(id))
}

/// A formula distinguishing `p` from `q` within `budget`, if one exists.
pub fn extract(
    solved: &SolvedGame<'_>,
    p: ProcId,
    q: &ProcessSet,
    budget: &ExtendedEnergy,
) -> Option<Formula> {
    let i = solved.index(&SpectroPosition::AttackerImmediate(p, q.clone()))?;
    match extract_at(solved, i, budget)? {
        StrategyFormula::Phi(f) => Some(f),
        _ => unreachable!("immediate positions yield φ-formulas"),
    }
}

/// A distinguishing formula together with the claim it certifies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub formula: Formula,
    pub p: ProcId,
    pub q: ProcessSet,
    pub budget: Energy,
    /// Names of the notions whose coordinate admits the formula.
    pub defeats: Vec<String>,
    pub caveat: Option<&'static str>,
}

impl Certificate {
    /// Certificate for the front minimum `budget` at `(p, Q)_a`.
    pub fn from_budget(
        solved: &SolvedGame<'_>,
        p: ProcId,
        q: &ProcessSet,
        budget: Energy,
        notions: &[crate::spectrum::Notion],
    ) -> Option<Certificate> {
        let formula = extract(solved, p, q, &budget.to_extended())?;
        let defeats = notions
            .iter()
            .filter(|n| crate::hml::in_notion(&formula, &n.coordinate))
            .map(|n| n.name.clone())
            .collect();
        let caveat = (solved.game.variant() == GameVariant::Simplified).then_some(SIMPLIFIED_CAVEAT);
        Some(Certificate {
            formula,
            p,
            q: q.clone(),
            budget,
            defeats,
            caveat,
        })
    }

    /// Structured text record, one `key: value` per line.
    pub fn render(&self, l: &Lts) -> String {
        let qs: Vec<&str> = self.q.iter().map(|r| l.process_name(r)).collect();
        let mut out = format!(
            "formula: {}\nposition: ({},{{{}}})_a\nbudget: {}\nprice: {}\ndefeats: {}\n",
            self.formula,
            l.process_name(self.p),
            qs.join(","),
            self.budget,
            price(&self.formula),
            self.defeats.join(" ")
        );
        if let Some(c) = self.caveat {
            out.push_str(&format!("caveat: {c}\n"));
        }
        out
    }
}

/// Re-verifies a certificate with formula semantics and pricing only.
pub fn check_certificate(c: &Certificate, l: &Lts) -> bool {
    price(&c.formula).leq(&c.budget) && c.formula.distinguishes(l, c.p, &c.q)
}
