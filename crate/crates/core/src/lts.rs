//! Finite labeled transition systems with silent steps.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Canonical name of the silent action.
pub const TAU_NAME: &str = "tau";
/// Reserved for "no visible action"; never a member of the alphabet.
pub const EPSILON_NAME: &str = "epsilon";
/// Completion action ✓ as serialized.
pub const TICK_NAME: &str = "tick";
/// Divergence action δ as serialized.
pub const DELTA_NAME: &str = "delta";
/// Fresh sink process ⊥ as serialized.
pub const BOT_NAME: &str = "bot";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: `{name}` is reserved and cannot be used as an action")]
    Reserved { line: usize, name: String },
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("name `{0}` already exists in the system; rename it before preprocessing")]
    NameCollision(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ProcId(pub u32);

impl ProcId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Action index; the silent action always has index 0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ActionId(pub u32);

pub const TAU: ActionId = ActionId(0);

impl ActionId {
    pub fn is_tau(self) -> bool {
        self == TAU
    }
}

/// A set of processes in canonical (sorted, duplicate-free) form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ProcessSet(Vec<ProcId>);

impl ProcessSet {
    pub fn empty() -> Self {
        ProcessSet(Vec::new())
    }

    pub fn singleton(p: ProcId) -> Self {
        ProcessSet(vec![p])
    }

    pub fn from_sorted_unchecked(v: Vec<ProcId>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        ProcessSet(v)
    }

    pub fn contains(&self, p: ProcId) -> bool {
        self.0.binary_search(&p).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ProcId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[ProcId] {
        &self.0
    }

    pub fn is_subset(&self, other: &ProcessSet) -> bool {
        self.iter().all(|p| other.contains(p))
    }

    pub fn is_disjoint(&self, other: &ProcessSet) -> bool {
        self.iter().all(|p| !other.contains(p))
    }

    pub fn union(&self, other: &ProcessSet) -> ProcessSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn intersection(&self, other: &ProcessSet) -> ProcessSet {
        self.iter().filter(|p| other.contains(*p)).collect()
    }

    pub fn difference(&self, other: &ProcessSet) -> ProcessSet {
        self.iter().filter(|p| !other.contains(*p)).collect()
    }

    /// All nonempty subsets, ordered by bitmask over the member order.
    pub fn nonempty_subsets(&self) -> impl Iterator<Item = ProcessSet> + '_ {
        assert!(self.len() < 32, "subset enumeration over {} elements", self.len());
        (1u32..(1u32 << self.len())).map(move |mask| {
            ProcessSet(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, p)| *p)
                    .collect(),
            )
        })
    }
}

impl FromIterator<ProcId> for ProcessSet {
    fn from_iter<I: IntoIterator<Item = ProcId>>(iter: I) -> Self {
        let mut v: Vec<ProcId> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ProcessSet(v)
    }
}

impl fmt::Debug for ProcessSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter().map(|p| p.0)).finish()
    }
}

/// A finite labeled transition system `(P, Σ, →)` with derived silent-step caches.
#[derive(Clone)]
pub struct Lts {
    process_names: Vec<String>,
    process_index: HashMap<String, ProcId>,
    action_names: Vec<String>,
    action_index: HashMap<String, ActionId>,
    succ: Vec<Vec<(ActionId, ProcId)>>,
    pred: Vec<Vec<(ActionId, ProcId)>>,
    closure: Vec<ProcessSet>,
    stable: Vec<bool>,
}

impl fmt::Debug for Lts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lts")
            .field("processes", &self.process_names.len())
            .field("transitions", &self.transition_count())
            .finish()
    }
}

impl PartialEq for Lts {
    fn eq(&self, other: &Self) -> bool {
        self.process_names == other.process_names
            && self.action_names == other.action_names
            && self.succ == other.succ
    }
}

/// Incremental construction of an [`Lts`] by names.
#[derive(Default)]
pub struct LtsBuilder {
    process_names: Vec<String>,
    process_index: HashMap<String, ProcId>,
    action_names: Vec<String>,
    action_index: HashMap<String, ActionId>,
    transitions: Vec<(ProcId, ActionId, ProcId)>,
}

impl LtsBuilder {
    pub fn new() -> Self {
        let mut b = LtsBuilder::default();
        b.action(TAU_NAME);
        b
    }

    pub fn process(&mut self, name: &str) -> ProcId {
        if let Some(&p) = self.process_index.get(name) {
            return p;
        }
        let p = ProcId(self.process_names.len() as u32);
        self.process_names.push(name.to_string());
        self.process_index.insert(name.to_string(), p);
        p
    }

    pub fn action(&mut self, name: &str) -> ActionId {
        if let Some(&a) = self.action_index.get(name) {
            return a;
        }
        let a = ActionId(self.action_names.len() as u32);
        self.action_names.push(name.to_string());
        self.action_index.insert(name.to_string(), a);
        a
    }

    pub fn transition(&mut self, source: &str, action: &str, target: &str) {
        let s = self.process(source);
        let a = self.action(action);
        let t = self.process(target);
        self.transitions.push((s, a, t));
    }

    pub fn transition_ids(&mut self, source: ProcId, action: ActionId, target: ProcId) {
        self.transitions.push((source, action, target));
    }

    pub fn build(self) -> Lts {
        let n = self.process_names.len();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for (s, a, t) in self.transitions {
            succ[s.index()].push((a, t));
            pred[t.index()].push((a, s));
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        let stable = succ.iter().map(|l| !l.iter().any(|(a, _)| a.is_tau())).collect();
        let mut lts = Lts {
            process_names: self.process_names,
            process_index: self.process_index,
            action_names: self.action_names,
            action_index: self.action_index,
            succ,
            pred,
            closure: Vec::new(),
            stable,
        };
        lts.closure = (0..n).map(|p| lts.compute_closure(ProcId(p as u32))).collect();
        lts
    }
}

impl Lts {
    fn compute_closure(&self, p: ProcId) -> ProcessSet {
        let mut seen = vec![false; self.succ.len()];
        let mut stack = vec![p];
        seen[p.index()] = true;
        while let Some(q) = stack.pop() {
            for &(a, r) in &self.succ[q.index()] {
                if a.is_tau() && !seen[r.index()] {
                    seen[r.index()] = true;
                    stack.push(r);
                }
            }
        }
        mask_to_set(&seen)
    }

    pub fn num_processes(&self) -> usize {
        self.process_names.len()
    }

    pub fn processes(&self) -> impl Iterator<Item = ProcId> {
        (0..self.num_processes() as u32).map(ProcId)
    }

    pub fn all_processes(&self) -> ProcessSet {
        self.processes().collect()
    }

    pub fn process_name(&self, p: ProcId) -> &str {
        &self.process_names[p.index()]
    }

    pub fn process(&self, name: &str) -> Option<ProcId> {
        self.process_index.get(name).copied()
    }

    /// Looks up a process by name, failing with an input error if absent.
    pub fn require_process(&self, name: &str) -> Result<ProcId, LtsError> {
        self.process(name)
            .ok_or_else(|| LtsError::UnknownProcess(name.to_string()))
    }

    pub fn process_set<'a>(
        &self,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<ProcessSet, LtsError> {
        names.into_iter().map(|n| self.require_process(n)).collect()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> {
        (0..self.num_actions() as u32).map(ActionId)
    }

    pub fn visible_actions(&self) -> impl Iterator<Item = ActionId> {
        (1..self.num_actions() as u32).map(ActionId)
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a.0 as usize]
    }

    pub fn action(&self, name: &str) -> Option<ActionId> {
        self.action_index.get(name).copied()
    }

    /// Outgoing transitions of `p`, sorted by (action, target).
    pub fn transitions(&self, p: ProcId) -> &[(ActionId, ProcId)] {
        &self.succ[p.index()]
    }

    /// Incoming transitions of `p`, sorted by (action, source).
    pub fn predecessors(&self, p: ProcId) -> &[(ActionId, ProcId)] {
        &self.pred[p.index()]
    }

    pub fn transition_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn all_transitions(&self) -> impl Iterator<Item = (ProcId, ActionId, ProcId)> + '_ {
        self.processes()
            .flat_map(move |p| self.transitions(p).iter().map(move |&(a, t)| (p, a, t)))
    }

    /// A process is stable if it has no outgoing τ-step.
    pub fn is_stable(&self, p: ProcId) -> bool {
        self.stable[p.index()]
    }

    /// `{p' | p ↠ p'}` for a single process.
    pub fn closure_of(&self, p: ProcId) -> &ProcessSet {
        &self.closure[p.index()]
    }

    /// Image of `set` under ↠.
    pub fn tau_closure(&self, set: &ProcessSet) -> ProcessSet {
        match set.len() {
            0 => ProcessSet::empty(),
            1 => self.closure[set.0[0].index()].clone(),
            _ => {
                let mut mask = vec![false; self.num_processes()];
                for p in set.iter() {
                    for q in self.closure[p.index()].iter() {
                        mask[q.index()] = true;
                    }
                }
                mask_to_set(&mask)
            }
        }
    }

    /// Image of `set` under strong `a`-steps.
    pub fn step_image(&self, set: &ProcessSet, a: ActionId) -> ProcessSet {
        set.iter()
            .flat_map(|p| self.successors(p, a))
            .collect()
    }

    /// Image under the soft step `(α)`: for τ this also keeps the source.
    pub fn soft_step_image(&self, set: &ProcessSet, a: ActionId) -> ProcessSet {
        let img = self.step_image(set, a);
        if a.is_tau() {
            img.union(set)
        } else {
            img
        }
    }

    /// `a`-successors of a single process.
    pub fn successors(&self, p: ProcId, a: ActionId) -> impl Iterator<Item = ProcId> + '_ {
        let list = &self.succ[p.index()];
        let start = list.partition_point(|(b, _)| *b < a);
        list[start..]
            .iter()
            .take_while(move |(b, _)| *b == a)
            .map(|(_, t)| *t)
    }

    /// `{p | ∃p' ∈ set. p →a p'}` as a membership mask.
    pub fn pre_image_mask(&self, set: &[bool], a: ActionId) -> Vec<bool> {
        let mut out = vec![false; self.num_processes()];
        for (t, &inside) in set.iter().enumerate() {
            if inside {
                for &(b, s) in &self.pred[t] {
                    if b == a {
                        out[s.index()] = true;
                    }
                }
            }
        }
        out
    }

    /// `{p | ∃p' ∈ set. p ↠ p'}` as a membership mask.
    pub fn pre_closure_mask(&self, set: &[bool]) -> Vec<bool> {
        let mut out = set.to_vec();
        let mut stack: Vec<usize> = (0..set.len()).filter(|&i| set[i]).collect();
        while let Some(t) = stack.pop() {
            for &(b, s) in &self.pred[t] {
                if b.is_tau() && !out[s.index()] {
                    out[s.index()] = true;
                    stack.push(s.index());
                }
            }
        }
        out
    }

    /// Adds `p →✓ ⊥` for every process without a visible step.
    pub fn add_completion_marks(&self) -> Result<Lts, LtsError> {
        self.with_marks(false, true)
    }

    /// Adds `p →δ ⊥` for every process on a τ-cycle.
    pub fn add_divergence_marks(&self) -> Result<Lts, LtsError> {
        self.with_marks(true, false)
    }

    /// Applies divergence and/or completion marking in one pass, sharing a
    /// single fresh sink ⊥. Both markings are computed on the input system.
    pub fn with_marks(&self, divergence: bool, completion: bool) -> Result<Lts, LtsError> {
        if !divergence && !completion {
            return Ok(self.clone());
        }
        if self.process(BOT_NAME).is_some() {
            return Err(LtsError::NameCollision(BOT_NAME.to_string()));
        }
        for (flag, name) in [(divergence, DELTA_NAME), (completion, TICK_NAME)] {
            if flag && self.action(name).is_some() {
                return Err(LtsError::NameCollision(name.to_string()));
            }
        }
        let mut b = self.to_builder();
        let bot = b.process(BOT_NAME);
        if divergence {
            let delta = b.action(DELTA_NAME);
            for p in self.processes().filter(|&p| self.on_tau_cycle(p)) {
                b.transition_ids(p, delta, bot);
            }
        }
        if completion {
            let tick = b.action(TICK_NAME);
            for p in self.processes() {
                if self.transitions(p).iter().all(|(a, _)| a.is_tau()) {
                    b.transition_ids(p, tick, bot);
                }
            }
        }
        Ok(b.build())
    }

    /// True iff `p →τ+ p`.
    ///
    /// Equivalent to membership in a τ-SCC that is either nontrivial or has a
    /// self-loop: some τ-successor of `p` reaches `p` again.
    pub fn on_tau_cycle(&self, p: ProcId) -> bool {
        self.successors(p, TAU)
            .any(|q| self.closure[q.index()].contains(p))
    }

    fn to_builder(&self) -> LtsBuilder {
        LtsBuilder {
            process_names: self.process_names.clone(),
            process_index: self.process_index.clone(),
            action_names: self.action_names.clone(),
            action_index: self.action_index.clone(),
            transitions: self.all_transitions().collect(),
        }
    }

    /// Parses the line-oriented transition-list format.
    pub fn load_transition_list(text: &str) -> Result<Lts, LtsError> {
        let mut b = LtsBuilder::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 3 {
                return Err(LtsError::Parse {
                    line,
                    message: format!(
                        "expected 3 fields `source action target`, found {}",
                        fields.len()
                    ),
                });
            }
            for f in &fields {
                if !is_identifier(f) {
                    return Err(LtsError::Parse {
                        line,
                        message: format!("invalid identifier `{f}`"),
                    });
                }
            }
            if fields[1] == EPSILON_NAME {
                return Err(LtsError::Reserved {
                    line,
                    name: EPSILON_NAME.to_string(),
                });
            }
            b.transition(fields[0], fields[1], fields[2]);
        }
        Ok(b.build())
    }

    /// Renders the system in the transition-list format, one line per transition.
    pub fn to_transition_list(&self) -> String {
        let mut out = String::new();
        for (s, a, t) in self.all_transitions() {
            out.push_str(&format!(
                "{} {} {}\n",
                self.process_name(s),
                self.action_name(a),
                self.process_name(t)
            ));
        }
        out
    }

    /// Restriction to the processes reachable from `roots`, keeping names.
    pub fn reachable_from(&self, roots: &[ProcId]) -> Lts {
        let mut seen = vec![false; self.num_processes()];
        let mut order = Vec::new();
        let mut stack: Vec<ProcId> = roots.iter().rev().copied().collect();
        while let Some(p) = stack.pop() {
            if seen[p.index()] {
                continue;
            }
            seen[p.index()] = true;
            order.push(p);
            for &(_, t) in self.transitions(p).iter().rev() {
                if !seen[t.index()] {
                    stack.push(t);
                }
            }
        }
        let mut b = LtsBuilder::new();
        for &p in &order {
            b.process(self.process_name(p));
        }
        for &p in &order {
            for &(a, t) in self.transitions(p) {
                b.transition(self.process_name(p), self.action_name(a), self.process_name(t));
            }
        }
        b.build()
    }
}

pub(crate) fn mask_to_set(mask: &[bool]) -> ProcessSet {
    ProcessSet(
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| ProcId(i as u32))
            .collect(),
    )
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_.'+-".contains(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lts(text: &str) -> Lts {
        Lts::load_transition_list(text).unwrap()
    }

    fn set(l: &Lts, names: &[&str]) -> ProcessSet {
        l.process_set(names.iter().copied()).unwrap()
    }

    #[test]
    fn tau_closure_examples() {
        let l = lts("p a x\nc tau d\nd tau e\ny tau z\nz tau y\n");
        assert_eq!(l.tau_closure(&set(&l, &["p"])), set(&l, &["p"]));
        assert_eq!(l.tau_closure(&set(&l, &["c"])), set(&l, &["c", "d", "e"]));
        assert_eq!(l.tau_closure(&set(&l, &["y"])), set(&l, &["y", "z"]));
        assert_eq!(l.tau_closure(&ProcessSet::empty()), ProcessSet::empty());
    }

    #[test]
    fn step_image_examples() {
        let l = lts("p a p2\nq a r\ns a r\n");
        let a = l.action("a").unwrap();
        assert_eq!(l.step_image(&set(&l, &["p"]), a), set(&l, &["p2"]));
        assert_eq!(l.step_image(&set(&l, &["r"]), a), ProcessSet::empty());
        assert_eq!(l.step_image(&set(&l, &["q", "s"]), a), set(&l, &["r"]));
    }

    #[test]
    fn soft_step_examples() {
        let l = lts("p a p2\np tau q\nr b r\n");
        let a = l.action("a").unwrap();
        assert_eq!(l.soft_step_image(&set(&l, &["p"]), a), l.step_image(&set(&l, &["p"]), a));
        assert_eq!(l.soft_step_image(&set(&l, &["r"]), TAU), set(&l, &["r"]));
        assert_eq!(l.soft_step_image(&set(&l, &["p"]), TAU), set(&l, &["p", "q"]));
    }

    #[test]
    fn stability() {
        let l = lts("p tau q\nr a d\n");
        assert!(l.is_stable(l.process("d").unwrap()));
        assert!(!l.is_stable(l.process("p").unwrap()));
        assert!(l.is_stable(l.process("r").unwrap()));
    }

    #[test]
    fn completion_marks() {
        let l = lts("p a d\ns tau t\nt a d\n");
        let m = l.add_completion_marks().unwrap();
        let tick = m.action(TICK_NAME).unwrap();
        let bot = m.process(BOT_NAME).unwrap();
        let has_tick = |n: &str| m.successors(m.process(n).unwrap(), tick).any(|x| x == bot);
        assert!(has_tick("d"));
        assert!(!has_tick("p"));
        assert!(has_tick("s"));
        assert!(!has_tick("t"));
    }

    #[test]
    fn divergence_marks() {
        let l = lts("p tau p\nq tau r\nr tau q\nu tau v\n");
        let m = l.add_divergence_marks().unwrap();
        let delta = m.action(DELTA_NAME).unwrap();
        let has = |n: &str| m.successors(m.process(n).unwrap(), delta).count() == 1;
        assert!(has("p") && has("q") && has("r"));
        assert!(!has("u") && !has("v"));
    }

    #[test]
    fn marking_collisions() {
        let l = lts("bot a x\n");
        assert_eq!(
            l.add_completion_marks().unwrap_err(),
            LtsError::NameCollision("bot".into())
        );
        let l = lts("p tick x\n");
        assert!(l.add_completion_marks().is_err());
        assert!(l.add_divergence_marks().is_ok());
        let l = lts("p delta x\n");
        assert!(l.add_divergence_marks().is_err());
    }

    #[test]
    fn loading() {
        let l = lts("p tau q # silent\n\n# comment only\n");
        assert_eq!(l.num_processes(), 2);
        assert_eq!(l.transitions(l.process("p").unwrap()), &[(TAU, l.process("q").unwrap())]);

        let empty = lts("");
        assert_eq!(empty.num_processes(), 0);

        assert_eq!(
            Lts::load_transition_list("p a").unwrap_err(),
            LtsError::Parse {
                line: 1,
                message: "expected 3 fields `source action target`, found 2".into()
            }
        );
        assert!(matches!(
            Lts::load_transition_list("p a q\np epsilon q"),
            Err(LtsError::Reserved { line: 2, .. })
        ));
        assert!(matches!(
            Lts::load_transition_list("p a{ q"),
            Err(LtsError::Parse { line: 1, .. })
        ));
        let dup = lts("p a q\np a q\n");
        assert_eq!(dup.transition_count(), 1);
    }

    #[test]
    fn transition_list_round_trip() {
        let text = "p a q\nq tau p\nq b' r\n";
        let l = lts(text);
        assert_eq!(lts(&l.to_transition_list()), l);
    }

    #[test]
    fn unknown_process() {
        let l = lts("p a q\n");
        assert_eq!(
            l.process_set(["p", "zz"]).unwrap_err(),
            LtsError::UnknownProcess("zz".into())
        );
    }

    #[test]
    fn subsets() {
        let s: ProcessSet = [ProcId(1), ProcId(4), ProcId(7)].into_iter().collect();
        let subs: Vec<ProcessSet> = s.nonempty_subsets().collect();
        assert_eq!(subs.len(), 7);
        assert!(subs.iter().all(|x| x.is_subset(&s) && !x.is_empty()));
    }
}
