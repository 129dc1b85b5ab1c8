//! Stability-respecting branching HML: formulas, semantics and prices.
//!
//! Formulas come in three strata. [`Formula`] is the top level (φ), [`Chi`]
//! sits right below a delay `⟨ε⟩` (χ), and [`Clause`] is a conjunct (ψ),
//! which always starts with `⟨ε⟩` or `¬⟨ε⟩`.
//!
//! Concrete syntax:
//!
//! ```text
//! φ ::= T | <e>χ | /\{ψ, ...}
//! χ ::= T | <a>φ | /\{ψ, ...} | /\{!t, ψ, ...} | /\{(α)φ, ψ, ...}
//! ψ ::= <e>χ | ~<e>χ
//! ```
//!
//! `T` at the χ level is the empty conjunction. `!t` marks a stable
//! conjunction (the conjunct ¬⟨τ⟩T). `(α)` is the soft modality and may name
//! `tau`; `<a>` may not. Action names run up to the closing bracket, so an
//! action literally called `e` cannot be observed in this syntax.

use std::fmt;

use thiserror::Error;

use crate::energy::Energy;
use crate::lts::{mask_to_set, Lts, ProcId, ProcessSet, TAU_NAME};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    True,
    DelayObs(Box<Chi>),
    ImmediateConj(Vec<Clause>),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Chi {
    Obs(String, Box<Formula>),
    Conj(Vec<Clause>),
    /// Conjunction with the implicit conjunct ¬⟨τ⟩T.
    StableConj(Vec<Clause>),
    /// `⋀{(α)φ, Ψ}`.
    BranchConj(String, Box<Formula>, Vec<Clause>),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Clause {
    Pos(Chi),
    Neg(Chi),
}

fn canonical(mut clauses: Vec<Clause>) -> Vec<Clause> {
    clauses.sort_by_cached_key(|c| c.to_string());
    clauses.dedup();
    clauses
}

impl Formula {
    pub fn delay(chi: Chi) -> Formula {
        Formula::DelayObs(Box::new(chi))
    }

    /// Immediate conjunction; the empty one is `T`.
    pub fn conj(clauses: Vec<Clause>) -> Formula {
        if clauses.is_empty() {
            Formula::True
        } else {
            Formula::ImmediateConj(canonical(clauses))
        }
    }

    /// `⟨ε⟩⟨a⟩φ`.
    pub fn observe(action: &str, then: Formula) -> Formula {
        Formula::delay(Chi::obs(action, then))
    }

    pub fn eval(&self, l: &Lts) -> ProcessSet {
        mask_to_set(&eval_formula(self, l))
    }

    /// True iff `p` satisfies the formula and no member of `q` does.
    pub fn distinguishes(&self, l: &Lts, p: ProcId, q: &ProcessSet) -> bool {
        let den = eval_formula(self, l);
        den[p.index()] && q.iter().all(|r| !den[r.index()])
    }

    pub fn price(&self) -> Energy {
        price(self)
    }

    /// Number of constructors, counting `T` as one.
    pub fn size(&self) -> usize {
        match self {
            Formula::True => 1,
            Formula::DelayObs(c) => 1 + c.size(),
            Formula::ImmediateConj(cs) => 1 + cs.iter().map(Clause::size).sum::<usize>(),
        }
    }
}

impl Chi {
    pub fn obs(action: &str, then: Formula) -> Chi {
        assert!(action != TAU_NAME, "observations cannot use tau");
        Chi::Obs(action.to_string(), Box::new(then))
    }

    pub fn conj(clauses: Vec<Clause>) -> Chi {
        Chi::Conj(canonical(clauses))
    }

    pub fn stable_conj(clauses: Vec<Clause>) -> Chi {
        Chi::StableConj(canonical(clauses))
    }

    pub fn branch_conj(action: &str, then: Formula, clauses: Vec<Clause>) -> Chi {
        Chi::BranchConj(action.to_string(), Box::new(then), canonical(clauses))
    }

    pub fn eval(&self, l: &Lts) -> ProcessSet {
        mask_to_set(&eval_chi(self, l))
    }

    fn size(&self) -> usize {
        let sum = |cs: &[Clause]| cs.iter().map(Clause::size).sum::<usize>();
        match self {
            Chi::Obs(_, f) => 1 + f.size(),
            Chi::Conj(cs) if cs.is_empty() => 1,
            Chi::Conj(cs) => 1 + sum(cs),
            Chi::StableConj(cs) => 2 + sum(cs),
            Chi::BranchConj(_, f, cs) => 2 + f.size() + sum(cs),
        }
    }
}

impl Clause {
    pub fn eval(&self, l: &Lts) -> ProcessSet {
        mask_to_set(&eval_clause(self, l))
    }

    fn size(&self) -> usize {
        match self {
            Clause::Pos(c) => 1 + c.size(),
            Clause::Neg(c) => 2 + c.size(),
        }
    }
}

fn eval_formula(f: &Formula, l: &Lts) -> Vec<bool> {
    match f {
        Formula::True => vec![true; l.num_processes()],
        Formula::DelayObs(chi) => l.pre_closure_mask(&eval_chi(chi, l)),
        Formula::ImmediateConj(cs) => eval_clauses(cs, l, vec![true; l.num_processes()]),
    }
}

fn eval_chi(chi: &Chi, l: &Lts) -> Vec<bool> {
    let n = l.num_processes();
    match chi {
        Chi::Obs(a, f) => match l.action(a) {
            Some(a) => l.pre_image_mask(&eval_formula(f, l), a),
            None => vec![false; n],
        },
        Chi::Conj(cs) => eval_clauses(cs, l, vec![true; n]),
        Chi::StableConj(cs) => {
            let stable = l.processes().map(|p| l.is_stable(p)).collect();
            eval_clauses(cs, l, stable)
        }
        Chi::BranchConj(a, f, cs) => {
            let head = match l.action(a) {
                Some(a) => {
                    let den = eval_formula(f, l);
                    let mut pre = l.pre_image_mask(&den, a);
                    if a.is_tau() {
                        for (x, d) in pre.iter_mut().zip(&den) {
                            *x |= *d;
                        }
                    }
                    pre
                }
                None => vec![false; n],
            };
            eval_clauses(cs, l, head)
        }
    }
}

fn eval_clauses(cs: &[Clause], l: &Lts, mut acc: Vec<bool>) -> Vec<bool> {
    for c in cs {
        let den = eval_clause(c, l);
        for (x, d) in acc.iter_mut().zip(den) {
            *x &= d;
        }
    }
    acc
}

fn eval_clause(c: &Clause, l: &Lts) -> Vec<bool> {
    match c {
        Clause::Pos(chi) => l.pre_closure_mask(&eval_chi(chi, l)),
        Clause::Neg(chi) => l
            .pre_closure_mask(&eval_chi(chi, l))
            .into_iter()
            .map(|b| !b)
            .collect(),
    }
}

/// Expressiveness price of a top-level formula.
pub fn price(f: &Formula) -> Energy {
    match f {
        Formula::True => Energy::ZERO,
        Formula::DelayObs(chi) => price_eps(chi),
        Formula::ImmediateConj(cs) => Energy::unit(5).plus(&conj_price(cs, 3, None)),
    }
}

/// Price of a χ-formula sitting under `⟨ε⟩`.
pub fn price_eps(chi: &Chi) -> Energy {
    match chi {
        Chi::Obs(_, f) => Energy::unit(1).plus(&price(f)),
        Chi::Conj(cs) if cs.is_empty() => Energy::ZERO,
        Chi::Conj(cs) => conj_price(cs, 3, None),
        Chi::StableConj(cs) => conj_price(cs, 4, None),
        Chi::BranchConj(_, f, cs) => {
            // (α)φ costs like an observation, re-wrapped as a positive clause
            let head = positive_clause_price(&Energy::unit(1).plus(&price(f)));
            Energy::unit(2).plus(&conj_price(cs, 3, Some(head)))
        }
    }
}

pub fn price_clause(c: &Clause) -> Energy {
    match c {
        Clause::Pos(chi) => positive_clause_price(&price_eps(chi)),
        Clause::Neg(chi) => {
            let body = price_eps(chi);
            Energy::unit(8)
                .plus(&body)
                .with_at_least(7, body.get(1))
        }
    }
}

fn positive_clause_price(body: &Energy) -> Energy {
    body.with_at_least(6, body.get(1))
}

fn conj_price(cs: &[Clause], marker: usize, extra: Option<Energy>) -> Energy {
    let mut sup = extra.unwrap_or(Energy::ZERO);
    for c in cs {
        sup = sup.sup(&price_clause(c));
    }
    sup.plus(&Energy::unit(marker))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "T"),
            Formula::DelayObs(chi) => write!(f, "<e>{chi}"),
            Formula::ImmediateConj(cs) => write_conj(f, None, cs),
        }
    }
}

impl fmt::Display for Chi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chi::Obs(a, phi) => write!(f, "<{a}>{phi}"),
            Chi::Conj(cs) if cs.is_empty() => write!(f, "T"),
            Chi::Conj(cs) => write_conj(f, None, cs),
            Chi::StableConj(cs) => write_conj(f, Some("!t".to_string()), cs),
            Chi::BranchConj(a, phi, cs) => write_conj(f, Some(format!("({a}){phi}")), cs),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Pos(chi) => write!(f, "<e>{chi}"),
            Clause::Neg(chi) => write!(f, "~<e>{chi}"),
        }
    }
}

fn write_conj(f: &mut fmt::Formatter<'_>, head: Option<String>, cs: &[Clause]) -> fmt::Result {
    write!(f, "/\\{{")?;
    let mut first = true;
    if let Some(h) = head {
        write!(f, "{h}")?;
        first = false;
    }
    for c in cs {
        if !first {
            write!(f, ", ")?;
        }
        first = false;
        write!(f, "{c}")?;
    }
    write!(f, "}}")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula syntax error at column {col}: {message}")]
pub struct FormulaError {
    pub col: usize,
    pub message: String,
}

/// Parses the concrete syntax described in the module docs.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut p = FormulaParser {
        chars: text.chars().collect(),
        at: 0,
    };
    let f = p.formula()?;
    p.skip_ws();
    if p.at < p.chars.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

struct FormulaParser {
    chars: Vec<char>,
    at: usize,
}

enum Conjunct {
    Clause(Clause),
    Stable,
    Branch(String, Formula),
}

impl FormulaParser {
    fn error<T>(&self, message: &str) -> Result<T, FormulaError> {
        Err(FormulaError {
            col: self.at + 1,
            message: message.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while self.at < self.chars.len() && self.chars[self.at].is_whitespace() {
            self.at += 1;
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        if self.at + n <= self.chars.len() && self.chars[self.at..self.at + n].iter().copied().eq(s.chars()) {
            self.at += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), FormulaError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.error(&format!("expected `{s}`"))
        }
    }

    fn name_until(&mut self, close: char) -> Result<String, FormulaError> {
        let start = self.at;
        while self.at < self.chars.len() && self.chars[self.at] != close {
            self.at += 1;
        }
        if self.at == self.chars.len() {
            self.at = start;
            return self.error(&format!("unterminated action, expected `{close}`"));
        }
        let name: String = self.chars[start..self.at].iter().collect();
        self.at += 1;
        let name = name.trim().to_string();
        if name.is_empty() {
            self.at = start;
            return self.error("empty action name");
        }
        Ok(name)
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        if self.eat("T") {
            return Ok(Formula::True);
        }
        if self.eat("<e>") {
            return Ok(Formula::delay(self.chi()?));
        }
        if self.eat("/\\{") {
            let mut clauses = Vec::new();
            for c in self.conjuncts()? {
                match c {
                    Conjunct::Clause(c) => clauses.push(c),
                    _ => return self.error("`!t` and `(α)` conjuncts must sit under <e>"),
                }
            }
            return Ok(Formula::conj(clauses));
        }
        self.error("expected `T`, `<e>` or `/\\{`")
    }

    fn chi(&mut self) -> Result<Chi, FormulaError> {
        if self.eat("T") {
            return Ok(Chi::Conj(Vec::new()));
        }
        if self.eat("/\\{") {
            let mut clauses = Vec::new();
            let mut special = None;
            for c in self.conjuncts()? {
                match c {
                    Conjunct::Clause(c) => clauses.push(c),
                    other => {
                        if special.is_some() {
                            return self.error(
                                "a conjunction carries at most one `!t` or `(α)` conjunct",
                            );
                        }
                        special = Some(other);
                    }
                }
            }
            return Ok(match special {
                None => Chi::conj(clauses),
                Some(Conjunct::Stable) => Chi::stable_conj(clauses),
                Some(Conjunct::Branch(a, f)) => Chi::branch_conj(&a, f, clauses),
                Some(Conjunct::Clause(_)) => unreachable!(),
            });
        }
        if self.eat("<e>") {
            return self.error("<e><e> is not in the grammar; drop one delay");
        }
        if self.eat("<") {
            let a = self.name_until('>')?;
            if a == TAU_NAME {
                return self.error("<tau> is not allowed, use a delay or a (tau) conjunct");
            }
            return Ok(Chi::Obs(a, Box::new(self.formula()?)));
        }
        self.error("expected `T`, `<a>` or `/\\{`")
    }

    fn conjuncts(&mut self) -> Result<Vec<Conjunct>, FormulaError> {
        let mut out = Vec::new();
        if self.eat("}") {
            return Ok(out);
        }
        loop {
            out.push(self.conjunct()?);
            if self.eat(",") {
                continue;
            }
            self.expect("}")?;
            return Ok(out);
        }
    }

    fn conjunct(&mut self) -> Result<Conjunct, FormulaError> {
        if self.eat("!t") {
            return Ok(Conjunct::Stable);
        }
        if self.eat("~") {
            self.expect("<e>")?;
            return Ok(Conjunct::Clause(Clause::Neg(self.chi()?)));
        }
        if self.eat("<e>") {
            return Ok(Conjunct::Clause(Clause::Pos(self.chi()?)));
        }
        if self.eat("(") {
            let a = self.name_until(')')?;
            return Ok(Conjunct::Branch(a, self.formula()?));
        }
        self.error("expected a conjunct: `<e>`, `~<e>`, `!t` or `(α)`")
    }
}

/// True iff the formula's price lies within the notion coordinate.
pub fn in_notion(f: &Formula, coord: &crate::energy::ExtendedEnergy) -> bool {
    coord.dominates(&price(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::ExtendedEnergy;
    use crate::lts::LtsBuilder;

    fn phi_cp() -> Formula {
        Formula::observe(
            "op",
            Formula::delay(Chi::conj(vec![
                Clause::Pos(Chi::obs("aEats", Formula::True)),
                Clause::Pos(Chi::obs("bEats", Formula::True)),
            ])),
        )
    }

    fn e(c: [u32; 8]) -> Energy {
        Energy::new(c)
    }

    #[test]
    fn prices() {
        assert_eq!(price(&Formula::True), Energy::ZERO);
        assert_eq!(price(&phi_cp()), e([2, 0, 1, 0, 0, 1, 0, 0]));
        let refusal = Formula::delay(Chi::conj(vec![Clause::Neg(Chi::obs("a", Formula::True))]));
        assert_eq!(price(&refusal), e([1, 0, 1, 0, 0, 0, 1, 1]));
        let stable = Formula::delay(Chi::stable_conj(vec![]));
        assert_eq!(price(&stable), e([0, 0, 0, 1, 0, 0, 0, 0]));
        let br = Formula::delay(Chi::branch_conj("a", Formula::True, vec![]));
        assert_eq!(price(&br), e([1, 1, 1, 0, 0, 1, 0, 0]));
        let imm = Formula::conj(vec![Clause::Pos(Chi::obs("a", Formula::True))]);
        assert_eq!(price(&imm), e([1, 0, 1, 0, 1, 1, 0, 0]));
    }

    #[test]
    fn notion_membership() {
        let wb: ExtendedEnergy = "(∞,0,∞,0,0,∞,∞,∞)".parse().unwrap();
        let t: ExtendedEnergy = "(∞,0,0,0,0,0,0,0)".parse().unwrap();
        assert!(in_notion(&phi_cp(), &wb));
        assert!(!in_notion(&phi_cp(), &t));
        assert!(in_notion(&Formula::True, &t));
    }

    #[test]
    fn render_and_parse() {
        assert_eq!(Formula::True.to_string(), "T");
        let text = "<e><op><e>/\\{<e><aEats>T, <e><bEats>T}";
        assert_eq!(parse_formula(text).unwrap(), phi_cp());
        assert_eq!(phi_cp().to_string(), text);
        for s in [
            "<e>/\\{!t, ~<e><a>T}",
            "<e>/\\{(tau)<e><b>T, <e><c>T}",
            "/\\{<e>T, ~<e><a>T}",
            "<e>T",
            "<e>/\\{!t}",
        ] {
            let f = parse_formula(s).unwrap();
            assert_eq!(f.to_string(), s);
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn parse_rejects_outside_grammar() {
        assert!(parse_formula("~<t>T").is_err());
        assert!(parse_formula("<e><tau>T").is_err());
        assert!(parse_formula("<a>T").is_err());
        assert!(parse_formula("<e>/\\{!t, (a)T}").is_err());
        assert!(parse_formula("/\\{!t}").is_err());
        assert!(parse_formula("<e><a>T extra").is_err());
        let err = parse_formula("<e><a").unwrap_err();
        assert_eq!(err.col, 5);
    }

    #[test]
    fn clause_order_is_canonical() {
        let a = parse_formula("<e>/\\{<e><b>T, <e><a>T, <e><a>T}").unwrap();
        let b = parse_formula("<e>/\\{<e><a>T, <e><b>T}").unwrap();
        assert_eq!(a, b);
    }

    fn tau_example() -> Lts {
        // P = τ.0 + τ.a.0, Q = τ.a.0
        let mut b = LtsBuilder::new();
        b.transition("P", "tau", "0");
        b.transition("P", "tau", "A");
        b.transition("Q", "tau", "A");
        b.transition("A", "a", "0");
        b.build()
    }

    #[test]
    fn semantics() {
        let l = tau_example();
        let p = l.process("P").unwrap();
        let q = l.process("Q").unwrap();
        assert_eq!(Formula::True.eval(&l), l.all_processes());
        assert_eq!(
            Formula::delay(Chi::Conj(vec![])).eval(&l),
            l.all_processes()
        );
        let refusal = Formula::delay(Chi::conj(vec![Clause::Neg(Chi::obs("a", Formula::True))]));
        assert!(refusal.distinguishes(&l, p, &ProcessSet::singleton(q)));
        assert!(!refusal.distinguishes(&l, q, &ProcessSet::singleton(p)));
        assert!(!Formula::True.distinguishes(&l, p, &ProcessSet::singleton(q)));
        assert!(Formula::True.distinguishes(&l, p, &ProcessSet::empty()));
        // unknown actions denote nothing
        assert!(Formula::observe("zzz", Formula::True).eval(&l).is_empty());
    }

    #[test]
    fn stable_and_branch_semantics() {
        let l = tau_example();
        let stable = Formula::delay(Chi::stable_conj(vec![]));
        // every process can reach a stable state here
        assert_eq!(stable.eval(&l), l.all_processes());
        let now_stable = Chi::stable_conj(vec![]).eval(&l);
        let names: Vec<&str> = now_stable.iter().map(|p| l.process_name(p)).collect();
        assert_eq!(names, ["0", "A"]);
        // soft tau keeps the source: (tau)<e><a>T holds at A itself
        let br = Chi::branch_conj("tau", Formula::observe("a", Formula::True), vec![]);
        let den = br.eval(&l);
        assert!(den.contains(l.process("A").unwrap()));
        assert!(den.contains(l.process("P").unwrap()));
        assert!(!den.contains(l.process("0").unwrap()));
    }
}
