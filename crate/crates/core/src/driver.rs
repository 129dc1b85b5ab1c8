//! Batch pipeline behind the command-line tool: load, preprocess, solve,
//! judge, and report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::ccs::{expand_lts, parse_ccs, CcsError};
use crate::energy::{BudgetFront, Energy};
use crate::game::GameError;
use crate::lts::{Lts, LtsError, ProcId, ProcessSet};
use crate::oracle::{self, Oracle, OracleTooLarge};
use crate::spectroscopy::{GameVariant, SolvedGame, DEFAULT_MAX_POSITIONS};
use crate::spectrum::{self, Notion, SpectrumError, Verdict};
use crate::strategy::{check_certificate, Certificate};

/// Version tag of the structured report.
pub const SCHEMA: &str = "spectroscopy-report/1";

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Lts { path: String, source: LtsError },
    #[error("{path}: {source}")]
    Ccs { path: String, source: CcsError },
    #[error("{path}: {states} states exceed the limit of {limit}")]
    TooManyStates {
        path: String,
        states: usize,
        limit: usize,
    },
    #[error(transparent)]
    Preprocess(LtsError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("the simplified game cannot decide `{0}`: it counts conjunctions next to branching conjunctions")]
    Inadmissible(String),
    #[error(transparent)]
    Oracle(#[from] OracleTooLarge),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    TransitionList,
    Ccs,
}

impl InputFormat {
    /// `.ccs` files are CCS programs, everything else a transition list.
    pub fn guess(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("ccs") => InputFormat::Ccs,
            _ => InputFormat::TransitionList,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    /// Every notion, both directions.
    Spectrum,
    /// Is `left` preordered below `right` under this notion?
    Notion(String),
    /// Minimal attacker budgets only.
    Budgets,
    /// Cross-check the game against the formula oracle.
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Human,
    Structured,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: PathBuf,
    pub input_format: Option<InputFormat>,
    pub left: String,
    pub right: String,
    pub variant: GameVariant,
    pub divergence: bool,
    pub completion: bool,
    pub query: Query,
    pub certificates: bool,
    pub output: OutputFormat,
    pub max_states: usize,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, left: &str, right: &str) -> Self {
        RunConfig {
            input: input.into(),
            input_format: None,
            left: left.to_string(),
            right: right.to_string(),
            variant: GameVariant::Full,
            divergence: false,
            completion: false,
            query: Query::Spectrum,
            certificates: false,
            output: OutputFormat::Human,
            max_states: crate::ccs::DEFAULT_STATE_BOUND,
        }
    }
}

/// Result of a run: `satisfied` maps to exit status 0, otherwise 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub satisfied: bool,
    pub output: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.satisfied {
            0
        } else {
            1
        }
    }
}

fn read(path: &Path) -> Result<String, DriverError> {
    std::fs::read_to_string(path).map_err(|source| DriverError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a system from a file and restricts it to what `roots` reach.
pub fn load_system(
    path: &Path,
    format: Option<InputFormat>,
    roots: &[&str],
    max_states: usize,
) -> Result<Lts, DriverError> {
    let text = read(path)?;
    let shown = path.display().to_string();
    let lts = match format.unwrap_or_else(|| InputFormat::guess(path)) {
        InputFormat::Ccs => {
            let prog = parse_ccs(&text).map_err(|source| DriverError::Ccs {
                path: shown.clone(),
                source,
            })?;
            expand_lts(&prog, roots, max_states).map_err(|source| DriverError::Ccs {
                path: shown.clone(),
                source,
            })?
        }
        InputFormat::TransitionList => {
            let full = Lts::load_transition_list(&text).map_err(|source| DriverError::Lts {
                path: shown.clone(),
                source,
            })?;
            let ids = roots
                .iter()
                .map(|r| full.require_process(r))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|source| DriverError::Lts {
                    path: shown.clone(),
                    source,
                })?;
            full.reachable_from(&ids)
        }
    };
    if lts.num_processes() > max_states {
        return Err(DriverError::TooManyStates {
            path: shown,
            states: lts.num_processes(),
            limit: max_states,
        });
    }
    Ok(lts)
}

#[derive(Serialize)]
struct SystemReport {
    path: String,
    states: usize,
    transitions: usize,
    preprocess: Vec<&'static str>,
}

#[derive(Serialize)]
struct CertificateReport {
    notion: String,
    left: String,
    right: String,
    formula: String,
    budget: String,
    price: String,
    defeats: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    caveat: Option<&'static str>,
    verified: bool,
}

#[derive(Serialize)]
struct VerdictEntry {
    notion: String,
    holds: bool,
}

#[derive(Serialize)]
struct DirectionReport {
    left: String,
    right: String,
    budgets: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdicts: Option<Vec<VerdictEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frontier: Option<spectrum::Frontier>,
}

#[derive(Serialize)]
struct VerifyReport {
    grid_points: usize,
    oracle_cap: String,
    mismatches: Vec<String>,
    certificates_checked: usize,
    certificates_failed: usize,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    query: String,
    variant: String,
    system: SystemReport,
    directions: Vec<DirectionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equivalence: Option<Vec<VerdictEntry>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    certificates: Vec<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<VerifyReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    satisfied: bool,
}

fn entries(v: &Verdict) -> Vec<VerdictEntry> {
    v.preordered
        .iter()
        .map(|(n, b)| VerdictEntry {
            notion: n.clone(),
            holds: *b,
        })
        .collect()
}

fn certificate_for(
    solved: &SolvedGame<'_>,
    p: ProcId,
    q: ProcId,
    notion: &Notion,
    table: &[Notion],
) -> Option<CertificateReport> {
    let qs = ProcessSet::singleton(q);
    let budget = *solved
        .front(p, &qs)
        .iter()
        .find(|b| notion.coordinate.dominates(b))?;
    let c = Certificate::from_budget(solved, p, &qs, budget, table)?;
    let l = solved.lts();
    Some(CertificateReport {
        notion: notion.name.clone(),
        left: l.process_name(p).to_string(),
        right: l.process_name(q).to_string(),
        formula: c.formula.to_string(),
        budget: c.budget.to_string(),
        price: c.formula.price().to_string(),
        defeats: c.defeats.clone(),
        caveat: c.caveat,
        verified: check_certificate(&c, l),
    })
}

fn verify(solved: &SolvedGame<'_>, pairs: &[(ProcId, ProcId)], table: &[Notion]) -> Result<VerifyReport, DriverError> {
    let l = solved.lts();
    let fronts: Vec<&BudgetFront> = pairs
        .iter()
        .map(|(p, q)| solved.front(*p, &ProcessSet::singleton(*q)))
        .collect();
    let cap = oracle::cap_for(fronts.iter().copied());
    let oracle = Oracle::build(l, &cap)?;
    let grid = oracle::grid();
    let mut mismatches = Vec::new();
    let mut checked = 0;
    let mut failed = 0;
    for ((p, q), front) in pairs.iter().zip(&fronts) {
        let qs = ProcessSet::singleton(*q);
        for e in oracle::mismatches(front, &oracle.front(*p, &qs), &grid) {
            mismatches.push(format!("{} vs {} at {e}", l.process_name(*p), l.process_name(*q)));
        }
        for b in front.iter() {
            checked += 1;
            let ok = Certificate::from_budget(solved, *p, &qs, *b, table)
                .is_some_and(|c| check_certificate(&c, l));
            if !ok {
                failed += 1;
            }
        }
    }
    Ok(VerifyReport {
        grid_points: grid.len(),
        oracle_cap: cap.to_string(),
        mismatches,
        certificates_checked: checked,
        certificates_failed: failed,
    })
}

/// Runs the pipeline described by `config`.
pub fn run(config: &RunConfig) -> Result<Outcome, DriverError> {
    let full_table = spectrum::builtin_table();
    let notion = match &config.query {
        Query::Notion(name) => {
            let n = spectrum::find(&full_table, name)?.clone();
            if config.variant == GameVariant::Simplified && !n.simplified_admissible() {
                return Err(DriverError::Inadmissible(n.name));
            }
            Some(n)
        }
        _ => None,
    };
    let mut notes = Vec::new();
    let table = if config.variant == GameVariant::Simplified {
        let t = spectrum::restrict(&full_table, Notion::simplified_admissible);
        if t.len() < full_table.len() && config.query == Query::Spectrum {
            notes.push("notions the simplified game cannot decide are left out".to_string());
        }
        t
    } else {
        full_table
    };

    let base = load_system(
        &config.input,
        config.input_format,
        &[&config.left, &config.right],
        config.max_states,
    )?;
    let lts = base
        .with_marks(config.divergence, config.completion)
        .map_err(DriverError::Preprocess)?;
    let left = lts.require_process(&config.left).map_err(DriverError::Preprocess)?;
    let right = lts.require_process(&config.right).map_err(DriverError::Preprocess)?;
    let pairs = [(left, right), (right, left)];
    let roots: Vec<(ProcId, ProcessSet)> = pairs
        .iter()
        .map(|(p, q)| (*p, ProcessSet::singleton(*q)))
        .collect();
    let solved = SolvedGame::new(&lts, config.variant, &roots, DEFAULT_MAX_POSITIONS)?;

    let mut preprocess = Vec::new();
    if config.divergence {
        preprocess.push("divergence");
    }
    if config.completion {
        preprocess.push("completion");
    }
    let name = |p: ProcId| lts.process_name(p).to_string();
    let front = |p: ProcId, q: ProcId| solved.front(p, &ProcessSet::singleton(q));

    let mut directions = Vec::new();
    let mut certificates = Vec::new();
    let mut equivalence = None;
    let mut verify_report = None;
    let satisfied;
    match &config.query {
        Query::Spectrum => {
            let mut vs = Vec::new();
            for (p, q) in pairs {
                let v = spectrum::verdicts(front(p, q), &table);
                let fr = spectrum::frontier(&v, &table);
                if config.certificates {
                    for n in &fr.coarsest_violated {
                        let notion = spectrum::find(&table, n)?;
                        certificates.extend(certificate_for(&solved, p, q, notion, &table));
                    }
                }
                directions.push(DirectionReport {
                    left: name(p),
                    right: name(q),
                    budgets: front(p, q).iter().map(Energy::to_string).collect(),
                    verdicts: Some(entries(&v)),
                    frontier: Some(fr),
                });
                vs.push(v);
            }
            let both = vs[0].conjoin(&vs[1]);
            satisfied = both.preordered.iter().all(|(_, b)| *b);
            equivalence = Some(entries(&both));
        }
        Query::Notion(_) => {
            let n = notion.expect("notion resolved above");
            let v = spectrum::verdicts(front(left, right), std::slice::from_ref(&n));
            satisfied = v.preordered[0].1;
            if !satisfied {
                certificates.extend(certificate_for(&solved, left, right, &n, &table));
            }
            directions.push(DirectionReport {
                left: name(left),
                right: name(right),
                budgets: front(left, right).iter().map(Energy::to_string).collect(),
                verdicts: Some(entries(&v)),
                frontier: None,
            });
        }
        Query::Budgets => {
            for (p, q) in pairs {
                directions.push(DirectionReport {
                    left: name(p),
                    right: name(q),
                    budgets: front(p, q).iter().map(Energy::to_string).collect(),
                    verdicts: None,
                    frontier: None,
                });
            }
            satisfied = true;
        }
        Query::Verify => {
            let r = verify(&solved, &pairs, &table)?;
            satisfied = r.mismatches.is_empty() && r.certificates_failed == 0;
            for (p, q) in pairs {
                directions.push(DirectionReport {
                    left: name(p),
                    right: name(q),
                    budgets: front(p, q).iter().map(Energy::to_string).collect(),
                    verdicts: None,
                    frontier: None,
                });
            }
            verify_report = Some(r);
        }
    }

    let report = Report {
        schema: SCHEMA,
        query: match &config.query {
            Query::Spectrum => "spectrum".to_string(),
            Query::Notion(n) => format!("notion:{n}"),
            Query::Budgets => "budgets".to_string(),
            Query::Verify => "verify".to_string(),
        },
        variant: config.variant.to_string(),
        system: SystemReport {
            path: config.input.display().to_string(),
            states: lts.num_processes(),
            transitions: lts.transition_count(),
            preprocess,
        },
        directions,
        equivalence,
        certificates,
        verify: verify_report,
        notes,
        satisfied,
    };
    let output = match config.output {
        OutputFormat::Structured => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Human => render_human(&report),
    };
    Ok(Outcome { satisfied, output })
}

fn names(v: &[VerdictEntry], holds: bool) -> String {
    let picked: Vec<&str> = v
        .iter()
        .filter(|e| e.holds == holds)
        .map(|e| e.notion.as_str())
        .collect();
    if picked.is_empty() {
        "-".to_string()
    } else {
        picked.join(" ")
    }
}

fn render_human(r: &Report) -> String {
    let mut out = String::new();
    let s = &r.system;
    let _ = write!(out, "system: {} ({} states, {} transitions", s.path, s.states, s.transitions);
    if !s.preprocess.is_empty() {
        let _ = write!(out, ", marked: {}", s.preprocess.join(","));
    }
    let _ = writeln!(out, ")\nvariant: {}", r.variant);
    for d in &r.directions {
        let _ = writeln!(out, "\n{} <= {}", d.left, d.right);
        let budgets = if d.budgets.is_empty() {
            "none".to_string()
        } else {
            d.budgets.join(" ")
        };
        let _ = writeln!(out, "  minimal budgets: {budgets}");
        if let Some(v) = &d.verdicts {
            let _ = writeln!(out, "  preordered: {}", names(v, true));
            let _ = writeln!(out, "  violated: {}", names(v, false));
        }
        if let Some(f) = &d.frontier {
            let or_dash = |v: &Vec<String>| if v.is_empty() { "-".to_string() } else { v.join(" ") };
            let _ = writeln!(out, "  finest preserved: {}", or_dash(&f.finest_preserved));
            let _ = writeln!(out, "  coarsest violated: {}", or_dash(&f.coarsest_violated));
        }
    }
    if let Some(eq) = &r.equivalence {
        let _ = writeln!(out, "\nequivalent under: {}", names(eq, true));
    }
    for c in &r.certificates {
        let _ = writeln!(
            out,
            "\ncertificate against {} ({} vs {}):\n  formula: {}\n  budget: {}\n  price: {}\n  defeats: {}\n  verified: {}",
            c.notion,
            c.left,
            c.right,
            c.formula,
            c.budget,
            c.price,
            c.defeats.join(" "),
            c.verified
        );
        if let Some(cv) = c.caveat {
            let _ = writeln!(out, "  caveat: {cv}");
        }
    }
    if let Some(v) = &r.verify {
        let _ = writeln!(
            out,
            "\noracle cross-check: {} grid points per direction, cap {}\n  mismatches: {}\n  certificates: {} checked, {} failed",
            v.grid_points,
            v.oracle_cap,
            v.mismatches.len(),
            v.certificates_checked,
            v.certificates_failed
        );
        for m in &v.mismatches {
            let _ = writeln!(out, "  mismatch: {m}");
        }
    }
    for n in &r.notes {
        let _ = writeln!(out, "\nnote: {n}");
    }
    let _ = writeln!(out, "\nresult: {}", if r.satisfied { "satisfied" } else { "not satisfied" });
    out
}

/// Expands a CCS file and renders it as a transition list. Definition
/// states keep their names; other states become `S1`, `S2`, ... and are
/// listed with their terms in leading comments.
pub fn dump_ccs(path: &Path, roots: &[String], max_states: usize) -> Result<String, DriverError> {
    let text = read(path)?;
    let shown = path.display().to_string();
    let prog = parse_ccs(&text).map_err(|source| DriverError::Ccs {
        path: shown.clone(),
        source,
    })?;
    let roots: Vec<&str> = if roots.is_empty() {
        prog.names().iter().map(String::as_str).collect()
    } else {
        roots.iter().map(String::as_str).collect()
    };
    let lts = expand_lts(&prog, &roots, max_states).map_err(|source| DriverError::Ccs {
        path: shown.clone(),
        source,
    })?;
    let mut fresh = 0;
    let renamed: Vec<String> = lts
        .processes()
        .map(|p| {
            let n = lts.process_name(p);
            if prog.get(n).is_some() {
                n.to_string()
            } else {
                fresh += 1;
                format!("S{fresh}")
            }
        })
        .collect();
    let mut out = String::new();
    for p in lts.processes() {
        if renamed[p.index()] != lts.process_name(p) {
            let _ = writeln!(out, "# {} = {}", renamed[p.index()], lts.process_name(p));
        }
    }
    for (s, a, t) in lts.all_transitions() {
        let _ = writeln!(out, "{} {} {}", renamed[s.index()], lts.action_name(a), renamed[t.index()]);
    }
    Ok(out)
}
