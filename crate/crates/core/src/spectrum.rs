//! The notion table and verdicts read off budget fronts.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::energy::{BudgetFront, Coord, ExtendedEnergy};

const BUILTIN: &str = include_str!("../data/notions.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectrumError {
    #[error("notion table line {line}: {message}")]
    Table { line: usize, message: String },
    #[error("unknown notion `{0}`")]
    UnknownNotion(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Notion {
    pub name: String,
    pub coordinate: ExtendedEnergy,
    /// Coarser notions directly below this one.
    pub finer_than: Vec<String>,
    pub citation: String,
}

impl Notion {
    /// Whether the simplified game decides this notion: branching
    /// conjunctions must not come with finite nonzero conjunction counts.
    pub fn simplified_admissible(&self) -> bool {
        let c = &self.coordinate;
        c.get(2) == Coord::Finite(0)
            || (3..=5).all(|d| matches!(c.get(d), Coord::Finite(0) | Coord::Infinite))
    }
}

/// Parses the line format `name coordinate finer-than | citation`.
pub fn parse_table(text: &str) -> Result<Vec<Notion>, SpectrumError> {
    let mut out: Vec<Notion> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let err = |message: String| SpectrumError::Table { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (fields, citation) = match trimmed.split_once('|') {
            Some((f, c)) => (f, c.trim().to_string()),
            None => (trimmed, String::new()),
        };
        let parts: Vec<&str> = fields.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(err(format!("expected 3 fields before `|`, found {}", parts.len())));
        }
        let coordinate: ExtendedEnergy = parts[1]
            .parse()
            .map_err(|e| err(format!("bad coordinate: {e}")))?;
        let finer_than = if parts[2] == "-" {
            Vec::new()
        } else {
            parts[2].split(',').map(str::to_string).collect()
        };
        if out.iter().any(|n| n.name == parts[0]) {
            return Err(err(format!("duplicate notion `{}`", parts[0])));
        }
        out.push(Notion {
            name: parts[0].to_string(),
            coordinate,
            finer_than,
            citation,
        });
    }
    let names: BTreeSet<&str> = out.iter().map(|n| n.name.as_str()).collect();
    for n in &out {
        for m in &n.finer_than {
            if !names.contains(m.as_str()) {
                return Err(SpectrumError::Table {
                    line: 0,
                    message: format!("`{}` is finer than unknown notion `{m}`", n.name),
                });
            }
        }
    }
    Ok(out)
}

/// The built-in notion table.
pub fn builtin_table() -> Vec<Notion> {
    parse_table(BUILTIN).expect("built-in notion table is well-formed")
}

/// The notions satisfying `keep`, with edges recomputed as the covering of
/// coordinate dominance among them.
pub fn restrict(table: &[Notion], keep: impl Fn(&Notion) -> bool) -> Vec<Notion> {
    let kept: Vec<&Notion> = table.iter().filter(|n| keep(n)).collect();
    let lt = |a: &Notion, b: &Notion| a.coordinate.leq(&b.coordinate) && a.coordinate != b.coordinate;
    kept.iter()
        .map(|n| Notion {
            finer_than: kept
                .iter()
                .filter(|m| lt(m, n) && !kept.iter().any(|k| lt(m, k) && lt(k, n)))
                .map(|m| m.name.clone())
                .collect(),
            ..(*n).clone()
        })
        .collect()
}

pub fn find<'t>(table: &'t [Notion], name: &str) -> Result<&'t Notion, SpectrumError> {
    table
        .iter()
        .find(|n| n.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| SpectrumError::UnknownNotion(name.to_string()))
}

/// Per notion, whether the left process is preordered below the right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub preordered: Vec<(String, bool)>,
}

impl Verdict {
    pub fn get(&self, name: &str) -> Option<bool> {
        self.preordered
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| *b)
    }

    /// Both directions must hold for equivalence.
    pub fn conjoin(&self, other: &Verdict) -> Verdict {
        Verdict {
            preordered: self
                .preordered
                .iter()
                .zip(&other.preordered)
                .map(|((n, a), (_, b))| (n.clone(), *a && *b))
                .collect(),
        }
    }
}

/// A notion preorders the pair iff no budget in the front fits its coordinate.
pub fn verdicts(front: &BudgetFront, table: &[Notion]) -> Verdict {
    Verdict {
        preordered: table
            .iter()
            .map(|n| (n.name.clone(), !front.covers_extended(&n.coordinate)))
            .collect(),
    }
}

/// Strictly-finer relation as the transitive closure of the table edges.
fn strictly_finer(table: &[Notion]) -> HashMap<&str, BTreeSet<&str>> {
    let mut below: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    fn visit<'t>(
        n: &'t str,
        table: &'t [Notion],
        below: &mut HashMap<&'t str, BTreeSet<&'t str>>,
    ) -> BTreeSet<&'t str> {
        if let Some(s) = below.get(n) {
            return s.clone();
        }
        let notion = table.iter().find(|x| x.name == n).unwrap();
        let mut s = BTreeSet::new();
        for m in &notion.finer_than {
            s.insert(m.as_str());
            s.extend(visit(m, table, below));
        }
        below.insert(n, s.clone());
        s
    }
    for n in table {
        visit(&n.name, table, &mut below);
    }
    below
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Frontier {
    /// Preordering notions with no preordering notion above them.
    pub finest_preserved: Vec<String>,
    /// Violated notions with no violated notion below them.
    pub coarsest_violated: Vec<String>,
}

pub fn frontier(v: &Verdict, table: &[Notion]) -> Frontier {
    let below = strictly_finer(table);
    let holds = |n: &str| v.get(n).unwrap_or(false);
    let mut finest_preserved = Vec::new();
    let mut coarsest_violated = Vec::new();
    for n in table {
        let name = n.name.as_str();
        if holds(name) {
            let dominated = table
                .iter()
                .any(|m| holds(&m.name) && below[m.name.as_str()].contains(name));
            if !dominated {
                finest_preserved.push(n.name.clone());
            }
        } else if !below[name].iter().any(|m| !holds(m)) {
            coarsest_violated.push(n.name.clone());
        }
    }
    Frontier {
        finest_preserved,
        coarsest_violated,
    }
}
