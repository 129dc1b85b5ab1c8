//! Energy vectors, extended energies, declining updates and budget fronts.
//!
//! Dimensions are numbered 1..=8 in all public constructors and in rendered
//! output; internally they are stored 0-based.
//!
//! 1. modal depth
//! 2. branching conjunction depth
//! 3. unstable conjunction depth
//! 4. stable conjunction depth
//! 5. immediate conjunction depth
//! 6. maximal modal depth of positive clauses
//! 7. maximal modal depth of negative clauses
//! 8. negation depth

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Number of energy dimensions.
pub const DIMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnergyError {
    #[error("malformed energy tuple `{0}`")]
    Malformed(String),
    #[error("infinite component in `{0}` where a finite energy is required")]
    Infinite(String),
    #[error("dimension {0} is outside 1..=8")]
    Dimension(usize),
    #[error("relative update {0} is not declining (must be -1 or 0)")]
    NotDeclining(i32),
    #[error("min-selection at dimension {0} must include that dimension")]
    MinSelectMissingSelf(usize),
}

/// A finite energy: a point of ℕ^8.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Energy(pub [u32; DIMS]);

impl Energy {
    pub const ZERO: Energy = Energy([0; DIMS]);

    pub const fn new(components: [u32; DIMS]) -> Self {
        Energy(components)
    }

    /// Unit vector ê_i, `dim` is 1-based.
    pub fn unit(dim: usize) -> Self {
        assert!((1..=DIMS).contains(&dim), "dimension {dim} out of range");
        let mut c = [0; DIMS];
        c[dim - 1] = 1;
        Energy(c)
    }

    /// Component for 1-based dimension `dim`.
    pub fn get(&self, dim: usize) -> u32 {
        self.0[dim - 1]
    }

    pub fn components(&self) -> &[u32; DIMS] {
        &self.0
    }

    /// Componentwise comparison.
    pub fn leq(&self, other: &Energy) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// Componentwise maximum.
    pub fn sup(&self, other: &Energy) -> Energy {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(other.0.iter()) {
            *x = (*x).max(*y);
        }
        Energy(c)
    }

    /// Supremum of a collection; the empty supremum is 𝟎.
    pub fn sup_all<'a>(es: impl IntoIterator<Item = &'a Energy>) -> Energy {
        es.into_iter().fold(Energy::ZERO, |acc, e| acc.sup(e))
    }

    /// Componentwise addition.
    pub fn plus(&self, other: &Energy) -> Energy {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(other.0.iter()) {
            *x += *y;
        }
        Energy(c)
    }

    /// Returns a copy where 1-based dimension `dim` is raised to at least `value`.
    pub fn with_at_least(&self, dim: usize, value: u32) -> Energy {
        let mut c = self.0;
        c[dim - 1] = c[dim - 1].max(value);
        Energy(c)
    }

    pub fn to_extended(self) -> ExtendedEnergy {
        ExtendedEnergy(self.0.map(Coord::Finite))
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Energy {
    type Err = EnergyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ext: ExtendedEnergy = s.parse()?;
        ext.to_finite().ok_or_else(|| EnergyError::Infinite(s.to_string()))
    }
}

/// A component of an extended energy: a natural number or ∞.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    Finite(u32),
    Infinite,
}

impl Coord {
    pub fn is_infinite(self) -> bool {
        matches!(self, Coord::Infinite)
    }

    /// `n ≤ self` for a natural number `n`.
    pub fn admits(self, n: u32) -> bool {
        match self {
            Coord::Finite(m) => n <= m,
            Coord::Infinite => true,
        }
    }

    /// ∞ + r = ∞; `None` if a finite value would turn negative.
    pub fn add_relative(self, r: i32) -> Option<Coord> {
        match self {
            Coord::Infinite => Some(Coord::Infinite),
            Coord::Finite(n) => {
                let v = n as i64 + r as i64;
                (v >= 0).then_some(Coord::Finite(v as u32))
            }
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Finite(n) => write!(f, "{n}"),
            Coord::Infinite => write!(f, "∞"),
        }
    }
}

impl fmt::Debug for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A point of (ℕ ∪ {∞})^8, used for notion coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedEnergy(pub [Coord; DIMS]);

impl ExtendedEnergy {
    pub const INFINITE: ExtendedEnergy = ExtendedEnergy([Coord::Infinite; DIMS]);

    pub fn get(&self, dim: usize) -> Coord {
        self.0[dim - 1]
    }

    pub fn leq(&self, other: &ExtendedEnergy) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn sup(&self, other: &ExtendedEnergy) -> ExtendedEnergy {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(other.0.iter()) {
            *x = (*x).max(*y);
        }
        ExtendedEnergy(c)
    }

    pub fn sup_all<'a>(es: impl IntoIterator<Item = &'a ExtendedEnergy>) -> ExtendedEnergy {
        es.into_iter()
            .fold(Energy::ZERO.to_extended(), |acc, e| acc.sup(e))
    }

    /// True iff the finite energy `e` lies below this coordinate.
    pub fn dominates(&self, e: &Energy) -> bool {
        self.0.iter().zip(e.0.iter()).all(|(c, n)| c.admits(*n))
    }

    pub fn to_finite(self) -> Option<Energy> {
        let mut out = [0; DIMS];
        for (o, c) in out.iter_mut().zip(self.0.iter()) {
            match c {
                Coord::Finite(n) => *o = *n,
                Coord::Infinite => return None,
            }
        }
        Some(Energy(out))
    }

    /// Replaces every ∞ by `cap`.
    pub fn capped(&self, cap: u32) -> Energy {
        Energy(self.0.map(|c| match c {
            Coord::Finite(n) => n,
            Coord::Infinite => cap,
        }))
    }

    /// Applies an update with ∞-arithmetic: ∞ + r = ∞, and minimum
    /// selection ignores ∞ unless every selected component is ∞.
    pub fn apply(&self, u: &Update) -> Option<ExtendedEnergy> {
        let mut out = self.0;
        for (k, entry) in u.0.iter().enumerate() {
            out[k] = match entry {
                UpdateEntry::Relative(r) => self.0[k].add_relative(*r as i32)?,
                UpdateEntry::MinSelect(mask) => dims_of(*mask)
                    .map(|d| self.0[d])
                    .min()
                    .expect("min-selection set is nonempty"),
            };
        }
        Some(ExtendedEnergy(out))
    }
}

impl From<Energy> for ExtendedEnergy {
    fn from(e: Energy) -> Self {
        e.to_extended()
    }
}

impl fmt::Display for ExtendedEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for ExtendedEnergy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExtendedEnergy {
    type Err = EnergyError;

    /// Accepts `(c1,...,c8)` where each `ci` is a natural number, `∞`, `inf` or `oo`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EnergyError::Malformed(s.to_string());
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != DIMS {
            return Err(bad());
        }
        let mut out = [Coord::Finite(0); DIMS];
        for (o, p) in out.iter_mut().zip(parts) {
            *o = match p {
                "∞" | "inf" | "oo" => Coord::Infinite,
                n => Coord::Finite(n.parse().map_err(|_| bad())?),
            };
        }
        Ok(ExtendedEnergy(out))
    }
}

/// One component of an energy update.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum UpdateEntry {
    /// Add `r`, where `r ∈ {-1, 0}`.
    Relative(i8),
    /// Take the minimum over the dimensions in the bitmask (bit `d` = 0-based dim `d`).
    MinSelect(u8),
}

fn dims_of(mask: u8) -> impl Iterator<Item = usize> {
    (0..DIMS).filter(move |d| mask & (1 << d) != 0)
}

/// A declining energy update.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Update(pub(crate) [UpdateEntry; DIMS]);

impl Update {
    pub const ZERO: Update = Update([UpdateEntry::Relative(0); DIMS]);

    /// Validated constructor.
    pub fn new(entries: [UpdateEntry; DIMS]) -> Result<Self, EnergyError> {
        for (k, e) in entries.iter().enumerate() {
            match *e {
                UpdateEntry::Relative(r) if r == 0 || r == -1 => {}
                UpdateEntry::Relative(r) => return Err(EnergyError::NotDeclining(r as i32)),
                UpdateEntry::MinSelect(mask) => {
                    if mask & (1 << k) == 0 {
                        return Err(EnergyError::MinSelectMissingSelf(k + 1));
                    }
                }
            }
        }
        Ok(Update(entries))
    }

    /// Decrements every listed (1-based) dimension by one.
    pub fn decrement(dims: &[usize]) -> Self {
        let mut u = Update::ZERO;
        for &d in dims {
            assert!((1..=DIMS).contains(&d), "dimension {d} out of range");
            u.0[d - 1] = UpdateEntry::Relative(-1);
        }
        u
    }

    /// Sets 1-based dimension `dim` to the minimum over the 1-based dimensions in `over`.
    pub fn with_min_select(mut self, dim: usize, over: &[usize]) -> Self {
        let mut mask = 0u8;
        for &d in over {
            assert!((1..=DIMS).contains(&d), "dimension {d} out of range");
            mask |= 1 << (d - 1);
        }
        assert!(mask & (1 << (dim - 1)) != 0, "min-selection must contain its own dimension");
        self.0[dim - 1] = UpdateEntry::MinSelect(mask);
        self
    }

    pub fn entries(&self) -> &[UpdateEntry; DIMS] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        *self == Update::ZERO
    }

    /// Applies the update; `None` if any component would turn negative.
    pub fn apply(&self, e: &Energy) -> Option<Energy> {
        let mut out = [0u32; DIMS];
        for (k, entry) in self.0.iter().enumerate() {
            out[k] = match entry {
                UpdateEntry::Relative(r) => {
                    if *r < 0 {
                        e.0[k].checked_sub(r.unsigned_abs() as u32)?
                    } else {
                        e.0[k]
                    }
                }
                UpdateEntry::MinSelect(mask) => dims_of(*mask)
                    .map(|d| e.0[d])
                    .min()
                    .expect("min-selection set is nonempty"),
            };
        }
        Some(Energy(out))
    }

    /// The least `e` such that `apply(e)` is defined and `apply(e) ≥ target`.
    pub fn inverse(&self, target: &Energy) -> Energy {
        let mut out = [0u32; DIMS];
        for (k, entry) in self.0.iter().enumerate() {
            match entry {
                UpdateEntry::Relative(r) => {
                    let need = target.0[k] + r.unsigned_abs() as u32;
                    out[k] = out[k].max(need);
                }
                UpdateEntry::MinSelect(mask) => {
                    for d in dims_of(*mask) {
                        out[d] = out[d].max(target.0[k]);
                    }
                }
            }
        }
        Energy(out)
    }
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match e {
                UpdateEntry::Relative(r) => write!(f, "{r}")?,
                UpdateEntry::MinSelect(mask) => {
                    let ds: Vec<String> = dims_of(*mask).map(|d| (d + 1).to_string()).collect();
                    write!(f, "min{{{}}}", ds.join(","))?;
                }
            }
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `upd(e, u)` as a free function.
pub fn apply_update(e: &Energy, u: &Update) -> Option<Energy> {
    u.apply(e)
}

/// Minimal preimage of `target` under `u`.
pub fn inverse_update(target: &Energy, u: &Update) -> Energy {
    u.inverse(target)
}

/// A finite antichain of energies denoting its upward closure.
///
/// Elements are kept sorted (lexicographically), so two fronts denoting the
/// same set compare equal.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BudgetFront {
    minima: Vec<Energy>,
}

impl BudgetFront {
    pub fn new() -> Self {
        BudgetFront { minima: Vec::new() }
    }

    /// The front `{𝟎}`, denoting every energy.
    pub fn everything() -> Self {
        BudgetFront {
            minima: vec![Energy::ZERO],
        }
    }

    pub fn from_energies(es: impl IntoIterator<Item = Energy>) -> Self {
        let mut f = BudgetFront::new();
        for e in es {
            f.insert(e);
        }
        f
    }

    /// Inserts `e`, returning whether the denoted set grew.
    pub fn insert(&mut self, e: Energy) -> bool {
        if self.minima.iter().any(|b| b.leq(&e)) {
            return false;
        }
        self.minima.retain(|b| !e.leq(b));
        let pos = self.minima.binary_search(&e).unwrap_err();
        self.minima.insert(pos, e);
        true
    }

    /// True iff some minimum lies below `e`.
    pub fn covers(&self, e: &Energy) -> bool {
        self.minima.iter().any(|b| b.leq(e))
    }

    /// True iff some minimum lies below the extended energy `e`.
    pub fn covers_extended(&self, e: &ExtendedEnergy) -> bool {
        self.minima.iter().any(|b| e.dominates(b))
    }

    pub fn minima(&self) -> &[Energy] {
        &self.minima
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Energy> {
        self.minima.iter()
    }

    pub fn len(&self) -> usize {
        self.minima.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minima.is_empty()
    }
}

impl fmt::Display for BudgetFront {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.minima.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for BudgetFront {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Inserts `e` into `front`, functional style.
pub fn front_insert(mut front: BudgetFront, e: Energy) -> BudgetFront {
    front.insert(e);
    front
}
