//! Equivalence spectroscopy for systems with silent steps.
//!
//! A pair of processes is compared by solving one energy game whose minimal
//! attacker budgets tell, for every notion in the weak spectrum at once,
//! whether the left process is preordered below the right one.

pub mod ccs;
pub mod driver;
pub mod energy;
pub mod game;
pub mod hml;
pub mod lts;
pub mod oracle;
pub mod spectroscopy;
pub mod spectrum;
pub mod strategy;
