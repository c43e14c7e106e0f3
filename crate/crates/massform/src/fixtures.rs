//! Bundled genus descriptors.
//!
//! Everything the CLI and the verification suites consume ships inside the
//! binary: the five Waldspurger genera with their curve models and exact
//! L-value tables, the twenty-five small-level two-class pairs, the
//! five-dimensional example pair, and the standard genera in dimensions
//! 5, 9 and 13. Fixtures are plain [`GenusDescriptor`] JSON, so any of them
//! also serves as a template for user-supplied `--genus` files.

use crate::error::{Error, Result};
use crate::siegel::GenusDescriptor;

/// The five diagonal genera x² + y² + pz² that carry curve models and exact
/// central L-value tables.
pub const WALDSPURGER_GENERA: [&str; 5] = ["p7", "p11", "p13", "p17", "p29"];

/// Single- and multi-class genera of sums of squares in dimensions 5, 9, 13.
pub const STANDARD_GENERA: [&str; 3] = ["d5_std", "d9_std", "d13_std"];

/// One row of the small-level pair registry.
#[derive(Debug, Clone, Copy)]
pub struct PairEntry {
    /// Fixture name, loadable with [`load`].
    pub name: &'static str,
    /// Common level of the two classes.
    pub level: u64,
    /// Label of the curve whose traces match the Shimura lift, when one of
    /// the bundled models does.
    pub curve: Option<&'static str>,
}

/// The twenty-five two-class ternary pairs of level ≤ 100, in ascending
/// level order. Four of them double as Waldspurger genera (p29, at level
/// 116, is bundled separately). The level-64 pair is the one whose lift
/// eigensystem is ±(p + 1) and matches no curve.
pub const PAIR_TABLE: [PairEntry; 25] = [
    PairEntry { name: "p7", level: 28, curve: Some("14a") },
    PairEntry { name: "level40a", level: 40, curve: Some("20a") },
    PairEntry { name: "level40b", level: 40, curve: Some("20a") },
    PairEntry { name: "p11", level: 44, curve: Some("11a") },
    PairEntry { name: "level48", level: 48, curve: Some("24a") },
    PairEntry { name: "p13", level: 52, curve: Some("26b") },
    PairEntry { name: "level52b", level: 52, curve: Some("26a") },
    PairEntry { name: "level56", level: 56, curve: Some("14a") },
    PairEntry { name: "level60a", level: 60, curve: Some("15a") },
    PairEntry { name: "level60b", level: 60, curve: Some("30a") },
    PairEntry { name: "level64", level: 64, curve: None },
    PairEntry { name: "level68a", level: 68, curve: Some("17a") },
    PairEntry { name: "p17", level: 68, curve: Some("34a") },
    PairEntry { name: "level72a", level: 72, curve: Some("36a") },
    PairEntry { name: "level72b", level: 72, curve: Some("36a") },
    PairEntry { name: "level76", level: 76, curve: Some("38b") },
    PairEntry { name: "level80", level: 80, curve: Some("20a") },
    PairEntry { name: "level84a", level: 84, curve: Some("21a") },
    PairEntry { name: "level84b", level: 84, curve: Some("14a") },
    PairEntry { name: "level84c", level: 84, curve: Some("42a") },
    PairEntry { name: "level88a", level: 88, curve: Some("44a") },
    PairEntry { name: "level88b", level: 88, curve: Some("11a") },
    PairEntry { name: "level96", level: 96, curve: Some("24a") },
    PairEntry { name: "level100a", level: 100, curve: Some("50b") },
    PairEntry { name: "level100b", level: 100, curve: Some("50b") },
];

macro_rules! registry {
    ($($name:literal),* $(,)?) => {
        const REGISTRY: [(&str, &str); 30] = [
            $(($name, include_str!(concat!("../fixtures/", $name, ".json")))),*
        ];
    };
}

registry![
    "p7", "p11", "p13", "p17", "p29", "ex12", "d5_std", "d9_std", "d13_std", "level40a",
    "level40b", "level48", "level52b", "level56", "level60a", "level60b", "level64", "level68a",
    "level72a", "level72b", "level76", "level80", "level84a", "level84b", "level84c", "level88a",
    "level88b", "level96", "level100a", "level100b",
];

/// Names of all bundled fixtures, in registry order.
pub fn names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(n, _)| *n)
}

/// Raw JSON text of a bundled fixture.
pub fn source(name: &str) -> Option<&'static str> {
    REGISTRY.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parse a bundled fixture into a ready-to-use descriptor.
pub fn load(name: &str) -> Result<GenusDescriptor> {
    let text = source(name)
        .ok_or_else(|| Error::InvalidInput(format!("no bundled fixture named {name:?}")))?;
    GenusDescriptor::from_json(text)
}
