//! Reference answer-set census for `(N, K, M) = (4, 5, 2)`.
//!
//! Fixture version 1. Rows are the published answer-set types: `A` is the
//! demand, `B`, `C` the side information, `D`, `E` the interference messages,
//! and `0` the empty answer. Probabilities are per concrete answer set.
//!
//! The published text also gives the appearance probability of a single
//! 5-sub-packet answer as 13/1296. Enumeration gives 1/216, which is what the
//! per-server query probability (1/864, times four servers) requires, so that
//! entry is carried as informational and never fails a run.

use pirpsi_core::auditor::TypeSignature;
use pirpsi_core::Rational;

pub const FIXTURE_VERSION: u32 = 1;

/// `(N, K, M)` the fixture applies to.
pub const PARAMS: (usize, usize, usize) = (4, 5, 2);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoldenRow {
    /// Published type number.
    pub number: usize,
    pub labels: [&'static str; 4],
    pub probability: (u64, u64),
    pub count: usize,
}

impl GoldenRow {
    pub fn signature(&self) -> TypeSignature {
        TypeSignature::new(self.labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn probability(&self) -> Rational {
        Rational::new(self.probability.0, self.probability.1)
    }
}

const fn row(number: usize, labels: [&'static str; 4], probability: (u64, u64), count: usize) -> GoldenRow {
    GoldenRow { number, labels, probability, count }
}

pub const TABLE: [GoldenRow; 11] = [
    row(0, ["0", "ABC", "ABC", "ABC"], (1, 864), 54),
    row(1, ["BDE", "ABCDE", "ABCDE", "ABCDE"], (1, 5184), 486),
    row(2, ["BDE", "ADE", "ABCDE", "ABCDE"], (1, 5184), 486),
    row(3, ["CDE", "ABCDE", "ABCDE", "ABCDE"], (1, 5184), 486),
    row(4, ["CDE", "ADE", "ABCDE", "ABCDE"], (1, 5184), 486),
    row(5, ["BCD", "ABCD", "ABCD", "ABCD"], (0, 1), 162),
    row(6, ["BCD", "ABD", "ACD", "ABCD"], (1, 864), 162),
    row(7, ["BCE", "ABCE", "ABCE", "ABCE"], (0, 1), 162),
    row(8, ["BCE", "ABE", "ACE", "ABCE"], (1, 864), 162),
    row(9, ["BCDE", "ABCDE", "ABCDE", "ABCDE"], (0, 1), 486),
    row(10, ["BCDE", "ABDE", "ACDE", "ABCDE"], (1, 2592), 486),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Standing {
    /// Must match the enumeration.
    Binding,
    /// Reported next to the enumerated value; a mismatch is not a failure.
    Informational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoldenAppearance {
    /// Sub-packets in the answer.
    pub support: usize,
    pub probability: (u64, u64),
    pub standing: Standing,
}

impl GoldenAppearance {
    pub fn probability(&self) -> Rational {
        Rational::new(self.probability.0, self.probability.1)
    }
}

pub const APPEARANCE: [GoldenAppearance; 3] = [
    GoldenAppearance { support: 3, probability: (1, 144), standing: Standing::Binding },
    GoldenAppearance { support: 4, probability: (1, 432), standing: Standing::Binding },
    GoldenAppearance { support: 5, probability: (13, 1296), standing: Standing::Informational },
];
