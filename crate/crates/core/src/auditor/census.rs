//! Census of answer sets by type, and the probability that a given coded
//! combination shows up among a session's answers.
//!
//! A concrete answer set is `u_1` followed by `u_2, ..., u_N` ordered by their
//! entries outside the demand coordinate (stable, so ties keep `π` order). Two
//! sessions give the same concrete set exactly when they download the same
//! combinations with the demand sub-packets in the same roles. Its type is the
//! multiset of role patterns: which messages each answer touches, with the
//! demand labelled `A`, side information `B, C, ...` in index order and then
//! the interference messages.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::params::SchemeParams;
use crate::protocol::QueryGenerator;
use crate::query::{DemandSideInfo, QueryVector};
use crate::randomness::{DrawKind, EnumerationError, Enumerator, MassSum, Weight};
use crate::rational::Rational;

use super::privacy::closed_form_query_prob;
use super::{check_budget, for_each_unpermuted, AuditError, QuerySpace};

/// Which messages one answer touches, relative to `(W, S, interference)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RolePattern {
    pub demand: bool,
    /// 0-based ranks within `S`.
    pub side: Vec<usize>,
    /// 0-based ranks within the interference messages.
    pub interference: Vec<usize>,
}

impl RolePattern {
    pub fn of(v: &QueryVector, ws: &DemandSideInfo, interference: &[usize]) -> Self {
        let ranks = |set: &[usize]| set.iter().enumerate().filter(|(_, &i)| v.at(i) != 0).map(|(r, _)| r).collect();
        Self { demand: v.at(ws.demand()) != 0, side: ranks(ws.side()), interference: ranks(interference) }
    }

    pub fn size(&self) -> usize {
        usize::from(self.demand) + self.side.len() + self.interference.len()
    }

    /// Letters `A` (demand), then side information, then interference; `0`
    /// for the empty answer.
    pub fn label(&self, m: usize) -> String {
        if self.size() == 0 {
            return String::from("0");
        }
        let letter = |offset: usize| char::from_u32('A' as u32 + offset as u32).unwrap_or('?');
        let mut out = String::new();
        if self.demand {
            out.push('A');
        }
        out.extend(self.side.iter().map(|&r| letter(1 + r)));
        out.extend(self.interference.iter().map(|&r| letter(1 + m + r)));
        out
    }
}

/// The multiset of an answer set's role patterns, as sorted labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeSignature(pub Vec<String>);

impl TypeSignature {
    pub fn new(mut labels: Vec<String>) -> Self {
        labels.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        Self(labels)
    }

    fn of(set: &[QueryVector], ws: &DemandSideInfo, interference: &[usize], m: usize) -> Self {
        Self::new(set.iter().map(|v| RolePattern::of(v, ws, interference).label(m)).collect())
    }
}

impl fmt::Display for TypeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(l)?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub signature: TypeSignature,
    /// Probability of each concrete set of this type (the mean if not uniform).
    pub probability: Rational,
    pub count: usize,
    pub uniform: bool,
}

impl CensusRow {
    pub fn mass(&self) -> Rational {
        &self.probability * &Rational::from_integer(self.count as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub params: SchemeParams,
    pub ws: DemandSideInfo,
    /// Sorted by signature.
    pub rows: Vec<CensusRow>,
    /// `Σ probability · count`.
    pub total: Rational,
}

/// Joint distribution over answer sets, grouped by type.
///
/// Coin outcomes of probability zero are enumerated as weight-0 paths, so types
/// that the scheme never produces still appear with probability 0.
pub fn answer_set_census(ws: &DemandSideInfo, params: &SchemeParams, budget: u64) -> Result<Census, AuditError> {
    check_budget(params, budget, 1)?;
    let generator = QueryGenerator::new(params)?;
    let k = params.k();
    let demand = ws.demand();
    let interference = ws.interference(params);

    let mut sets: BTreeMap<Vec<QueryVector>, MassSum> = BTreeMap::new();
    let enumerator = Enumerator::new().retain_zero_weight(DrawKind::Coin);
    for_each_unpermuted(&generator, ws, enumerator, |state, w| {
        let mut u = state.unpermuted(k);
        let without_demand = |v: &QueryVector| {
            let mut e = v.0.clone();
            e[demand - 1] = 0;
            e
        };
        u[1..].sort_by_cached_key(without_demand);
        if sets.entry(u).or_default().add(w, 1) {
            Ok(())
        } else {
            Err(EnumerationError::WeightOverflow.into())
        }
    })?;

    let mut groups: BTreeMap<TypeSignature, Vec<Weight>> = BTreeMap::new();
    for (set, mass) in sets {
        groups.entry(TypeSignature::of(&set, ws, &interference, params.m())).or_default().push(mass.reduced());
    }
    let rows: Vec<CensusRow> = groups
        .into_iter()
        .map(|(signature, masses)| {
            let uniform = masses.iter().all(|w| *w == masses[0]);
            let total: Rational = masses.iter().map(|w| w.to_rational()).sum();
            let count = masses.len();
            CensusRow { signature, probability: total / Rational::from_integer(count as i64), count, uniform }
        })
        .collect();
    let total = rows.iter().map(CensusRow::mass).sum();
    Ok(Census { params: *params, ws: ws.clone(), rows, total })
}

/// Mass that each vector appears among the `N` answers, densely by code.
fn appearance_table(
    ws: &DemandSideInfo,
    params: &SchemeParams,
    budget: u64,
) -> Result<(QuerySpace, Vec<Weight>), AuditError> {
    check_budget(params, budget, 1)?;
    let generator = QueryGenerator::new(params)?;
    let space = QuerySpace::new(params)?;
    let mut sums = alloc::vec![MassSum::default(); space.size()];
    for_each_unpermuted(&generator, ws, Enumerator::new(), |state, w| {
        let mut codes: Vec<usize> = state.unpermuted(params.k()).iter().map(|v| space.code(v)).collect();
        codes.sort_unstable();
        codes.dedup();
        for c in codes {
            if !sums[c].add(w, 1) {
                return Err(EnumerationError::WeightOverflow.into());
            }
        }
        Ok(())
    })?;
    Ok((space, sums.into_iter().map(MassSum::reduced).collect()))
}

/// Probability that some server's query equals `v`.
pub fn answer_appearance_probability(
    v: &QueryVector,
    ws: &DemandSideInfo,
    params: &SchemeParams,
    budget: u64,
) -> Result<Rational, AuditError> {
    let (space, table) = appearance_table(ws, params, budget)?;
    Ok(table[space.code(v)].to_rational())
}

/// Appearance probability of the vectors with one support size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppearanceRow {
    pub support: usize,
    pub vectors: usize,
    /// The common value, or `None` if vectors of this size differ.
    pub probability: Option<Rational>,
    /// `N × closed_form_query_prob(s)`.
    pub expected: Rational,
}

/// One row per support size that carries positive mass.
pub fn appearance_by_support(
    ws: &DemandSideInfo,
    params: &SchemeParams,
    budget: u64,
) -> Result<Vec<AppearanceRow>, AuditError> {
    let (space, table) = appearance_table(ws, params, budget)?;
    let mut by_size: BTreeMap<usize, Vec<Weight>> = BTreeMap::new();
    for (code, w) in table.into_iter().enumerate() {
        by_size.entry(space.vector(code).support_size()).or_default().push(w);
    }
    let n = Rational::from_integer(params.n() as i64);
    Ok(by_size
        .into_iter()
        .filter(|(_, ws)| ws.iter().any(|w| !w.is_zero()))
        .map(|(support, masses)| AppearanceRow {
            support,
            vectors: masses.len(),
            probability: masses.iter().all(|w| *w == masses[0]).then(|| masses[0].to_rational()),
            expected: &n * &closed_form_query_prob(support, params),
        })
        .collect())
}
