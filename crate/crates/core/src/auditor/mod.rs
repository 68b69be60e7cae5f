//! Exact audits of the scheme by weighted exhaustive enumeration, plus a
//! Monte Carlo cross-check.
//!
//! Every exact figure here comes from running the protocol's own query
//! generator under an [`Enumerator`](crate::randomness::Enumerator) and summing
//! path weights. Closed forms are only ever compared against, never trusted.

mod cases;
mod census;
mod monte_carlo;
mod privacy;
mod rate;

use alloc::vec::Vec;

use num_bigint::BigInt;
use thiserror::Error;

use crate::distributions::PijTable;
use crate::params::SchemeParams;
use crate::protocol::{ProtocolError, QueryGenerator, SessionState};
use crate::query::{DemandSideInfo, QueryVector};
use crate::randomness::{EnumerationError, Enumerator, MassSum, Weight};
use crate::rational::{binomial, factorial, pow};

pub use cases::{verify_case_expressions, CaseCheck, CaseKind};
pub use census::{
    answer_appearance_probability, answer_set_census, appearance_by_support, AppearanceRow, Census, CensusRow,
    RolePattern, TypeSignature,
};
pub use monte_carlo::{monte_carlo_audit, MonteCarloConfig, MonteCarloReport};
pub use privacy::{
    check_privacy, closed_form_query_prob, exact_query_distribution, exact_query_distributions, PrivacyCheck,
    PrivacyFailure, PrivacyReport, QueryDistribution, ServerDistributions,
};
pub use rate::{capacity, check_recoverability, exact_rate, RateReport, RecoverabilityFailure, RecoverabilityReport};

/// Default ceiling on estimated enumeration branches.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Largest `N^K` for which per-vector tables are kept densely.
const MAX_QUERY_SPACE: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("estimated {estimate} enumeration branches exceeds the budget of {budget}")]
    BudgetExceeded { estimate: BigInt, budget: u64 },
    #[error("query space of {0} vectors is too large to tabulate")]
    QuerySpace(BigInt),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Estimated number of complete tapes for one `(W, S)` pair:
/// `(N-1)! (N-1)^M Σ_{P_{i,j} > 0} C(M,i) i! C(K-M-1,j) (N-1)^j · 2 · N!`.
pub fn estimate_branches(params: &SchemeParams) -> BigInt {
    let (n, k, m) = (params.n() as u64, params.k() as i64, params.m() as i64);
    let table = PijTable::new(params);
    let inner: BigInt = table
        .iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|((i, j), _)| {
            binomial(m, i as i64) * factorial(i as u64) * binomial(k - m - 1, j as i64) * pow(n - 1, j as u32)
        })
        .sum();
    factorial(n - 1) * pow(n - 1, m as u32) * inner * BigInt::from(2) * factorial(n)
}

/// Refuses when `enumerations` runs of [`estimate_branches`] exceed `budget`.
pub fn check_budget(params: &SchemeParams, budget: u64, enumerations: usize) -> Result<BigInt, AuditError> {
    let estimate = estimate_branches(params) * BigInt::from(enumerations);
    if estimate > BigInt::from(budget) {
        return Err(AuditError::BudgetExceeded { estimate, budget });
    }
    Ok(estimate)
}

/// Dense indexing of `[0:N-1]^K` in lexicographic order.
#[derive(Debug, Clone, Copy)]
pub(crate) struct QuerySpace {
    n: usize,
    k: usize,
    size: usize,
}

impl QuerySpace {
    pub(crate) fn new(params: &SchemeParams) -> Result<Self, AuditError> {
        let (n, k) = (params.n(), params.k());
        let size = (n as u64).checked_pow(k as u32).filter(|&s| s <= MAX_QUERY_SPACE as u64);
        match size {
            Some(size) => Ok(Self { n, k, size: size as usize }),
            None => Err(AuditError::QuerySpace(pow(n as u64, k as u32))),
        }
    }

    pub(crate) fn size(&self) -> usize {
        self.size
    }

    pub(crate) fn code(&self, v: &QueryVector) -> usize {
        v.entries().iter().fold(0, |acc, &x| acc * self.n + x as usize)
    }

    pub(crate) fn vector(&self, mut code: usize) -> QueryVector {
        let mut v = alloc::vec![0u32; self.k];
        for slot in v.iter_mut().rev() {
            *slot = (code % self.n) as u32;
            code /= self.n;
        }
        QueryVector(v)
    }
}

/// Enumerates every tape prefix up to (not including) `σ` and hands each
/// unpermuted session to `visit` with its exact weight.
pub(crate) fn for_each_unpermuted(
    generator: &QueryGenerator,
    ws: &DemandSideInfo,
    enumerator: Enumerator,
    mut visit: impl FnMut(&SessionState, Weight) -> Result<(), AuditError>,
) -> Result<crate::randomness::EnumerationSummary, AuditError> {
    let mut failure = None;
    let summary = enumerator.run(
        |e| generator.draw_unpermuted(ws, e),
        |state, w| {
            if failure.is_none() {
                if let Err(err) = visit(&state, w) {
                    failure = Some(err);
                }
            }
        },
    )?;
    match failure {
        Some(err) => Err(err),
        None => Ok(summary),
    }
}

/// `P(σ(n) = m)` for every server `n` and position `m`, as `out[n-1][m-1]`,
/// by enumerating the generator's own `σ` draw.
pub(crate) fn sigma_marginals(generator: &QueryGenerator) -> Result<Vec<Vec<Weight>>, AuditError> {
    let n = generator.params().n();
    let mut sums = alloc::vec![alloc::vec![MassSum::default(); n]; n];
    let mut overflow = false;
    Enumerator::new().run(
        |e| generator.draw_server_permutation(e),
        |sigma, w| {
            for (server, &m) in sigma.iter().enumerate() {
                overflow |= !sums[server][m - 1].add(w, 1);
            }
        },
    )?;
    if overflow {
        return Err(EnumerationError::WeightOverflow.into());
    }
    Ok(sums.into_iter().map(|row| row.into_iter().map(MassSum::reduced).collect()).collect())
}
