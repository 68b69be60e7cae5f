//! Capacity, the scheme's exact rate, and exhaustive recoverability.

use alloc::vec::Vec;

use crate::params::SchemeParams;
use crate::protocol::{answer_query, decode, MessageStore, QueryGenerator, SessionState};
use crate::query::DemandSideInfo;
use crate::randomness::Enumerator;
use crate::rational::{pow, Rational};

use super::privacy::distributions_unchecked;
use super::{check_budget, AuditError};

/// `(N^{K-M} - N^{K-M-1}) / (N^{K-M} - 1)`.
pub fn capacity(params: &SchemeParams) -> Rational {
    let n = params.n() as u64;
    let e = (params.k() - params.m()) as u32;
    Rational::new(pow(n, e) - pow(n, e - 1), pow(n, e) - 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateReport {
    pub params: SchemeParams,
    /// Expected number of non-empty answers, i.e. downloaded sub-packets.
    pub expected_subpackets: Rational,
    /// Expected downloaded symbols.
    pub expected_symbols: Rational,
    pub rate: Rational,
    pub capacity: Rational,
}

impl RateReport {
    pub fn achieves_capacity(&self) -> bool {
        self.rate == self.capacity
    }
}

/// `L / E[downloaded symbols]` for the canonical `(W, S)`, by enumeration.
pub fn exact_rate(params: &SchemeParams, budget: u64) -> Result<RateReport, AuditError> {
    check_budget(params, budget, 1)?;
    let generator = QueryGenerator::new(params)?;
    let dists = distributions_unchecked(&generator, &DemandSideInfo::canonical(params))?;
    Ok(rate_report(params, dists.expected_nonzero))
}

pub(crate) fn rate_report(params: &SchemeParams, expected_subpackets: Rational) -> RateReport {
    let expected_symbols = &expected_subpackets * &Rational::from_integer(params.subpacket_len() as i64);
    RateReport {
        params: *params,
        rate: Rational::from_integer(params.l() as i64) / &expected_symbols,
        expected_subpackets,
        expected_symbols,
        capacity: capacity(params),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoverabilityFailure {
    pub state: SessionState,
    pub fill_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoverabilityReport {
    pub params: SchemeParams,
    pub pairs: usize,
    /// Complete tapes enumerated, summed over pairs.
    pub paths: u64,
    pub fills: usize,
    pub runs: u64,
    pub successes: u64,
    /// The first few failures.
    pub failures: Vec<RecoverabilityFailure>,
}

impl RecoverabilityReport {
    pub fn passed(&self) -> bool {
        self.successes == self.runs
    }
}

/// Decodes every complete tape of every `(W, S)` pair against `fills` random
/// stores seeded `seed, seed + 1, ...`.
pub fn check_recoverability(
    params: &SchemeParams,
    fills: usize,
    seed: u64,
    budget: u64,
) -> Result<RecoverabilityReport, AuditError> {
    let pairs = DemandSideInfo::all(params);
    check_budget(params, budget, pairs.len())?;
    let generator = QueryGenerator::new(params)?;
    let stores: Vec<(u64, MessageStore)> = (0..fills as u64)
        .map(|f| (seed.wrapping_add(f), MessageStore::random(*params, seed.wrapping_add(f))))
        .collect();
    let mut report = RecoverabilityReport {
        params: *params,
        pairs: pairs.len(),
        paths: 0,
        fills,
        runs: 0,
        successes: 0,
        failures: Vec::new(),
    };
    let mut error = None;
    for ws in &pairs {
        let sides: Vec<Vec<_>> = stores
            .iter()
            .map(|(_, store)| ws.side().iter().map(|&i| store.messages()[i - 1].clone()).collect())
            .collect();
        let summary = Enumerator::new().run(
            |e| generator.generate(ws, e),
            |(queries, state), _| {
                for ((fill_seed, store), side) in stores.iter().zip(&sides) {
                    let outcome = queries
                        .iter()
                        .map(|v| answer_query(v, store))
                        .collect::<Result<Vec<_>, _>>()
                        .and_then(|answers| decode(&answers, &state, side, params));
                    report.runs += 1;
                    match outcome {
                        Ok(x) if Some(&x) == store.get(ws.demand()) => report.successes += 1,
                        Ok(_) => {
                            if report.failures.len() < 10 {
                                report
                                    .failures
                                    .push(RecoverabilityFailure { state: state.clone(), fill_seed: *fill_seed });
                            }
                        }
                        Err(e) => {
                            error.get_or_insert(e);
                        }
                    }
                }
            },
        )?;
        if let Some(e) = error.take() {
            return Err(e.into());
        }
        report.paths += summary.paths;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auditor::DEFAULT_BUDGET;

    fn params(n: usize, k: usize, m: usize) -> SchemeParams {
        SchemeParams::new(n, k, m, n - 1, 2).unwrap()
    }

    #[test]
    fn capacities() {
        assert_eq!(capacity(&params(4, 5, 2)), Rational::new(16, 21));
        assert_eq!(capacity(&params(3, 4, 1)), Rational::new(9, 13));
        assert_eq!(capacity(&params(2, 3, 1)), Rational::new(2, 3));
        for (n, k) in [(2, 2), (3, 3), (4, 3), (5, 5), (8, 8)] {
            assert!(capacity(&params(n, k, k - 1)).is_one());
        }
    }

    #[test]
    fn rates_match_capacity() {
        let r = exact_rate(&params(4, 5, 2), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.expected_subpackets, Rational::new(63, 16));
        assert_eq!(r.rate, Rational::new(16, 21));
        assert!(r.achieves_capacity());
        assert_eq!(exact_rate(&params(2, 3, 1), DEFAULT_BUDGET).unwrap().rate, Rational::new(2, 3));
        let r = exact_rate(&SchemeParams::new(3, 3, 2, 4, 3).unwrap(), DEFAULT_BUDGET).unwrap();
        assert!(r.rate.is_one());
    }

    #[test]
    fn recoverability_small() {
        let r = check_recoverability(&params(2, 3, 1), 3, 0, DEFAULT_BUDGET).unwrap();
        assert!(r.passed());
        assert_eq!(r.pairs, 6);
        assert_eq!(r.runs, r.paths * 3);
        let r = check_recoverability(&SchemeParams::new(3, 4, 1, 4, 3).unwrap(), 2, 9, DEFAULT_BUDGET).unwrap();
        assert!(r.passed());
    }
}
