//! Exact per-server query distributions and the privacy check.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::distributions::MTable;
use crate::params::SchemeParams;
use crate::protocol::QueryGenerator;
use crate::query::{DemandSideInfo, QueryVector};
use crate::randomness::{EnumerationError, Enumerator, MassSum, Weight};
use crate::rational::{pow, Rational};

use super::{check_budget, for_each_unpermuted, sigma_marginals, AuditError, QuerySpace};

/// `P(Q_n = v | W, S)` for one server, over vectors of positive mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryDistribution {
    pub params: SchemeParams,
    /// 1-based server index.
    pub server: usize,
    pub ws: DemandSideInfo,
    pub masses: BTreeMap<QueryVector, Rational>,
}

impl QueryDistribution {
    pub fn get(&self, v: &QueryVector) -> Rational {
        self.masses.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.masses.values().cloned().sum()
    }
}

/// Every server's distribution for one `(W, S)`, kept densely in lowest terms.
#[derive(Debug, Clone)]
pub struct ServerDistributions {
    params: SchemeParams,
    ws: DemandSideInfo,
    space: QuerySpace,
    /// `masses[n - 1][code]`
    masses: Vec<Vec<Weight>>,
    /// `E[number of non-zero queries]`
    pub expected_nonzero: Rational,
    /// Sum of all enumerated path weights.
    pub total: Rational,
    /// Paths enumerated before `σ`.
    pub paths: u64,
}

impl ServerDistributions {
    pub fn ws(&self) -> &DemandSideInfo {
        &self.ws
    }

    pub fn mass(&self, server: usize, v: &QueryVector) -> Rational {
        self.masses[server - 1][self.space.code(v)].to_rational()
    }

    pub fn distribution(&self, server: usize) -> QueryDistribution {
        let masses = self.masses[server - 1]
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(code, w)| (self.space.vector(code), w.to_rational()))
            .collect();
        QueryDistribution { params: self.params, server, ws: self.ws.clone(), masses }
    }
}

/// Exact distributions of all `N` servers' queries for one `(W, S)`.
///
/// `σ` is drawn last and independently of everything before it, so the joint
/// enumeration factors into the unpermuted sessions times the marginals of `σ`.
pub fn exact_query_distributions(
    ws: &DemandSideInfo,
    params: &SchemeParams,
    budget: u64,
) -> Result<ServerDistributions, AuditError> {
    check_budget(params, budget, 1)?;
    distributions_unchecked(&QueryGenerator::new(params)?, ws)
}

pub(crate) fn distributions_unchecked(
    generator: &QueryGenerator,
    ws: &DemandSideInfo,
) -> Result<ServerDistributions, AuditError> {
    let params = *generator.params();
    let (n, k) = (params.n(), params.k());
    let space = QuerySpace::new(&params)?;
    let sigma = sigma_marginals(generator)?;
    let mut sums = alloc::vec![alloc::vec![MassSum::default(); space.size()]; n];
    let mut nonzero = MassSum::default();
    let overflow = || AuditError::from(EnumerationError::WeightOverflow);
    let summary = for_each_unpermuted(generator, ws, Enumerator::new(), |state, w| {
        let u = state.unpermuted(k);
        let codes: Vec<usize> = u.iter().map(|v| space.code(v)).collect();
        let count = u.iter().filter(|v| !v.is_zero()).count() as u128;
        if !nonzero.add(w, count) {
            return Err(overflow());
        }
        for (server, row) in sigma.iter().enumerate() {
            for (m, &p) in row.iter().enumerate() {
                let mass = w.checked_mul(p).ok_or_else(overflow)?;
                if !sums[server][codes[m]].add(mass, 1) {
                    return Err(overflow());
                }
            }
        }
        Ok(())
    })?;
    Ok(ServerDistributions {
        params,
        ws: ws.clone(),
        space,
        masses: sums.into_iter().map(|row| row.into_iter().map(MassSum::reduced).collect()).collect(),
        expected_nonzero: nonzero.to_rational(),
        total: summary.total,
        paths: summary.paths,
    })
}

/// Exact distribution of server `n`'s query for one `(W, S)`.
pub fn exact_query_distribution(
    ws: &DemandSideInfo,
    n: usize,
    params: &SchemeParams,
    budget: u64,
) -> Result<QueryDistribution, AuditError> {
    Ok(exact_query_distributions(ws, params, budget)?.distribution(n))
}

/// The per-server probability of any one vector of support size `s`:
/// `1/N^{K-M}` for `s = 0`, `m_{M,s-M} / (N^{K-M} (N-1)^s)` for
/// `M+1 <= s <= K`, and 0 otherwise.
pub fn closed_form_query_prob(s: usize, params: &SchemeParams) -> Rational {
    closed_form_with(s, &MTable::new(params))
}

pub(crate) fn closed_form_with(s: usize, table: &MTable) -> Rational {
    let p = table.params();
    let (n, k, m) = (p.n() as u64, p.k(), p.m());
    let base = pow(n, (k - m) as u32);
    if s == 0 {
        return Rational::new(1, base);
    }
    if s <= m || s > k {
        return Rational::zero();
    }
    let coeff = table.get(m, s - m).expect("s - M within [1:K-M]").clone();
    Rational::new(coeff, base * pow(n - 1, s as u32))
}

/// Which part of the privacy statement a failure violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PrivacyCheck {
    /// Masses do not sum to 1.
    Total,
    /// Differs from the same server's distribution under the first `(W, S)`.
    AcrossPairs,
    /// Differs from another vector of the same support size.
    SupportUniformity,
    /// Differs from the closed form.
    ClosedForm,
    /// Differs from server 1 under the same `(W, S)`.
    AcrossServers,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyFailure {
    pub check: PrivacyCheck,
    pub ws: DemandSideInfo,
    pub server: usize,
    pub vector: Option<QueryVector>,
    pub found: Rational,
    pub expected: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyReport {
    pub params: SchemeParams,
    pub pairs: usize,
    pub vectors: usize,
    pub paths: u64,
    /// Common per-vector mass by support size, `0..=K`.
    pub masses_by_support: Vec<Rational>,
    /// Expected number of non-zero queries, identical across pairs.
    pub expected_nonzero: Rational,
    /// Up to [`PrivacyReport::MAX_FAILURES`] failures; `failure_count` has the total.
    pub failures: Vec<PrivacyFailure>,
    pub failure_count: usize,
}

impl PrivacyReport {
    pub const MAX_FAILURES: usize = 20;

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

/// Enumerates every `(W, S)` pair and checks, by exact equality, that each
/// server's distribution is the same for all pairs, equal across servers,
/// constant on support sizes, and equal to [`closed_form_query_prob`].
pub fn check_privacy(params: &SchemeParams, budget: u64) -> Result<PrivacyReport, AuditError> {
    let pairs = DemandSideInfo::all(params);
    check_budget(params, budget, pairs.len())?;
    let generator = QueryGenerator::new(params)?;
    let space = QuerySpace::new(params)?;
    let closed: Vec<Weight> = (0..=params.k())
        .map(|s| Weight::from_rational(&closed_form_query_prob(s, params)).expect("small closed form"))
        .collect();
    let supports: Vec<usize> = (0..space.size()).map(|c| space.vector(c).support_size()).collect();

    let mut failures = Vec::new();
    let mut failure_count = 0;
    let mut fail = |f: PrivacyFailure| {
        failure_count += 1;
        if failures.len() < PrivacyReport::MAX_FAILURES {
            failures.push(f);
        }
    };
    let mut reference: Option<ServerDistributions> = None;
    let mut paths = 0;
    let mut expected_nonzero = None;
    for ws in &pairs {
        let dists = distributions_unchecked(&generator, ws)?;
        paths += dists.paths;
        if !dists.total.is_one() {
            fail(PrivacyFailure {
                check: PrivacyCheck::Total,
                ws: ws.clone(),
                server: 0,
                vector: None,
                found: dists.total.clone(),
                expected: Rational::one(),
            });
        }
        expected_nonzero.get_or_insert_with(|| dists.expected_nonzero.clone());
        for server in 1..=params.n() {
            let row = &dists.masses[server - 1];
            let mut first_of_size: Vec<Option<usize>> = alloc::vec![None; params.k() + 1];
            for (code, &w) in row.iter().enumerate() {
                let s = supports[code];
                let mut report = |check, expected: Weight| {
                    fail(PrivacyFailure {
                        check,
                        ws: ws.clone(),
                        server,
                        vector: Some(space.vector(code)),
                        found: w.to_rational(),
                        expected: expected.to_rational(),
                    })
                };
                if let Some(r) = &reference {
                    let expected = r.masses[server - 1][code];
                    if w != expected {
                        report(PrivacyCheck::AcrossPairs, expected);
                    }
                }
                match first_of_size[s] {
                    Some(first) if row[first] != w => report(PrivacyCheck::SupportUniformity, row[first]),
                    Some(_) => {}
                    None => first_of_size[s] = Some(code),
                }
                if w != closed[s] {
                    report(PrivacyCheck::ClosedForm, closed[s]);
                }
                let base = dists.masses[0][code];
                if w != base {
                    report(PrivacyCheck::AcrossServers, base);
                }
            }
        }
        if reference.is_none() {
            reference = Some(dists);
        }
    }
    Ok(PrivacyReport {
        params: *params,
        pairs: pairs.len(),
        vectors: space.size(),
        paths,
        masses_by_support: closed.iter().map(|w| w.to_rational()).collect(),
        expected_nonzero: expected_nonzero.unwrap_or_else(Rational::zero),
        failures,
        failure_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auditor::DEFAULT_BUDGET;
    use alloc::vec;

    fn params(n: usize, k: usize, m: usize) -> SchemeParams {
        SchemeParams::new(n, k, m, n - 1, 2).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let p = params(4, 5, 2);
        assert_eq!(closed_form_query_prob(0, &p), Rational::new(1, 64));
        assert_eq!(closed_form_query_prob(3, &p), Rational::new(1, 576));
        assert_eq!(closed_form_query_prob(4, &p), Rational::new(1, 1728));
        assert_eq!(closed_form_query_prob(5, &p), Rational::new(1, 864));
        assert!(closed_form_query_prob(1, &p).is_zero());
        assert!(closed_form_query_prob(2, &p).is_zero());
    }

    #[test]
    fn small_distribution() {
        let p = params(2, 3, 1);
        let ws = DemandSideInfo::canonical(&p);
        for n in 1..=2 {
            let d = exact_query_distribution(&ws, n, &p, DEFAULT_BUDGET).unwrap();
            assert!(d.total().is_one());
            assert_eq!(d.get(&QueryVector(vec![0, 0, 0])), Rational::new(1, 4));
            assert!(d.get(&QueryVector(vec![1, 1, 1])).is_zero());
            for v in [vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]] {
                assert_eq!(d.get(&QueryVector(v)), Rational::new(1, 4));
            }
        }
    }

    #[test]
    fn zero_query_mass() {
        let p = params(4, 5, 2);
        let ws = DemandSideInfo::new(3, vec![1, 5], &p).unwrap();
        let d = exact_query_distributions(&ws, &p, DEFAULT_BUDGET).unwrap();
        for n in 1..=4 {
            assert_eq!(d.mass(n, &QueryVector::zero(5)), Rational::new(1, 64));
        }
        assert!(d.total.is_one());
        assert_eq!(d.expected_nonzero, Rational::new(63, 16));
    }

    /// The factored computation agrees with enumerating complete tapes.
    #[test]
    fn factored_matches_full_tapes() {
        for p in [params(3, 4, 1), params(3, 4, 2), params(2, 4, 1)] {
            let ws = DemandSideInfo::canonical(&p);
            let gen = QueryGenerator::new(&p).unwrap();
            let mut full = BTreeMap::new();
            let summary = Enumerator::new()
                .run(
                    |e| gen.generate(&ws, e).0,
                    |queries, w| {
                        for (n, v) in queries.into_iter().enumerate() {
                            *full.entry((n + 1, v)).or_insert_with(Rational::zero) += w.to_rational();
                        }
                    },
                )
                .unwrap();
            assert!(summary.total.is_one());
            let d = exact_query_distributions(&ws, &p, DEFAULT_BUDGET).unwrap();
            for ((n, v), mass) in &full {
                assert_eq!(&d.mass(*n, v), mass);
            }
            for n in 1..=p.n() {
                assert_eq!(d.distribution(n).masses.len(), full.keys().filter(|(m, _)| *m == n).count());
            }
        }
    }

    #[test]
    fn privacy_on_small_tuples() {
        for p in [params(2, 3, 1), params(3, 4, 1), params(3, 4, 2), params(4, 5, 2)] {
            let report = check_privacy(&p, DEFAULT_BUDGET).unwrap();
            assert!(report.passed(), "{p}: {:?}", report.failures);
        }
        let r = check_privacy(&params(2, 3, 1), DEFAULT_BUDGET).unwrap();
        assert_eq!(
            r.masses_by_support,
            vec![Rational::new(1, 4), Rational::zero(), Rational::new(1, 4), Rational::zero()]
        );
    }

    #[test]
    fn budget_refusal() {
        let p = params(4, 5, 2);
        assert!(matches!(check_privacy(&p, 1000), Err(AuditError::BudgetExceeded { .. })));
    }
}
