//! Sampled sessions compared against the exact distributions.

use alloc::vec::Vec;

use crate::params::SchemeParams;
use crate::protocol::{run_session, MessageStore, QueryGenerator};
use crate::query::DemandSideInfo;
use crate::randomness::Sampler;
use crate::rational::{pow, Rational};

use super::privacy::distributions_unchecked;
use super::rate::capacity;
use super::{check_budget, AuditError, QuerySpace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub seed: u64,
    /// Largest acceptable pooled total-variation distance.
    pub tv_threshold: Rational,
    /// Largest acceptable relative deviation of the empirical rate from capacity.
    pub rate_tolerance: Rational,
    /// Branch budget for the exact reference; above it TV is not computed.
    pub budget: u64,
}

impl MonteCarloConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            tv_threshold: Rational::new(1, 100),
            rate_tolerance: Rational::new(1, 100),
            budget: super::DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonteCarloReport {
    pub params: SchemeParams,
    pub ws: DemandSideInfo,
    pub config: MonteCarloConfig,
    pub decode_successes: u64,
    pub downloaded_symbols: u64,
    /// Mean downloaded symbols per session.
    pub mean_download: Rational,
    pub empirical_rate: Rational,
    pub capacity: Rational,
    /// `|empirical_rate / capacity - 1|`.
    pub rate_deviation: Rational,
    /// TV distance between the empirical distribution of all servers' queries
    /// pooled and the exact pooled distribution. `None` when the exact
    /// reference is over budget.
    pub tv_pooled: Option<Rational>,
    /// TV distance for each server on its own.
    pub tv_per_server: Vec<Rational>,
    /// All-zero queries seen, over all servers.
    pub zero_queries: u64,
    /// Exact probability that one server's query is all-zero.
    pub exact_zero_prob: Rational,
}

impl MonteCarloReport {
    pub fn decode_ok(&self) -> bool {
        self.decode_successes == self.config.trials
    }

    pub fn tv_ok(&self) -> Option<bool> {
        self.tv_pooled.as_ref().map(|tv| *tv < self.config.tv_threshold)
    }

    pub fn rate_ok(&self) -> bool {
        self.rate_deviation < self.config.rate_tolerance
    }
}

/// Runs `config.trials` sessions for `ws` against one random store.
///
/// The store is filled from `seed` and the sessions draw from a separate
/// stream of the same seed.
pub fn monte_carlo_audit(
    params: &SchemeParams,
    ws: &DemandSideInfo,
    config: &MonteCarloConfig,
) -> Result<MonteCarloReport, AuditError> {
    let generator = QueryGenerator::new(params)?;
    let space = QuerySpace::new(params)?;
    let store = MessageStore::random(*params, config.seed);
    let mut rng = Sampler::with_stream(config.seed, 1);
    let n = params.n();
    let mut counts = alloc::vec![alloc::vec![0u64; space.size()]; n];
    let mut successes = 0;
    let mut downloaded = 0u64;
    let mut zero_queries = 0;
    let demand = store.get(ws.demand()).expect("demand within store");
    for _ in 0..config.trials {
        let out = run_session(ws, &generator, &store, &mut rng)?;
        if &out.recovered == demand {
            successes += 1;
        }
        downloaded += out.downloaded_symbols as u64;
        for (server, v) in out.queries.iter().enumerate() {
            counts[server][space.code(v)] += 1;
            zero_queries += u64::from(v.is_zero());
        }
    }

    let exact = match check_budget(params, config.budget, 1) {
        Ok(_) => Some(distributions_unchecked(&generator, ws)?),
        Err(AuditError::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let trials = Rational::from_integer(config.trials as i64);
    let (tv_pooled, tv_per_server) = match &exact {
        Some(d) if config.trials > 0 => {
            let servers = Rational::from_integer(n as i64);
            let mut pooled = Rational::zero();
            let mut per = alloc::vec![Rational::zero(); n];
            for code in 0..space.size() {
                let v = space.vector(code);
                let mut emp_sum = Rational::zero();
                let mut exact_sum = Rational::zero();
                for (server, (row, acc)) in counts.iter().zip(per.iter_mut()).enumerate() {
                    let emp = Rational::from_integer(row[code] as i64) / &trials;
                    let p = d.mass(server + 1, &v);
                    *acc += (&emp - &p).abs();
                    emp_sum += emp;
                    exact_sum += p;
                }
                pooled += (emp_sum - exact_sum).abs() / &servers;
            }
            let half = Rational::new(1, 2);
            (Some(pooled * &half), per.into_iter().map(|t| t * &half).collect())
        }
        _ => (None, Vec::new()),
    };

    let cap = capacity(params);
    let (mean_download, empirical_rate) = if downloaded == 0 {
        (Rational::zero(), Rational::zero())
    } else {
        let total = Rational::from_integer(downloaded as i64);
        (&total / &trials, Rational::from_integer(params.l() as i64) * &trials / total)
    };
    let rate_deviation = (&empirical_rate / &cap - Rational::one()).abs();
    Ok(MonteCarloReport {
        params: *params,
        ws: ws.clone(),
        config: config.clone(),
        decode_successes: successes,
        downloaded_symbols: downloaded,
        mean_download,
        empirical_rate,
        capacity: cap,
        rate_deviation,
        tv_pooled,
        tv_per_server,
        zero_queries,
        exact_zero_prob: Rational::new(1, pow(n as u64, (params.k() - params.m()) as u32)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trial() {
        let p = SchemeParams::new(4, 5, 2, 3, 2).unwrap();
        let r = monte_carlo_audit(&p, &DemandSideInfo::canonical(&p), &MonteCarloConfig::new(1, 4)).unwrap();
        assert!(r.decode_ok());
        assert!(r.downloaded_symbols == 3 || r.downloaded_symbols == 4);
        assert!(r.tv_pooled.is_some());
    }

    #[test]
    fn zero_query_frequency() {
        let p = SchemeParams::new(2, 3, 1, 1, 2).unwrap();
        let trials = 100_000;
        let r = monte_carlo_audit(&p, &DemandSideInfo::canonical(&p), &MonteCarloConfig::new(trials, 17)).unwrap();
        assert!(r.decode_ok());
        assert_eq!(r.exact_zero_prob, Rational::new(1, 4));
        // one server's all-zero frequency, within 5 standard errors
        let samples = (trials * 2) as f64;
        let freq = r.zero_queries as f64 / samples;
        let se = (0.25f64 * 0.75 / (trials as f64)).sqrt();
        assert!((freq - 0.25).abs() < 5.0 * se, "{freq}");
    }

    #[test]
    fn deterministic() {
        let p = SchemeParams::new(3, 4, 1, 2, 3).unwrap();
        let ws = DemandSideInfo::canonical(&p);
        let a = monte_carlo_audit(&p, &ws, &MonteCarloConfig::new(500, 2)).unwrap();
        let b = monte_carlo_audit(&p, &ws, &MonteCarloConfig::new(500, 2)).unwrap();
        assert_eq!(a, b);
        assert!(a.decode_ok());
    }
}
