//! Exact evaluation of the pair distribution `P_{i,j}`, the coin probability
//! `P_I`, and numeric verifiers for the combinatorial identities that make the
//! scheme private.
//!
//! All arithmetic is exact. `m_{i,j}` depends only on `s = i + j`:
//!
//! ```text
//! m_{0,0} = 1
//! m_{i,j} = 0                                              1 <= s <= M
//! m_{i,j} = sum_{k=0}^{s-M-1} (-1)^k C(M+k-1, k) (N-1)^{s-M-k}   M+1 <= s <= K
//! P_{i,j} = C(M, i) C(K-M-1, j) m_{i,j} / N^{K-M-1}
//! P_I     = (M - I) / (M - I + 1)
//! ```

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::params::SchemeParams;
use crate::rational::{binomial, pow, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistributionError {
    #[error("m_{{{i},{j}}} is outside its domain (0 <= i <= {m}, 0 <= j <= K-M-1, or i = M, j = K-M)")]
    MDomain { i: usize, j: usize, m: usize },
    #[error("P_{{{i},{j}}} is outside its domain (0 <= i <= {m}, 0 <= j <= {jmax})")]
    PairDomain { i: usize, j: usize, m: usize, jmax: usize },
    #[error("coin index I = {i} outside [0:{m}]")]
    CoinDomain { i: usize, m: usize },
    #[error("index j = {j} outside [1:{jmax}]")]
    IdentityDomain { j: usize, jmax: usize },
    #[error("polynomial degree {degree} is not below n = {n}")]
    PolynomialDegree { degree: usize, n: usize },
}

fn m_in_domain(i: usize, j: usize, p: &SchemeParams) -> bool {
    let (m, k) = (p.m(), p.k());
    i <= m && (j < k - m || (i == m && j == k - m))
}

/// `m_{i,j}` evaluated from its defining sum.
pub fn m_coeff(i: usize, j: usize, params: &SchemeParams) -> Result<BigInt, DistributionError> {
    if !m_in_domain(i, j, params) {
        return Err(DistributionError::MDomain { i, j, m: params.m() });
    }
    Ok(m_by_sum(i + j, params.n(), params.m()))
}

fn m_by_sum(s: usize, n: usize, m: usize) -> BigInt {
    if s == 0 {
        return BigInt::from(1);
    }
    if s <= m {
        return BigInt::zero();
    }
    let mut acc = BigInt::zero();
    for k in 0..s - m {
        let term = binomial((m + k) as i64 - 1, k as i64) * pow(n as u64 - 1, (s - m - k) as u32);
        if k % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Cached `m_{i,j}` over the extended domain. Entries can be overridden,
/// which the verifiers below pick up; this lets a harness inject a fault and
/// confirm the checks notice it.
#[derive(Debug, Clone)]
pub struct MTable {
    params: SchemeParams,
    values: BTreeMap<(usize, usize), BigInt>,
}

impl MTable {
    pub fn new(params: &SchemeParams) -> Self {
        let mut values = BTreeMap::new();
        for i in 0..=params.m() {
            for j in 0..=params.k() - params.m() {
                if m_in_domain(i, j, params) {
                    values.insert((i, j), m_by_sum(i + j, params.n(), params.m()));
                }
            }
        }
        Self { params: *params, values }
    }

    /// Replaces `m_{i,j}`. Out-of-domain indices are rejected.
    pub fn with_override(mut self, i: usize, j: usize, value: BigInt) -> Result<Self, DistributionError> {
        let slot = self.values.get_mut(&(i, j)).ok_or(DistributionError::MDomain { i, j, m: self.params.m() })?;
        *slot = value;
        Ok(self)
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn get(&self, i: usize, j: usize) -> Result<&BigInt, DistributionError> {
        self.values.get(&(i, j)).ok_or(DistributionError::MDomain { i, j, m: self.params.m() })
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &BigInt)> {
        self.values.iter().map(|(&k, v)| (k, v))
    }

    fn pair(&self, i: usize, j: usize) -> Rational {
        let p = &self.params;
        let num =
            binomial(p.m() as i64, i as i64) * binomial(p.interference() as i64, j as i64) * &self.values[&(i, j)];
        Rational::new(num, pow(p.n() as u64, p.interference() as u32))
    }
}

/// `P_{i,j}` for `0 <= i <= M`, `0 <= j <= K-M-1`.
pub fn p_ij(i: usize, j: usize, params: &SchemeParams) -> Result<Rational, DistributionError> {
    if i > params.m() || j >= params.k() - params.m() {
        return Err(DistributionError::PairDomain { i, j, m: params.m(), jmax: params.interference() });
    }
    let num = binomial(params.m() as i64, i as i64)
        * binomial(params.interference() as i64, j as i64)
        * m_by_sum(i + j, params.n(), params.m());
    Ok(Rational::new(num, pow(params.n() as u64, params.interference() as u32)))
}

/// Probability that the coin `θ` comes up 0 given `I`.
pub fn p_theta_zero(i: usize, params: &SchemeParams) -> Result<Rational, DistributionError> {
    let m = params.m();
    if i > m {
        return Err(DistributionError::CoinDomain { i, m });
    }
    Ok(Rational::new((m - i) as i64, (m - i + 1) as i64))
}

/// The full `P_{i,j}` table, row `i`, column `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PijTable {
    params: SchemeParams,
    cols: usize,
    entries: Vec<Rational>,
}

impl PijTable {
    pub fn new(params: &SchemeParams) -> Self {
        Self::from_m(&MTable::new(params))
    }

    pub fn from_m(table: &MTable) -> Self {
        let p = table.params;
        let cols = p.k() - p.m();
        let mut entries = Vec::with_capacity((p.m() + 1) * cols);
        for i in 0..=p.m() {
            for j in 0..cols {
                entries.push(table.pair(i, j));
            }
        }
        Self { params: p, cols, entries }
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Rational> {
        (i <= self.params.m() && j < self.cols).then(|| &self.entries[i * self.cols + j])
    }

    /// `((i, j), P_{i,j})` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> + '_ {
        self.entries.iter().enumerate().map(move |(idx, p)| ((idx / self.cols, idx % self.cols), p))
    }

    pub fn sum(&self) -> Rational {
        self.entries.iter().cloned().sum()
    }
}

/// Non-negativity and normalisation of `P_{i,j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PijReport {
    pub params: SchemeParams,
    pub sum: Rational,
    pub negative: Vec<((usize, usize), Rational)>,
}

impl PijReport {
    pub fn passed(&self) -> bool {
        self.negative.is_empty() && self.sum.is_one()
    }
}

pub fn verify_pij_distribution(params: &SchemeParams) -> PijReport {
    verify_pij_distribution_with(&MTable::new(params))
}

pub fn verify_pij_distribution_with(table: &MTable) -> PijReport {
    let pij = PijTable::from_m(table);
    let negative = pij.iter().filter(|(_, p)| p.is_negative()).map(|(ij, p)| (ij, p.clone())).collect();
    PijReport { params: table.params, sum: pij.sum(), negative }
}

/// Entries of `m_{i,j}` over the extended domain that are negative. Empty on
/// every tuple checked so far, including `i + j = K`.
pub fn negative_m_entries(table: &MTable) -> Vec<((usize, usize), BigInt)> {
    table.iter().filter(|(_, v)| v.is_negative()).map(|(ij, v)| (ij, v.clone())).collect()
}

/// Both sides of an identity that should hold exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub lhs: Rational,
    pub rhs: Rational,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// `sum_{i=(M-j+1)^+}^{M} (C(M,i)(N-1) - C(M,i-1)) m_{i,j} = m_{M,j+1}` for
/// `1 <= j <= K-M-1`.
pub fn verify_summij(params: &SchemeParams, j: usize) -> Result<IdentityCheck, DistributionError> {
    verify_summij_with(&MTable::new(params), j)
}

pub fn verify_summij_with(table: &MTable, j: usize) -> Result<IdentityCheck, DistributionError> {
    let p = table.params;
    let (m, n) = (p.m(), p.n());
    if j == 0 || j > p.interference() {
        return Err(DistributionError::IdentityDomain { j, jmax: p.interference() });
    }
    let lo = (m + 1).saturating_sub(j);
    let mut lhs = BigInt::zero();
    for i in lo..=m {
        let weight = binomial(m as i64, i as i64) * BigInt::from(n - 1) - binomial(m as i64, i as i64 - 1);
        lhs += weight * table.get(i, j)?;
    }
    let rhs = table.get(m, j + 1)?.clone();
    Ok(IdentityCheck { lhs: lhs.into(), rhs: rhs.into() })
}

/// `sum_{k=0}^{n} (-1)^k C(n,k) P(k) = 0` for a polynomial of degree below `n`,
/// given by its coefficients in ascending order.
pub fn verify_poly_identity(n: usize, coeffs: &[Rational]) -> Result<IdentityCheck, DistributionError> {
    if let Some(degree) = coeffs.iter().rposition(|c| !c.is_zero()) {
        if degree >= n {
            return Err(DistributionError::PolynomialDegree { degree, n });
        }
    }
    let mut lhs = Rational::zero();
    for k in 0..=n {
        let mut value = Rational::zero();
        let mut power = Rational::one();
        let kk = Rational::from(k as i64);
        for c in coeffs {
            value += c * &power;
            power = &power * &kk;
        }
        let term = Rational::from(binomial(n as i64, k as i64)) * value;
        lhs = if k % 2 == 0 { lhs + term } else { lhs - term };
    }
    Ok(IdentityCheck { lhs, rhs: Rational::zero() })
}

/// `sum_{k=(j-M)^+}^{j} (-1)^k C(M, j-k) C(M+k-1, k) = 0` for `1 <= j <= K-M-1`.
pub fn verify_alternating_identity(j: usize, params: &SchemeParams) -> Result<IdentityCheck, DistributionError> {
    let m = params.m();
    if j == 0 || j > params.interference() {
        return Err(DistributionError::IdentityDomain { j, jmax: params.interference() });
    }
    let mut lhs = BigInt::zero();
    for k in j.saturating_sub(m)..=j {
        let term = binomial(m as i64, (j - k) as i64) * binomial((m + k) as i64 - 1, k as i64);
        if k % 2 == 0 {
            lhs += term;
        } else {
            lhs -= term;
        }
    }
    Ok(IdentityCheck { lhs: lhs.into(), rhs: Rational::zero() })
}

/// `C(M,i)((N-1)P_i + (N-i-1)(1-P_i)) = C(M,i)(N-1) - C(M,i-1)`, the
/// coin-weighting step that turns the `r = M` privacy term into the
/// telescoping sum.
pub fn verify_coin_weighting(i: usize, params: &SchemeParams) -> Result<IdentityCheck, DistributionError> {
    let (m, n) = (params.m() as i64, params.n() as i64);
    let pi = p_theta_zero(i, params)?;
    let i = i as i64;
    let inner = Rational::from(n - 1) * &pi + Rational::from(n - i - 1) * (Rational::one() - pi);
    let lhs = Rational::from(binomial(m, i)) * inner;
    let rhs = Rational::from(binomial(m, i) * BigInt::from(n - 1) - binomial(m, i - 1));
    Ok(IdentityCheck { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize, m: usize) -> SchemeParams {
        SchemeParams::new(n, k, m, n - 1, 2).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn m_coefficient_examples() {
        let p = params(4, 5, 2);
        assert_eq!(m_coeff(0, 0, &p).unwrap(), BigInt::from(1));
        assert_eq!(m_coeff(1, 1, &p).unwrap(), BigInt::from(0));
        // 3^2 - 2*3
        assert_eq!(m_coeff(2, 2, &p).unwrap(), BigInt::from(3));
        // 27 - 2*9 + 3*3, extended domain i = M, j = K - M
        assert_eq!(m_coeff(2, 3, &p).unwrap(), BigInt::from(18));
        // (N,K,M) = (2,3,1): 1 - 1
        assert_eq!(m_coeff(1, 2, &params(2, 3, 1)).unwrap(), BigInt::from(0));
    }

    #[test]
    fn m_coefficient_domain() {
        let p = params(4, 5, 2);
        assert!(m_coeff(3, 0, &p).is_err());
        assert!(m_coeff(1, 3, &p).is_err());
        assert!(m_coeff(2, 4, &p).is_err());
    }

    #[test]
    fn pair_probabilities_worked_example() {
        let p = params(4, 5, 2);
        assert_eq!(p_ij(0, 0, &p).unwrap(), r(1, 16));
        assert_eq!(p_ij(1, 2, &p).unwrap(), r(3, 8));
        assert_eq!(p_ij(2, 1, &p).unwrap(), r(3, 8));
        assert_eq!(p_ij(2, 2, &p).unwrap(), r(3, 16));
        for (i, j) in [(0, 1), (1, 0), (0, 2), (1, 1), (2, 0)] {
            assert!(p_ij(i, j, &p).unwrap().is_zero());
        }
        assert!(p_ij(0, 3, &p).is_err());
    }

    #[test]
    fn pair_probability_small() {
        // 1 * 2 * 2 / 9
        assert_eq!(p_ij(1, 1, &params(3, 4, 1)).unwrap(), r(4, 9));
    }

    #[test]
    fn coin_probabilities() {
        let p = params(4, 5, 2);
        assert_eq!(p_theta_zero(1, &p).unwrap(), r(1, 2));
        assert!(p_theta_zero(2, &p).unwrap().is_zero());
        assert_eq!(p_theta_zero(0, &params(4, 5, 3)).unwrap(), r(3, 4));
        assert!(p_theta_zero(3, &p).is_err());
    }

    #[test]
    fn pij_distribution_examples() {
        let rep = verify_pij_distribution(&params(4, 5, 2));
        assert!(rep.passed());
        let rep = verify_pij_distribution(&params(3, 4, 1));
        assert!(rep.passed());
        let t = PijTable::new(&params(3, 4, 1));
        let nonzero: Vec<_> = t.iter().filter(|(_, p)| !p.is_zero()).map(|(ij, p)| (ij, p.clone())).collect();
        assert_eq!(nonzero, [((0, 0), r(1, 9)), ((0, 2), r(2, 9)), ((1, 1), r(4, 9)), ((1, 2), r(2, 9))]);
        let t = PijTable::new(&params(2, 3, 1));
        assert_eq!(t.get(0, 0), Some(&r(1, 2)));
        assert_eq!(t.get(1, 1), Some(&r(1, 2)));
    }

    #[test]
    fn injected_fault_breaks_distribution() {
        let p = params(4, 5, 2);
        let t = MTable::new(&p).with_override(2, 2, BigInt::from(4)).unwrap();
        assert!(!verify_pij_distribution_with(&t).passed());
        assert!(MTable::new(&p).with_override(0, 4, BigInt::from(1)).is_err());
    }

    #[test]
    fn summij_examples() {
        let p = params(4, 5, 2);
        let c = verify_summij(&p, 1).unwrap();
        assert!(c.passed());
        assert_eq!(c.rhs, 3);
        let c = verify_summij(&p, 2).unwrap();
        assert_eq!((c.lhs.clone(), c.rhs.clone()), (Rational::from(18), Rational::from(18)));
        assert!(verify_summij(&p, 0).is_err());
        assert!(verify_summij(&p, 3).is_err());
    }

    #[test]
    fn poly_identity_examples() {
        assert!(verify_poly_identity(3, &[Rational::one()]).unwrap().passed());
        assert!(verify_poly_identity(4, &[Rational::zero(), Rational::one(), Rational::one()]).unwrap().passed());
        assert!(matches!(
            verify_poly_identity(2, &[Rational::zero(), Rational::zero(), Rational::one()]),
            Err(DistributionError::PolynomialDegree { degree: 2, n: 2 })
        ));
        // trailing zero coefficients do not raise the degree
        assert!(verify_poly_identity(1, &[Rational::from(5), Rational::zero()]).unwrap().passed());
    }

    #[test]
    fn alternating_identity_examples() {
        assert!(verify_alternating_identity(1, &params(4, 5, 2)).unwrap().passed());
        assert!(verify_alternating_identity(2, &params(4, 5, 2)).unwrap().passed());
        assert!(verify_alternating_identity(2, &params(2, 4, 1)).unwrap().passed());
        assert!(verify_alternating_identity(3, &params(4, 5, 2)).is_err());
    }

    #[test]
    fn coin_weighting_holds() {
        for (n, k, m) in [(4, 5, 2), (3, 4, 1), (6, 8, 5), (5, 7, 3)] {
            let p = params(n, k, m);
            for i in 0..=m {
                assert!(verify_coin_weighting(i, &p).unwrap().passed(), "({n},{k},{m}) i={i}");
            }
        }
    }

    #[test]
    fn m_depends_only_on_sum_and_hits_n_minus_one() {
        for n in 2..=6usize {
            for k in 2..=8usize {
                for m in 1..n.min(k) {
                    let p = params(n, k, m);
                    let t = MTable::new(&p);
                    for ((i, j), v) in t.iter() {
                        assert!(!v.is_negative(), "m_{{{i},{j}}} < 0 at ({n},{k},{m})");
                        if i + j == m + 1 {
                            assert_eq!(*v, BigInt::from(n - 1));
                        }
                        for ((i2, j2), v2) in t.iter() {
                            if i + j == i2 + j2 {
                                assert_eq!(v, v2);
                            }
                        }
                    }
                }
            }
        }
    }
}
