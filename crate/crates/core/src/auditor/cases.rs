//! The privacy argument splits `P(Q_n = v)` by support size `s`, by whether
//! the demand index is in the support, and by the overlap `r` with `S`. Each
//! case has its own product formula; here every formula is evaluated exactly
//! and compared with [`closed_form_query_prob`].

use alloc::vec::Vec;

use crate::distributions::{p_ij, p_theta_zero};
use crate::params::SchemeParams;
use crate::rational::{binomial, pow, Rational};

use super::privacy::closed_form_query_prob;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CaseKind {
    /// The all-zero query.
    Zero,
    /// `W` outside the support: the vector is `u_1`.
    DemandAbsent,
    /// `W` in the support with `r < M`: some `u_{m+1}` with `m <= I` and `θ = 1`.
    PartialSide,
    /// `W` in the support with `r = M`, `s = M + 1`: only `(I, J) = (0, 0)`.
    FullSideNoInterference,
    /// `W` in the support with `r = M`, `s > M + 1`: summed over `I` and `θ`.
    FullSide,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseCheck {
    pub kind: CaseKind,
    pub s: usize,
    pub r: usize,
    pub value: Rational,
    pub closed_form: Rational,
}

impl CaseCheck {
    pub fn passed(&self) -> bool {
        self.value == self.closed_form
    }
}

/// Evaluates every case expression that applies to `params`.
pub fn verify_case_expressions(params: &SchemeParams) -> Vec<CaseCheck> {
    let (n, k, m) = (params.n(), params.k(), params.m());
    let interference = k - m - 1;
    let nn = Rational::from_integer(n as i64);
    let q = Rational::from_integer((n - 1) as i64);
    let qpow = |e: usize| Rational::from_integer(pow((n - 1) as u64, e as u32));
    let c = |a: usize, b: usize| Rational::from_integer(binomial(a as i64, b as i64));
    let p = |i: usize, j: usize| p_ij(i, j, params).expect("pair in range");
    let coin = |i: usize| p_theta_zero(i, params).expect("I in range");

    let mut out = Vec::new();
    let mut push = |kind, s, r, value: Rational| {
        out.push(CaseCheck { kind, s, r, value, closed_form: closed_form_query_prob(s, params) });
    };

    push(CaseKind::Zero, 0, 0, p(0, 0) / &nn);

    for s in m + 1..=k {
        // demand absent: (I, J) = (r, s - r)
        for r in 0..=m {
            let j = s - r;
            if j > interference {
                continue;
            }
            let value = p(r, j) / qpow(r) / c(m, r) / qpow(j) / c(interference, j) / &nn;
            push(CaseKind::DemandAbsent, s, r, value);
        }
        // demand present, r < M: (I, J) = (r + 1, s - r - 1), θ = 1
        for r in 0..m {
            let j = s - 1 - r;
            if j > interference {
                continue;
            }
            let (rr, mr) = (Rational::from_integer((r + 1) as i64), Rational::from_integer((m - r) as i64));
            let value =
                p(r + 1, j) / &mr * &rr / &q / qpow(r) * &mr / c(m, r + 1) / &rr / qpow(j) / c(interference, j) / &nn;
            push(CaseKind::PartialSide, s, r, value);
        }
        // demand present, r = M
        if s == m + 1 {
            // N-1 positions m, each matching v(W) through π with probability 1/(N-1)
            push(CaseKind::FullSideNoInterference, s, m, p(0, 0) / qpow(m) / &nn);
        } else {
            let j = s - m - 1;
            let weighted: Rational = ((m + 1).saturating_sub(j)..=m)
                .map(|i| {
                    let pi = coin(i);
                    let ni = Rational::from_integer(n as i64 - i as i64 - 1);
                    p(i, j) * (&q * &pi + ni * (Rational::one() - &pi))
                })
                .sum();
            let value = weighted / &q / qpow(m) / qpow(j) / c(interference, j) / &nn;
            push(CaseKind::FullSide, s, m, value);
        }
    }
    out
}
