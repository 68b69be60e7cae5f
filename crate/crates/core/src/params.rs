//! Scheme parameters and their validation.

use core::fmt;

use thiserror::Error;

use crate::field::Field;

/// Rejection reasons for a raw parameter tuple. Each variant names the
/// constraint that failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("constraint N >= 2 violated: N = {0}")]
    TooFewServers(usize),
    #[error("constraint K >= 2 violated: K = {0}")]
    TooFewMessages(usize),
    #[error("constraint 1 <= M <= K - 1 violated: M = {m}, K = {k}")]
    SideInfoSize { m: usize, k: usize },
    #[error("constraint N >= M + 1 violated: N = {n}, M = {m}")]
    ServersBelowSideInfo { n: usize, m: usize },
    #[error("constraint L >= 1 violated: L = 0")]
    EmptyMessages,
    #[error("constraint (N - 1) | L violated: N - 1 = {servers_minus_one}, L = {l}")]
    Subpacketization { servers_minus_one: usize, l: usize },
    #[error("constraint q is a prime power violated: q = {0}")]
    NotPrimePower(u32),
}

/// A validated `(N, K, M, L, q)` tuple.
///
/// `N` servers each store all `K` messages; every message holds `L` symbols of
/// `F_q`; the user knows `M` messages as side information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchemeParams {
    n: usize,
    k: usize,
    m: usize,
    l: usize,
    field: Field,
}

impl SchemeParams {
    /// Validates a raw tuple. Checks run in a fixed order so the reported
    /// constraint is deterministic when several fail at once.
    pub fn new(n: usize, k: usize, m: usize, l: usize, q: u32) -> Result<Self, ParamError> {
        if n < 2 {
            return Err(ParamError::TooFewServers(n));
        }
        if k < 2 {
            return Err(ParamError::TooFewMessages(k));
        }
        if m < 1 || m > k - 1 {
            return Err(ParamError::SideInfoSize { m, k });
        }
        if n < m + 1 {
            return Err(ParamError::ServersBelowSideInfo { n, m });
        }
        if l == 0 {
            return Err(ParamError::EmptyMessages);
        }
        if l % (n - 1) != 0 {
            return Err(ParamError::Subpacketization { servers_minus_one: n - 1, l });
        }
        let field = Field::new(q).ok_or(ParamError::NotPrimePower(q))?;
        Ok(Self { n, k, m, l, field })
    }

    /// Number of servers `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of messages `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Side-information size `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Message length `L` in field symbols.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Field order `q`.
    pub fn q(&self) -> u32 {
        self.field.order()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Number of stored sub-packets per message, `N - 1`.
    pub fn subpackets(&self) -> usize {
        self.n - 1
    }

    /// Symbols per sub-packet, `L / (N - 1)`.
    pub fn subpacket_len(&self) -> usize {
        self.l / (self.n - 1)
    }

    /// Number of interference messages, `K - M - 1`.
    pub fn interference(&self) -> usize {
        self.k - self.m - 1
    }
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{})", self.n, self.k, self.m, self.l, self.q())
    }
}
