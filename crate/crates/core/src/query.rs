//! Query vectors and the user's (demand, side information) pair.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::params::SchemeParams;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("demand index {w} outside [1:{k}]")]
    DemandOutOfRange { w: usize, k: usize },
    #[error("side information must hold {expected} distinct indices in [1:K] \\ {{W}}, got {got:?}")]
    BadSideInfo { expected: usize, got: Vec<usize> },
    #[error("query vector has {actual} entries, expected {expected}")]
    Length { actual: usize, expected: usize },
    #[error("query entry {value} outside [0:{max}]")]
    EntryOutOfRange { value: u32, max: usize },
}

/// A vector in `[0:N-1]^K`: entry `i` names the sub-packet of message `i + 1`
/// that goes into the answer sum, 0 meaning none.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueryVector(pub Vec<u32>);

impl QueryVector {
    pub fn zero(k: usize) -> Self {
        Self(alloc::vec![0; k])
    }

    pub fn new(entries: Vec<u32>, params: &SchemeParams) -> Result<Self, QueryError> {
        if entries.len() != params.k() {
            return Err(QueryError::Length { actual: entries.len(), expected: params.k() });
        }
        let max = params.n() - 1;
        if let Some(&value) = entries.iter().find(|&&v| v as usize > max) {
            return Err(QueryError::EntryOutOfRange { value, max });
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entry for message `index` (1-based).
    pub fn at(&self, index: usize) -> u32 {
        self.0[index - 1]
    }

    pub(crate) fn set(&mut self, index: usize, value: u32) {
        self.0[index - 1] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// Support size `s = |supp(v)|`.
    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&v| v != 0).count()
    }

    /// Support as 1-based message indices.
    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, _)| i + 1).collect()
    }

    /// Overlap `r = |S ∩ supp(v)|` with a side-information set.
    pub fn overlap(&self, side: &[usize]) -> usize {
        side.iter().filter(|&&i| self.at(i) != 0).count()
    }

    /// Every vector in `[0:N-1]^K`, in lexicographic order.
    pub fn all(n: usize, k: usize) -> impl Iterator<Item = QueryVector> {
        let total = (n as u64).checked_pow(k as u32).unwrap_or(u64::MAX);
        (0..total).map(move |mut code| {
            let mut v = alloc::vec![0u32; k];
            for slot in v.iter_mut().rev() {
                *slot = (code % n as u64) as u32;
                code /= n as u64;
            }
            QueryVector(v)
        })
    }
}

impl fmt::Display for QueryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Demand index `W` and side-information set `S` (sorted, 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DemandSideInfo {
    w: usize,
    s: Vec<usize>,
}

impl DemandSideInfo {
    pub fn new(w: usize, mut s: Vec<usize>, params: &SchemeParams) -> Result<Self, QueryError> {
        let k = params.k();
        if w == 0 || w > k {
            return Err(QueryError::DemandOutOfRange { w, k });
        }
        let got = s.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != params.m() || s.len() != got.len() || s.iter().any(|&i| i == 0 || i > k || i == w) {
            return Err(QueryError::BadSideInfo { expected: params.m(), got });
        }
        Ok(Self { w, s })
    }

    /// `W = 1`, `S = {2, ..., M + 1}`.
    pub fn canonical(params: &SchemeParams) -> Self {
        Self { w: 1, s: (2..=params.m() + 1).collect() }
    }

    /// All `K * C(K-1, M)` pairs: `W` ascending, then `S` in lexicographic order.
    pub fn all(params: &SchemeParams) -> Vec<Self> {
        let mut out = Vec::new();
        for w in 1..=params.k() {
            let rest: Vec<usize> = (1..=params.k()).filter(|&i| i != w).collect();
            for s in k_subsets(&rest, params.m()) {
                out.push(Self { w, s });
            }
        }
        out
    }

    pub fn demand(&self) -> usize {
        self.w
    }

    pub fn side(&self) -> &[usize] {
        &self.s
    }

    /// Interference messages `[K] \ ({W} ∪ S)`, ascending.
    pub fn interference(&self, params: &SchemeParams) -> Vec<usize> {
        (1..=params.k()).filter(|&i| i != self.w && !self.s.contains(&i)).collect()
    }
}

impl fmt::Display for DemandSideInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W={} S={{", self.w)?;
        for (i, s) in self.s.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

/// All `k`-subsets of `items` in lexicographic order of positions.
pub(crate) fn k_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > items.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < items.len() - k + p) else {
            return out;
        };
        idx[pos] += 1;
        for t in pos + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}
