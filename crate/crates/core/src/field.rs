//! The additive group of `F_q` and the message / sub-packet containers built
//! on top of it.
//!
//! For `q = p^e` a symbol is a vector of `e` residues mod `p`. It is stored
//! packed base-`p` into one integer (least significant residue first), which
//! is also its on-disk encoding. Only addition and negation are provided: every
//! answer is a sum of sub-packets and decoding only takes differences.

use alloc::vec::Vec;

use thiserror::Error;

use crate::params::SchemeParams;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("length mismatch: {left} vs {right} symbols")]
    LengthMismatch { left: usize, right: usize },
    #[error("sub-packet index {index} outside [0:{max}]")]
    SubPacketIndex { index: usize, max: usize },
    #[error("symbol encoding {value} outside [0, {q})")]
    SymbolOutOfRange { value: u32, q: u32 },
    #[error("message has {actual} symbols, expected {expected}")]
    MessageLength { actual: usize, expected: usize },
}

/// `F_q` viewed as the additive group `(Z_p)^e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Field {
    p: u32,
    e: u32,
    q: u32,
}

/// One element of `F_q`, packed base-`p`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

impl Field {
    /// Factorises `q = p^e`. Returns `None` if `q` is not a prime power.
    pub fn new(q: u32) -> Option<Self> {
        if q < 2 {
            return None;
        }
        let p = (2..=q).find(|d| q % d == 0)?;
        let mut rest = q;
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        (rest == 1).then_some(Self { p, e, q })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn zero(&self) -> Symbol {
        Symbol(0)
    }

    pub fn symbol(&self, value: u32) -> Result<Symbol, FieldError> {
        if value < self.q {
            Ok(Symbol(value))
        } else {
            Err(FieldError::SymbolOutOfRange { value, q: self.q })
        }
    }

    /// The `e` residues of `s`, least significant first.
    pub fn residues(&self, s: Symbol) -> Vec<u32> {
        let mut v = s.0;
        (0..self.e)
            .map(|_| {
                let r = v % self.p;
                v /= self.p;
                r
            })
            .collect()
    }

    /// Packs residues (least significant first). Each residue is reduced mod `p`.
    pub fn from_residues(&self, residues: &[u32]) -> Symbol {
        Symbol(residues.iter().rev().fold(0, |acc, r| acc * self.p + r % self.p))
    }

    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        if self.p == 2 {
            return Symbol(a.0 ^ b.0);
        }
        if self.e == 1 {
            return Symbol((a.0 + b.0) % self.p);
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0, 1);
        for _ in 0..self.e {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        Symbol(out)
    }

    pub fn neg(&self, a: Symbol) -> Symbol {
        if self.p == 2 {
            return a;
        }
        let (mut x, mut out, mut place) = (a.0, 0, 1);
        for _ in 0..self.e {
            out += ((self.p - x % self.p) % self.p) * place;
            x /= self.p;
            place *= self.p;
        }
        Symbol(out)
    }

    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        self.add(a, self.neg(b))
    }

    /// Component-wise sum of two equal-length sub-packets.
    pub fn add_subpackets(&self, a: &SubPacket, b: &SubPacket) -> Result<SubPacket, FieldError> {
        check_len(a, b)?;
        Ok(SubPacket(a.0.iter().zip(&b.0).map(|(&x, &y)| self.add(x, y)).collect()))
    }

    pub fn sub_subpackets(&self, a: &SubPacket, b: &SubPacket) -> Result<SubPacket, FieldError> {
        check_len(a, b)?;
        Ok(SubPacket(a.0.iter().zip(&b.0).map(|(&x, &y)| self.sub(x, y)).collect()))
    }

    /// In-place `acc += x`. Lengths must already agree.
    pub(crate) fn accumulate(&self, acc: &mut SubPacket, x: &[Symbol]) {
        for (a, &b) in acc.0.iter_mut().zip(x) {
            *a = self.add(*a, b);
        }
    }

    /// In-place `acc -= x`. Lengths must already agree.
    pub(crate) fn deduct(&self, acc: &mut SubPacket, x: &[Symbol]) {
        for (a, &b) in acc.0.iter_mut().zip(x) {
            *a = self.sub(*a, b);
        }
    }
}

fn check_len(a: &SubPacket, b: &SubPacket) -> Result<(), FieldError> {
    if a.len() != b.len() {
        return Err(FieldError::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

/// `L / (N - 1)` consecutive symbols of a message.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubPacket(pub Vec<Symbol>);

impl SubPacket {
    pub fn zero(len: usize) -> Self {
        Self(alloc::vec![Symbol(0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|s| s.0 == 0)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }
}

/// A message `X_i`: `L` symbols, identified by its index in `[1:K]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    index: usize,
    symbols: Vec<Symbol>,
}

impl Message {
    pub fn new(index: usize, symbols: Vec<Symbol>, params: &SchemeParams) -> Result<Self, FieldError> {
        if symbols.len() != params.l() {
            return Err(FieldError::MessageLength { actual: symbols.len(), expected: params.l() });
        }
        let q = params.q();
        if let Some(bad) = symbols.iter().find(|s| s.0 >= q) {
            return Err(FieldError::SymbolOutOfRange { value: bad.0, q });
        }
        Ok(Self { index, symbols })
    }

    /// Concatenates sub-packets `1..=N-1` in order.
    pub fn from_subpackets(index: usize, parts: &[SubPacket]) -> Self {
        let symbols = parts.iter().flat_map(|p| p.0.iter().copied()).collect();
        Self { index, symbols }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Borrowed view of sub-packet `j >= 1`; `None` for the degenerate index 0.
    pub(crate) fn slice(&self, j: usize, sub_len: usize) -> Option<&[Symbol]> {
        (j >= 1).then(|| &self.symbols[(j - 1) * sub_len..j * sub_len])
    }
}

/// Sub-packet `j` of `m`. Index 0 is the all-zero sub-packet; `1..=N-1` are
/// the stored slices.
pub fn get_subpacket(params: &SchemeParams, m: &Message, j: usize) -> Result<SubPacket, FieldError> {
    let max = params.subpackets();
    if j > max {
        return Err(FieldError::SubPacketIndex { index: j, max });
    }
    let len = params.subpacket_len();
    Ok(match m.slice(j, len) {
        Some(s) => SubPacket(s.to_vec()),
        None => SubPacket::zero(len),
    })
}

/// Component-wise sum in the additive group of `params`' field.
pub fn subpacket_add(params: &SchemeParams, a: &SubPacket, b: &SubPacket) -> Result<SubPacket, FieldError> {
    params.field().add_subpackets(a, b)
}
