//! Byte encodings of queries and answers.
//!
//! Query: the ASCII tag `PIRQ v1`, then `N`, `K`, `q` as little-endian `u32`,
//! then one byte per message (so `N <= 256`).
//!
//! Answer: a flag byte (0 empty, 1 payload) followed, for payloads, by
//! `L / (N - 1)` symbols, each little-endian in the fewest bytes that hold
//! `q - 1`.

use pirpsi_core::{Answer, QueryVector, SchemeParams, SubPacket, Symbol};
use thiserror::Error;

pub const QUERY_TAG: &[u8; 7] = b"PIRQ v1";
const HEADER_LEN: usize = QUERY_TAG.len() + 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("N = {0} does not fit one byte per entry")]
    TooManyServers(usize),
    #[error("expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("missing PIRQ v1 tag")]
    Tag,
    #[error("entry {value} at position {position} is not below N = {n}")]
    Entry { position: usize, value: u8, n: u32 },
    #[error("unknown answer flag {0}")]
    Flag(u8),
    #[error("symbol {value} is not below q = {q}")]
    Symbol { value: u32, q: u32 },
    #[error("payload of {actual} symbols, expected {expected}")]
    PayloadLength { actual: usize, expected: usize },
}

/// A decoded query with the header it arrived under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireQuery {
    pub n: u32,
    pub k: u32,
    pub q: u32,
    pub vector: QueryVector,
}

pub fn encode_query(v: &QueryVector, params: &SchemeParams) -> Result<Vec<u8>, WireError> {
    if params.n() > 256 {
        return Err(WireError::TooManyServers(params.n()));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + v.len());
    out.extend_from_slice(QUERY_TAG);
    for x in [params.n() as u32, params.k() as u32, params.q()] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend(v.entries().iter().map(|&e| e as u8));
    Ok(out)
}

pub fn decode_query(bytes: &[u8]) -> Result<WireQuery, WireError> {
    if bytes.len() < HEADER_LEN {
        return Err(WireError::Length { expected: HEADER_LEN, actual: bytes.len() });
    }
    if &bytes[..QUERY_TAG.len()] != QUERY_TAG {
        return Err(WireError::Tag);
    }
    let word = |i: usize| {
        let at = QUERY_TAG.len() + 4 * i;
        u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"))
    };
    let (n, k, q) = (word(0), word(1), word(2));
    if n > 256 {
        return Err(WireError::TooManyServers(n as usize));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != k as usize {
        return Err(WireError::Length { expected: HEADER_LEN + k as usize, actual: bytes.len() });
    }
    if let Some((position, &value)) = body.iter().enumerate().find(|(_, &e)| u32::from(e) >= n) {
        return Err(WireError::Entry { position, value, n });
    }
    Ok(WireQuery { n, k, q, vector: QueryVector(body.iter().map(|&e| u32::from(e)).collect()) })
}

/// Bytes per symbol for field order `q`.
pub fn symbol_width(q: u32) -> usize {
    let bits = 32 - (q - 1).leading_zeros() as usize;
    bits.div_ceil(8).max(1)
}

pub fn encode_answer(answer: &Answer, params: &SchemeParams) -> Result<Vec<u8>, WireError> {
    match answer {
        Answer::Empty => Ok(vec![0]),
        Answer::Payload(sp) => {
            if sp.len() != params.subpacket_len() {
                return Err(WireError::PayloadLength { actual: sp.len(), expected: params.subpacket_len() });
            }
            let width = symbol_width(params.q());
            let mut out = Vec::with_capacity(1 + width * sp.len());
            out.push(1);
            for s in sp.symbols() {
                if s.0 >= params.q() {
                    return Err(WireError::Symbol { value: s.0, q: params.q() });
                }
                out.extend_from_slice(&s.0.to_le_bytes()[..width]);
            }
            Ok(out)
        }
    }
}

pub fn decode_answer(bytes: &[u8], params: &SchemeParams) -> Result<Answer, WireError> {
    let width = symbol_width(params.q());
    let len = params.subpacket_len();
    match bytes.first() {
        None => Err(WireError::Length { expected: 1, actual: 0 }),
        Some(0) if bytes.len() == 1 => Ok(Answer::Empty),
        Some(0) => Err(WireError::Length { expected: 1, actual: bytes.len() }),
        Some(1) => {
            let body = &bytes[1..];
            if body.len() != width * len {
                return Err(WireError::Length { expected: 1 + width * len, actual: bytes.len() });
            }
            let symbols = body
                .chunks(width)
                .map(|c| {
                    let mut b = [0u8; 4];
                    b[..width].copy_from_slice(c);
                    let value = u32::from_le_bytes(b);
                    if value < params.q() {
                        Ok(Symbol(value))
                    } else {
                        Err(WireError::Symbol { value, q: params.q() })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Answer::Payload(SubPacket(symbols)))
        }
        Some(&f) => Err(WireError::Flag(f)),
    }
}
