//! `PIRDB v1` message store files.
//!
//! ```text
//! PIRDB v1 N K M L q
//! s s ... s        (K lines of L packed symbols)
//! ```
//!
//! Every line ends in `\n` and fields are separated by exactly one space, so
//! any file this module accepts is reproduced byte for byte by [`write_store`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pirpsi_core::field::FieldError;
use pirpsi_core::protocol::ProtocolError;
use pirpsi_core::{Message, MessageStore, ParamError, SchemeParams, Symbol};
use thiserror::Error;

pub const MAGIC: &str = "PIRDB v1";

#[derive(Debug, Error)]
pub enum DbError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("header parameters: {0}")]
    Params(#[from] ParamError),
    #[error("line {line}: {source}")]
    Symbol {
        line: usize,
        #[source]
        source: FieldError,
    },
    #[error(transparent)]
    Store(#[from] ProtocolError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> DbError {
    DbError::Syntax { line, message: message.into() }
}

pub fn write_store(store: &MessageStore) -> String {
    let p = store.params();
    let mut out = format!("{MAGIC} {} {} {} {} {}\n", p.n(), p.k(), p.m(), p.l(), p.q());
    for m in store.messages() {
        for (i, s) in m.symbols().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{}", s.0).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

/// Splits on single spaces; empty fields (doubled or edge spaces) are errors.
fn fields(line: &str, number: usize) -> Result<Vec<&str>, DbError> {
    let f: Vec<&str> = line.split(' ').collect();
    if f.iter().any(|x| x.is_empty()) {
        return Err(syntax(number, "fields must be separated by single spaces"));
    }
    Ok(f)
}

/// Decimal without sign or leading zeros.
fn canonical_u64(s: &str, number: usize) -> Result<u64, DbError> {
    let ok = !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'));
    ok.then(|| s.parse().ok()).flatten().ok_or_else(|| syntax(number, format!("{s:?} is not a canonical integer")))
}

pub fn read_store(text: &str) -> Result<MessageStore, DbError> {
    let body = text.strip_suffix('\n').ok_or_else(|| syntax(0, "missing final newline"))?;
    let mut lines = body.split('\n');
    let header = lines.next().unwrap_or("");
    let rest = header
        .strip_prefix(MAGIC)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| syntax(1, format!("expected {MAGIC:?} header")))?;
    let h = fields(rest, 1)?;
    if h.len() != 5 {
        return Err(syntax(1, "header needs N K M L q"));
    }
    let mut v = [0u64; 5];
    for (slot, f) in v.iter_mut().zip(&h) {
        *slot = canonical_u64(f, 1)?;
    }
    let q = u32::try_from(v[4]).map_err(|_| syntax(1, "q too large"))?;
    let params = SchemeParams::new(v[0] as usize, v[1] as usize, v[2] as usize, v[3] as usize, q)?;
    let field = params.field();

    let mut messages = Vec::with_capacity(params.k());
    for (i, line) in lines.enumerate() {
        let number = i + 2;
        if messages.len() == params.k() {
            return Err(syntax(number, "more message lines than K"));
        }
        let f = fields(line, number)?;
        if f.len() != params.l() {
            return Err(syntax(number, format!("expected {} symbols, found {}", params.l(), f.len())));
        }
        let symbols = f
            .iter()
            .map(|s| {
                let raw = u32::try_from(canonical_u64(s, number)?).map_err(|_| syntax(number, "symbol too large"))?;
                field.symbol(raw).map_err(|source| DbError::Symbol { line: number, source })
            })
            .collect::<Result<Vec<Symbol>, _>>()?;
        messages.push(
            Message::new(messages.len() + 1, symbols, &params)
                .map_err(|source| DbError::Symbol { line: number, source })?,
        );
    }
    if messages.len() != params.k() {
        return Err(syntax(
            messages.len() + 2,
            format!("expected {} message lines, found {}", params.k(), messages.len()),
        ));
    }
    Ok(MessageStore::new(params, messages)?)
}

pub fn load(path: &Path) -> Result<MessageStore, DbError> {
    read_store(&fs::read_to_string(path)?)
}

pub fn save(store: &MessageStore, path: &Path) -> Result<(), DbError> {
    Ok(fs::write(path, write_store(store))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_store_text() {
        let p = SchemeParams::new(2, 2, 1, 2, 9).unwrap();
        let text = "PIRDB v1 2 2 1 2 9\n0 8\n4 1\n";
        let store = read_store(text).unwrap();
        assert_eq!(store.params(), &p);
        assert_eq!(store.get(1).unwrap().symbols(), &[Symbol(0), Symbol(8)]);
        assert_eq!(write_store(&store), text);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "PIRDB v1 2 2 1 2 9\n0 8\n4 1",
            "PIRDB v2 2 2 1 2 9\n0 8\n4 1\n",
            "PIRDB v1 2 2 1 2 9\n0  8\n4 1\n",
            "PIRDB v1 2 2 1 2 9\n0 08\n4 1\n",
            "PIRDB v1 2 2 1 2 9\n0 9\n4 1\n",
            "PIRDB v1 2 2 1 2 9\n0 8\n",
            "PIRDB v1 2 2 1 2 9\n0 8\n4 1\n1 1\n",
            "PIRDB v1 2 2 1 2 9\n0 8 1\n4 1\n",
            "PIRDB v1 2 2 1 2 6\n0 1\n4 1\n",
        ] {
            assert!(read_store(bad).is_err(), "{bad:?}");
        }
    }
}
