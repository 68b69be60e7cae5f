//! Capacity-achieving multi-server private information retrieval with private
//! side information (PIR-PSI).
//!
//! `N` non-colluding servers replicate `K` messages of `L` symbols over `F_q`.
//! A user who already knows `M` of the messages retrieves one more without any
//! single server learning which message was wanted or which messages were
//! already known. Every message is split into `N - 1` sub-packets and every
//! server answers with a single sum of sub-packets.
//!
//! The crate is organised as:
//!
//! * [`params`] and [`field`]: parameter validation and the additive group of
//!   `F_q` that sub-packet sums live in.
//! * [`distributions`]: the exact pair and coin probabilities that drive query
//!   generation, together with numeric verifiers for the identities they rely
//!   on.
//! * [`randomness`]: one abstraction over the protocol's draws that runs either
//!   as a seeded sampler or as a weighted exhaustive enumerator.
//! * [`protocol`]: query generation, answer generation and decoding.
//! * [`auditor`]: exact verification of privacy, recoverability and rate by
//!   enumeration, plus Monte Carlo cross-checks.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod auditor;
pub mod distributions;
pub mod field;
pub mod params;
pub mod protocol;
pub mod query;
pub mod randomness;
pub mod rational;

pub use field::{Field, Message, SubPacket, Symbol};
pub use params::{ParamError, SchemeParams};
pub use protocol::{Answer, MessageStore, QueryGenerator, SessionState};
pub use query::{DemandSideInfo, QueryVector};
pub use rational::Rational;
