//! Subcommands. Each turns an [`ExperimentConfig`] into a [`Report`] or a
//! [`HarnessError`]; [`exit_code`] maps either onto the process status.

mod audit;
mod census;
mod demo;
mod lemmas;
mod simulate;

use pirpsi_core::auditor::AuditError;
use pirpsi_core::protocol::ProtocolError;
use pirpsi_core::SchemeParams;
use thiserror::Error;

use crate::config::ConfigError;
use crate::db::DbError;
use crate::report::Report;

pub use audit::{audit_grid, cmd_audit};
pub use census::cmd_census;
pub use demo::cmd_demo;
pub use lemmas::{cmd_check_lemmas, lemma_grid};
pub use simulate::cmd_simulate;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("budget refusal for {params}: {source}")]
    Budget {
        params: SchemeParams,
        #[source]
        source: Box<AuditError>,
    },
    #[error("audit of {params} failed: {source}")]
    Audit {
        params: SchemeParams,
        #[source]
        source: Box<AuditError>,
    },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("message store: {0}")]
    Db(#[from] DbError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Db(_) => EXIT_CONFIG,
            HarnessError::Budget { .. } => EXIT_BUDGET,
            _ => EXIT_FAIL,
        }
    }

    /// Sorts auditor errors into refusals and genuine failures.
    pub(crate) fn audit(params: SchemeParams, source: AuditError) -> Self {
        match source {
            AuditError::BudgetExceeded { .. } | AuditError::QuerySpace(_) => {
                HarnessError::Budget { params, source: Box::new(source) }
            }
            _ => HarnessError::Audit { params, source: Box::new(source) },
        }
    }
}

pub fn exit_code(result: &Result<Report, HarnessError>) -> i32 {
    match result {
        Ok(r) if r.passed() => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(e) => e.exit_code(),
    }
}

/// `N`, `K`, `M`, `L`, `q` as table cells.
pub(crate) fn param_cells(p: &SchemeParams) -> Vec<String> {
    vec![p.n().to_string(), p.k().to_string(), p.m().to_string(), p.l().to_string(), p.q().to_string()]
}

/// The parameter columns followed by `rest`.
pub(crate) fn param_columns<'a>(rest: &[&'a str]) -> Vec<&'a str> {
    let mut cols = vec!["N", "K", "M", "L", "q"];
    cols.extend_from_slice(rest);
    cols
}
