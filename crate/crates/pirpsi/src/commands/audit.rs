use pirpsi_core::auditor::{check_budget, check_privacy, check_recoverability, exact_rate, verify_case_expressions};
use pirpsi_core::rational::{binomial, pow};
use pirpsi_core::{DemandSideInfo, Rational, SchemeParams};

use super::{param_cells, param_columns, HarnessError};
use crate::config::ExperimentConfig;
use crate::report::{exact, Report};

/// Every valid `(N, K, M)` with `N <= 4`, `K <= 6`; `L = N - 1`, `q = 2`.
pub fn audit_grid() -> Vec<SchemeParams> {
    let mut grid = Vec::new();
    for n in 2..=4 {
        for k in 2..=6 {
            for m in 1..n.min(k) {
                grid.push(SchemeParams::new(n, k, m, n - 1, 2).expect("grid tuples are valid"));
            }
        }
    }
    grid
}

/// Privacy, recoverability, rate and the per-case privacy expressions for
/// every tuple. All budgets are checked before any enumeration starts.
pub fn cmd_audit(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let grid = cfg.tuples(audit_grid);
    for p in &grid {
        let pairs = DemandSideInfo::all(p).len();
        check_budget(p, cfg.budget, pairs).map_err(|e| HarnessError::audit(*p, e))?;
    }

    let mut r = Report::new("audit");
    r.field("tuples", grid.len());
    r.field("seed", cfg.seed);
    r.field("fills", cfg.fills);
    r.field("budget", cfg.budget);
    r.columns(&param_columns(&["support", "vectors", "mass_per_vector", "support_mass"]));
    for p in &grid {
        let fail = |e| HarnessError::audit(*p, e);
        r.section(p);

        let privacy = check_privacy(p, cfg.budget).map_err(fail)?;
        r.check(
            "privacy",
            privacy.passed(),
            format!(
                "{} pairs x {} servers, {} vectors, {} tapes, {} mismatches",
                privacy.pairs,
                p.n(),
                privacy.vectors,
                privacy.paths,
                privacy.failure_count
            ),
        );
        for f in &privacy.failures {
            let v = f.vector.as_ref().map_or("-".to_string(), |v| v.to_string());
            r.line(format!(
                "  {:?} {} server {} vector {v}: found {} expected {}",
                f.check, f.ws, f.server, f.found, f.expected
            ));
        }
        for (s, mass) in privacy.masses_by_support.iter().enumerate() {
            let vectors = binomial(p.k() as i64, s as i64) * pow((p.n() - 1) as u64, s as u32);
            let support_mass = mass * &Rational::from(vectors.clone());
            let mut row = param_cells(p);
            row.extend([s.to_string(), vectors.to_string(), mass.to_string(), support_mass.to_string()]);
            r.row(row);
        }

        let rec = check_recoverability(p, cfg.fills, cfg.seed, cfg.budget).map_err(fail)?;
        r.check(
            "recoverability",
            rec.passed(),
            format!("{}/{} decodes over {} tapes x {} stores", rec.successes, rec.runs, rec.paths, rec.fills),
        );
        for f in &rec.failures {
            let (i, j) = f.state.pair();
            r.line(format!(
                "  {} (I,J)=({i},{j}) pi={:?} sigma={:?} store seed {}",
                f.state.ws(),
                f.state.pi(),
                f.state.sigma(),
                f.fill_seed
            ));
        }

        let rate = exact_rate(p, cfg.budget).map_err(fail)?;
        r.check(
            "rate",
            rate.achieves_capacity(),
            format!(
                "rate {}, capacity {}, expected download {} sub-packets",
                exact(&rate.rate),
                exact(&rate.capacity),
                rate.expected_subpackets
            ),
        );

        let cases = verify_case_expressions(p);
        let bad: Vec<_> = cases.iter().filter(|c| !c.passed()).collect();
        r.check(
            "case expressions",
            bad.is_empty(),
            format!("{}/{} agree with the closed form", cases.len() - bad.len(), cases.len()),
        );
        for c in bad {
            r.line(format!("  {:?} s={} r={}: {} vs {}", c.kind, c.s, c.r, c.value, c.closed_form));
        }
    }
    Ok(r)
}
