use pirpsi_core::auditor::{answer_set_census, appearance_by_support};

use super::{param_cells, param_columns, HarnessError};
use crate::config::ExperimentConfig;
use crate::report::Report;
use crate::table1::{self, Standing};

/// Answer-set types with their probabilities; diffed against the reference
/// table when `(N, K, M) = (4, 5, 2)`.
pub fn cmd_census(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let p = cfg.require_params()?;
    let ws = cfg.demand_side(&p)?;
    let fail = |e| HarnessError::audit(p, e);
    let census = answer_set_census(&ws, &p, cfg.budget).map_err(fail)?;
    let appearance = appearance_by_support(&ws, &p, cfg.budget).map_err(fail)?;

    let mut r = Report::new("census");
    r.field("params", p);
    r.field("request", &ws);
    r.field("types", census.rows.len());
    r.columns(&param_columns(&["type", "count", "probability", "mass", "uniform"]));
    r.section("answer-set types");
    for row in &census.rows {
        let uniform = if row.uniform { "" } else { " (mean; sets differ)" };
        r.line(format!("{:<36} {:>6} x {}{uniform}", row.signature.to_string(), row.count, row.probability));
        let mut cells = param_cells(&p);
        cells.extend([
            row.signature.to_string(),
            row.count.to_string(),
            row.probability.to_string(),
            row.mass().to_string(),
            row.uniform.to_string(),
        ]);
        r.row(cells);
    }
    r.check("sum to one", census.total.is_one(), format!("sum of probability x count = {}", census.total));

    r.section("answer appearance by sub-packet count");
    for a in &appearance {
        let found = a.probability.as_ref().map_or("not uniform".to_string(), |x| x.to_string());
        r.check(
            format!("{} sub-packets", a.support),
            a.probability.as_ref() == Some(&a.expected),
            format!("{found} over {} vectors, N x per-server mass {}", a.vectors, a.expected),
        );
    }

    if (p.n(), p.k(), p.m()) == table1::PARAMS {
        r.section(format!("reference table (fixture v{})", table1::FIXTURE_VERSION));
        r.check(
            "type count",
            census.rows.len() == table1::TABLE.len(),
            format!("{} found, {} expected", census.rows.len(), table1::TABLE.len()),
        );
        for g in &table1::TABLE {
            let sig = g.signature();
            let detail = match census.rows.iter().find(|row| row.signature == sig) {
                Some(row) => {
                    let ok = row.count == g.count && row.probability == g.probability();
                    (ok, format!("{} x {} (expected {} x {})", row.count, row.probability, g.count, g.probability()))
                }
                None => (false, "missing".to_string()),
            };
            r.check(format!("type {} {sig}", g.number), detail.0, detail.1);
        }
        for g in &table1::APPEARANCE {
            let found = appearance.iter().find(|a| a.support == g.support).and_then(|a| a.probability.clone());
            let shown = found.as_ref().map_or("none".to_string(), |x| x.to_string());
            let name = format!("appearance, {} sub-packets", g.support);
            match g.standing {
                Standing::Binding => {
                    r.check(name, found == Some(g.probability()), format!("{shown} (expected {})", g.probability()))
                }
                Standing::Informational => {
                    let agrees = if found == Some(g.probability()) { "agrees" } else { "differs" };
                    r.info(name, format!("{shown} enumerated; published {} {agrees}", g.probability()));
                }
            }
        }
    }
    Ok(r)
}
