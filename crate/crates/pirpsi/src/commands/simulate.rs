use pirpsi_core::auditor::{monte_carlo_audit, MonteCarloConfig};
use pirpsi_core::Rational;

use super::{param_cells, param_columns, HarnessError};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{exact, Report};

fn within(ok: bool) -> &'static str {
    if ok {
        "within"
    } else {
        "outside"
    }
}

/// Sampled sessions. Only decoding is pass/fail; the rate and the distance
/// to the exact distribution are statistical and reported against their
/// tolerances.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let p = cfg.require_params()?;
    if cfg.trials == 0 {
        return Err(ConfigError::NoTrials.into());
    }
    let ws = cfg.demand_side(&p)?;
    let mc = MonteCarloConfig { budget: cfg.budget, ..MonteCarloConfig::new(cfg.trials, cfg.seed) };
    let rep = monte_carlo_audit(&p, &ws, &mc).map_err(|e| HarnessError::audit(p, e))?;

    let mut r = Report::new("simulate");
    r.field("params", p);
    r.field("request", &ws);
    r.field("trials", cfg.trials);
    r.field("seed", cfg.seed);
    r.check(
        "decode",
        rep.decode_ok(),
        format!("{}/{} sessions recovered the demand", rep.decode_successes, cfg.trials),
    );
    r.field("mean download", format!("{} symbols", exact(&rep.mean_download)));
    r.field("capacity", exact(&rep.capacity));
    r.info(
        "empirical rate",
        format!(
            "{:.6}, deviation {:.6} ({} tolerance {})",
            rep.empirical_rate.to_f64(),
            rep.rate_deviation.to_f64(),
            within(rep.rate_ok()),
            rep.config.rate_tolerance
        ),
    );
    let servers = (rep.config.trials * p.n() as u64) as i64;
    let zero_freq = Rational::new(rep.zero_queries as i64, servers.max(1));
    r.field("all-zero queries", format!("{:.6} observed, {} exact", zero_freq.to_f64(), exact(&rep.exact_zero_prob)));
    r.columns(&param_columns(&["server", "tv_distance"]));
    match &rep.tv_pooled {
        Some(tv) => {
            r.info(
                "TV distance, servers pooled",
                format!(
                    "{:.6} ({} threshold {})",
                    tv.to_f64(),
                    within(rep.tv_ok() == Some(true)),
                    rep.config.tv_threshold
                ),
            );
            for (n, t) in rep.tv_per_server.iter().enumerate() {
                r.field(&format!("TV distance, server {}", n + 1), format!("{:.6}", t.to_f64()));
                let mut row = param_cells(&p);
                row.extend([(n + 1).to_string(), format!("{:.6}", t.to_f64())]);
                r.row(row);
            }
            let mut row = param_cells(&p);
            row.extend(["pooled".to_string(), format!("{:.6}", tv.to_f64())]);
            r.row(row);
        }
        None => r.info("TV distance", "exact reference over budget, not computed"),
    }
    Ok(r)
}
