use pirpsi_core::protocol::run_session;
use pirpsi_core::randomness::Sampler;
use pirpsi_core::{Answer, MessageStore, QueryGenerator, Symbol};

use super::{param_cells, param_columns, HarnessError};
use crate::config::{ConfigError, ExperimentConfig};
use crate::db;
use crate::report::Report;
use crate::wire;

fn symbols(s: &[Symbol]) -> String {
    s.iter().map(|x| x.0.to_string()).collect::<Vec<_>>().join(" ")
}

/// One session against a random (or loaded) store.
pub fn cmd_demo(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let store = match &cfg.load_db {
        Some(path) => {
            let store = db::load(path)?;
            if let Some(flag) = cfg.params.filter(|p| p != store.params()) {
                return Err(ConfigError::StoreParams { file: *store.params(), flag }.into());
            }
            store
        }
        None => MessageStore::random(cfg.require_params()?, cfg.seed),
    };
    let params = *store.params();
    let ws = cfg.demand_side(&params)?;
    if let Some(path) = &cfg.save_db {
        db::save(&store, path)?;
    }
    let generator = QueryGenerator::new(&params)?;
    let mut rng = Sampler::with_stream(cfg.seed, 1);
    let out = run_session(&ws, &generator, &store, &mut rng)?;
    let state = &out.state;

    let mut r = Report::new("demo");
    r.field("params", params);
    r.field("seed", cfg.seed);
    r.field("request", &ws);
    r.field("store", cfg.load_db.as_ref().map_or("random".to_string(), |p| p.display().to_string()));
    let (i, j) = state.pair();
    r.field("(I, J)", format!("({i}, {j})"));
    r.field("theta", state.theta());
    r.field("pi", format!("{:?}", state.pi()));
    r.field("sigma", format!("{:?}", state.sigma()));
    r.field("draws", out.tape.len());

    r.section("servers");
    r.columns(&param_columns(&["server", "query", "support", "answer", "query_bytes", "answer_bytes"]));
    let mut wire_ok = true;
    for (n, (v, a)) in out.queries.iter().zip(&out.answers).enumerate() {
        let qb = wire::encode_query(v, &params);
        let ab = wire::encode_answer(a, &params);
        let round_trip = match (&qb, &ab) {
            (Ok(qb), Ok(ab)) => {
                wire::decode_query(qb).map(|w| &w.vector == v).unwrap_or(false)
                    && wire::decode_answer(ab, &params).map(|x| &x == a).unwrap_or(false)
            }
            _ => false,
        };
        wire_ok &= round_trip;
        let answer = match a {
            Answer::Empty => "empty".to_string(),
            Answer::Payload(sp) => symbols(sp.symbols()),
        };
        let (qlen, alen) = (qb.map_or(0, |b| b.len()), ab.map_or(0, |b| b.len()));
        r.line(format!("server {}: query {v} -> {answer} ({qlen} + {alen} wire bytes)", n + 1));
        let mut row = param_cells(&params);
        row.extend([
            (n + 1).to_string(),
            v.to_string(),
            v.support_size().to_string(),
            answer,
            qlen.to_string(),
            alen.to_string(),
        ]);
        r.row(row);
    }

    r.section("result");
    let downloaded = out.answers.iter().filter(|a| !a.is_empty()).count();
    r.field("downloaded", format!("{downloaded} sub-packets, {} symbols", out.downloaded_symbols));
    r.field("recovered", symbols(out.recovered.symbols()));
    r.check("wire round trip", wire_ok, "every query and answer decodes to itself");
    let expected = store.get(ws.demand()).expect("demand within store");
    r.check("decode", &out.recovered == expected, format!("message {} recovered", ws.demand()));
    Ok(r)
}
