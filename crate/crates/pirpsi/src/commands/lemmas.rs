use pirpsi_core::distributions::{
    negative_m_entries, verify_alternating_identity, verify_coin_weighting, verify_pij_distribution_with,
    verify_poly_identity, verify_summij_with, IdentityCheck, MTable,
};
use pirpsi_core::{Rational, SchemeParams};

use super::{param_cells, param_columns, HarnessError};
use crate::config::ExperimentConfig;
use crate::report::{status, Report};

/// Largest `n` for the alternating polynomial sums.
const POLY_MAX_N: usize = 12;

/// Every valid `(N, K, M)` with `N <= 6`, `K <= 8`, `M < N`; `L = N - 1`, `q = 2`.
pub fn lemma_grid() -> Vec<SchemeParams> {
    let mut grid = Vec::new();
    for n in 2..=6 {
        for k in 2..=8 {
            for m in 1..n.min(k) {
                grid.push(SchemeParams::new(n, k, m, n - 1, 2).expect("grid tuples are valid"));
            }
        }
    }
    grid
}

struct Tally<'a> {
    report: &'a mut Report,
    params: Option<SchemeParams>,
    failed: Vec<String>,
    counts: Vec<(&'static str, usize, usize)>,
}

impl Tally<'_> {
    fn record(&mut self, name: &'static str, index: String, lhs: &Rational, rhs: &Rational, ok: bool) {
        match self.counts.iter_mut().find(|c| c.0 == name) {
            Some(c) => {
                c.1 += usize::from(ok);
                c.2 += 1;
            }
            None => self.counts.push((name, usize::from(ok), 1)),
        }
        if !ok {
            self.failed.push(format!("{name}[{index}]: {lhs} != {rhs}"));
        }
        let mut row = self.params.map_or_else(|| vec![String::new(); 5], |p| param_cells(&p));
        row.extend([name.to_string(), index, lhs.to_string(), rhs.to_string(), status(ok).to_string()]);
        self.report.row(row);
    }

    fn identity(&mut self, name: &'static str, index: String, c: &IdentityCheck) {
        self.record(name, index, &c.lhs, &c.rhs, c.passed());
    }

    fn summary(&self) -> String {
        let mut parts: Vec<String> = self.counts.iter().map(|(n, ok, all)| format!("{n} {ok}/{all}")).collect();
        parts.extend(self.failed.iter().cloned());
        parts.join(", ")
    }
}

/// The probability table and identity verifiers over the grid.
pub fn cmd_check_lemmas(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let grid = cfg.tuples(lemma_grid);
    let mut r = Report::new("check-lemmas");
    r.field("tuples", grid.len());
    if let Some((i, j)) = cfg.m_fault {
        r.field("injected fault", format!("m[{i},{j}] + 1"));
    }
    r.columns(&param_columns(&["check", "index", "lhs", "rhs", "status"]));

    let mut results = Vec::new();
    for p in &grid {
        let mut table = MTable::new(p);
        if let Some((i, j)) = cfg.m_fault {
            if let Ok(v) = table.get(i, j).cloned() {
                table = table.with_override(i, j, v + 1).expect("entry exists");
            }
        }
        let mut t = Tally { report: &mut r, params: Some(*p), failed: Vec::new(), counts: Vec::new() };
        let negative = negative_m_entries(&table);
        if negative.is_empty() {
            t.record("m_nonneg", "all".to_string(), &Rational::zero(), &Rational::zero(), true);
        }
        for ((i, j), v) in negative {
            t.record("m_nonneg", format!("{i},{j}"), &Rational::from(v), &Rational::zero(), false);
        }
        let pij = verify_pij_distribution_with(&table);
        t.record("pij", "sum".to_string(), &pij.sum, &Rational::one(), pij.passed());
        for j in 1..=p.interference() {
            t.identity("summij", j.to_string(), &verify_summij_with(&table, j).expect("j in range"));
            t.identity("alternating", j.to_string(), &verify_alternating_identity(j, p).expect("j in range"));
        }
        for i in 0..=p.m() {
            t.identity("coin", i.to_string(), &verify_coin_weighting(i, p).expect("i in range"));
        }
        let ok = t.failed.is_empty();
        results.push((*p, ok, t.summary()));
    }

    let mut t = Tally { report: &mut r, params: None, failed: Vec::new(), counts: Vec::new() };
    for n in 1..=POLY_MAX_N {
        for i in 0..n {
            let mut coeffs = vec![Rational::zero(); i + 1];
            coeffs[i] = Rational::one();
            t.identity("poly", format!("n={n} i={i}"), &verify_poly_identity(n, &coeffs).expect("degree below n"));
        }
    }
    let poly_ok = t.failed.is_empty();
    let poly = t.summary();

    r.section("tuples");
    for (p, ok, detail) in results {
        r.check(p, ok, detail);
    }
    r.section("polynomial sums");
    r.check(format!("monomials k^i, i < n <= {POLY_MAX_N}"), poly_ok, poly);
    Ok(r)
}
