//! Reports: a UTF-8 text document and a comma-separated table.

use std::fmt::Display;

use pirpsi_core::Rational;

use crate::config::Format;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    title: String,
    lines: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    failures: usize,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), ..Self::default() }
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn field(&mut self, key: &str, value: impl Display) {
        self.lines.push(format!("{key}: {value}"));
    }

    pub fn section(&mut self, heading: impl Display) {
        self.lines.push(String::new());
        self.lines.push(format!("## {heading}"));
    }

    /// Records a pass/fail line. Failures make [`Report::passed`] false.
    pub fn check(&mut self, name: impl Display, ok: bool, detail: impl Display) {
        if !ok {
            self.failures += 1;
        }
        self.lines.push(format!("[{}] {name}: {detail}", status(ok)));
    }

    /// A line that never affects the verdict.
    pub fn info(&mut self, name: impl Display, detail: impl Display) {
        self.lines.push(format!("[INFO] {name}: {detail}"));
    }

    pub fn columns(&mut self, names: &[&str]) {
        self.columns = names.iter().map(|s| s.to_string()).collect();
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text(),
            Format::Tabular => self.csv(),
        }
    }

    fn text(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&format!("\nresult: {}\n", if self.passed() { "PASS" } else { "FAIL" }));
        out
    }

    fn csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }
}

pub fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// `p/q (0.123456)`.
pub fn exact(r: &Rational) -> String {
    format!("{r} ({:.6})", r.to_f64())
}
