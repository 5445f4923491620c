//! results.csv and summary.json emission.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

/// Fixed 17-significant-digit rendering so identical runs give identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// What a command produced: the CSV table, a JSON payload and whether its
/// tolerance checks held.
pub struct Report {
    pub table: Table,
    pub results: Value,
    pub passed: bool,
}

impl Report {
    pub fn ok(table: Table, results: impl Serialize) -> Self {
        Report {
            table,
            results: serde_json::to_value(results).expect("results serialize"),
            passed: true,
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    version: &'a str,
    status: &'a str,
    config: &'a RunConfig,
    results: &'a Value,
}

pub fn write(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    report: &Report,
) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), report.table.to_csv())?;
    let summary = Summary {
        command,
        version: ncspectral::VERSION,
        status: if report.passed {
            "ok"
        } else {
            "tolerance-failure"
        },
        config,
        results: &report.results,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    fs::write(dir.join("summary.json"), text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(std::f64::consts::PI), "3.1415926535897931e0");
        assert_eq!(num(-0.5), "-5.0000000000000000e-1");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), "1".into()]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",1\n");
    }
}
