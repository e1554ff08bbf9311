use std::io::Write;

use serde::Serialize;

use super::scenario::{Expect, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Passes when the deviation is at most the tolerance.
    Upper,
    /// Passes when the value is at least the tolerance.
    Lower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub points: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    pub expected: Expect,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Record {
    pub fn upper(name: impl Into<String>, points: usize, max_deviation: f64, tolerance: f64) -> Self {
        Record {
            name: name.into(),
            points,
            max_deviation,
            tolerance,
            bound: Bound::Upper,
            pass: max_deviation.is_finite() && max_deviation <= tolerance,
            expected: Expect::Pass,
            note: None,
        }
    }

    pub fn lower(name: impl Into<String>, points: usize, value: f64, threshold: f64) -> Self {
        Record {
            bound: Bound::Lower,
            pass: value.is_finite() && value >= threshold,
            ..Record::upper(name, points, value, threshold)
        }
    }

    /// A check that could not be evaluated.
    pub fn failed(name: impl Into<String>, tolerance: f64, why: impl std::fmt::Display) -> Self {
        Record {
            pass: false,
            note: Some(why.to_string()),
            ..Record::upper(name, 0, f64::NAN, tolerance)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub records: Vec<Record>,
    /// Every record passed.
    pub checks_pass: bool,
    /// The outcome matches the scenario's `expect` marker.
    pub pass: bool,
}

impl ScenarioReport {
    pub fn new(scenario: Scenario, mut records: Vec<Record>) -> Self {
        for r in &mut records {
            r.expected = scenario.expect;
        }
        let checks_pass = !records.is_empty() && records.iter().all(|r| r.pass);
        let pass = match scenario.expect {
            Expect::Pass => checks_pass,
            Expect::Fail => !checks_pass,
        };
        ScenarioReport {
            scenario,
            records,
            checks_pass,
            pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub scenarios: Vec<ScenarioReport>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(command: &str, scenarios: Vec<ScenarioReport>, wall_time_s: f64) -> Self {
        let pass = scenarios.iter().all(|s| s.pass);
        Report {
            command: command.to_string(),
            scenarios,
            pass,
            wall_time_s,
        }
    }

    pub fn write_table(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let records = self.scenarios.iter().flat_map(|s| s.records.iter().map(move |r| (s, r)));
        let w0 = records.clone().map(|(s, _)| s.scenario.name.chars().count()).max().unwrap_or(0).max(8);
        let w1 = records.map(|(_, r)| r.name.chars().count()).max().unwrap_or(0).max(5);
        writeln!(
            out,
            "{:<w0$} {:<w1$} {:>6} {:>12} {:>10}  result",
            "scenario", "check", "points", "deviation", "tolerance"
        )?;
        for s in &self.scenarios {
            for r in &s.records {
                let cmp = if r.bound == Bound::Lower { "≥" } else { "≤" };
                let verdict = match (r.pass, r.expected) {
                    (true, Expect::Pass) => "PASS",
                    (false, Expect::Pass) => "FAIL",
                    (true, Expect::Fail) => "pass (expected fail)",
                    (false, Expect::Fail) => "fail (expected)",
                };
                writeln!(
                    out,
                    "{:<w0$} {:<w1$} {:>6} {:>12.3e} {}{:>9.1e}  {verdict}",
                    s.scenario.name, r.name, r.points, r.max_deviation, cmp, r.tolerance
                )?;
                if let Some(n) = &r.note {
                    writeln!(out, "{:<w0$}   {n}", "")?;
                }
            }
        }
        writeln!(
            out,
            "overall: {} ({} scenarios, {:.2} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.scenarios.len(),
            self.wall_time_s
        )
    }
}

/// Sample table for CSV export.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

/// Write the tables of several scenarios into one CSV file, with the
/// scenario name as the first column.
pub fn write_csv(path: &std::path::Path, tables: &[(String, Table)]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_path(path)?;
    let mut last_header: Option<&[String]> = None;
    for (name, t) in tables {
        if last_header != Some(t.header.as_slice()) {
            let mut h = vec!["scenario".to_string()];
            h.extend(t.header.iter().cloned());
            w.write_record(&h)?;
            last_header = Some(&t.header);
        }
        for row in &t.rows {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
