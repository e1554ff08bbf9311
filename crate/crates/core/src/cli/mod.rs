//! Command-line front end: scenario files, verification runs and reports.
//!
//! Every run prints one JSON document on stdout. Exit codes: 0 when every
//! scenario ends as expected, 1 when a check fails, 2 for input errors.

mod checks;
pub mod report;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::Family;
pub use report::{Bound, Record, Report, ScenarioReport, Table};
pub use scenario::{parse_sections, Command, Expect, Job, Overrides, Scenario, Section, DEFAULT_TOL, TOL_ENV};

/// The pool `verify-all` runs when no `--scenario` is given.
pub const DEFAULT_POOL: &str = include_str!("../../pools/default.pool");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputError {
    pub kind: &'static str,
    pub message: String,
}

impl InputError {
    pub fn syntax(line: usize, msg: impl std::fmt::Display) -> Self {
        InputError {
            kind: "scenario_syntax",
            message: format!("line {line}: {msg}"),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        InputError {
            kind: "validation",
            message: msg.into(),
        }
    }

    pub fn expression(section: &str, source: &str, e: impl std::fmt::Display) -> Self {
        InputError {
            kind: "expression",
            message: format!("[{section}] h = `{source}`: {e}"),
        }
    }

    fn io(msg: impl Into<String>) -> Self {
        InputError {
            kind: "io",
            message: msg.into(),
        }
    }
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for InputError {}

#[derive(Parser, Debug)]
#[command(name = "geodesy", version, about = "Geodesic representations of u'' + h u = 0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    /// Scenario file (a pool file for verify-all).
    #[arg(long, global = true, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
    /// Coefficient function, overriding the scenario.
    #[arg(long, global = true, value_name = "EXPR", allow_hyphen_values = true)]
    pub h: Option<String>,
    /// hyperbolic, ads (= ads+), ads-, complex or kn.
    #[arg(long, global = true, value_name = "NAME")]
    pub family: Option<String>,
    /// Check tolerance, overriding the scenario and GEODESY_DEFAULT_TOL.
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
    /// Seed for sampled points.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Human-readable table on stderr.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Write sample tables as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sub {
    /// Curvature sweeps over random domain points.
    Curvature,
    /// Affine geodesic integration with conservation checks.
    Geodesic,
    /// Geodesic, solution basis and solution samples.
    Solve,
    /// Riccati solutions and the geodesics they induce.
    Riccati,
    /// Kähler-Norden identities, geodesic split and submanifolds.
    KnVerify,
    /// Run a scenario pool (the built-in one by default).
    VerifyAll,
}

impl Sub {
    fn command(self) -> Option<Command> {
        match self {
            Sub::Curvature => Some(Command::Curvature),
            Sub::Geodesic => Some(Command::Geodesic),
            Sub::Solve => Some(Command::Solve),
            Sub::Riccati => Some(Command::Riccati),
            Sub::KnVerify => Some(Command::KnVerify),
            Sub::VerifyAll => None,
        }
    }

    fn name(self) -> &'static str {
        self.command().map(Command::name).unwrap_or("verify-all")
    }
}

/// Everything a run produces besides the exit code.
pub struct RunOutput {
    pub report: Report,
    pub tables: Vec<(String, Table)>,
}

fn default_tol() -> Result<Option<f64>, InputError> {
    match std::env::var(TOL_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| *t > 0.0 && t.is_finite())
            .map(Some)
            .ok_or_else(|| InputError::invalid(format!("{TOL_ENV}=`{v}` is not a positive number"))),
        Err(_) => Ok(None),
    }
}

/// Build the jobs a command line asks for, validating all of them before
/// anything runs.
pub fn jobs(cli: &Cli) -> Result<Vec<Job>, InputError> {
    let family = cli
        .family
        .as_deref()
        .map(|f| Family::from_name(f).ok_or_else(|| InputError::invalid(format!("unknown family `{f}`"))))
        .transpose()?;
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(InputError::invalid("--tol must be a positive number"));
        }
    }
    let ov = Overrides {
        command: cli.command.command(),
        family,
        h: cli.h.clone(),
        tol: cli.tol,
        seed: cli.seed,
        default_tol: default_tol()?,
    };
    let text = match (&cli.scenario, cli.command) {
        (Some(p), _) => Some(std::fs::read_to_string(p).map_err(|e| InputError::io(format!("{}: {e}", p.display())))?),
        (None, Sub::VerifyAll) => Some(DEFAULT_POOL.to_string()),
        (None, _) => None,
    };
    let sections = match text {
        Some(t) => parse_sections(&t)?,
        None => vec![Section {
            name: "cli".into(),
            line: 0,
            entries: Vec::new(),
        }],
    };
    if sections.is_empty() {
        return Err(InputError::invalid("the pool contains no scenarios"));
    }
    sections.iter().map(|s| Job::from_section(s, &ov)).collect()
}

/// Run validated jobs. Scenarios run in parallel; the report keeps their
/// order.
pub fn execute(command: &str, jobs: &[Job], started: Instant) -> RunOutput {
    let outcomes: Vec<checks::Outcome> = jobs.par_iter().map(checks::run).collect();
    let mut scenarios = Vec::with_capacity(jobs.len());
    let mut tables = Vec::new();
    for (job, o) in jobs.iter().zip(outcomes) {
        if let Some(t) = o.table {
            tables.push((job.scenario.name.clone(), t));
        }
        scenarios.push(ScenarioReport::new(job.scenario.clone(), o.records));
    }
    RunOutput {
        report: Report::new(command, scenarios, started.elapsed().as_secs_f64()),
        tables,
    }
}

fn fail_input(e: &InputError, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    #[derive(Serialize)]
    struct Payload<'a> {
        error: &'a InputError,
    }
    let _ = writeln!(
        stdout,
        "{}",
        serde_json::to_string_pretty(&Payload { error: e }).unwrap_or_default()
    );
    let _ = writeln!(stderr, "error: {e}");
    2
}

/// Parse arguments, run and write the report; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let started = Instant::now();
    let jobs = match jobs(&cli) {
        Ok(j) => j,
        Err(e) => return fail_input(&e, stdout, stderr),
    };
    let out = execute(cli.command.name(), &jobs, started);
    if let Some(path) = &cli.csv {
        if let Err(e) = report::write_csv(path, &out.tables) {
            return fail_input(&InputError::io(format!("{}: {e}", path.display())), stdout, stderr);
        }
    }
    match serde_json::to_string_pretty(&out.report) {
        Ok(s) => {
            let _ = writeln!(stdout, "{s}");
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    }
    if cli.pretty {
        let _ = out.report.write_table(stderr);
    }
    if out.report.pass {
        0
    } else {
        1
    }
}
