//! The built-in scenario suite, batch runs and report rendering.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::decompose::{check_atomic, check_countably_additive};
use crate::error::{Error, Result};
use crate::harness::{self, Scenario, TheoremReport, SCHEMA_VERSION};
use crate::lattice::Verdict;
use crate::measures::{check_absolutely_continuous, check_continuous, check_purely_finitely_additive, check_singular, Charge};
use crate::text;

macro_rules! builtin {
    ($($name:literal),* $(,)?) => {
        [$(($name, include_str!(concat!("../scenarios/", $name, ".scn")))),*]
    };
}

/// Frozen scenario files, by name.
pub const BUILTINS: [(&str, &str); 12] = builtin![
    "teokyber-perturbation",
    "teokyber-constant",
    "teokyber-stationary",
    "main-charged",
    "main-constant-charge",
    "main-finite-atoms",
    "schur-halving-prefix",
    "schur-point-masses",
    "finale-dyadic",
    "nuovoschur-dyadic",
    "corofinale-dyadic",
    "nuovocorfinale-dyadic",
];

pub fn builtin_scenarios() -> Result<Vec<Scenario>> {
    BUILTINS.iter().map(|(_, src)| text::parse_scenario(src)).collect()
}

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Format {
    Json,
    Csv,
    Md,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Md => "md",
        }
    }
}

pub type Verifier = fn(&Scenario) -> Result<TheoremReport>;

/// Runs every scenario on `jobs` threads (0 picks the default); results
/// come back in input order whatever the schedule.
pub fn run_all(scenarios: &[Scenario], jobs: usize, verifier: Verifier) -> Result<Vec<Result<TheoremReport>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidValue(format!("thread pool: {e}")))?;
    Ok(pool.install(|| scenarios.par_iter().map(verifier).collect()))
}

pub fn run_builtins(jobs: usize) -> Result<Vec<Result<TheoremReport>>> {
    run_all(&builtin_scenarios()?, jobs, harness::run)
}

pub fn render(report: &TheoremReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => render_csv(report),
        Format::Md => render_md(report),
    }
}

fn verdict_cells(v: &Verdict) -> [String; 3] {
    [v.outcome.to_string(), v.depth.to_string(), v.witness.as_ref().map(|w| w.to_string()).unwrap_or_default()]
}

/// Rows `(record, name, value, depth, witness)`.
fn rows(report: &TheoremReport) -> Vec<[String; 5]> {
    let mut out = vec![];
    for (name, v) in &report.hypothesis_audit {
        let [o, d, w] = verdict_cells(v);
        out.push(["hypothesis".into(), name.clone(), o, d, w]);
    }
    let [o, d, w] = verdict_cells(&report.conclusion);
    out.push(["conclusion".into(), report.theorem_id.to_string(), o, d, w]);
    out.push(["regulator".into(), report.regulator_note.clone(), report.derived_regulator.to_string(), String::new(), String::new()]);
    for t in &report.decomposition_traces {
        out.push([
            "trace".into(),
            format!("{} {}", t.kind, t.index),
            if t.certified { "certified" } else { "uncertified" }.into(),
            String::new(),
            t.witness_set.clone().unwrap_or_default(),
        ]);
    }
    out.push(["violation".into(), String::new(), report.violation_flag.to_string(), String::new(), String::new()]);
    out
}

fn render_csv(report: &TheoremReport) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["scenario", "record", "name", "value", "depth", "witness"]).expect("in memory");
    for r in rows(report) {
        w.write_record(std::iter::once(report.scenario.as_str()).chain(r.iter().map(String::as_str))).expect("in memory");
    }
    String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8 input")
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

fn render_md(report: &TheoremReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}\n", report.scenario);
    let _ = writeln!(s, "theorem: {}  ", report.theorem_id);
    let _ = writeln!(s, "schema version: {SCHEMA_VERSION}\n");
    s.push_str("| record | name | value | depth | witness |\n|---|---|---|---|---|\n");
    for r in rows(report) {
        let cells: Vec<String> = r.iter().map(|c| md_cell(c)).collect();
        let _ = writeln!(s, "| {} |", cells.join(" | "));
    }
    s
}

/// One line of the index: a scenario and where its report went.
#[derive(Clone, Debug, Serialize)]
pub struct IndexEntry {
    pub scenario: String,
    pub theorem_id: String,
    pub conclusion: String,
    pub violation_flag: bool,
    pub report: Option<String>,
    pub error: Option<String>,
}

impl IndexEntry {
    pub fn new(name: &str, theorem: &str, result: &Result<TheoremReport>, file: &str) -> Self {
        match result {
            Ok(r) => Self {
                scenario: name.to_string(),
                theorem_id: theorem.to_string(),
                conclusion: r.conclusion.outcome.to_string(),
                violation_flag: r.violation_flag,
                report: Some(file.to_string()),
                error: None,
            },
            Err(e) => Self {
                scenario: name.to_string(),
                theorem_id: theorem.to_string(),
                conclusion: "Error".into(),
                violation_flag: false,
                report: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Serialize)]
struct Index<'a> {
    schema_version: u32,
    scenarios: &'a [IndexEntry],
}

pub fn render_index(entries: &[IndexEntry], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&Index { schema_version: SCHEMA_VERSION, scenarios: entries }).expect("index serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(vec![]);
            w.write_record(["scenario", "theorem_id", "conclusion", "violation_flag", "report", "error"]).expect("in memory");
            for e in entries {
                let flag = e.violation_flag.to_string();
                w.write_record([
                    e.scenario.as_str(),
                    &e.theorem_id,
                    &e.conclusion,
                    &flag,
                    e.report.as_deref().unwrap_or(""),
                    e.error.as_deref().unwrap_or(""),
                ])
                .expect("in memory");
            }
            String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8 input")
        }
        Format::Md => {
            let mut s = format!("# Scenario index\n\nschema version: {SCHEMA_VERSION}\n\n");
            s.push_str("| scenario | theorem | conclusion | violation | report | error |\n|---|---|---|---|---|---|\n");
            for e in entries {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} |",
                    md_cell(&e.scenario),
                    e.theorem_id,
                    e.conclusion,
                    e.violation_flag,
                    e.report.as_deref().unwrap_or(""),
                    md_cell(e.error.as_deref().unwrap_or(""))
                );
            }
            s
        }
    }
}

/// Property ids accepted by [`check_property`], with the number of charges
/// each reads.
pub const PROPERTIES: [(&str, usize); 6] = [
    ("purely-finitely-additive", 1),
    ("countably-additive", 1),
    ("continuous", 1),
    ("atomic", 1),
    ("absolutely-continuous", 2),
    ("singular", 2),
];

/// Checks one property of `charges[0]`; the two-place properties read the
/// reference measure from `charges[1]`.
pub fn check_property(id: &str, charges: &[Charge], depth: u64) -> Result<Verdict> {
    let (_, arity) = PROPERTIES.iter().find(|(p, _)| *p == id).ok_or_else(|| Error::UnknownId(id.to_string()))?;
    if charges.len() != *arity {
        return Err(Error::InvalidValue(format!("`{id}` reads {arity} charge(s), found {}", charges.len())));
    }
    let m = &charges[0];
    match id {
        "purely-finitely-additive" => check_purely_finitely_additive(m, depth),
        "countably-additive" => check_countably_additive(m, depth),
        "continuous" => check_continuous(m, depth),
        "atomic" => check_atomic(m, depth),
        "absolutely-continuous" => check_absolutely_continuous(m, &charges[1], depth),
        _ => check_singular(m, &charges[1], depth),
    }
}

/// Reads the charges of a property file.
pub fn parse_charges(src: &str) -> Result<Vec<Charge>> {
    text::read(src)?.iter().map(text::charge).collect()
}
