//! Golden fixtures: `<dir>/<name>/{input.cfk, params.txt, expected.json}`.
//!
//! Each non-empty line of `params.txt` is one run with `NAME=VALUE` pairs;
//! an empty file means a single run without parameters. `expected.json`
//! holds the reports of all runs with timings removed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cfk_core::Rational;
use serde_json::{json, Value};

use crate::commands::{cmd_report, load_str, read};
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Match,
    /// First differing line of the pretty-printed JSON.
    Mismatch { line: usize, expected: String, actual: String },
    Missing,
    Blessed,
}

#[derive(Clone, Debug)]
pub struct FixtureResult {
    pub name: String,
    pub outcome: Outcome,
}

pub fn parse_param(s: &str) -> Result<(String, Rational), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let value: Rational = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not a rational number"))?;
    Ok((name.trim().to_string(), value))
}

fn param_sets(text: &str) -> Result<Vec<(String, BTreeMap<String, Rational>)>, CliError> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let set = line
            .split_whitespace()
            .map(parse_param)
            .collect::<Result<BTreeMap<_, _>, _>>()
            .map_err(CliError::Input)?;
        out.push((line.to_string(), set));
    }
    if out.is_empty() {
        out.push((String::new(), BTreeMap::new()));
    }
    Ok(out)
}

/// The fixture names under `dir`, sorted.
pub fn fixtures(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Read {
        path: dir.display().to_string(),
        source,
    })?;
    let mut out: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("input.cfk").is_file())
        .collect();
    out.sort();
    Ok(out)
}

/// The golden document for one fixture.
pub fn render_fixture(fixture: &Path) -> Result<Value, CliError> {
    let src = read(&fixture.join("input.cfk"))?;
    let params_path = fixture.join("params.txt");
    let params_text = if params_path.exists() { read(&params_path)? } else { String::new() };
    let mut runs = Vec::new();
    for (line, set) in param_sets(&params_text)? {
        let loaded = load_str(&src, "input.cfk", &set)?;
        let report = cmd_report(&loaded)?;
        runs.push(json!({ "params": line, "report": report.to_value(false) }));
    }
    let name = fixture.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(json!({ "fixture": name, "runs": runs }))
}

pub fn golden_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes") + "\n"
}

fn first_difference(expected: &str, actual: &str) -> Outcome {
    let (mut e, mut a) = (expected.lines(), actual.lines());
    let mut line = 1;
    loop {
        match (e.next(), a.next()) {
            (None, None) => return Outcome::Match,
            (x, y) if x == y => line += 1,
            (x, y) => {
                return Outcome::Mismatch {
                    line,
                    expected: x.unwrap_or("<end>").to_string(),
                    actual: y.unwrap_or("<end>").to_string(),
                }
            }
        }
    }
}

/// Runs every fixture and compares with its golden; `bless` rewrites them.
pub fn run_corpus(dir: &Path, bless: bool) -> Result<Vec<FixtureResult>, CliError> {
    let mut results = Vec::new();
    for fixture in fixtures(dir)? {
        let name = fixture.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let actual = golden_text(&render_fixture(&fixture)?);
        let golden = fixture.join("expected.json");
        let outcome = if bless {
            fs::write(&golden, &actual).map_err(|source| CliError::Write {
                path: golden.display().to_string(),
                source,
            })?;
            Outcome::Blessed
        } else if !golden.exists() {
            Outcome::Missing
        } else {
            first_difference(&read(&golden)?, &actual)
        };
        results.push(FixtureResult { name, outcome });
    }
    Ok(results)
}
