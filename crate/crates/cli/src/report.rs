use std::collections::BTreeMap;
use std::time::Instant;

use cfk_core::algebra::{CheckReport, ConformalAlgebra};
use cfk_core::Rational;
use serde::Serialize;
use serde_json::Value;

/// Version of the report layout.
pub const SCHEMA: u32 = 1;

/// Violations listed per check; the count covers all of them.
pub const MAX_LISTED: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ViolationOut {
    pub identity: String,
    pub indices: Vec<usize>,
    pub residual: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub subject: String,
    pub check: String,
    pub status: Status,
    #[serde(skip_serializing_if = "is_zero")]
    pub violation_count: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<ViolationOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Clone, Debug, Serialize)]
pub struct InputInfo {
    pub file: String,
    pub sha256: String,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    schema: u32,
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<&'a InputInfo>,
    params: &'a BTreeMap<String, String>,
    status: Status,
    results: &'a [CheckResult],
    data: &'a BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<Timings>,
}

#[derive(Serialize)]
struct Timings {
    total_ms: u128,
}

/// Everything a command found, in the order it was checked.
#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub input: Option<InputInfo>,
    pub params: BTreeMap<String, String>,
    pub results: Vec<CheckResult>,
    pub data: BTreeMap<String, Value>,
    started: Instant,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            input: None,
            params: BTreeMap::new(),
            results: Vec::new(),
            data: BTreeMap::new(),
            started: Instant::now(),
        }
    }

    pub fn check(&mut self, subject: &str, check: &str, report: &CheckReport<Rational>) {
        let violations: Vec<ViolationOut> = report
            .violations
            .iter()
            .take(MAX_LISTED)
            .map(|v| ViolationOut {
                identity: v.identity.clone(),
                indices: v.indices.clone(),
                residual: v.residual.rendered(),
            })
            .collect();
        self.results.push(CheckResult {
            subject: subject.to_string(),
            check: check.to_string(),
            status: Status::of(report.passed()),
            violation_count: report.violations.len(),
            violations,
            note: None,
        });
    }

    pub fn verdict(&mut self, subject: &str, check: &str, ok: bool, note: Option<String>) {
        self.results.push(CheckResult {
            subject: subject.to_string(),
            check: check.to_string(),
            status: Status::of(ok),
            violation_count: 0,
            violations: Vec::new(),
            note,
        });
    }

    /// Stores `value` under `section` / `key`.
    pub fn put(&mut self, section: &str, key: &str, value: Value) {
        let entry = self.data.entry(section.to_string()).or_insert_with(|| Value::Object(Default::default()));
        entry.as_object_mut().expect("sections are objects").insert(key.to_string(), value);
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.data.insert(key.to_string(), value);
    }

    pub fn status(&self) -> Status {
        Status::of(self.results.iter().all(|r| r.status == Status::Pass))
    }

    /// JSON form; goldens leave `timings` out.
    pub fn to_value(&self, timings: bool) -> Value {
        let out = ReportOut {
            schema: SCHEMA,
            command: &self.command,
            input: self.input.as_ref(),
            params: &self.params,
            status: self.status(),
            results: &self.results,
            data: &self.data,
            timings: timings.then(|| Timings {
                total_ms: self.started.elapsed().as_millis(),
            }),
        };
        serde_json::to_value(out).expect("report serializes")
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let status = match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
            };
            out.push_str(&format!("{status} {} {}", r.subject, r.check));
            if r.violation_count > 0 {
                out.push_str(&format!(" ({} violations)", r.violation_count));
            }
            if let Some(n) = &r.note {
                out.push_str(&format!(": {n}"));
            }
            out.push('\n');
        }
        out
    }
}

/// `[X,Y] = (c) Z + ...` for every nonzero product.
pub fn render_table(a: &ConformalAlgebra<Rational>) -> Vec<String> {
    let names = a.names();
    let mut out = Vec::new();
    for i in 0..a.rank() {
        for j in 0..a.rank() {
            let entry = a.entry(i, j);
            if entry.iter().any(|c| !c.is_zero()) {
                out.push(format!("[{},{}] = {}", names[i], names[j], cfk_dsl::render_terms(entry, names)));
            }
        }
    }
    out
}
