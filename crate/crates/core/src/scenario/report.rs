//! Run reports: versioned JSON and an aligned text table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use super::config::RawConfig;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

/// How a measured value is compared with its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">")]
    Above,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::Above => ">",
        }
    }

    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::Below => value < threshold,
            Relation::Above => value > threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Check {
        Check {
            name: name.into(),
            value,
            relation,
            threshold,
            pass: relation.holds(value, threshold),
            witness: None,
        }
    }

    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check::new(name, value, Relation::Below, threshold)
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Check {
        Check::new(name, value, Relation::Above, threshold)
    }

    /// A yes/no outcome recorded as `value = 0` (holds) or `1` (fails).
    pub fn boolean(name: impl Into<String>, holds: bool) -> Check {
        Check::below(name, if holds { 0.0 } else { 1.0 }, 0.5)
    }

    /// Attaches the witness; it is only kept when the check fails.
    pub fn with_witness(mut self, witness: impl FnOnce() -> Value) -> Check {
        if !self.pass {
            self.witness = Some(witness());
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskReport {
    pub task: String,
    pub status: Status,
    pub checks: Vec<Check>,
    pub details: BTreeMap<String, Value>,
    pub notes: Vec<String>,
}

impl TaskReport {
    pub fn new(task: &str) -> TaskReport {
        TaskReport {
            task: task.into(),
            status: Status::Pass,
            checks: Vec::new(),
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn skipped(task: &str, reason: String) -> TaskReport {
        TaskReport {
            status: Status::Skipped,
            notes: vec![reason],
            ..TaskReport::new(task)
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(key.into(), v);
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    /// A library error while running the task becomes a failed check.
    pub fn error(&mut self, stage: &str, e: &crate::Error) {
        let mut c = Check::boolean(format!("{stage} completes"), false);
        c.witness = Some(Value::String(e.to_string()));
        self.checks.push(c);
    }

    pub fn finish(mut self) -> TaskReport {
        if self.status != Status::Skipped {
            self.status = if self.checks.iter().all(|c| c.pass) {
                Status::Pass
            } else {
                Status::Fail
            };
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Inputs {
    pub config: RawConfig,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub report_version: u32,
    pub task: String,
    pub inputs: Inputs,
    pub sections: Vec<TaskReport>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl RunReport {
    pub fn new(task: &str, inputs: Inputs, sections: Vec<TaskReport>) -> RunReport {
        let failed = sections.iter().any(|s| s.status == Status::Fail);
        let ran = sections.iter().any(|s| s.status != Status::Skipped);
        RunReport {
            report_version: REPORT_VERSION,
            task: task.into(),
            inputs,
            sections,
            status: if failed || !ran { Status::Fail } else { Status::Pass },
            wall_time_seconds: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut rows: Vec<[String; 5]> = vec![[
            "task".into(),
            "check".into(),
            "value".into(),
            "threshold".into(),
            "result".into(),
        ]];
        for sec in &self.sections {
            if sec.checks.is_empty() {
                rows.push([
                    sec.task.clone(),
                    "-".into(),
                    "-".into(),
                    "-".into(),
                    sec.status.as_str().to_uppercase(),
                ]);
            }
            for c in &sec.checks {
                rows.push([
                    sec.task.clone(),
                    c.name.clone(),
                    format!("{:.6e}", c.value),
                    format!("{} {:.1e}", c.relation.symbol(), c.threshold),
                    if c.pass { "PASS" } else { "FAIL" }.into(),
                ]);
            }
        }
        let widths: Vec<usize> = (0..5)
            .map(|k| rows.iter().map(|r| r[k].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, r) in rows.iter().enumerate() {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(k, (cell, w))| {
                    if k == 2 {
                        format!("{cell:>w$}")
                    } else {
                        format!("{cell:<w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        for sec in &self.sections {
            for (k, v) in &sec.details {
                match v {
                    Value::Number(_) | Value::Bool(_) | Value::String(_) => {
                        let _ = writeln!(out, "detail [{}] {k} = {v}", sec.task);
                    }
                    _ => {}
                }
            }
            for c in sec.checks.iter().filter(|c| !c.pass) {
                if let Some(w) = &c.witness {
                    let _ = writeln!(out, "witness [{}] {}: {}", sec.task, c.name, w);
                }
            }
            for n in &sec.notes {
                let _ = writeln!(out, "note [{}]: {}", sec.task, n);
            }
        }
        if let Some(t) = self.wall_time_seconds {
            let _ = writeln!(out, "wall time: {t:.3} s");
        }
        let _ = writeln!(out, "status: {}", self.status.as_str().to_uppercase());
        out
    }
}
