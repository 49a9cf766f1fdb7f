//! Versioned JSON reports.

use chamberwalk::rational::{format, Q};
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: &str = "chamberwalk/1";

/// One named check: exact checks carry a defect, statistical ones a p-value.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub check: String,
    pub kind: String,
    pub inputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defect: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub verdict: bool,
}

impl Check {
    /// Exact check passing iff `defect` is zero.
    pub fn exact(check: impl Into<String>, inputs: Value, defect: &Q) -> Self {
        Self {
            check: check.into(),
            kind: "exact".into(),
            inputs,
            defect: Some(format(defect)),
            p_value: None,
            verdict: num_traits::Zero::is_zero(defect),
        }
    }

    /// Exact boolean check.
    pub fn holds(check: impl Into<String>, inputs: Value, verdict: bool) -> Self {
        Self { check: check.into(), kind: "exact".into(), inputs, defect: None, p_value: None, verdict }
    }

    /// Floating-point check passing iff `defect ≤ tol`.
    pub fn within(check: impl Into<String>, inputs: Value, defect: f64, tol: f64) -> Self {
        Self {
            check: check.into(),
            kind: "numeric".into(),
            inputs,
            defect: Some(format!("{defect:e}")),
            p_value: None,
            verdict: defect <= tol,
        }
    }

    pub fn statistical(check: impl Into<String>, kind: &str, inputs: Value, p_value: f64, verdict: bool) -> Self {
        Self { check: check.into(), kind: kind.into(), inputs, defect: None, p_value: Some(p_value), verdict }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub inputs: Value,
    pub checks: Vec<Check>,
    pub results: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Self {
        Self { schema: SCHEMA.into(), command: command.into(), inputs, checks: Vec::new(), results: Map::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict)
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.into(), value);
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// One row per check.
    pub fn checks_csv(&self) -> String {
        let mut out = String::from("check,kind,inputs,defect,p_value,verdict\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&c.check),
                csv_field(&c.kind),
                csv_field(&c.inputs.to_string()),
                c.defect.as_deref().unwrap_or(""),
                c.p_value.map(|p| p.to_string()).unwrap_or_default(),
                c.verdict
            ));
        }
        out
    }
}
