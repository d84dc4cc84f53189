//! Reports and their two serializations.
//!
//! JSON output is canonical: object keys sorted, no whitespace, every
//! rational a `"num/den"` string. Equal reports give equal bytes.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{LabError, EXIT_COMPUTATION, EXIT_OK};
use crate::scenario::{Format, Params, Scenario};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorInfo {
    /// `schema`, `computation` or `precision`.
    pub class: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl ErrorInfo {
    pub fn from_error(e: &LabError) -> Self {
        let exit_code = e.exit_code();
        let class = match e {
            LabError::Schema(_) => "schema",
            LabError::Compute(c) if c.is_precision() => "precision",
            _ => "computation",
        };
        ErrorInfo { class, message: e.to_string(), exit_code }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: String,
    pub scenario: Value,
    pub result: Option<Value>,
    pub assertions: Vec<Assertion>,
    pub provenance: Value,
    pub error: Option<ErrorInfo>,
}

fn provenance(s: Option<&Scenario>) -> Value {
    let mut precision = json!({});
    if let Some(s) = s {
        let pr = &s.precision;
        let uses_series = !matches!(s.params, Params::Galois(_) | Params::Clifford(_) | Params::Classify(_));
        if uses_series {
            precision["t"] = json!(pr.t());
            precision["n_cap"] = json!(pr.n_cap());
        }
        if let Some(p) = s.params.characteristic().filter(|_| uses_series) {
            precision["x"] = json!(pr.x(p));
        }
    }
    json!({
        "monodromy_core": monodromy_core::VERSION,
        "monodromy_lab": env!("CARGO_PKG_VERSION"),
        "precision": precision,
    })
}

impl Report {
    pub(crate) fn assemble(s: &Scenario, outcome: Result<Value, LabError>, assertions: Vec<Assertion>) -> Self {
        let (result, mut error) = match outcome {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(ErrorInfo::from_error(&e))),
        };
        let failed: Vec<&str> = assertions.iter().filter(|a| !a.passed).map(|a| a.name.as_str()).collect();
        if error.is_none() && !failed.is_empty() {
            error = Some(ErrorInfo {
                class: "computation",
                message: format!("assertions failed: {}", failed.join(", ")),
                exit_code: EXIT_COMPUTATION,
            });
        }
        Report {
            kind: s.params.kind().to_string(),
            scenario: s.echo(),
            result,
            assertions,
            provenance: provenance(Some(s)),
            error,
        }
    }

    /// A report for a document that failed to load or validate.
    pub fn rejected(e: &LabError) -> Self {
        Report {
            kind: "invalid".into(),
            scenario: Value::Null,
            result: None,
            assertions: Vec::new(),
            provenance: provenance(None),
            error: Some(ErrorInfo::from_error(e)),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(EXIT_OK, |e| e.exit_code)
    }

    pub fn passed(&self) -> bool {
        self.exit_code() == EXIT_OK
    }

    pub fn to_value(&self) -> Value {
        let assertions: Value = self.assertions.iter().map(|a| json!({"name": a.name, "passed": a.passed})).collect();
        let error =
            self.error.as_ref().map(|e| json!({"class": e.class, "message": e.message, "exit_code": e.exit_code}));
        json!({
            "kind": self.kind,
            "status": if self.passed() { "ok" } else { "error" },
            "scenario": self.scenario,
            "result": self.result,
            "assertions": assertions,
            "provenance": self.provenance,
            "error": error,
        })
    }
}

/// Serializes `report`; the bytes carry no trailing newline.
pub fn emit_report(report: &Report, format: Format) -> Vec<u8> {
    match format {
        Format::Json => canonical_json(&report.to_value()).into_bytes(),
        Format::Text => render_text(report).into_bytes(),
    }
}

pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_canonical(v, &mut out);
    out
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                write_canonical(&map[key], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

const LEADING: [&str; 10] = ["n", "v_n", "denominator", "regime", "i", "v", "piece", "source", "target", "torus_rank"];

/// `[{"valuation": v, "multiplicity": k}, ...]` as `v x k, ...`.
fn multiset_cell(items: &[Value]) -> Option<String> {
    let parts: Option<Vec<String>> = items
        .iter()
        .map(|x| {
            let o = x.as_object().filter(|o| o.len() == 2)?;
            Some(format!("{} x{}", o.get("valuation")?.as_str()?, o.get("multiplicity")?))
        })
        .collect();
    parts.map(|p| p.join(", "))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Array(items) if !items.is_empty() => multiset_cell(items).unwrap_or_else(|| canonical_json(v)),
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Bool(b) => if *b { "yes" } else { "no" }.into(),
        other => canonical_json(other),
    }
}

fn has_object(v: &Value) -> bool {
    match v {
        Value::Object(_) => true,
        Value::Array(items) => items.iter().any(has_object),
        _ => false,
    }
}

fn is_table(items: &[Value]) -> bool {
    !items.is_empty() && items.iter().all(|x| x.as_object().is_some_and(|o| o.values().all(|v| !v.is_object())))
}

fn columns(items: &[Value]) -> Vec<String> {
    let mut keys: Vec<String> = Vec::new();
    for item in items {
        for k in item.as_object().unwrap().keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys.sort_by_key(|k| (LEADING.iter().position(|l| l == k).unwrap_or(LEADING.len()), k.clone()));
    keys
}

fn render_table(title: &str, items: &[Value], out: &mut String) {
    let cols = columns(items);
    let rows: Vec<Vec<String>> = items.iter().map(|item| cols.iter().map(|c| cell(&item[c])).collect()).collect();
    let widths: Vec<usize> =
        cols.iter().enumerate().map(|(j, c)| rows.iter().map(|r| r[j].len()).max().unwrap_or(0).max(c.len())).collect();
    let line = |cells: &[String]| -> String {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{title}:");
    let _ = writeln!(out, "  {}", line(&cols));
    for row in &rows {
        let _ = writeln!(out, "  {}", line(row));
    }
}

fn render_value(path: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for k in keys {
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                render_value(&sub, &map[k], out);
            }
        }
        Value::Array(items) if is_table(items) => render_table(path, items, out),
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let cells: Vec<String> = items.iter().map(cell).collect();
            let _ = writeln!(out, "{path}: [{}]", cells.join(", "));
        }
        Value::Array(items) if items.iter().all(|x| x.is_array() && !has_object(x)) => {
            for (k, item) in items.iter().enumerate() {
                let _ = writeln!(out, "{path}[{k}]: {}", canonical_json(item));
            }
        }
        Value::Array(items) => {
            for (k, item) in items.iter().enumerate() {
                render_value(&format!("{path}[{k}]"), item, out);
            }
        }
        scalar => {
            let _ = writeln!(out, "{path}: {}", cell(scalar));
        }
    }
}

fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let name = r.scenario.get("name").and_then(Value::as_str);
    let _ = writeln!(out, "{} scenario{}", r.kind, name.map(|n| format!(" {n}")).unwrap_or_default());
    if let Some(result) = &r.result {
        render_value("", result, &mut out);
    }
    for a in &r.assertions {
        let _ = writeln!(out, "check {}: {}", a.name, if a.passed { "pass" } else { "FAIL" });
    }
    match &r.error {
        Some(e) => {
            let _ = write!(out, "status: {} error (exit {}): {}", e.class, e.exit_code, e.message);
        }
        None => out.push_str("status: ok"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::run_scenario;

    fn run(text: &str) -> Report {
        run_scenario(&Scenario::parse(text).unwrap())
    }

    #[test]
    fn canonical_form() {
        let v = json!({"b": [1, {"z": "1/2", "a": null}], "a": true});
        assert_eq!(canonical_json(&v), r#"{"a":true,"b":[1,{"a":null,"z":"1/2"}]}"#);
    }

    #[test]
    fn ladder_report() {
        let r = run(r#"{"kind":"ladder","p":2,"interior":{"1":1},"n_max":4}"#);
        assert!(r.passed());
        let v = r.to_value();
        assert_eq!(v["result"]["valuations"], json!(["1", "1/2", "1/4", "1/8"]));
        assert_eq!(v["result"]["n0"], json!(1));
        assert_eq!(emit_report(&r, Format::Json), emit_report(&r, Format::Json));
        let text = String::from_utf8(emit_report(&r, Format::Text)).unwrap();
        let header = text.lines().find(|l| l.trim_start().starts_with("n ")).unwrap();
        assert!(header.contains("v_n") && header.contains("denominator") && header.contains("regime"));
        let rows = text.lines().filter(|l| l.trim_start().starts_with(|c: char| c.is_ascii_digit())).count();
        assert_eq!(rows, 4);
    }

    #[test]
    fn torus_classification() {
        let r = run(r#"{"kind":"classify","torus_rank":2,"abelian":"none","dimension":2}"#);
        assert_eq!(r.result.as_ref().unwrap()["kind"], json!("TrivialImage"));
        assert!(r.result.as_ref().unwrap()["citation"].as_str().unwrap().contains("trivial"));
    }

    #[test]
    fn clifford_type2_dims() {
        let r = run(r#"{"kind":"clifford","n":2,"type":"II"}"#);
        assert!(r.passed(), "{:?}", r.error);
        assert_eq!(r.result.as_ref().unwrap()["filtration"]["dims"], json!([4, 12, 16]));
    }

    #[test]
    fn computation_errors_are_reported() {
        let r = run(r#"{"kind":"classify","torus_rank":1,"abelian":"none","dimension":3}"#);
        assert_eq!(r.exit_code(), 3);
        assert!(r.result.is_none());
        let r = run(r#"{"kind":"formal-group","p":3,"law":"additive","decompose":true}"#);
        assert!(matches!(r.exit_code(), 3 | 4));
    }
}
