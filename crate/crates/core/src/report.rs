//! Structured record of a verification run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One measurement row: a label plus named numeric values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: String,
    pub values: BTreeMap<String, f64>,
}

impl Sample {
    pub fn new(label: impl Into<String>) -> Self {
        Sample { label: label.into(), values: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }
}

/// Output of every check: measured constants, fitted exponents, per-sample
/// rows and the tolerances they were judged against.
///
/// Maps are ordered so that serialization is byte-stable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub check: String,
    pub pass: bool,
    pub summary: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub samples: Vec<Sample>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<EstimateReport>,
    /// Resolved configuration that produced the report, filled in by front ends.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl EstimateReport {
    pub fn new(check: impl Into<String>) -> Self {
        EstimateReport {
            check: check.into(),
            pass: true,
            summary: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            samples: Vec::new(),
            notes: Vec::new(),
            parts: Vec::new(),
            config: None,
        }
    }

    pub fn summary(&mut self, key: &str, value: f64) -> &mut Self {
        self.summary.insert(key.to_string(), value);
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn note(&mut self, msg: impl Into<String>) -> &mut Self {
        self.notes.push(msg.into());
        self
    }

    /// Records a named sub-check and folds its verdict into this one.
    pub fn require(&mut self, name: &str, ok: bool) -> &mut Self {
        self.summary.insert(format!("pass.{name}"), if ok { 1.0 } else { 0.0 });
        self.pass &= ok;
        self
    }

    pub fn push_part(&mut self, part: EstimateReport) {
        self.pass &= part.pass;
        self.parts.push(part);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }

    /// Pretty JSON; non-finite numbers become `null`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-sample CSV with a header row. Columns are the union of value
    /// names in sorted order.
    pub fn samples_csv(&self) -> String {
        let mut cols: Vec<&String> = self.samples.iter().flat_map(|s| s.values.keys()).collect();
        cols.sort();
        cols.dedup();
        let mut out = String::from("label");
        for c in &cols {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&csv_field(&s.label));
            for c in &cols {
                out.push(',');
                if let Some(v) = s.values.get(*c) {
                    out.push_str(&format_float(*v));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Shortest round-trip representation, stable across platforms.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_with_commas_are_quoted() {
        assert_eq!(csv_field("gap=1,lambda=2"), "\"gap=1,lambda=2\"");
        assert_eq!(csv_field("a\"b"), "\"a\"\"b\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn csv_has_header_and_union_of_columns() {
        let mut r = EstimateReport::new("demo");
        r.samples.push(Sample::new("a").with("x", 1.0));
        r.samples.push(Sample::new("b").with("y", 0.5));
        assert_eq!(r.samples_csv(), "label,x,y\na,1.0,\nb,,0.5\n");
    }

    #[test]
    fn failing_part_fails_parent() {
        let mut r = EstimateReport::new("outer");
        let mut p = EstimateReport::new("inner");
        p.require("bound", false);
        r.push_part(p);
        assert!(!r.pass);
        let back: EstimateReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
