use std::collections::BTreeMap;
use std::fmt::Write;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    /// One row per window per evidence sequence.
    CsvSequences,
    Human,
}

/// One evidence sequence indexed by window radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub quantity: String,
    pub radii: Vec<usize>,
    pub values: Vec<f64>,
}

impl Sequence {
    pub fn new(quantity: &str, radii: &[usize], values: &[f64]) -> Self {
        Sequence { quantity: quantity.into(), radii: radii.to_vec(), values: values.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub phases: Vec<Phase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Everything needed to reproduce the run.
    pub config: serde_json::Value,
    pub sequences: Vec<Sequence>,
    pub verdicts: BTreeMap<String, String>,
    /// Subcommand-specific detail.
    pub result: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl RunReport {
    pub fn new(subcommand: &str, config: serde_json::Value) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool: "graphpot".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            config,
            sequences: Vec::new(),
            verdicts: BTreeMap::new(),
            result: serde_json::Value::Null,
            timings: None,
        }
    }

    pub fn verdict(&mut self, name: &str, value: impl Serialize) {
        let text = match serde_json::to_value(value) {
            Ok(serde_json::Value::String(s)) => s,
            Ok(other) => other.to_string(),
            Err(e) => format!("unserializable: {e}"),
        };
        self.verdicts.insert(name.into(), text);
    }
}

/// Renders a report. JSON output ends with a newline.
pub fn emit_report(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::CsvSequences => {
            let mut s = String::from("window_radius,quantity,value\n");
            for seq in &report.sequences {
                for (r, v) in seq.radii.iter().zip(&seq.values) {
                    let _ = writeln!(s, "{r},{},{v:e}", seq.quantity);
                }
            }
            s
        }
        Format::Human => human(report),
    }
}

fn human(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} :: {}", report.tool, report.version, report.subcommand);
    if let Some(graph) = report.config.get("graph") {
        let _ = writeln!(s, "{:<24}{}", "graph", graph);
    }
    for (k, v) in &report.verdicts {
        let _ = writeln!(s, "{:<24}{}", k, v);
    }
    for seq in &report.sequences {
        let _ = writeln!(s, "\n{}", seq.quantity);
        let _ = writeln!(s, "{:>10}  {:>24}", "radius", "value");
        for (r, v) in seq.radii.iter().zip(&seq.values) {
            let _ = writeln!(s, "{r:>10}  {v:>24.15e}");
        }
    }
    if let Some(t) = &report.timings {
        let _ = writeln!(s, "\n{:<24}{:.3} s", "wall clock", t.total_seconds);
        for p in &t.phases {
            let _ = writeln!(s, "  {:<22}{:.3} s", p.name, p.seconds);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunReport {
        let mut r = RunReport::new("capacity", serde_json::json!({"graph": "lattice:1"}));
        r.sequences.push(Sequence::new("capacity", &[1, 3], &[1.0, 0.5]));
        r.verdict("capacity", "converged");
        r
    }

    #[test]
    fn json_round_trips() {
        let r = sample();
        let text = emit_report(&r, Format::Json);
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(text.contains("\"schema_version\": 1"));
    }

    #[test]
    fn csv_layout() {
        let text = emit_report(&sample(), Format::CsvSequences);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "window_radius,quantity,value");
        assert_eq!(lines[1], "1,capacity,1e0");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn human_is_fixed_width() {
        let text = emit_report(&sample(), Format::Human);
        assert!(text.contains("capacity                converged"));
    }
}
