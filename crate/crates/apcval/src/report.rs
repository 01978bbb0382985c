//! Machine-readable reports.
//!
//! Every report echoes the fully resolved inputs of its command (defaults
//! filled in), so re-running with the echoed values reproduces it bit for bit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use apcval_core::power::{Method, Sampling, VarianceMode};
use apcval_core::{
    Direction, EquivParams, ExtendedReal, Figure, PowerCurve, Regime, RevisedAlpha, SampleSummary,
    Verdict,
};

/// Bumped whenever a field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "apcval";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub body: Body,
}

impl Report {
    pub fn new(body: Body) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            body,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain no non-string map keys")
    }

    pub fn to_text(&self) -> String {
        let value = serde_json::to_value(self).expect("reports serialize");
        let mut out = String::new();
        render(&value, 0, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Body {
    Plan {
        inputs: PlanInputs,
        result: PlanResult,
    },
    Validate {
        inputs: ValidateInputs,
        result: ValidateResult,
    },
    ReviseAlpha {
        inputs: ReviseInputs,
        result: ReviseResult,
    },
    Simulate {
        inputs: SimulateInputs,
        result: SimulateResult,
    },
    StabilityScan {
        inputs: ScanInputs,
        result: ScanResult,
    },
    Error {
        error: ErrorInfo,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanInputs {
    pub regime: Regime,
    pub alpha: f64,
    pub beta: f64,
    pub dr: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub n: u64,
    /// Sample size before rounding up.
    pub n_real: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub induced: Option<EquivParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateInputs {
    pub input: String,
    pub direction: Direction,
    pub regime: Regime,
    pub alpha: f64,
    pub beta: f64,
    pub dr: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateResult {
    pub summary: SampleSummary,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviseInputs {
    pub v_hat: f64,
    pub n: u64,
    pub alpha: f64,
    pub beta: f64,
    pub dr: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviseResult {
    pub revised_alpha: RevisedAlpha,
    /// `z(1 - α̂/2)` from the rounded `1 - α̂/2`.
    pub critical_value: ExtendedReal,
    /// `z(1 - α̂/2) v̂ / √n`.
    pub threshold: ExtendedReal,
    pub min_n_bound: f64,
    /// Threshold of the induced equivalence test on the same inputs.
    pub induced_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateInputs {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub preset: Option<Figure>,
    pub regime: Regime,
    pub alpha: f64,
    pub beta: f64,
    pub dr: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu_step: Option<f64>,
    pub replicates: u64,
    pub seed: u64,
    pub method: Method,
    pub variance: VarianceMode,
    pub sampling: Sampling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateResult {
    pub curves: Vec<PowerCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanInputs {
    pub alpha: f64,
    pub beta: f64,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// Smallest `v / v̂` on the grid at which the revised level underflows.
    pub critical_ratio: ExtendedReal,
    /// `critical_ratio · v̂`, the planning `v` at the onset.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub planned_v_onset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Usage,
    Input,
    Domain,
}

fn render(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                match v {
                    Value::Object(_) | Value::Array(_) if !is_scalar_array(v) => {
                        let _ = writeln!(out, "{pad}{key}:");
                        render(v, indent + 1, out);
                    }
                    _ => {
                        let _ = writeln!(out, "{pad}{key}: {}", scalar(v));
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                let _ = writeln!(out, "{pad}[{i}]");
                render(item, indent + 1, out);
            }
        }
        v => {
            let _ = writeln!(out, "{pad}{}", scalar(v));
        }
    }
}

fn is_scalar_array(v: &Value) -> bool {
    matches!(v, Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(", "),
        other => other.to_string(),
    }
}
