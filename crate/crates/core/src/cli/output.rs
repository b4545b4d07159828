//! CSV and JSON writers and the run manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::metrics::{mean_delta, variance_delta};
use crate::numeric::Scalar;

/// One output value, kept both as CSV text and as a JSON value.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub text: String,
    pub json: Value,
}

impl Cell {
    pub fn scalar<T: Scalar>(x: &T) -> Self {
        let text = x.render();
        let json = if T::EXACT {
            Value::String(text.clone())
        } else {
            json!(x.to_f64())
        };
        Cell { text, json }
    }

    pub fn float(x: f64) -> Self {
        Self::scalar(&x)
    }

    pub fn int(x: i64) -> Self {
        Cell {
            text: x.to_string(),
            json: json!(x),
        }
    }

    pub fn text(s: impl Into<String>) -> Self {
        let s = s.into();
        Cell {
            json: Value::String(s.clone()),
            text: s,
        }
    }

    pub fn flag(b: bool) -> Self {
        Cell {
            text: u8::from(b).to_string(),
            json: Value::Bool(b),
        }
    }
}

/// A distribution over `Δ_out` with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub parameters: Vec<(String, Cell)>,
    pub points: Vec<(i64, Cell)>,
    pub mean: Cell,
    pub variance: Cell,
}

impl Series {
    pub fn from_masses<T: Scalar>(parameters: Vec<(String, Cell)>, masses: &[(i64, T)]) -> Self {
        let marginal = crate::state::DeltaMarginal(masses.iter().cloned().collect());
        Series {
            parameters,
            points: masses.iter().map(|(d, p)| (*d, Cell::scalar(p))).collect(),
            mean: Cell::scalar(&mean_delta(&marginal)),
            variance: Cell::scalar(&variance_delta(&marginal)),
        }
    }
}

/// Long-format table: one row per `(series, Δ_out)`.
pub fn series_csv(series: &[Series], with_moments: bool) -> String {
    let mut columns: Vec<String> = series
        .first()
        .map(|s| s.parameters.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();
    columns.push("delta_out".into());
    columns.push("probability".into());
    if with_moments {
        columns.push("mean".into());
        columns.push("variance".into());
    }
    let mut rows = Vec::new();
    for s in series {
        for (d, p) in &s.points {
            let mut row: Vec<String> = s.parameters.iter().map(|(_, v)| v.text.clone()).collect();
            row.push(d.to_string());
            row.push(p.text.clone());
            if with_moments {
                row.push(s.mean.text.clone());
                row.push(s.variance.text.clone());
            }
            rows.push(row);
        }
    }
    csv(&columns, &rows)
}

pub fn csv(columns: &[String], rows: &[Vec<String>]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `{lattice, series}` with every series aligned to the shared lattice.
pub fn series_json(series: &[Series]) -> Value {
    let lattice: BTreeSet<i64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|(d, _)| *d))
        .collect();
    let body: Vec<Value> = series
        .iter()
        .map(|s| {
            let by_delta: BTreeMap<i64, &Cell> = s.points.iter().map(|(d, c)| (*d, c)).collect();
            let zero = if s.points.first().is_some_and(|(_, c)| c.json.is_string()) {
                Value::String("0".into())
            } else {
                json!(0.0)
            };
            let probability: Vec<Value> = lattice
                .iter()
                .map(|d| by_delta.get(d).map_or(zero.clone(), |c| c.json.clone()))
                .collect();
            let parameters: serde_json::Map<String, Value> = s
                .parameters
                .iter()
                .map(|(k, v)| (k.clone(), v.json.clone()))
                .collect();
            json!({
                "parameters": parameters,
                "probability": probability,
                "mean": s.mean.json,
                "variance": s.variance.json,
            })
        })
        .collect();
    json!({ "lattice": lattice, "series": body })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: Vec<String>,
    pub parameters: BTreeMap<String, String>,
    pub mode: String,
    pub version: String,
    pub content_sha256: String,
    pub timestamp: u64,
}

impl Manifest {
    pub fn new(command: Vec<String>, parameters: BTreeMap<String, String>, mode: &str, content: &[u8]) -> Self {
        Manifest {
            command,
            parameters,
            mode: mode.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            content_sha256: sha256_hex(content),
            timestamp: timestamp(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Full JSON document: the manifest hashes the `{lattice, series}` body.
pub fn envelope(
    command: Vec<String>,
    parameters: BTreeMap<String, String>,
    mode: &str,
    series: &[Series],
) -> (Manifest, String) {
    let body = series_json(series);
    let manifest = Manifest::new(command, parameters, mode, body.to_string().as_bytes());
    let mut doc = json!({ "manifest": manifest });
    doc["lattice"] = body["lattice"].clone();
    doc["series"] = body["series"].clone();
    let text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    (manifest, text + "\n")
}
