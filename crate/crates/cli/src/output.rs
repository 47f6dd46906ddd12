//! Results, CSV/JSON rendering and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::error::CliError;

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn as_objects(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect()))
                .collect(),
        )
    }
}

/// What a subcommand hands back: scalar summary, optional table, the
/// resolved parameters and an overall check.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub params: Value,
    pub summary: Map<String, Value>,
    pub table: Option<Table>,
    pub pass: Option<bool>,
    /// Additional artifacts, named relative to the output directory.
    pub extra: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn new(params: &impl Serialize) -> Self {
        Self { params: serde_json::to_value(params).expect("parameters serialize"), ..Self::default() }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).expect("summary values serialize"));
    }

    pub fn check(&mut self, ok: bool) {
        self.pass = Some(self.pass.unwrap_or(true) && ok);
    }
}

pub fn v(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("table values serialize")
}

fn csv_cell(x: &Value) -> String {
    match x {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, x: &Value, out: &mut Vec<(String, String)>) {
    match x {
        Value::Object(m) => {
            for (k, inner) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, inner, out);
            }
        }
        other => out.push((prefix.to_string(), csv_cell(other))),
    }
}

pub fn render(report: &Report, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut doc = report.summary.clone();
            if let Some(t) = &report.table {
                doc.insert("rows".into(), t.as_objects());
            }
            if let Some(p) = report.pass {
                doc.insert("pass".into(), Value::Bool(p));
            }
            let mut bytes = serde_json::to_vec_pretty(&Value::Object(doc)).map_err(|e| CliError::Failure(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            match &report.table {
                Some(t) => {
                    w.write_record(&t.columns).map_err(csv_err)?;
                    for r in &t.rows {
                        w.write_record(r.iter().map(csv_cell)).map_err(csv_err)?;
                    }
                }
                None => {
                    w.write_record(["key", "value"]).map_err(csv_err)?;
                    let mut flat = Vec::new();
                    flatten("", &Value::Object(report.summary.clone()), &mut flat);
                    if let Some(p) = report.pass {
                        flat.push(("pass".into(), p.to_string()));
                    }
                    for (k, x) in flat {
                        w.write_record([k, x]).map_err(csv_err)?;
                    }
                }
            }
            w.into_inner().map_err(|e| CliError::Failure(e.to_string()))
        }
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Failure(format!("csv: {e}"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunInfo<'a> {
    pub subcommand: &'a str,
    pub seed: Option<u64>,
    pub format: Format,
    pub threads: usize,
    pub wall_time_s: f64,
}

/// The `run` section is hashed; `timing` sits outside it so that repeated
/// runs produce identical `run` sections.
pub fn manifest(report: &Report, info: &RunInfo, output_name: &str, output: &[u8]) -> Value {
    let extra: Vec<Value> =
        report.extra.iter().map(|(name, bytes)| json!({"file": name, "sha256": sha256_hex(bytes)})).collect();
    let run = json!({
        "subcommand": info.subcommand,
        "version": env!("CARGO_PKG_VERSION"),
        "rng": qphlab_core::SeededRng::ALGORITHM,
        "seed": info.seed,
        "params": report.params,
        "format": info.format,
        "output_file": output_name,
        "output_sha256": sha256_hex(output),
        "extra_files": extra,
        "summary": report.summary,
        "pass": report.pass,
    });
    let run_sha = sha256_hex(&serde_json::to_vec(&run).expect("manifest serializes"));
    json!({
        "run": run,
        "run_sha256": run_sha,
        "timing": {"wall_time_s": info.wall_time_s, "threads": info.threads},
    })
}

pub fn write_all(out: Option<&Path>, report: &Report, info: &RunInfo) -> Result<(), CliError> {
    let bytes = render(report, info.format)?;
    let name = format!("{}.{}", info.subcommand, info.format.extension());
    let manifest = manifest(report, info, &name, &bytes);
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Failure(e.to_string()))?;
    manifest_bytes.push(b'\n');
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(&name), &bytes)?;
            for (file, content) in &report.extra {
                std::fs::write(dir.join(file), content)?;
            }
            std::fs::write(dir.join(format!("{}.manifest.json", info.subcommand)), &manifest_bytes)?;
        }
        None => {
            std::io::stdout().write_all(&bytes)?;
            for (file, content) in &report.extra {
                std::fs::write(PathBuf::from(file), content)?;
            }
            std::io::stderr().write_all(&manifest_bytes)?;
        }
    }
    Ok(())
}
