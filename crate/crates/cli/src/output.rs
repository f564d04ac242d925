//! CSV tables, atomic file writes and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};

/// An in-memory CSV table. Cells are stored pre-formatted so that the
/// bytes written depend only on the values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip formatting, in exponent form for very small or
/// large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// [`num`], with `None` as an empty cell.
pub fn cell(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r
            .headers()
            .map_err(|e| CliError::Parse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = r
            .records()
            .map(|rec| {
                rec.map(|rec| rec.iter().map(str::to_string).collect())
                    .map_err(|e| CliError::Parse(e.to_string()))
            })
            .collect::<CliResult<_>>()?;
        Ok(Self { header, rows })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn index(&self, name: &str) -> CliResult<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Parse(format!("no column `{name}`")))
    }

    /// Numeric column; empty cells are `None`.
    pub fn column(&self, name: &str) -> CliResult<Vec<Option<f64>>> {
        let i = self.index(name)?;
        self.rows
            .iter()
            .map(|r| {
                let s = r[i].trim();
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse()
                        .map(Some)
                        .map_err(|_| CliError::Parse(format!("`{s}` in column `{name}`")))
                }
            })
            .collect()
    }
}

/// One CSV produced by an experiment, or the reason it could not be.
#[derive(Debug)]
pub struct Output {
    pub name: String,
    pub table: CliResult<Table>,
    pub warnings: Vec<String>,
}

impl Output {
    pub fn ok(name: impl Into<String>, table: Table, warnings: Vec<String>) -> Self {
        Self {
            name: name.into(),
            table: Ok(table),
            warnings,
        }
    }

    pub fn failed(name: impl Into<String>, err: CliError) -> Self {
        Self {
            name: name.into(),
            table: Err(err),
            warnings: Vec::new(),
        }
    }
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub output: String,
    pub category: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub config: ScenarioConfig,
    pub outputs: Vec<OutputRecord>,
    pub warnings: Vec<String>,
    pub failures: Vec<FailureRecord>,
    pub notes: BTreeMap<String, serde_json::Value>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Collects the outputs of one CLI invocation.
pub struct Run {
    out_dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn start(out_dir: &Path, command: &str, config: &ScenarioConfig) -> CliResult<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                seed: config.seed,
                started_at: timestamp(Utc::now()),
                finished_at: String::new(),
                config: config.clone(),
                outputs: Vec::new(),
                warnings: Vec::new(),
                failures: Vec::new(),
                notes: BTreeMap::new(),
            },
        })
    }

    pub fn note(&mut self, key: &str, value: serde_json::Value) {
        self.manifest.notes.insert(key.to_string(), value);
    }

    /// Writes successful outputs and records failures. A failed output
    /// leaves any previous file of that name untouched.
    pub fn record(&mut self, outputs: Vec<Output>) -> CliResult<()> {
        for out in outputs {
            self.manifest
                .warnings
                .extend(out.warnings.iter().map(|w| format!("{}: {w}", out.name)));
            match out.table {
                Ok(table) => {
                    let bytes = table.to_bytes();
                    write_atomic(&self.out_dir.join(&out.name), &bytes)?;
                    self.manifest.outputs.push(OutputRecord {
                        file: out.name,
                        sha256: sha256_hex(&bytes),
                        rows: table.rows.len(),
                    });
                }
                Err(e) => {
                    log::error!("{}: {e}", out.name);
                    self.manifest.failures.push(FailureRecord {
                        output: out.name,
                        category: e.category().to_string(),
                        message: e.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Writes the manifest. Fails with the first failure's error category
    /// when any output could not be produced.
    pub fn finish(mut self) -> CliResult<RunManifest> {
        self.manifest.finished_at = timestamp(Utc::now());
        let json = serde_json::to_vec_pretty(&self.manifest)
            .map_err(|e| CliError::Parse(e.to_string()))?;
        write_atomic(&self.out_dir.join(MANIFEST_FILE), &json)?;
        let failed = self.manifest.failures.len();
        if failed > 0 {
            return Err(CliError::Partial {
                failed,
                total: failed + self.manifest.outputs.len(),
            });
        }
        Ok(self.manifest)
    }
}
