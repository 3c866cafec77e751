//! The self-describing results document: schema-versioned JSON with
//! column-oriented numeric tables, the resolved configuration echo and run
//! provenance. Re-running a command on the same inputs reproduces the
//! document byte for byte except for the timestamp.

use crate::config::DistEcho;
use crate::{CliError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// A column-oriented numeric table. `values[k]` is the column named by
/// `columns[k]`; missing entries (undefined noise ratios) are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            values: vec![Vec::new(); columns.len()],
        }
    }

    /// Appends one row; the slice length must match the column count.
    pub fn push_row(&mut self, row: &[Option<f64>]) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        for (col, v) in self.values.iter_mut().zip(row) {
            col.push(map_nonfinite(*v));
        }
    }

    pub fn n_rows(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// JSON cannot carry NaN or infinities; they become null.
fn map_nonfinite(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// RFC 3339 creation time; the only field excluded from reproducibility.
    pub timestamp: String,
    pub tool_version: String,
    /// SHA-256 digests of every input file, keyed by path as given.
    pub inputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema_version: u32,
    pub command: String,
    /// Echo of the fully resolved run configuration.
    pub config: serde_json::Value,
    /// Machine-readable bias distribution for reuse via `--dist <file>`,
    /// present on commands that produce or consume one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distribution: Option<DistEcho>,
    pub tables: Vec<Table>,
    pub provenance: Provenance,
}

impl ResultsDocument {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
            distribution: None,
            tables: Vec::new(),
            provenance: Provenance {
                timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                inputs: BTreeMap::new(),
            },
        }
    }

    /// Records the SHA-256 digest of an input file.
    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.provenance
            .inputs
            .insert(path.display().to_string(), format!("sha256:{hex}"));
        Ok(())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Named column of a named table.
    pub fn column(&self, table: &str, column: &str) -> Option<&[Option<f64>]> {
        let t = self.table(table)?;
        let idx = t.columns.iter().position(|c| c == column)?;
        Some(&t.values[idx])
    }

    /// Structural validation: declared schema version, rectangular tables,
    /// unique table names.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mut names = std::collections::BTreeSet::new();
        for t in &self.tables {
            if !names.insert(&t.name) {
                return Err(CliError::Parse(format!("duplicate table `{}`", t.name)));
            }
            if t.columns.len() != t.values.len() {
                return Err(CliError::Parse(format!(
                    "table `{}`: {} columns but {} value arrays",
                    t.name,
                    t.columns.len(),
                    t.values.len()
                )));
            }
            if let Some(first) = t.values.first() {
                if t.values.iter().any(|col| col.len() != first.len()) {
                    return Err(CliError::Parse(format!(
                        "table `{}` is not rectangular",
                        t.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    /// Writes the JSON document, creating parent directories as needed.
    pub fn write_json(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
                    path: parent.display().to_string(),
                    source,
                })?;
            }
        }
        std::fs::write(path, self.to_json_string()).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Writes one flat CSV per table next to the JSON document, named
    /// `<stem>.<table>.csv`. Missing values are written as `NA`.
    pub fn write_csv_tables(&self, json_path: &Path) -> Result<Vec<std::path::PathBuf>> {
        let stem = json_path.with_extension("");
        let mut written = Vec::new();
        for t in &self.tables {
            let path = std::path::PathBuf::from(format!("{}.{}.csv", stem.display(), t.name));
            let mut out = String::new();
            out.push_str(&t.columns.join(","));
            out.push('\n');
            for row in 0..t.n_rows() {
                let cells: Vec<String> = t
                    .values
                    .iter()
                    .map(|col| match col[row] {
                        Some(v) => format!("{v}"),
                        None => "NA".into(),
                    })
                    .collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            std::fs::write(&path, out).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }

    /// Parses and validates a document from disk.
    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let doc: ResultsDocument = serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        doc.validate()?;
        Ok(doc)
    }
}
