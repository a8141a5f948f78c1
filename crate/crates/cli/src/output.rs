//! File emission: CSV tables with a JSON provenance sidecar per file.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

/// Full-precision float for tables (17 significant digits).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
    prefix: String,
}

impl OutDir {
    pub fn new(root: &Path, prefix: &str) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutDir { root: root.to_path_buf(), prefix: prefix.to_string() })
    }

    pub fn path(&self, name: &str, ext: &str) -> PathBuf {
        if name.is_empty() {
            self.root.join(format!("{}.{ext}", self.prefix))
        } else {
            self.root.join(format!("{}_{name}.{ext}", self.prefix))
        }
    }

    /// Writes a CSV table and returns its path.
    pub fn table(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
        let path = self.path(name, "csv");
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(path)
    }

    /// Writes `<table>.json` next to a CSV file.
    pub fn sidecar(&self, table: &Path, provenance: &Provenance, body: Value) -> Result<PathBuf> {
        let path = table.with_extension("json");
        let mut doc = provenance.to_json();
        doc["file"] = json!(table.file_name().map(|f| f.to_string_lossy().into_owned()));
        doc["result"] = body;
        write_json(&path, &doc)?;
        Ok(path)
    }

    /// Writes a standalone JSON result carrying its own provenance.
    pub fn document(&self, name: &str, provenance: &Provenance, body: Value) -> Result<PathBuf> {
        let path = self.path(name, "json");
        let mut doc = provenance.to_json();
        doc["result"] = body;
        write_json(&path, &doc)?;
        Ok(path)
    }
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).with_context(|| format!("writing {}", path.display()))?);
    serde_json::to_writer_pretty(&mut f, v)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Config, tolerances and versions attached to every output.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: &'static str,
    pub config: Value,
    pub tolerances: Value,
}

impl Provenance {
    pub fn new(command: &'static str, config: impl Serialize, tolerances: Value) -> Self {
        Provenance { command, config: serde_json::to_value(config).unwrap_or(Value::Null), tolerances }
    }

    fn to_json(&self) -> Value {
        json!({
            "tool": "peakwave",
            "command": self.command,
            "versions": { "peakwave": peakwave::VERSION, "peakwave-cli": env!("CARGO_PKG_VERSION") },
            "config": self.config,
            "tolerances": self.tolerances,
        })
    }
}
