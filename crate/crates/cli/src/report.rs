use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Where the analysed field came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldInfo {
    pub source: String,
    pub label: String,
    pub checksum: String,
}

/// One JSON object per line, written in call order.
pub struct JsonLines {
    path: PathBuf,
    out: BufWriter<File>,
}

impl JsonLines {
    pub fn create(path: &Path) -> Result<Self> {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(JsonLines {
            path: path.to_path_buf(),
            out: BufWriter::new(f),
        })
    }

    /// The first line: command, resolved config (structured and verbatim TOML) and field identity.
    pub fn header(&mut self, command: &str, cfg: &RunConfig, field: &FieldInfo) -> Result<()> {
        self.line(&json!({
            "kind": "header",
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "config_toml": cfg.to_toml(),
            "field": field,
        }))
    }

    pub fn record(&mut self, kind: &str, body: impl Serialize) -> Result<()> {
        let mut v = serde_json::to_value(body)?;
        match &mut v {
            Value::Object(m) => {
                m.insert("kind".into(), Value::String(kind.into()));
            }
            other => {
                v = json!({ "kind": kind, "value": other.take() });
            }
        }
        self.line(&v)
    }

    fn line(&mut self, v: &Value) -> Result<()> {
        serde_json::to_writer(&mut self.out, v)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush().with_context(|| format!("writing {}", self.path.display()))?;
        Ok(self.path)
    }
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn fmt_point(x: [f64; 3], t: f64) -> String {
    format!("({} {} {}; {})", x[0], x[1], x[2], t)
}
