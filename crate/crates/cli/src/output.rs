use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// The artifact directory of one invocation. Remembers what it wrote so the
/// manifest can list it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Writes `name` inside the directory, or at `name` itself when it is
    /// absolute or has a directory part.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let given = Path::new(name);
        let path = if given.is_absolute() || given.components().count() > 1 {
            given.to_path_buf()
        } else {
            self.root.join(given)
        };
        std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(path.display().to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

/// 17 significant digits; round-trips every f64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows of `num`-formatted cells under a header.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// `index,value` rows for a field.
pub fn field_csv(values: &[f64]) -> String {
    csv(
        &["index", "value"],
        values.iter().enumerate().map(|(i, v)| vec![i.to_string(), num(*v)]),
    )
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub hjlab: &'static str,
    pub cli: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            hjlab: hjlab::VERSION,
            cli: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// `run.json`: what was asked, what happened, what was written.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub wall_time_s: f64,
    pub exit_code: i32,
    pub summary: serde_json::Value,
    pub artifacts: Vec<String>,
}
