//! Output helpers: atomic file writes, versioned CSV emission, sweep cache.

use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// Write-then-rename so readers never observe partial files.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// One CSV cell: full round-trip precision for finite numbers.
pub fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Versioned CSV with schema and metadata comment lines, then a header row.
pub fn write_csv(
    path: &Path,
    schema: &str,
    meta: &[String],
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# schema: {schema}").unwrap();
    for line in meta {
        writeln!(out, "# {line}").unwrap();
    }
    writeln!(out, "{}", header.join(",")).unwrap();
    for row in rows {
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    write_atomic(path, &out)
}

/// File-backed cache for sweep points, keyed by config hash. Access is
/// serialized; writes are atomic.
pub struct PointCache {
    dir: PathBuf,
    lock: Mutex<()>,
}

impl PointCache {
    pub fn new(dir: PathBuf) -> Self {
        PointCache {
            dir,
            lock: Mutex::new(()),
        }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get<T: serde::de::DeserializeOwned>(&self, key: &str) -> Option<T> {
        let _guard = self.lock.lock().unwrap();
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn put<T: serde::Serialize>(&self, key: &str, value: &T) -> Result<()> {
        let _guard = self.lock.lock().unwrap();
        let text = serde_json::to_string_pretty(value)?;
        write_atomic(&self.path(key), &text)
    }
}
