use std::fs;
use std::path::{Path, PathBuf};

use super::CliError;

/// Output directory writer. Files are written whole, one at a time.
pub struct Artifacts {
    dir: PathBuf,
}

fn io(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn json(&self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io(&path, e))
    }

    /// CSV with two header lines: column names, then units.
    pub fn csv(
        &self,
        name: &str,
        columns: &[&str],
        units: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), CliError> {
        debug_assert_eq!(columns.len(), units.len());
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(columns)?;
        w.write_record(units)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| io(&path, e))
    }
}

pub fn num(v: f64) -> String {
    format!("{v:e}")
}
