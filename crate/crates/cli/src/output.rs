//! Output bundles, held in memory until every computation has finished and
//! then written file by file through a temporary name and a rename.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub struct Bundle {
    root: PathBuf,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Bundle {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            files: Vec::new(),
        }
    }

    pub fn add_bytes(&mut self, rel: impl AsRef<Path>, bytes: Vec<u8>) {
        self.files.push((rel.as_ref().to_path_buf(), bytes));
    }

    pub fn add_json<T: Serialize + ?Sized>(
        &mut self,
        rel: impl AsRef<Path>,
        value: &T,
    ) -> Result<()> {
        let mut buf = Vec::new();
        geoconformal::diagnostics::write_json_pretty(value, &mut buf)?;
        self.add_bytes(rel, buf);
        Ok(())
    }

    pub fn commit(self) -> Result<()> {
        for (rel, bytes) in &self.files {
            let path = self.root.join(rel);
            let dir = path.parent().unwrap_or(&self.root);
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
            fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, &path).with_context(|| format!("renaming into {}", path.display()))?;
        }
        Ok(())
    }
}

/// Seconds rounded to 4 decimals.
pub fn seconds(s: f64) -> f64 {
    (s * 1e4).round() / 1e4
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Finite numbers as-is, everything else as JSON null.
pub fn num(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_nested_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = Bundle::new(dir.path().join("run"));
        b.add_bytes("a.txt", b"hi".to_vec());
        b.add_json("sub/b.json", &serde_json::json!({"k": 1}))
            .unwrap();
        b.commit().unwrap();
        assert_eq!(
            fs::read_to_string(dir.path().join("run/a.txt")).unwrap(),
            "hi"
        );
        assert!(fs::read_to_string(dir.path().join("run/sub/b.json"))
            .unwrap()
            .contains("\"k\": 1"));
        let leftovers = fs::read_dir(dir.path().join("run")).unwrap().filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .contains(".tmp")
        });
        assert_eq!(leftovers.count(), 0);
    }

    #[test]
    fn rounding_and_null_numbers() {
        assert_eq!(seconds(0.425_449), 0.4254);
        assert!(num(f64::INFINITY).is_null());
        assert_eq!(num(1.5), serde_json::json!(1.5));
    }
}
