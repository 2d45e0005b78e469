//! Staged artifact writes: nothing appears at a target path until every output
//! of the run has been produced, and a failed commit removes what it had moved.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use softattr::eval::{write_report_csv, ReportRow};
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

#[derive(Default)]
pub struct Outputs {
    staged: Vec<(NamedTempFile, PathBuf)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bytes(&mut self, path: &Path, data: &[u8]) -> Result<()> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
        tmp.write_all(data).map_err(|e| CliError::io(path, e))?;
        self.staged.push((tmp, path.to_path_buf()));
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut data = serde_json::to_vec_pretty(value).map_err(softattr::Error::from)?;
        data.push(b'\n');
        self.bytes(path, &data)
    }

    pub fn report_csv(&mut self, path: &Path, rows: &[ReportRow]) -> Result<()> {
        let mut buf = Vec::new();
        write_report_csv(&mut buf, rows)?;
        self.bytes(path, &buf)
    }

    /// Any serializable rows as a headed CSV.
    pub fn csv<T: Serialize>(&mut self, path: &Path, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let buf = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
        self.bytes(path, &buf)
    }

    /// Lets `write` produce the file at a temporary path in the target directory.
    pub fn file(&mut self, path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        self.bytes(path, b"")?;
        let (tmp, _) = self.staged.last().expect("just staged");
        write(tmp.path())
    }

    /// Moves every staged file into place and returns the written paths.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut done: Vec<PathBuf> = Vec::new();
        for (tmp, target) in self.staged {
            if let Err(e) = tmp.persist(&target) {
                for p in &done {
                    let _ = std::fs::remove_file(p);
                }
                return Err(CliError::io(&target, e.error));
            }
            done.push(target);
        }
        Ok(done)
    }
}
