//! Report envelope and atomic file output.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hjlab_core::Verdict;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::commands::Failure;
use crate::config::RunConfig;

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub inputs: BTreeMap<&'static str, String>,
    pub verdict: Option<Verdict>,
    pub report: T,
}

/// Writes `dir/name` through a temporary file in the same directory, so
/// readers never see a partial file.
pub fn write_atomic(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut dyn Write) -> hjlab_core::Result<()>,
) -> Result<PathBuf, Failure> {
    let run = |e: String| Failure::Run(format!("writing {name}: {e}"));
    fs::create_dir_all(dir).map_err(|e| run(e.to_string()))?;
    let tmp = NamedTempFile::new_in(dir).map_err(|e| run(e.to_string()))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w).map_err(|e| run(e.to_string()))?;
        w.flush().map_err(|e| run(e.to_string()))?;
    }
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| run(e.to_string()))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Failure> {
    write_atomic(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    write_atomic(dir, name, |w| Ok(w.write_all(text.as_bytes())?))
}
