//! Report envelope and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

/// Bumped on any incompatible change to the envelope or a result payload.
pub const SCHEMA_VERSION: u32 = 1;

/// Every report file has this shape. Nothing in it depends on wall-clock
/// time or on the output location, so identical runs give identical bytes.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T> {
    pub schema_version: u32,
    pub command: &'a str,
    pub status: &'a str,
    pub exit_code: i32,
    pub config: &'a RunConfig,
    pub result: T,
}

pub fn to_bytes<T: Serialize>(envelope: &Envelope<'_, T>) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(envelope)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Write through a temporary sibling and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(wrap)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(wrap)
}

/// A finished file held in memory until the run ends.
#[derive(Debug)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn report<T: Serialize>(
        dir: &Path,
        file: &str,
        envelope: &Envelope<'_, T>,
    ) -> Result<Self, CliError> {
        Ok(Self {
            path: dir.join(file),
            bytes: to_bytes(envelope)?,
        })
    }

    pub fn write(&self) -> Result<(), CliError> {
        write_atomic(&self.path, &self.bytes)
    }
}
