//! File handling with atomic writes: output is staged in a temporary
//! file in the target directory and renamed into place, so failed
//! commands never leave partial artifacts behind.

use std::fmt;
use std::io::Write;
use std::path::Path;

/// A command failure with its exit code: 1 for usage errors, 2 for data
/// errors (bad files, malformed input, failed invariants).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
        }
    }
}

impl From<reinflect::Error> for CliError {
    fn from(err: reinflect::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let context = |e: &dyn fmt::Display| CliError::Data(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| context(&e))?;
    tmp.write_all(bytes).map_err(|e| context(&e))?;
    tmp.persist(path).map_err(|e| context(&e))?;
    Ok(())
}

/// A short system identifier derived from a prediction file name.
pub fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
