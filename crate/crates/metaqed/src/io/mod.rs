//! File formats at the boundary: S-parameter traces in, CSV tables out.
//!
//! Every CSV written here starts with a `# manifest: <hash>` comment line
//! followed by a header row. Non-finite values are written as the literal
//! tokens `inf`, `-inf` and `NaN`; `inf` marks a divergent quantity such as
//! the localization length of an unattenuated Bloch wave.

mod table;
mod touchstone;
mod trace_csv;

use std::fs;
use std::path::{Path, PathBuf};

pub use table::{format_value, write_table, Table};
pub use touchstone::{parse_touchstone, read_touchstone, write_touchstone, TouchstoneFormat};
pub use trace_csv::{parse_trace_csv, read_trace_csv, write_trace_csv};

use crate::error::{Error, Result};
use crate::transmission::SParamTrace;

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("path has no file name")))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Reads a trace, choosing the format from the extension (`.csv` or Touchstone).
pub fn read_trace(path: &Path) -> Result<SParamTrace> {
    let is_csv = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        read_trace_csv(path)
    } else {
        read_touchstone(path)
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse { path: PathBuf::from(path), message: message.into() }
}
