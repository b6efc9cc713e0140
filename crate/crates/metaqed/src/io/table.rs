use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Numeric table with named columns and optional trailing comment lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Lines emitted after the data, each prefixed with `# `.
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV text with the manifest line first.
    pub fn render(&self, manifest_hash: &str) -> Result<String> {
        if let Some(row) = self.rows.iter().find(|r| r.len() != self.columns.len()) {
            return Err(Error::Numerical(format!(
                "row of {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        let mut out = format!("# manifest: {manifest_hash}\n{}\n", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for line in &self.footer {
            let _ = writeln!(out, "# {line}");
        }
        Ok(out)
    }
}

/// Shortest representation that parses back to the same value; `inf` for +infinity.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Renders `table` and writes it atomically to `path`.
pub fn write_table(path: &Path, table: &Table, manifest_hash: &str) -> Result<()> {
    super::write_atomic(path, table.render(manifest_hash)?.as_bytes())
}
