//! Output directory, CSV tables and the JSON summary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use shapekin::dump::fmt_num;

use crate::error::CliError;

pub const TOOL: &str = "shapekin";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fields shared by every summary.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub scenario: String,
    pub config_sha256: String,
    pub seed: u64,
}

/// A pass/fail check with the measured value.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub status: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn below(value: f64, tolerance: f64) -> Self {
        let status = if value < tolerance { "pass" } else { "fail" };
        Self {
            status,
            value,
            tolerance,
        }
    }
}

pub struct OutDir {
    root: PathBuf,
    pub written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::Output(format!("{}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn file(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let p = self.root.join(name);
        let f = File::create(&p).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
        self.written.push(p);
        Ok(BufWriter::new(f))
    }

    pub fn summary<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let mut w = self.file("summary.json")?;
        let text =
            serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        writeln!(w, "{text}")?;
        w.flush()?;
        Ok(())
    }

    /// Writes a numeric table; `None` cells are left empty.
    pub fn table(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<Option<f64>>],
    ) -> Result<(), CliError> {
        let mut w = self.file(name)?;
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(fmt_num).unwrap_or_default())
                .collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}
