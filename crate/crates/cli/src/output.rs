//! CSV tables with a comment header and the atomically written run manifest.

use crate::error::{CliError, CliResult, ErrorRecord};
use graphene_hydro::PhysicalScales;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column-oriented table written as CSV.
pub struct Table {
    pub name: String,
    pub notes: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        Table {
            name: name.to_string(),
            notes: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Output directory of one run.
pub struct OutDir {
    pub root: PathBuf,
    command: String,
    scales: PhysicalScales,
    pub written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path, command: &str, scales: PhysicalScales) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            command: command.to_string(),
            scales,
            written: Vec::new(),
        })
    }

    /// Writes `<name>.csv`. Values use the shortest round-trip representation,
    /// so identical inputs give byte-identical files.
    pub fn write_table(&mut self, table: &Table) -> CliResult<()> {
        let file = format!("{}.csv", table.name);
        let path = self.root.join(&file);
        let io = |e| CliError::io(&path, e);
        let mut w = BufWriter::new(fs::File::create(&path).map_err(io)?);
        let s = &self.scales;
        let mut header = vec![
            format!("graphene-hydro {VERSION} {}", self.command),
            format!(
                "scales: c = {}, k_BT = {}, hbar = {}, tau0 = {}, gamma = {}, n_T = {}",
                s.c,
                s.kbt,
                s.hbar,
                s.tau0,
                s.gamma,
                s.n_t()
            ),
            "units: lengths, times, densities and energies in the units of the scales above; \
             angles in radians; K = V/k_BT"
                .to_string(),
        ];
        header.extend(table.notes.iter().cloned());
        for line in header {
            writeln!(w, "# {line}").map_err(io)?;
        }
        writeln!(w, "{}", table.columns.join(",")).map_err(io)?;
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            writeln!(w, "{}", cells.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)?;
        self.written.push(file);
        Ok(())
    }
}

/// Shortest round-trip form, in exponent notation for very small or large magnitudes.
fn format_value(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Outcome of one inline check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
        }
    }
}

impl From<graphene_hydro::figures::FigureCheck> for Check {
    fn from(c: graphene_hydro::figures::FigureCheck) -> Self {
        Check {
            name: c.name,
            passed: c.passed,
            value: c.value,
            threshold: c.threshold,
        }
    }
}

/// Everything a command reports besides its tables.
#[derive(Debug, Default)]
pub struct Outcome {
    pub scalars: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn scalar(&mut self, name: &str, v: f64) {
        self.scalars.insert(name.to_string(), v);
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({:e} > {:e})", c.name, c.value, c.threshold))
            .collect()
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub threads: usize,
    pub config: serde_json::Value,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
    pub outputs: &'a [String],
    pub scalars: &'a BTreeMap<String, f64>,
    pub series: &'a BTreeMap<String, Vec<f64>>,
    pub checks: &'a [Check],
    pub status: &'static str,
    pub error: Option<ErrorRecord>,
}

/// Writes `manifest.json` through a temporary file and a rename.
pub fn write_manifest(root: &Path, manifest: &RunManifest) -> CliResult<PathBuf> {
    let path = root.join("manifest.json");
    let tmp = root.join(".manifest.json.tmp");
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::io(&path, e.into()))?;
    {
        let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        f.write_all(text.as_bytes()).map_err(|e| CliError::io(&tmp, e))?;
        f.write_all(b"\n").map_err(|e| CliError::io(&tmp, e))?;
        f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    }
    fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
