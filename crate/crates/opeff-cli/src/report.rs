//! Report emission and parsing.
//!
//! Structured reports are TOML; tables are aligned plain text. Both are
//! rendered with fixed formatting (12 significant digits for structured
//! values) so identical inputs always produce byte-identical files. Files
//! are written atomically: contents go to a sibling temp file which is then
//! renamed into place.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use opeff_core::indices::OperationSummary;
use opeff_core::model::{ChannelRole, DeployedModel, Direction};
use opeff_core::plant;
use opeff_core::sweep::{Criterion, SweepRecord};

use crate::error::{CliError, CliResult};

/// Fixed decimal formatting for structured reports: 12 significant digits,
/// exponent notation (valid TOML floats, stable across runs).
pub fn fmt_float(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v }; // normalize -0
    format!("{:.11e}", v)
}

/// Writes `contents` to `path` via a sibling temp file and an atomic rename.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let mut tmp_name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| String::from("out"));
    tmp_name.push_str(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Appends a dotted suffix to the file name of `base`:
/// `run1` + `signals.csv` -> `run1.signals.csv`.
pub fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if name.is_empty() {
        name = String::from("out");
    }
    name.push('.');
    name.push_str(suffix);
    base.with_file_name(name)
}

/// Derives a sibling data file from a report path by swapping the extension:
/// `sweep.toml` + `theta.csv` -> `sweep.theta.csv`.
pub fn sibling(report_path: &Path, suffix: &str) -> PathBuf {
    report_path.with_extension(suffix)
}

/// Report format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Aligned plain-text table.
    Table,
    /// TOML document.
    Structured,
}

impl Format {
    pub fn report_suffix(self) -> &'static str {
        match self {
            Format::Table => "report.txt",
            Format::Structured => "report.toml",
        }
    }
}

/// Everything an operation report carries.
#[derive(Debug, Clone)]
pub struct OperationReport {
    /// Drive setting, when the operation came from the simulator.
    pub u_p: Option<f64>,
    pub t_s: f64,
    pub t_f: f64,
    /// Integrated natural quantities per channel.
    pub quantities: BTreeMap<ChannelRole, f64>,
    pub summary: OperationSummary,
}

impl OperationReport {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => self.render_toml(),
            Format::Table => self.render_table(),
        }
    }

    fn render_toml(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "report = \"operation\"");
        if let Some(u_p) = self.u_p {
            let _ = writeln!(out, "u_p = {}", fmt_float(u_p));
        }
        let _ = writeln!(out, "t_s = {}", fmt_float(self.t_s));
        let _ = writeln!(out, "t_f = {}", fmt_float(self.t_f));
        for direction in [Direction::Input, Direction::Output] {
            let side: Vec<_> = self
                .quantities
                .iter()
                .filter(|(role, _)| role.direction == direction)
                .collect();
            if side.is_empty() {
                continue;
            }
            let _ = writeln!(
                out,
                "\n[quantities.{}]",
                match direction {
                    Direction::Input => "inputs",
                    Direction::Output => "outputs",
                }
            );
            for (role, value) in side {
                let _ = writeln!(out, "{} = {}", role.product_id, fmt_float(*value));
            }
        }
        out.push_str("\n[summary]\n");
        let s = &self.summary;
        let _ = writeln!(out, "PE = {}", fmt_float(s.pe));
        let _ = writeln!(out, "RE = {}", fmt_float(s.re));
        let _ = writeln!(out, "Top = {}", fmt_float(s.top));
        let _ = writeln!(out, "R = {}", fmt_float(s.r));
        let _ = writeln!(out, "F = {}", fmt_float(s.f));
        let _ = writeln!(out, "unit_interval = {}", fmt_float(s.unit_interval));
        out
    }

    fn render_table(&self) -> String {
        let mut out = String::from("operation report\n");
        if let Some(u_p) = self.u_p {
            let _ = writeln!(out, "  {:<16} {:>14.6}", "u_p", u_p);
        }
        let _ = writeln!(out, "  {:<16} {:>14.6}", "t_s", self.t_s);
        let _ = writeln!(out, "  {:<16} {:>14.6}", "t_f", self.t_f);
        out.push_str("quantities\n");
        for (role, value) in &self.quantities {
            let label = format!("{}:{}", role.direction.tag(), role.product_id);
            let _ = writeln!(out, "  {:<24} {:>14.6}", label, value);
        }
        out.push_str("summary\n");
        let s = &self.summary;
        for (key, value) in [
            ("PE", s.pe),
            ("RE", s.re),
            ("Top", s.top),
            ("R", s.r),
            ("F", s.f),
            ("unit_interval", s.unit_interval),
        ] {
            let _ = writeln!(out, "  {:<16} {:>14.6}", key, value);
        }
        out
    }
}

/// Normative column names of the plant's four channels in sweep reports.
fn plant_quantity_key(role: &ChannelRole) -> CliResult<&'static str> {
    match (role.direction, role.product_id.as_str()) {
        (Direction::Input, plant::COLD_FLUID) => Ok("RQ_w"),
        (Direction::Input, plant::ENERGY) => Ok("RQ_p"),
        (Direction::Input, plant::MECHANISM_WEAR) => Ok("RQ_m"),
        (Direction::Output, plant::HEATED_FLUID) => Ok("PQ_w"),
        _ => Err(CliError::Validation(format!(
            "unexpected plant channel `{}:{}`",
            role.direction.tag(),
            role.product_id
        ))),
    }
}

const SWEEP_QUANTITY_KEYS: [&str; 4] = ["RQ_w", "RQ_p", "RQ_m", "PQ_w"];

/// A failed sweep setting: the drive and the failure message.
#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub u_p: f64,
    pub error: String,
}

/// Everything a sweep report carries.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub unit_interval: f64,
    pub records: Vec<SweepRecord>,
    pub failures: Vec<SweepFailure>,
    /// Selected optimum per criterion, in [`Criterion::ALL`] order.
    pub optima: Vec<(Criterion, f64)>,
}

impl SweepReport {
    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Structured => self.render_toml(),
            Format::Table => self.render_table(),
        }
    }

    fn record_fields(record: &SweepRecord) -> CliResult<Vec<(&'static str, f64)>> {
        let mut fields = vec![("u_p", record.u_p)];
        let mut quantities: BTreeMap<&'static str, f64> = BTreeMap::new();
        for (role, value) in &record.quantities {
            quantities.insert(plant_quantity_key(role)?, *value);
        }
        for key in SWEEP_QUANTITY_KEYS {
            let value = quantities.get(key).copied().ok_or_else(|| {
                CliError::Validation(format!("sweep record lacks the `{key}` quantity"))
            })?;
            fields.push((key, value));
        }
        let s = &record.summary;
        fields.extend([
            ("RE", s.re),
            ("PE", s.pe),
            ("Top", s.top),
            ("R", s.r),
            ("F", s.f),
        ]);
        Ok(fields)
    }

    fn render_toml(&self) -> CliResult<String> {
        let mut out = String::new();
        let _ = writeln!(out, "report = \"sweep\"");
        let _ = writeln!(out, "unit_interval = {}", fmt_float(self.unit_interval));
        for record in &self.records {
            out.push_str("\n[[record]]\n");
            for (key, value) in Self::record_fields(record)? {
                let _ = writeln!(out, "{key} = {}", fmt_float(value));
            }
        }
        for failure in &self.failures {
            out.push_str("\n[[failure]]\n");
            let _ = writeln!(out, "u_p = {}", fmt_float(failure.u_p));
            let _ = writeln!(out, "error = \"{}\"", toml_escape(&failure.error));
        }
        for (criterion, u_p) in &self.optima {
            let _ = writeln!(out, "\n[optimum.{}]", criterion.name());
            let _ = writeln!(out, "u_p = {}", fmt_float(*u_p));
        }
        Ok(out)
    }

    fn render_table(&self) -> CliResult<String> {
        let mut out = String::new();
        let header = [
            "u_p", "RQ_w", "RQ_p", "RQ_m", "PQ_w", "RE", "PE", "Top", "R", "F",
        ];
        for label in header {
            let _ = write!(out, "{label:>14}");
        }
        out.push('\n');
        for record in &self.records {
            for (_, value) in Self::record_fields(record)? {
                let _ = write!(out, "{value:>14.6}");
            }
            out.push('\n');
        }
        for failure in &self.failures {
            let _ = writeln!(out, "u_p = {:.6}: FAILED: {}", failure.u_p, failure.error);
        }
        let _ = writeln!(out, "unit_interval = {:.6}", self.unit_interval);
        for (criterion, u_p) in &self.optima {
            let _ = writeln!(out, "optimum {} at u_p = {:.6}", criterion.name(), u_p);
        }
        Ok(out)
    }
}

fn toml_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Writes a two-column plot series (`u_p` on the first column).
pub fn write_series(path: &Path, value_name: &str, rows: &[(f64, f64)]) -> CliResult<()> {
    let mut out = format!("u_p,{value_name}\n");
    for (u_p, value) in rows {
        let _ = writeln!(out, "{},{}", fmt_float(*u_p), fmt_float(*value));
    }
    write_atomic(path, &out)
}

/// Writes the triple-comparison scatter: one row per operation with its cost
/// totals and duration.
pub fn write_theta_series(path: &Path, records: &[SweepRecord]) -> CliResult<()> {
    let mut out = String::from("u_p,RE,PE,Top\n");
    for record in records {
        let s = &record.summary;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_float(record.u_p),
            fmt_float(s.re),
            fmt_float(s.pe),
            fmt_float(s.top)
        );
    }
    write_atomic(path, &out)
}

/// Writes the deployed curves of an operation, one row per grid sample.
pub fn write_deployed_series(path: &Path, dep: &DeployedModel) -> CliResult<()> {
    let mut out = String::from("t,ire,ipe,ice,ibe,ide\n");
    let grid = dep.ice().grid();
    for k in 0..grid.n_samples() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(grid.time(k)),
            fmt_float(dep.ire().values()[k]),
            fmt_float(dep.ipe().values()[k]),
            fmt_float(dep.ice().values()[k]),
            fmt_float(dep.ibe().values()[k]),
            fmt_float(dep.ide().values()[k])
        );
    }
    write_atomic(path, &out)
}

/// Summary block parsed back from a structured operation report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsedSummary {
    pub pe: f64,
    pub re: f64,
    pub top: f64,
    pub r: f64,
    pub f: f64,
    pub unit_interval: f64,
}

fn toml_table(text: &str) -> CliResult<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| CliError::Validation(format!("malformed report: {e}")))
}

fn float_field(table: &toml::Value, key: &str) -> CliResult<f64> {
    table
        .get(key)
        .and_then(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
        .ok_or_else(|| CliError::Validation(format!("report lacks numeric field `{key}`")))
}

/// Parses the `[summary]` block of a structured operation report.
pub fn parse_operation_report(text: &str) -> CliResult<ParsedSummary> {
    let table = toml_table(text)?;
    let summary = table
        .get("summary")
        .ok_or_else(|| CliError::Validation(String::from("report lacks a [summary] block")))?;
    Ok(ParsedSummary {
        pe: float_field(summary, "PE")?,
        re: float_field(summary, "RE")?,
        top: float_field(summary, "Top")?,
        r: float_field(summary, "R")?,
        f: float_field(summary, "F")?,
        unit_interval: float_field(summary, "unit_interval")?,
    })
}

/// One record row parsed back from a structured sweep report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsedSweepRow {
    pub u_p: f64,
    pub re: f64,
    pub pe: f64,
    pub top: f64,
    pub r: f64,
    pub f: f64,
}

/// Parses the records and the selected optima (`criterion name -> u_p`) of a
/// structured sweep report.
pub fn parse_sweep_report(
    text: &str,
) -> CliResult<(Vec<ParsedSweepRow>, BTreeMap<String, f64>)> {
    let table = toml_table(text)?;
    let mut rows = Vec::new();
    if let Some(records) = table.get("record").and_then(|v| v.as_array()) {
        for record in records {
            rows.push(ParsedSweepRow {
                u_p: float_field(record, "u_p")?,
                re: float_field(record, "RE")?,
                pe: float_field(record, "PE")?,
                top: float_field(record, "Top")?,
                r: float_field(record, "R")?,
                f: float_field(record, "F")?,
            });
        }
    }
    let mut optima = BTreeMap::new();
    if let Some(optimum) = table.get("optimum").and_then(|v| v.as_table()) {
        for (name, entry) in optimum {
            optima.insert(name.clone(), float_field(entry, "u_p")?);
        }
    }
    Ok((rows, optima))
}
