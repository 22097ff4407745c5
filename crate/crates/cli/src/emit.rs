//! Report envelopes and their JSON / CSV renderings, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::config::{Command, EmitFormat, RunConfig};
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level JSON document of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub command: Command,
    pub config: RunConfig,
    pub report: T,
}

impl<T> Envelope<T> {
    pub fn new(command: Command, config: &RunConfig, report: T) -> Self {
        let mut config = config.clone();
        config.command = Some(command);
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            config,
            report,
        }
    }
}

/// A rectangular table destined for a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn numeric(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: rows
                .into_iter()
                .map(|r| r.iter().map(f64::to_string).collect())
                .collect(),
        }
    }
}

/// CSV views a report offers. `None` means the format does not apply.
pub trait Tabular {
    fn stats_table(&self) -> Option<CsvTable>;

    fn quantile_table(&self) -> Option<CsvTable> {
        None
    }
}

/// `<stem>.json`, `<stem>_stats.csv` or `<stem>_quantiles.csv`.
pub fn output_path(stem: &Path, format: EmitFormat) -> PathBuf {
    let stem = if stem.extension().is_some_and(|e| e == "json") {
        stem.with_extension("")
    } else {
        stem.to_path_buf()
    };
    let suffix = match format {
        EmitFormat::Json => ".json",
        EmitFormat::CsvStats => "_stats.csv",
        EmitFormat::CsvQuantiles => "_quantiles.csv",
    };
    let mut name = stem
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(suffix);
    stem.with_file_name(name)
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp =
        NamedTempFile::new_in(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn render_csv(table: &CsvTable) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)
        .map_err(|e| CliError::Io(e.to_string()))?;
    for row in &table.rows {
        w.write_record(row)
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn render_json<T: Serialize>(envelope: &Envelope<T>) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(envelope).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Renders every requested format first, then writes each file atomically.
/// Without a stem, JSON goes to stdout and nothing is written.
pub fn emit_report<T: Serialize + Tabular>(
    envelope: &Envelope<T>,
    formats: &[EmitFormat],
    stem: Option<&Path>,
) -> CliResult<Vec<PathBuf>> {
    let mut rendered = Vec::new();
    for &format in formats {
        let bytes = match format {
            EmitFormat::Json => render_json(envelope)?,
            EmitFormat::CsvStats => render_csv(
                &envelope
                    .report
                    .stats_table()
                    .ok_or_else(|| unavailable(format))?,
            )?,
            EmitFormat::CsvQuantiles => render_csv(
                &envelope
                    .report
                    .quantile_table()
                    .ok_or_else(|| unavailable(format))?,
            )?,
        };
        rendered.push((format, bytes));
    }
    let Some(stem) = stem else {
        if formats.iter().any(|&f| f != EmitFormat::Json) {
            return Err(CliError::Config("CSV output needs an output path".into()));
        }
        let mut out = std::io::stdout().lock();
        for (_, bytes) in &rendered {
            out.write_all(bytes)?;
        }
        return Ok(Vec::new());
    };
    let mut written = Vec::new();
    for (format, bytes) in rendered {
        let path = output_path(stem, format);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

fn unavailable(format: EmitFormat) -> CliError {
    CliError::Config(format!(
        "{format:?} output is not available for this command"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use panel_ar::{run_replications, McConfig, McReport, RegimeSpec};

    fn small_report() -> McReport {
        run_replications(&McConfig::new(RegimeSpec::UnitRoot, 4, 10, 3, 1)).unwrap()
    }

    #[test]
    fn paths_from_stem() {
        assert_eq!(
            output_path(Path::new("out/run"), EmitFormat::Json),
            Path::new("out/run.json")
        );
        assert_eq!(
            output_path(Path::new("out/run.json"), EmitFormat::CsvStats),
            Path::new("out/run_stats.csv")
        );
        assert_eq!(
            output_path(Path::new("run"), EmitFormat::CsvQuantiles),
            Path::new("run_quantiles.csv")
        );
    }

    #[test]
    fn csv_shapes() {
        let report = small_report();
        let stats = String::from_utf8(render_csv(&report.stats_table().unwrap()).unwrap()).unwrap();
        let lines: Vec<&str> = stats.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "scaled_stat");
        assert_eq!(lines[1].parse::<f64>().unwrap(), report.scaled_stats[0]);
        let q = String::from_utf8(render_csv(&report.quantile_table().unwrap()).unwrap()).unwrap();
        assert_eq!(q.lines().count(), 10);
        assert_eq!(q.lines().next().unwrap(), "prob,empirical,limit");
    }

    #[test]
    fn json_round_trips() {
        let env = Envelope::new(Command::Mc, &RunConfig::default(), small_report());
        let bytes = render_json(&env).unwrap();
        let back: Envelope<McReport> = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, env);
        let value: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(value["schema_version"], 1);
        assert_eq!(value["config"]["command"], "mc");
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("a.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(
            std::fs::read_dir(path.parent().unwrap()).unwrap().count(),
            1
        );
    }

    #[test]
    fn emit_writes_requested_files() {
        let dir = tempfile::tempdir().unwrap();
        let env = Envelope::new(Command::Mc, &RunConfig::default(), small_report());
        let stem = dir.path().join("run");
        let all = [
            EmitFormat::Json,
            EmitFormat::CsvStats,
            EmitFormat::CsvQuantiles,
        ];
        let written = emit_report(&env, &all, Some(&stem)).unwrap();
        assert_eq!(written.len(), 3);
        assert!(written.iter().all(|p| p.exists()));
        assert!(matches!(
            emit_report(&env, &all, None),
            Err(CliError::Config(_))
        ));
    }
}
