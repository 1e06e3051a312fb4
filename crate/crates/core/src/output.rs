//! Deterministic results writers.
//!
//! A scenario result is written as plain tabular files for downstream
//! plotting: one sweep table per (pool size, selector) pair, one statistics
//! file with the per-network CI bounds, and one provenance file carrying the
//! seed, tool version, timestamp, and a config echo in the scenario-file
//! grammar. Identical results produce byte-identical files; all numbers use
//! locale-independent shortest round-trip decimal formatting, and the only
//! wall-clock value is the provenance timestamp.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::config::to_toml_string;
use crate::harness::ScenarioResult;
use crate::metrics::SweepResult;
use crate::stats::{ConfidenceInterval, DemandStatistics};

/// Sweep-table columns, in order.
pub const SWEEP_COLUMNS: &str =
    "gamma,n_a,n_b,objective,surplus_a_det,surplus_a_emp,surplus_b_det,surplus_b_emp,fairness";

/// Errors from results writing.
#[derive(Debug, Error)]
pub enum OutputError {
    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("failed to serialize results: {0}")]
    Serialize(String),
}

/// Table file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Write all result files into `dir`, returning the written paths in order:
/// sweep tables (configuration order), statistics, provenance.
pub fn write_results(
    result: &ScenarioResult,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>, OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.to_path_buf(),
        source,
    })?;

    let mut written = Vec::new();
    for sweep in &result.sweeps {
        let token = sweep
            .selector
            .map(|s| s.file_token())
            .unwrap_or_else(|| "custom".to_string());
        let name = format!(
            "sweep_pool{:03}_{}.{}",
            sweep.pool_size,
            token,
            format.extension()
        );
        let path = dir.join(name);
        let body = match format {
            OutputFormat::Csv => sweep_csv(sweep),
            OutputFormat::Json => sweep_json(sweep)?,
        };
        write_file(&path, &body)?;
        written.push(path);
    }

    let stats_path = dir.join(format!("statistics.{}", format.extension()));
    let body = match format {
        OutputFormat::Csv => statistics_csv(result),
        OutputFormat::Json => statistics_json(result)?,
    };
    write_file(&stats_path, &body)?;
    written.push(stats_path);

    let provenance_path = dir.join("provenance.toml");
    write_file(&provenance_path, &provenance_toml(result))?;
    written.push(provenance_path);

    Ok(written)
}

fn write_file(path: &Path, body: &str) -> Result<(), OutputError> {
    std::fs::write(path, body).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Format an f64 with full (shortest round-trip) precision, `NaN` for
/// missing optional values.
fn num(value: f64) -> String {
    format!("{value}")
}

fn opt_num(value: Option<f64>) -> String {
    value
        .map(|v| format!("{v}"))
        .unwrap_or_else(|| "NaN".to_string())
}

fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_COLUMNS);
    out.push('\n');
    for row in &sweep.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(row.gamma),
            row.allocation.n_a,
            row.allocation.n_b,
            num(row.allocation.objective),
            num(row.surplus_a.deterministic),
            opt_num(row.surplus_a.empirical_mean),
            num(row.surplus_b.deterministic),
            opt_num(row.surplus_b.empirical_mean),
            opt_num(row.fairness),
        );
    }
    out
}

#[derive(Serialize)]
struct SweepRowDto {
    gamma: f64,
    n_a: u32,
    n_b: u32,
    objective: f64,
    surplus_a_det: f64,
    surplus_a_emp: Option<f64>,
    surplus_b_det: f64,
    surplus_b_emp: Option<f64>,
    fairness: Option<f64>,
}

fn sweep_json(sweep: &SweepResult) -> Result<String, OutputError> {
    let rows: Vec<SweepRowDto> = sweep
        .rows
        .iter()
        .map(|row| SweepRowDto {
            gamma: row.gamma,
            n_a: row.allocation.n_a,
            n_b: row.allocation.n_b,
            objective: row.allocation.objective,
            surplus_a_det: row.surplus_a.deterministic,
            surplus_a_emp: row.surplus_a.empirical_mean,
            surplus_b_det: row.surplus_b.deterministic,
            surplus_b_emp: row.surplus_b.empirical_mean,
            fairness: row.fairness,
        })
        .collect();
    let mut body =
        serde_json::to_string_pretty(&rows).map_err(|e| OutputError::Serialize(e.to_string()))?;
    body.push('\n');
    Ok(body)
}

fn statistics_rows(
    result: &ScenarioResult,
) -> Vec<(&'static str, &'static str, ConfidenceInterval, usize)> {
    let entry = |network, stats: &DemandStatistics| {
        vec![
            (network, "mean", stats.mean_ci, stats.n_realizations),
            (network, "variance", stats.variance_ci, stats.n_realizations),
            (network, "maximum", stats.max_ci, stats.n_realizations),
        ]
    };
    let mut rows = entry("ran_a", &result.stats_a);
    rows.extend(entry("ran_b", &result.stats_b));
    rows
}

fn statistics_csv(result: &ScenarioResult) -> String {
    let mut out = String::from("network,statistic,lower,upper,level,n_realizations\n");
    for (network, statistic, ci, n) in statistics_rows(result) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            network,
            statistic,
            num(ci.lower),
            num(ci.upper),
            num(ci.level),
            n
        );
    }
    out
}

#[derive(Serialize)]
struct StatisticsRowDto {
    network: &'static str,
    statistic: &'static str,
    lower: f64,
    upper: f64,
    level: f64,
    n_realizations: usize,
}

fn statistics_json(result: &ScenarioResult) -> Result<String, OutputError> {
    let rows: Vec<StatisticsRowDto> = statistics_rows(result)
        .into_iter()
        .map(|(network, statistic, ci, n)| StatisticsRowDto {
            network,
            statistic,
            lower: ci.lower,
            upper: ci.upper,
            level: ci.level,
            n_realizations: n,
        })
        .collect();
    let mut body =
        serde_json::to_string_pretty(&rows).map_err(|e| OutputError::Serialize(e.to_string()))?;
    body.push('\n');
    Ok(body)
}

fn provenance_toml(result: &ScenarioResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tool_version = {:?}", result.provenance.tool_version);
    let _ = writeln!(out, "base_seed = {}", result.provenance.base_seed);
    let _ = writeln!(out, "timestamp = {:?}", result.provenance.timestamp);
    out.push('\n');
    out.push_str("[config]\n");
    // Indent-free echo: the [config] table holds the scenario-file grammar,
    // with the network tables becoming [config.ran_a] / [config.ran_b].
    let echo = to_toml_string(&result.config);
    for line in echo.lines() {
        if let Some(table) = line.strip_prefix('[') {
            let _ = writeln!(out, "[config.{table}");
        } else {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::ArmaParams;
    use crate::harness::{run_scenario, ScenarioConfig};
    use crate::stats::StatisticSelector;

    fn small_result() -> ScenarioResult {
        let config = ScenarioConfig {
            name: "writer-test".to_string(),
            base_seed: 5,
            pool_sizes: vec![20],
            gamma_step: 0.5,
            n_realizations: 3,
            trace_length: 16,
            confidence_level: 0.95,
            modes: vec![StatisticSelector::MEAN_LOWER],
            ran_a: ArmaParams::new(30.0, vec![], vec![], 0.0, 0).unwrap(),
            ran_b: ArmaParams::new(50.0, vec![], vec![], 0.0, 0).unwrap(),
        };
        run_scenario(&config).unwrap()
    }

    #[test]
    fn writes_sweeps_statistics_and_provenance() {
        let result = small_result();
        let dir = tempfile::tempdir().unwrap();
        let written = write_results(&result, dir.path(), OutputFormat::Csv).unwrap();
        assert_eq!(written.len(), 3);
        assert!(written[0].ends_with("sweep_pool020_mean_lower.csv"));
        assert!(written[1].ends_with("statistics.csv"));
        assert!(written[2].ends_with("provenance.toml"));
        for path in &written {
            assert!(path.exists());
        }
    }

    #[test]
    fn sweep_csv_has_the_pinned_columns_and_rows() {
        let result = small_result();
        let csv = sweep_csv(&result.sweeps[0]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_COLUMNS);
        // Zero-variance config at gamma = 0.5 reproduces the hand-computed row.
        let row = lines.nth(1).unwrap();
        assert!(
            row.starts_with("0.5,14,6,0.5294222222222222,"),
            "unexpected row {row:?}"
        );
        assert!(row.ends_with(&format!("{}", 400.0 / 464.0)), "row {row:?}");
    }

    #[test]
    fn rewriting_the_same_result_is_byte_identical() {
        let result = small_result();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let first = write_results(&result, dir_a.path(), format).unwrap();
            let second = write_results(&result, dir_b.path(), format).unwrap();
            for (a, b) in first.iter().zip(&second) {
                assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
            }
        }
    }

    #[test]
    fn provenance_embeds_a_parseable_config_echo() {
        let result = small_result();
        let text = provenance_toml(&result);
        assert!(text.contains("tool_version"));
        assert!(text.contains("[config.ran_a]"));
        // The echo under [config] must itself round-trip through the parser.
        let echo = to_toml_string(&result.config);
        let parsed = crate::config::parse_config_str(&echo).unwrap();
        assert_eq!(parsed, result.config);
        // And the provenance file as a whole is valid TOML.
        let value: toml::Value = toml::from_str(&text).unwrap();
        assert!(value.get("config").is_some());
    }

    #[test]
    fn json_tables_mirror_the_csv_columns() {
        let result = small_result();
        let json = sweep_json(&result.sweeps[0]).unwrap();
        let rows: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
        assert_eq!(rows.len(), 3);
        let row = &rows[1];
        assert_eq!(row["gamma"], 0.5);
        assert_eq!(row["n_a"], 14);
        assert_eq!(row["n_b"], 6);
        assert!(row["fairness"].as_f64().unwrap() > 0.86);
    }
}
