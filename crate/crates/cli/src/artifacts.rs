//! Output hygiene for the command line: canonical config digests, report
//! serialization in both formats, plot-ready tables, and the re-load pass
//! every emitted file gets before the command reports success.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use glider_core::sim::{SimOutput, Trajectory};
use glider_core::sysid::Chain;
use glider_core::vehicle::HydroCoefficients;
use glider_core::{GliderError, Result};

/// Report file format selected with `--format`. Data tables (trajectories,
/// chains, grid cells) are CSV regardless; this picks how the run report is
/// written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn report_name(self) -> &'static str {
        match self {
            Format::Csv => "report.csv",
            Format::Json => "report.json",
        }
    }
}

/// Envelope written as `report.csv` / `report.json`. Wall-clock timing is
/// deliberately absent: it goes to stdout so that reruns with one seed stay
/// byte-identical on disk.
#[derive(Serialize)]
pub struct RunReportFile<'a, R: Serialize> {
    pub command: &'static str,
    /// Seed in force after command-line resolution.
    pub seed: u64,
    /// SHA-256 of the canonical (JSON) serialization of the scenario as
    /// loaded, comments and formatting normalized away.
    pub config_sha256: String,
    /// Same digest for the vehicle description actually used.
    pub vehicle_sha256: String,
    /// Files this run wrote, relative to the output directory.
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_log: Option<ControlLog>,
    pub report: &'a R,
}

/// A recorded hand-off between control laws.
#[derive(Serialize)]
pub struct SwitchRow {
    pub t: f64,
    pub from: String,
    pub to: String,
}

/// Closed-loop audit rollup: sliding-surface energy trend and the running
/// gain-bound maxima.
#[derive(Serialize)]
pub struct LyapunovStats {
    /// Audited control ticks.
    pub ticks: usize,
    /// Consecutive tick pairs that start outside the boundary-layer energy
    /// 0.5 (eps_pitch^2 + eps_depth^2).
    pub outside_pairs: usize,
    /// Fraction of those pairs along which the energy did not grow.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonincreasing_fraction: Option<f64>,
    pub v_max: f64,
    pub v_final: f64,
    pub max_k2_bound_pitch: f64,
    pub max_k2_bound_depth: f64,
}

#[derive(Serialize)]
pub struct ControlLog {
    pub mode_switches: Vec<SwitchRow>,
    pub lyapunov: LyapunovStats,
}

/// Distills a closed-loop run's audit trail; `None` for open-loop runs,
/// which have neither switches nor surfaces.
pub fn control_log(output: &SimOutput, eps_pitch: f64, eps_depth: f64) -> Option<ControlLog> {
    if output.audits.is_empty() && output.mode_switches.is_empty() {
        return None;
    }
    let v_eps = 0.5 * (eps_pitch * eps_pitch + eps_depth * eps_depth);
    let mut outside = 0usize;
    let mut nonincreasing = 0usize;
    for pair in output.audits.windows(2) {
        let (v0, v1) = (pair[0].1.lyapunov, pair[1].1.lyapunov);
        if v0 > v_eps {
            outside += 1;
            if v1 <= v0 + 1e-12 {
                nonincreasing += 1;
            }
        }
    }
    let mut v_max = 0.0f64;
    let mut k2_pitch = 0.0f64;
    let mut k2_depth = 0.0f64;
    for (_, a) in &output.audits {
        v_max = v_max.max(a.lyapunov);
        k2_pitch = k2_pitch.max(a.k2_bound_pitch);
        k2_depth = k2_depth.max(a.k2_bound_depth);
    }
    Some(ControlLog {
        mode_switches: output
            .mode_switches
            .iter()
            .map(|m| SwitchRow { t: m.t, from: m.from.to_string(), to: m.to.to_string() })
            .collect(),
        lyapunov: LyapunovStats {
            ticks: output.audits.len(),
            outside_pairs: outside,
            nonincreasing_fraction: (outside > 0)
                .then(|| nonincreasing as f64 / outside as f64),
            v_max,
            v_final: output.audits.last().map(|(_, a)| a.lyapunov).unwrap_or(0.0),
            max_k2_bound_pitch: k2_pitch,
            max_k2_bound_depth: k2_depth,
        },
    })
}

/// SHA-256 over the compact JSON serialization; key order follows the struct
/// definition, so equal configurations hash equal regardless of how the
/// source file was formatted.
pub fn sha256_json<T: Serialize>(value: &T) -> Result<String> {
    let json = serde_json::to_string(value)
        .map_err(|e| GliderError::one_problem(format!("cannot serialize for hashing: {e}")))?;
    let digest = Sha256::digest(json.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn parse_err(path: &Path, row: usize, msg: impl Into<String>) -> GliderError {
    GliderError::Parse { file: path.to_path_buf(), row, msg: msg.into() }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| GliderError::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| GliderError::io(path, e))
}

/// CSV field escaping; our names never need it, but a quoted value must
/// still survive a naive reader.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Flattens a JSON document into `path,value` rows: dotted keys for objects,
/// bracketed indices for arrays. Keys come out in serde_json's sorted order.
pub fn flatten_json(value: &serde_json::Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &serde_json::Value, rows: &mut Vec<(String, String)>) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, child) in map {
                    let path =
                        if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&path, child, rows);
                }
            }
            serde_json::Value::Array(items) => {
                for (i, child) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), child, rows);
                }
            }
            serde_json::Value::Null => rows.push((prefix.to_string(), "null".to_string())),
            serde_json::Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
            serde_json::Value::Number(n) => rows.push((prefix.to_string(), n.to_string())),
            serde_json::Value::String(s) => rows.push((prefix.to_string(), csv_field(s))),
        }
    }
    let mut rows = Vec::new();
    walk("", value, &mut rows);
    rows
}

/// Writes the report envelope in the selected format and re-loads it to
/// prove the file parses cleanly. Returns the path written.
pub fn write_report<R: Serialize>(
    dir: &Path,
    format: Format,
    file: &RunReportFile<'_, R>,
) -> Result<PathBuf> {
    let path = dir.join(format.report_name());
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(file)
                .map_err(|e| GliderError::one_problem(format!("cannot serialize report: {e}")))?;
            text.push('\n');
            write_text(&path, &text)?;
            let back = read_text(&path)?;
            serde_json::from_str::<serde_json::Value>(&back)
                .map_err(|e| parse_err(&path, e.line(), format!("re-load failed: {e}")))?;
        }
        Format::Csv => {
            let value = serde_json::to_value(file)
                .map_err(|e| GliderError::one_problem(format!("cannot serialize report: {e}")))?;
            let rows = flatten_json(&value);
            let mut text = String::from("key,value\n");
            for (k, v) in &rows {
                text.push_str(k);
                text.push(',');
                text.push_str(v);
                text.push('\n');
            }
            write_text(&path, &text)?;
            let back = read_text(&path)?;
            let mut lines = back.lines();
            if lines.next() != Some("key,value") {
                return Err(parse_err(&path, 1, "re-load failed: header mismatch"));
            }
            let mut n = 0usize;
            for (i, line) in lines.enumerate() {
                match line.split_once(',') {
                    Some((key, _)) if !key.is_empty() => n += 1,
                    _ => return Err(parse_err(&path, i + 2, "re-load failed: not a key,value row")),
                }
            }
            if n != rows.len() {
                return Err(parse_err(&path, 0, "re-load failed: row count mismatch"));
            }
        }
    }
    Ok(path)
}

/// Writes a CSV table, then re-reads it checking the header, the row count,
/// and that every cell in `numeric` columns parses as a number. Cells in
/// other columns may be any text, including empty.
pub fn write_table(
    path: &Path,
    header: &str,
    rows: &[Vec<String>],
    numeric: &[usize],
) -> Result<()> {
    let width = header.split(',').count();
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), width);
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(path, &text)?;

    let back = read_text(path)?;
    let mut lines = back.lines();
    if lines.next() != Some(header) {
        return Err(parse_err(path, 1, "re-load failed: header mismatch"));
    }
    let mut n = 0usize;
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(parse_err(
                path,
                i + 2,
                format!("re-load failed: {} fields, expected {width}", fields.len()),
            ));
        }
        for &c in numeric {
            fields[c].parse::<f64>().map_err(|e| {
                parse_err(path, i + 2, format!("re-load failed: column {c}: {e}"))
            })?;
        }
        n += 1;
    }
    if n != rows.len() {
        return Err(parse_err(
            path,
            0,
            format!("re-load failed: {n} rows, expected {}", rows.len()),
        ));
    }
    Ok(())
}

/// Full-precision float for data tables: shortest text that parses back to
/// the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Saves the trajectory and proves the strict reader accepts it unchanged.
pub fn write_trajectory(path: &Path, trajectory: &Trajectory, ballast_travel_gain: f64) -> Result<()> {
    trajectory.save_csv(path)?;
    let back = Trajectory::load_csv(path, ballast_travel_gain)?;
    if back.samples.len() != trajectory.samples.len() {
        return Err(parse_err(
            path,
            0,
            format!(
                "re-load produced {} samples, expected {}",
                back.samples.len(),
                trajectory.samples.len()
            ),
        ));
    }
    Ok(())
}

/// One sampler chain as a plot-ready table: the post-burn-in draw index and
/// the twelve coefficients.
pub fn write_chain(path: &Path, chain: &Chain) -> Result<()> {
    let header = format!("step,{}", HydroCoefficients::NAMES.join(","));
    let rows: Vec<Vec<String>> = chain
        .samples
        .iter()
        .enumerate()
        .map(|(i, draw)| {
            let mut row = Vec::with_capacity(13);
            row.push(i.to_string());
            row.extend(draw.iter().map(|&v| fmt_f64(v)));
            row
        })
        .collect();
    let numeric: Vec<usize> = (0..13).collect();
    write_table(path, &header, &rows, &numeric)
}
