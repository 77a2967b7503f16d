//! CSV formats and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ssr_core::analysis::{ShiftPoint, TrapSeries};
use ssr_core::dynamics::RamseyRecord;

use crate::error::{CliError, CliResult};

pub const RECORD_HEADER: [&str; 4] = ["t_s", "P", "contrast", "phase_rad"];
pub const SERIES_HEADER: [&str; 2] = ["t_s", "P"];
pub const SHIFT_HEADER: [&str; 3] = ["x", "shift_hz", "sigma_hz"];
pub const TRAP_HEADER: [&str; 4] = ["mean_intensity_kW_cm2", "x", "shift_hz", "sigma_hz"];
pub const ALLAN_HEADER: [&str; 4] = ["tau_s", "adev", "ci_low", "ci_high"];

/// Writes via a temporary file in the target directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Numeric CSV with nine significant digits.
pub fn numeric_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn record_csv(rec: &RamseyRecord) -> String {
    numeric_csv(
        &RECORD_HEADER,
        (0..rec.len()).map(|k| vec![rec.times[k], rec.transfer[k], rec.contrast[k], rec.phase[k]]),
    )
}

/// Rows of a numeric CSV whose header must equal one of `layouts`; returns
/// the index of the matching layout.
fn read_numeric(path: &Path, layouts: &[&[&str]]) -> CliResult<(usize, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found.iter().all(|h| h.is_empty()) {
        return Err(CliError::input(format!("{}: empty file", path.display())));
    }
    let layout = layouts
        .iter()
        .position(|l| *l == found.as_slice())
        .ok_or_else(|| {
            let expected: Vec<String> = layouts.iter().map(|l| l.join(",")).collect();
            CliError::input(format!(
                "{}: header `{}` does not match any of: {}",
                path.display(),
                found.join(","),
                expected.join(" | ")
            ))
        })?;
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = rec
            .iter()
            .map(|cell| {
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    CliError::input(format!("{}: row {}: `{cell}` is not a finite number", path.display(), line + 2))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::input(format!("{}: no data rows", path.display())));
    }
    Ok((layout, rows))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::input(format!("{}: {e}", path.display()))
}

/// Ramsey data: `t_s,P,contrast,phase_rad` or `t_s,P`.
#[derive(Debug, Clone, PartialEq)]
pub struct RamseyData {
    pub times: Vec<f64>,
    pub transfer: Vec<f64>,
    pub contrast: Option<Vec<f64>>,
    pub phase: Option<Vec<f64>>,
}

pub fn read_ramsey(path: &Path) -> CliResult<RamseyData> {
    let (layout, rows) = read_numeric(path, &[&RECORD_HEADER, &SERIES_HEADER])?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    Ok(RamseyData {
        times: col(0),
        transfer: col(1),
        contrast: (layout == 0).then(|| col(2)),
        phase: (layout == 0).then(|| col(3)),
    })
}

pub fn read_shift_points(path: &Path) -> CliResult<Vec<ShiftPoint>> {
    let (_, rows) = read_numeric(path, &[&SHIFT_HEADER])?;
    Ok(rows.iter().map(|r| ShiftPoint::new(r[0], r[1], r[2])).collect())
}

/// Groups rows by intensity, keeping first-appearance order.
pub fn read_traps(path: &Path) -> CliResult<Vec<TrapSeries>> {
    let (_, rows) = read_numeric(path, &[&TRAP_HEADER])?;
    let mut traps: Vec<TrapSeries> = Vec::new();
    for r in rows {
        let point = ShiftPoint::new(r[1], r[2], r[3]);
        match traps.iter_mut().find(|t| t.mean_intensity == r[0]) {
            Some(t) => t.points.push(point),
            None => traps.push(TrapSeries {
                mean_intensity: r[0],
                points: vec![point],
            }),
        }
    }
    Ok(traps)
}

pub fn traps_csv(traps: &[TrapSeries]) -> String {
    numeric_csv(
        &TRAP_HEADER,
        traps.iter().flat_map(|t| {
            t.points
                .iter()
                .map(move |p| vec![t.mean_intensity, p.x, p.frequency_shift, p.sigma])
        }),
    )
}

pub fn shift_points_csv(points: &[ShiftPoint]) -> String {
    numeric_csv(
        &SHIFT_HEADER,
        points.iter().map(|p| vec![p.x, p.frequency_shift, p.sigma]),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shots {
    Transfer(Vec<f64>),
    Frequency(Vec<f64>),
}

/// `shot_index,P` or `shot_index,y`.
pub fn read_shots(path: &Path) -> CliResult<Shots> {
    let (layout, rows) = read_numeric(path, &[&["shot_index", "P"], &["shot_index", "y"]])?;
    let values = rows.iter().map(|r| r[1]).collect();
    Ok(if layout == 0 {
        Shots::Transfer(values)
    } else {
        Shots::Frequency(values)
    })
}

pub fn shots_csv(column: &str, values: &[f64]) -> String {
    let mut out = format!("shot_index,{column}\n");
    for (k, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{k},{v:.8e}");
    }
    out
}
