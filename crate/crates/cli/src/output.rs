use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use tempfile::NamedTempFile;

use crate::CliError;

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Config(format!("{}: {e}", path.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn timestamp_line() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated unix={secs}\n")
}

/// Shortest round-trip decimal.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// `re+imi` per coordinate, space separated.
pub fn point(p: &[Complex64]) -> String {
    p.iter()
        .map(|c| {
            let sign = if c.im.is_sign_negative() { "" } else { "+" };
            format!("{}{sign}{}i", num(c.re), num(c.im))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Config(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads points as rows of `re, im` pairs; `#` lines and a non-numeric
/// header row are skipped.
pub fn read_points(path: &Path, dimension: usize) -> Result<Vec<Vec<Complex64>>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let Ok(vals) = parsed else {
            if line == 0 {
                continue;
            }
            return Err(CliError::Config(format!("{}: row {} is not numeric", path.display(), line + 1)));
        };
        if vals.len() != 2 * dimension {
            return Err(CliError::Config(format!(
                "{}: row {} has {} columns, expected {} (re, im per coordinate)",
                path.display(),
                line + 1,
                vals.len(),
                2 * dimension
            )));
        }
        points.push(vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
    }
    if points.is_empty() {
        return Err(CliError::Config(format!("{}: no points", path.display())));
    }
    Ok(points)
}
