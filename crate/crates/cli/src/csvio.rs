//! CSV ingestion. Spectra use `freq_mhz,value` columns, linewidth scans use
//! `wj_mhz,psd`; a header row is required, `#` lines are comments, and all
//! numbers use the decimal point. Errors carry the offending line number.

use crate::{CliError, Result};
use std::path::Path;

/// Two named numeric columns read from a CSV file.
pub struct CsvColumns {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Reads the two named columns from `path`. Extra columns are ignored;
/// missing columns, short rows and unparsable numbers are reported with
/// their location.
pub fn read_two_columns(path: &Path, x_name: &str, y_name: &str) -> Result<CsvColumns> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Parse(format!(
                "{}: missing column `{name}` (found: {})",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let ix = col(x_name)?;
    let iy = col(y_name)?;

    let mut x = Vec::new();
    let mut y = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let line = record
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| "?".into());
        let parse = |idx: usize, name: &str| -> Result<f64> {
            let field = record.get(idx).ok_or_else(|| {
                CliError::Parse(format!(
                    "{}:{line}: row too short for column `{name}`",
                    path.display()
                ))
            })?;
            field.parse::<f64>().map_err(|_| {
                CliError::Parse(format!(
                    "{}:{line}: `{field}` in column `{name}` is not a number",
                    path.display()
                ))
            })
        };
        x.push(parse(ix, x_name)?);
        y.push(parse(iy, y_name)?);
    }
    if x.is_empty() {
        return Err(CliError::Parse(format!("{}: no data rows", path.display())));
    }
    Ok(CsvColumns { x, y })
}
