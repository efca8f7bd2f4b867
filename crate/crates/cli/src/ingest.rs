// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV ingestion: one x column (or an implicit index) plus one or more
//! response columns.

use std::fmt;
use std::path::Path;

use cpfit_core::series::SeriesError;
use cpfit_core::{MultiSeries64, Series64};

#[derive(Debug)]
pub enum IngestError {
    Io(std::io::Error),
    Csv(csv::Error),
    /// Header missing or a named column not found.
    Column { line: usize, message: String },
    /// A cell failed to parse as a number.
    Cell { line: usize, column: String, value: String },
    Series(SeriesError),
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::Io(e) => write!(f, "i/o error: {e}"),
            IngestError::Csv(e) => write!(f, "csv error: {e}"),
            IngestError::Column { line, message } => write!(f, "line {line}: {message}"),
            IngestError::Cell { line, column, value } => {
                write!(f, "line {line}: column '{column}' has non-numeric value '{value}'")
            }
            IngestError::Series(e) => write!(f, "invalid series: {e}"),
        }
    }
}

impl std::error::Error for IngestError {}

impl From<std::io::Error> for IngestError {
    fn from(e: std::io::Error) -> Self {
        IngestError::Io(e)
    }
}

impl From<csv::Error> for IngestError {
    fn from(e: csv::Error) -> Self {
        IngestError::Csv(e)
    }
}

impl From<SeriesError> for IngestError {
    fn from(e: SeriesError) -> Self {
        IngestError::Series(e)
    }
}

/// Column selection for [`ingest_csv`].
#[derive(Clone, Debug, Default)]
pub struct Columns {
    /// Domain column name; row index `1..=T` when unset.
    pub x: Option<String>,
    /// Response column names; every non-x column when empty.
    pub ys: Vec<String>,
    /// Collapse duplicate x values by averaging instead of failing.
    pub dedup_x: bool,
}

/// Parsed CSV payload: always a multi-series; callers take `dim(0)` for the
/// univariate case.
pub struct Ingested {
    pub multi: MultiSeries64,
    pub y_names: Vec<String>,
    /// Number of duplicate-x groups collapsed by the dedup pre-pass.
    pub deduped_groups: usize,
}

impl Ingested {
    pub fn univariate(&self) -> Series64 {
        self.multi.dim(0)
    }

    pub fn dims(&self) -> usize {
        self.multi.dims()
    }
}

/// Reads a CSV file with a header row into series data.
pub fn ingest_csv(path: impl AsRef<Path>, columns: &Columns) -> Result<Ingested, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(IngestError::Column { line: 1, message: "missing header row".into() });
    }
    // Numeric-looking headers mean the file has no header row.
    if headers.iter().all(|h| h.parse::<f64>().is_ok()) {
        return Err(IngestError::Column {
            line: 1,
            message: "first row is numeric; a header row is required".into(),
        });
    }
    let x_pos = match &columns.x {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            IngestError::Column { line: 1, message: format!("x column '{name}' not found") }
        })?),
        None => None,
    };
    let y_pos: Vec<usize> = if columns.ys.is_empty() {
        (0..headers.len()).filter(|&i| Some(i) != x_pos).collect()
    } else {
        columns
            .ys
            .iter()
            .map(|name| {
                headers.iter().position(|h| h == name).ok_or_else(|| IngestError::Column {
                    line: 1,
                    message: format!("y column '{name}' not found"),
                })
            })
            .collect::<Result<_, _>>()?
    };
    if y_pos.is_empty() {
        return Err(IngestError::Column { line: 1, message: "no response columns".into() });
    }
    let y_names: Vec<String> = y_pos.iter().map(|&i| headers[i].clone()).collect();

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<Vec<f64>> = vec![Vec::new(); y_pos.len()];
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2;
        let record = record?;
        let parse = |pos: usize| -> Result<f64, IngestError> {
            let raw = record.get(pos).unwrap_or("");
            raw.parse::<f64>().map_err(|_| IngestError::Cell {
                line,
                column: headers[pos].clone(),
                value: raw.to_string(),
            })
        };
        xs.push(match x_pos {
            Some(pos) => parse(pos)?,
            None => (row_idx + 1) as f64,
        });
        for (k, &pos) in y_pos.iter().enumerate() {
            ys[k].push(parse(pos)?);
        }
    }

    let mut deduped_groups = 0usize;
    let multi = if columns.dedup_x {
        let mut dims = Vec::with_capacity(ys.len());
        for col in &ys {
            let (series, groups) = Series64::dedup_x(xs.clone(), col.clone())?;
            deduped_groups = deduped_groups.max(groups);
            dims.push(series);
        }
        MultiSeries64::from_dims(dims)?
    } else {
        MultiSeries64::new(xs, ys)?
    };
    Ok(Ingested { multi, y_names, deduped_groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_three_row_file() {
        let f = write_tmp("t,y\n1,1\n2,3\n3,2\n");
        let out = ingest_csv(f.path(), &Columns { x: Some("t".into()), ..Default::default() })
            .unwrap();
        assert_eq!(out.dims(), 1);
        let series = out.univariate();
        assert_eq!(series.len(), 3);
        assert_eq!(series.ys(), &[1.0, 3.0, 2.0]);
    }

    #[test]
    fn missing_header_is_line_one_error() {
        let f = write_tmp("1,1\n2,3\n3,2\n");
        let err = ingest_csv(f.path(), &Columns::default()).unwrap_err();
        match err {
            IngestError::Column { line, .. } => assert_eq!(line, 1),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn two_response_columns_make_two_dims() {
        let f = write_tmp("t,a,b\n1,1,9\n2,3,8\n3,2,7\n");
        let out = ingest_csv(f.path(), &Columns { x: Some("t".into()), ..Default::default() })
            .unwrap();
        assert_eq!(out.dims(), 2);
        assert_eq!(out.y_names, vec!["a", "b"]);
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let f = write_tmp("t,y\n1,1\n2,oops\n");
        let err = ingest_csv(f.path(), &Columns { x: Some("t".into()), ..Default::default() })
            .unwrap_err();
        match err {
            IngestError::Cell { line, column, value } => {
                assert_eq!((line, column.as_str(), value.as_str()), (3, "y", "oops"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn implicit_index_and_dedup() {
        let f = write_tmp("x,y\n1,2\n1,4\n2,5\n");
        let err = ingest_csv(f.path(), &Columns { x: Some("x".into()), ..Default::default() });
        assert!(err.is_err());
        let out = ingest_csv(
            f.path(),
            &Columns { x: Some("x".into()), dedup_x: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(out.deduped_groups, 1);
        assert_eq!(out.univariate().ys(), &[3.0, 5.0]);
    }
}
