//! CSV ingestion for point matrices and cluster-label files.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use std::path::Path;

/// Reads a dataset: one point per row, comma-separated reals, optional
/// header. Errors carry row/column positions (1-based rows as seen in the
/// file, including the header).
pub fn ingest_csv(path: &Path, has_header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let offset = usize::from(has_header);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = idx + offset;
        if let Some(w) = width {
            if record.len() != w {
                return Err(Error::RaggedRow {
                    row: row_no,
                    found: record.len(),
                    expected: w,
                });
            }
        } else {
            width = Some(record.len());
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|e| Error::Parse {
                row: row_no,
                col,
                msg: format!("{e}: {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { row: row_no, col });
            }
            row.push(value);
        }
        rows.push(row);
    }
    Dataset::from_rows(&rows)
}

/// Reads a labels file: one 0-based cluster index per row.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut labels = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let field = record.get(0).unwrap_or("");
        let label: usize = field.parse().map_err(|e| Error::Parse {
            row: idx,
            col: 0,
            msg: format!("{e}: {field:?}"),
        })?;
        labels.push(label);
    }
    Ok(labels)
}

pub fn write_csv(path: &Path, ds: &Dataset) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in ds.rows() {
        writer.write_record(row.iter().map(|v| format!("{v}")))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for &label in labels {
        writer.write_record([label.to_string()])?;
    }
    writer.flush()?;
    Ok(())
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
    fn two_by_two() {
        let f = write_tmp("0,0\n1,1\n");
        let ds = ingest_csv(f.path(), false).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.d(), 2);
    }

    #[test]
    fn header_skipped() {
        let f = write_tmp("x,y\n0,0\n1,1\n");
        let ds = ingest_csv(f.path(), true).unwrap();
        assert_eq!(ds.n(), 2);
    }

    #[test]
    fn nan_rejected_with_position() {
        let f = write_tmp("0,0\n1,NaN\n");
        let err = ingest_csv(f.path(), false).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { row: 1, col: 1 }));
    }

    #[test]
    fn ragged_rejected() {
        let f = write_tmp("0,0\n1\n");
        let err = ingest_csv(f.path(), false).unwrap_err();
        assert!(matches!(err, Error::RaggedRow { row: 1, .. }));
    }

    #[test]
    fn parse_error_positioned() {
        let f = write_tmp("0,0\n1,abc\n");
        let err = ingest_csv(f.path(), false).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, col: 1, .. }));
    }

    #[test]
    fn labels_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        write_labels(&path, &[0, 2, 1]).unwrap();
        assert_eq!(read_labels(&path).unwrap(), vec![0, 2, 1]);
    }
}
