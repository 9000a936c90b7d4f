//! CSV dataset ingestion and export.

use ndarray::{Array2, ArrayView2};
use qsmote_core::dataset::{DatasetError, LabeledDataset};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

use crate::format;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("file has no header or no data rows")]
    EmptyFile,
    #[error("label column `{0}` not found")]
    MissingLabelColumn(String),
    #[error("non-numeric feature columns: {}", .0.join(", "))]
    NonNumericFeature(Vec<String>),
    #[error("missing or NaN value at line {row}, column `{column}`")]
    NaNValue { row: usize, column: String },
    #[error("infinite value at line {row}, column `{column}`")]
    NonFiniteValue { row: usize, column: String },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// A dataset read from CSV with its column names and label encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCsv {
    pub dataset: LabeledDataset,
    pub feature_names: Vec<String>,
    pub label_column: String,
    /// `label_names[code]` is the original label text.
    pub label_names: Vec<String>,
}

impl LoadedCsv {
    pub fn encoding(&self) -> Vec<(String, usize)> {
        self.label_names.iter().cloned().zip(0..).collect()
    }
}

pub fn load_csv(path: &Path, label_column: &str) -> Result<LoadedCsv, DataError> {
    let file = std::fs::File::open(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    read_csv(file, label_column)
}

enum Cell {
    Value(f64),
    Missing,
    Infinite,
    Text,
}

fn parse_cell(s: &str) -> Cell {
    let t = s.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("nan") {
        return Cell::Missing;
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Cell::Value(v),
        Ok(v) if v.is_nan() => Cell::Missing,
        Ok(_) => Cell::Infinite,
        Err(_) => Cell::Text,
    }
}

/// Labels are encoded `0..K` by order of first appearance. Reported line
/// numbers count the header as line 1.
pub fn read_csv<R: Read>(reader: R, label_column: &str) -> Result<LoadedCsv, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| DataError::Csv(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(DataError::EmptyFile);
    }
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DataError::MissingLabelColumn(label_column.to_string()))?;
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&j| j != label_idx).collect();

    let mut cells: Vec<Vec<Cell>> = Vec::new();
    let mut labels_raw: Vec<String> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| DataError::Csv(e.to_string()))?;
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        labels_raw.push(rec[label_idx].trim().to_string());
        cells.push(feature_cols.iter().map(|&j| parse_cell(&rec[j])).collect());
    }
    if cells.is_empty() {
        return Err(DataError::EmptyFile);
    }

    let offenders: Vec<String> = feature_cols
        .iter()
        .enumerate()
        .filter(|(c, _)| cells.iter().any(|row| matches!(row[*c], Cell::Text)))
        .map(|(_, &j)| header[j].clone())
        .collect();
    if !offenders.is_empty() {
        return Err(DataError::NonNumericFeature(offenders));
    }

    let (n, d) = (cells.len(), feature_cols.len());
    let mut x = Array2::zeros((n, d));
    for (i, row) in cells.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            let column = header[feature_cols[c]].clone();
            x[[i, c]] = match cell {
                Cell::Value(v) => *v,
                Cell::Missing => return Err(DataError::NaNValue { row: i + 2, column }),
                Cell::Infinite => return Err(DataError::NonFiniteValue { row: i + 2, column }),
                Cell::Text => unreachable!("rejected above"),
            };
        }
    }

    let mut label_names: Vec<String> = Vec::new();
    let y: Vec<usize> = labels_raw
        .iter()
        .map(|l| match label_names.iter().position(|k| k == l) {
            Some(code) => code,
            None => {
                label_names.push(l.clone());
                label_names.len() - 1
            }
        })
        .collect();
    let k = label_names.len();
    Ok(LoadedCsv {
        dataset: LabeledDataset::new(x, y, k)?,
        feature_names: feature_cols.iter().map(|&j| header[j].clone()).collect(),
        label_column: label_column.to_string(),
        label_names,
    })
}

/// Writes features then the label column, values in shortest round-trip form.
pub fn write_csv<W: Write>(
    writer: W,
    feature_names: &[String],
    label_column: &str,
    x: ArrayView2<'_, f64>,
    labels: &[String],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = feature_names.iter().map(String::as_str).collect();
    header.push(label_column);
    w.write_record(&header)?;
    for (row, label) in x.rows().into_iter().zip(labels) {
        let mut rec: Vec<String> = row.iter().map(|&v| format::exact(v)).collect();
        rec.push(label.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

impl LoadedCsv {
    pub fn write<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        self.write_dataset(writer, &self.dataset)
    }

    /// Writes another dataset with this file's header and label names.
    pub fn write_dataset<W: Write>(&self, writer: W, data: &LabeledDataset) -> Result<(), csv::Error> {
        let labels: Vec<String> = data.y.iter().map(|&l| self.label_names[l].clone()).collect();
        write_csv(writer, &self.feature_names, &self.label_column, data.x.view(), &labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<LoadedCsv, DataError> {
        read_csv(s.as_bytes(), "label")
    }

    #[test]
    fn first_appearance_encoding() {
        let l = read("a,label\n1,B\n2,A\n3,B\n").unwrap();
        assert_eq!(l.dataset.y, vec![0, 1, 0]);
        assert_eq!(l.encoding(), vec![("B".to_string(), 0), ("A".to_string(), 1)]);
    }

    #[test]
    fn label_column_anywhere() {
        let l = read("label,a,b\nx,1,2\ny,3,4\n").unwrap();
        assert_eq!(l.feature_names, vec!["a", "b"]);
        assert_eq!(l.dataset.x[[1, 1]], 4.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            read("a,Time_Stamp,label\n1,2024-01-01,0\n2,2024-01-02,1\n"),
            Err(DataError::NonNumericFeature(vec!["Time_Stamp".into()]))
        );
        assert_eq!(read("a,b\n1,2\n"), Err(DataError::MissingLabelColumn("label".into())));
        assert_eq!(read(""), Err(DataError::EmptyFile));
        assert_eq!(read("a,label\n"), Err(DataError::EmptyFile));
        assert_eq!(
            read("a,b,label\n1,2,0\n3,,1\n"),
            Err(DataError::NaNValue { row: 3, column: "b".into() })
        );
        assert_eq!(
            read("a,label\nNaN,0\n"),
            Err(DataError::NaNValue { row: 2, column: "a".into() })
        );
        assert!(matches!(read("a,label\ninf,0\n"), Err(DataError::NonFiniteValue { .. })));
    }

    #[test]
    fn round_trip() {
        let l = read("f0,f1,label\n0.1,-3.25e-7,cat\n1e10,0.3333333333333333,dog\n").unwrap();
        let mut buf = Vec::new();
        l.write(&mut buf).unwrap();
        let back = read_csv(buf.as_slice(), "label").unwrap();
        assert_eq!(back, l);
    }
}
