use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::{ColumnMapping, DataError};

/// Header plus string cells, exactly as read from disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn column_index(&self, name: &str) -> Result<usize, DataError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            header: self.header.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Serializes back to RFC-4180 CSV.
    pub fn to_csv(&self) -> Result<String, DataError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)
            .map_err(|e| DataError::Csv(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r)
                .map_err(|e| DataError::Csv(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| DataError::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| DataError::Csv(e.to_string()))
    }
}

/// Reads a CSV file and checks that every mapped column is present.
pub fn load_csv(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<RawTable, DataError> {
    mapping.validate()?;
    load_csv_columns(path, &mapping.all_cols())
}

/// Reads a CSV file requiring only `required` columns.
pub fn load_csv_columns(path: impl AsRef<Path>, required: &[&str]) -> Result<RawTable, DataError> {
    let path = path.as_ref();
    let io_err = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut text = String::new();
    File::open(path)
        .map_err(io_err)?
        .read_to_string(&mut text)
        .map_err(io_err)?;
    read_csv_columns(&text, required)
}

/// Parses CSV text. Row numbers in errors are 1-based over data rows.
pub fn read_csv_columns(text: &str, required: &[&str]) -> Result<RawTable, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| DataError::Csv(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    for col in required {
        if !header.iter().any(|h| h == col) {
            return Err(DataError::MissingColumn(col.to_string()));
        }
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| DataError::Csv(e.to_string()))?;
        if rec.len() != header.len() {
            return Err(DataError::RaggedRow {
                row: i + 1,
                found: rec.len(),
                expected: header.len(),
            });
        }
        rows.push(rec.iter().map(|c| c.trim().to_string()).collect());
    }
    Ok(RawTable { header, rows })
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NaN" | "nan" | "NA")
}

/// Removes rows holding an empty cell or a NaN/NA sentinel. Returns the kept table and the drop count.
pub fn drop_missing(t: RawTable) -> Result<(RawTable, usize), DataError> {
    let before = t.rows.len();
    let rows: Vec<Vec<String>> = t
        .rows
        .into_iter()
        .filter(|r| !r.iter().any(|c| is_missing(c)))
        .collect();
    if rows.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let dropped = before - rows.len();
    Ok((
        RawTable {
            header: t.header,
            rows,
        },
        dropped,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mapping() -> ColumnMapping {
        ColumnMapping {
            exercise_col: "exercise".into(),
            participant_col: "participant".into(),
            pattern_col: "pattern".into(),
            label_col: "affectation".into(),
            feature_cols: vec!["z1".into(), "z2".into()],
            include_participant_as_feature: true,
        }
    }

    const HEADER: &str = "participant,exercise,pattern,z1,z2,affectation\n";

    #[test]
    fn loads_all_rows() {
        let text = format!(
            "{HEADER}P01,Gait,A1,101.5,98.2,g2\nP02,Cyclic,A1,90,91,g0\nP03,Flexion,A2,80,81,g1\n"
        );
        let t = read_csv_columns(&text, &mapping().all_cols()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.rows[0][1], "Gait");
    }

    #[test]
    fn missing_label_column_is_named() {
        let text = "participant,exercise,pattern,z1,z2\nP01,Gait,A1,1,2\n";
        match read_csv_columns(text, &mapping().all_cols()) {
            Err(DataError::MissingColumn(c)) => assert_eq!(c, "affectation"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_row_reports_one_based_row() {
        let text = format!("{HEADER}P01,Gait,A1,1,2,g0\nP01,Gait,A1,1,2,g0,extra\n");
        match read_csv_columns(&text, &mapping().all_cols()) {
            Err(DataError::RaggedRow {
                row,
                found,
                expected,
            }) => {
                assert_eq!((row, found, expected), (2, 7, 6));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_csv("/nonexistent/koa.csv", &mapping()).unwrap_err();
        assert!(matches!(err, DataError::Io { .. }));
    }

    #[test]
    fn drop_missing_cases() {
        let clean = read_csv_columns(&format!("{HEADER}P01,Gait,A1,1,2,g0\n"), &[]).unwrap();
        let (same, dropped) = drop_missing(clean.clone()).unwrap();
        assert_eq!(same, clean);
        assert_eq!(dropped, 0);

        let text = format!(
            "{HEADER}P01,Gait,A1,1,2,g0\nP02,,A1,1,2,g0\nP03,Gait,A1,1,2,g1\nP04,Gait,A1,NA,2,g1\nP05,Gait,A1,1,2,g2\n"
        );
        let (kept, dropped) = drop_missing(read_csv_columns(&text, &[]).unwrap()).unwrap();
        assert_eq!(dropped, 2);
        let ids: Vec<_> = kept.rows.iter().map(|r| r[0].as_str()).collect();
        assert_eq!(ids, ["P01", "P03", "P05"]);

        let text = format!("{HEADER}P01,Gait,A1,NaN,2,g0\nP02,Gait,A1,nan,2,g0\n");
        assert!(matches!(
            drop_missing(read_csv_columns(&text, &[]).unwrap()),
            Err(DataError::EmptyDataset)
        ));
    }

    #[test]
    fn mapping_rejects_duplicates_and_empty_features() {
        let mut m = mapping();
        m.pattern_col = "exercise".into();
        assert!(m.validate().is_err());
        let mut m = mapping();
        m.feature_cols.clear();
        assert!(m.validate().is_err());
    }
}
