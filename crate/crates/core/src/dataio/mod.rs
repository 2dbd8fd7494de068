//! Bioimpedance record ingestion and preprocessing.
//!
//! The pipeline is: [`load_csv`] → [`drop_missing`] → [`fit_label_maps`] →
//! [`encode`] → [`stratified_split`] → [`fit_scaler`]/[`apply_scaler`] →
//! [`one_hot`]. Encoded rows are laid out as
//! `[exercise, participant?, pattern, impedance channels...]` and are fed to
//! the network as a single-channel sequence.

mod artifact;
mod encode;
mod scale;
mod split;
mod table;

pub use artifact::{write_encoded_csv, DatasetManifest};
pub use encode::{encode, encode_features, fit_label_maps, one_hot, CategoryMap, LabelMaps};
pub use scale::{apply_scaler, fit_scaler, ScalerParams};
pub use split::{stratified_split, SplitIndices};
pub use table::{drop_missing, load_csv, load_csv_columns, read_csv_columns, RawTable};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Number of severity grades (g0..g3).
pub const NUM_CLASSES: usize = 4;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("row {row} has {found} cells, header has {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("column `{0}` has no values")]
    EmptyColumn(String),
    #[error("value `{value}` in column `{column}` was not seen when the encoders were fitted")]
    UnseenValue { column: String, value: String },
    #[error("row {row}, column `{column}`: `{value}` is not a number")]
    NotNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("label {label} outside 0..{classes}")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("dimension mismatch: expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid column mapping: {0}")]
    InvalidMapping(String),
    #[error("test fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("scaler fitted on an empty row set")]
    EmptyFitSet,
}

/// Names of the CSV columns the pipeline reads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    pub exercise_col: String,
    pub participant_col: String,
    pub pattern_col: String,
    pub label_col: String,
    /// Impedance channels, in sequence order.
    pub feature_cols: Vec<String>,
    /// Leaks subject identity into the features; kept on by default to match the reference pipeline.
    pub include_participant_as_feature: bool,
}

impl ColumnMapping {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.feature_cols.is_empty() {
            return Err(DataError::InvalidMapping("feature_cols is empty".into()));
        }
        let mut all: Vec<&str> = vec![
            &self.exercise_col,
            &self.participant_col,
            &self.pattern_col,
            &self.label_col,
        ];
        all.extend(self.feature_cols.iter().map(String::as_str));
        let mut sorted = all.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(DataError::InvalidMapping(format!(
                "column `{}` is mapped twice",
                w[0]
            )));
        }
        Ok(())
    }

    /// Categorical columns that become features, in layout order.
    pub fn categorical_feature_cols(&self) -> Vec<&str> {
        let mut cols = vec![self.exercise_col.as_str()];
        if self.include_participant_as_feature {
            cols.push(self.participant_col.as_str());
        }
        cols.push(self.pattern_col.as_str());
        cols
    }

    /// Every column a feature row is built from.
    pub fn input_cols(&self) -> Vec<&str> {
        let mut cols = self.categorical_feature_cols();
        cols.extend(self.feature_cols.iter().map(String::as_str));
        cols
    }

    /// Every mapped column, label included.
    pub fn all_cols(&self) -> Vec<&str> {
        let mut cols = self.input_cols();
        cols.push(&self.label_col);
        cols
    }

    /// Length of an encoded feature row.
    pub fn sequence_len(&self) -> usize {
        self.categorical_feature_cols().len() + self.feature_cols.len()
    }
}

/// Dense row-major matrix of encoded features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(rows * cols, data.len(), "feature buffer size");
        Self { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self::new(idx.len(), self.cols, data)
    }
}

/// Model-ready dataset: scaled features, class codes and their one-hot rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset<T> {
    pub features: FeatureMatrix<T>,
    pub labels: Vec<usize>,
    pub one_hot: FeatureMatrix<T>,
}

impl<T: Scalar> EncodedDataset<T> {
    pub fn new(
        features: FeatureMatrix<T>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self, DataError> {
        if features.rows != labels.len() {
            return Err(DataError::DimensionMismatch {
                expected: features.rows,
                found: labels.len(),
            });
        }
        let one_hot = one_hot(&labels, num_classes)?;
        Ok(Self {
            features,
            labels,
            one_hot,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.one_hot.cols
    }

    /// Sequence length L.
    pub fn seq_len(&self) -> usize {
        self.features.cols
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            one_hot: self.one_hot.select_rows(idx),
        }
    }
}
