use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{ColumnMapping, EncodedDataset, LabelMaps, ScalerParams, SplitIndices};
use crate::scalar::Scalar;

/// Sidecar describing how an encoded dataset was produced; enough to rebuild it from the raw CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DatasetManifest<T> {
    pub source: String,
    pub mapping: ColumnMapping,
    pub label_maps: LabelMaps,
    pub scaler: ScalerParams<T>,
    /// Scaler fitted on every row instead of the training split.
    pub paper_faithful: bool,
    pub dropped_rows: usize,
    pub seed: u64,
    pub split: SplitIndices,
}

/// Encoded features and label codes as CSV (`f0..f{L-1},label`), using shortest round-trip formatting.
pub fn write_encoded_csv<T: Scalar>(ds: &EncodedDataset<T>) -> String {
    let mut out = String::new();
    let cols: Vec<String> = (0..ds.seq_len()).map(|i| format!("f{i}")).collect();
    out.push_str(&cols.join(","));
    out.push_str(",label\n");
    for (i, &label) in ds.labels.iter().enumerate() {
        for v in ds.features.row(i) {
            write!(out, "{v:?},").unwrap();
        }
        writeln!(out, "{label}").unwrap();
    }
    out
}
