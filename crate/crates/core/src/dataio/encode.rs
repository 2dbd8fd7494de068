use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ColumnMapping, DataError, FeatureMatrix, RawTable};
use crate::scalar::Scalar;

/// Bijection between category strings and consecutive codes, assigned in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMap {
    values: Vec<String>,
}

impl CategoryMap {
    pub fn fit<'a>(values: impl IntoIterator<Item = &'a str>) -> Self {
        let mut values: Vec<String> = values.into_iter().map(str::to_string).collect();
        values.sort_unstable();
        values.dedup();
        Self { values }
    }

    /// Rebuilds a map from an already-sorted vocabulary (checkpoint loading).
    pub fn from_sorted(values: Vec<String>) -> Option<Self> {
        values
            .windows(2)
            .all(|w| w[0] < w[1])
            .then_some(Self { values })
    }

    pub fn code(&self, value: &str) -> Option<usize> {
        self.values.binary_search_by(|v| v.as_str().cmp(value)).ok()
    }

    pub fn value(&self, code: usize) -> Option<&str> {
        self.values.get(code).map(String::as_str)
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Fitted encoders for every categorical feature column plus the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMaps {
    pub columns: BTreeMap<String, CategoryMap>,
    pub class_map: CategoryMap,
}

impl LabelMaps {
    fn lookup(&self, column: &str, value: &str) -> Result<usize, DataError> {
        let map = self
            .columns
            .get(column)
            .ok_or_else(|| DataError::MissingColumn(column.to_string()))?;
        map.code(value).ok_or_else(|| DataError::UnseenValue {
            column: column.to_string(),
            value: value.to_string(),
        })
    }

    pub fn class_code(&self, label_col: &str, value: &str) -> Result<usize, DataError> {
        self.class_map
            .code(value)
            .ok_or_else(|| DataError::UnseenValue {
                column: label_col.to_string(),
                value: value.to_string(),
            })
    }

    pub fn class_name(&self, code: usize) -> Option<&str> {
        self.class_map.value(code)
    }

    pub fn num_classes(&self) -> usize {
        self.class_map.len()
    }
}

fn fit_column(t: &RawTable, col: &str) -> Result<CategoryMap, DataError> {
    let idx = t.column_index(col)?;
    let map = CategoryMap::fit(t.rows.iter().map(|r| r[idx].as_str()));
    if map.is_empty() {
        return Err(DataError::EmptyColumn(col.to_string()));
    }
    Ok(map)
}

/// Fits encoders for the categorical feature columns and the label column.
///
/// The participant column is only fitted when it is used as a feature.
pub fn fit_label_maps(t: &RawTable, mapping: &ColumnMapping) -> Result<LabelMaps, DataError> {
    let mut columns = BTreeMap::new();
    for col in mapping.categorical_feature_cols() {
        columns.insert(col.to_string(), fit_column(t, col)?);
    }
    let class_map = fit_column(t, &mapping.label_col)?;
    Ok(LabelMaps { columns, class_map })
}

/// Encodes feature rows only; the label column need not be present.
pub fn encode_features<T: Scalar>(
    t: &RawTable,
    maps: &LabelMaps,
    mapping: &ColumnMapping,
) -> Result<FeatureMatrix<T>, DataError> {
    let cat: Vec<(&str, usize)> = mapping
        .categorical_feature_cols()
        .into_iter()
        .map(|c| Ok((c, t.column_index(c)?)))
        .collect::<Result<_, DataError>>()?;
    let num: Vec<(&str, usize)> = mapping
        .feature_cols
        .iter()
        .map(|c| Ok((c.as_str(), t.column_index(c)?)))
        .collect::<Result<_, DataError>>()?;
    let cols = cat.len() + num.len();
    let mut data = Vec::with_capacity(t.len() * cols);
    for (r, row) in t.rows.iter().enumerate() {
        for &(name, idx) in &cat {
            data.push(T::from_usize_lossy(maps.lookup(name, &row[idx])?));
        }
        for &(name, idx) in &num {
            let cell = &row[idx];
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| DataError::NotNumeric {
                    row: r + 1,
                    column: name.to_string(),
                    value: cell.clone(),
                })?;
            data.push(T::lit(v));
        }
    }
    Ok(FeatureMatrix::new(t.len(), cols, data))
}

/// Encodes features and class labels.
pub fn encode<T: Scalar>(
    t: &RawTable,
    maps: &LabelMaps,
    mapping: &ColumnMapping,
) -> Result<(FeatureMatrix<T>, Vec<usize>), DataError> {
    let features = encode_features(t, maps, mapping)?;
    let li = t.column_index(&mapping.label_col)?;
    let labels = t
        .rows
        .iter()
        .map(|r| maps.class_code(&mapping.label_col, &r[li]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((features, labels))
}

pub fn one_hot<T: Scalar>(
    labels: &[usize],
    num_classes: usize,
) -> Result<FeatureMatrix<T>, DataError> {
    let mut data = vec![T::zero(); labels.len() * num_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_classes {
            return Err(DataError::LabelOutOfRange {
                label: l,
                classes: num_classes,
            });
        }
        data[i * num_classes + l] = T::one();
    }
    Ok(FeatureMatrix::new(labels.len(), num_classes, data))
}
