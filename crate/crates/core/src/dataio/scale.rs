use serde::{Deserialize, Serialize};

use super::{DataError, FeatureMatrix};
use crate::scalar::Scalar;

/// Per-column standardisation parameters. Zero deviations are stored as 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

/// Column means and population standard deviations over `fit_rows` only.
pub fn fit_scaler<T: Scalar>(
    features: &FeatureMatrix<T>,
    fit_rows: &[usize],
) -> Result<ScalerParams<T>, DataError> {
    if fit_rows.is_empty() {
        return Err(DataError::EmptyFitSet);
    }
    let n = T::from_usize_lossy(fit_rows.len());
    let mut mean = vec![T::zero(); features.cols];
    for &r in fit_rows {
        for (m, &x) in mean.iter_mut().zip(features.row(r)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![T::zero(); features.cols];
    for &r in fit_rows {
        for ((v, &x), &m) in var.iter_mut().zip(features.row(r)).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let std = var
        .into_iter()
        .map(|v| {
            let s = (v / n).sqrt();
            if s > T::zero() {
                s
            } else {
                T::one()
            }
        })
        .collect();
    Ok(ScalerParams { mean, std })
}

pub fn apply_scaler<T: Scalar>(
    features: &FeatureMatrix<T>,
    p: &ScalerParams<T>,
) -> Result<FeatureMatrix<T>, DataError> {
    if features.cols != p.mean.len() || p.mean.len() != p.std.len() {
        return Err(DataError::DimensionMismatch {
            expected: p.mean.len(),
            found: features.cols,
        });
    }
    let data = features
        .data
        .chunks(features.cols.max(1))
        .flat_map(|row| {
            row.iter()
                .zip(p.mean.iter().zip(&p.std))
                .map(|(&x, (&m, &s))| (x - m) / s)
        })
        .collect();
    Ok(FeatureMatrix::new(features.rows, features.cols, data))
}
