use super::MetricsError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive; the origin uses `+inf`.
    pub threshold: f64,
}

/// One-vs-rest ROC curve for a single class.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub class: usize,
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Sweeps the distinct scores in descending order, one point per distinct
/// score, and integrates with the trapezoidal rule.
pub fn roc_curve<T: Scalar>(
    scores: &[T],
    y_true: &[usize],
    class: usize,
) -> Result<RocCurve, MetricsError> {
    if scores.len() != y_true.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            pred: scores.len(),
        });
    }
    let mut pairs: Vec<(f64, bool)> = scores
        .iter()
        .zip(y_true)
        .map(|(&s, &y)| (s.as_f64(), y == class))
        .collect();
    if pairs.iter().any(|(s, _)| s.is_nan()) {
        return Err(MetricsError::Malformed("NaN score".into()));
    }
    let positives = pairs.iter().filter(|p| p.1).count();
    let negatives = pairs.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricsError::DegenerateClass {
            class,
            positives,
            negatives,
        });
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (p, n) = (positives as f64, negatives as f64);
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    // Trapezoids on integer counts keep the area exact until the final division.
    let mut twice_area = 0u128;
    let (mut tp, mut fp) = (0u128, 0u128);
    for group in pairs.chunk_by(|a, b| a.0 == b.0) {
        let (prev_tp, prev_fp) = (tp, fp);
        for &(_, positive) in group {
            if positive {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        twice_area += (fp - prev_fp) * (tp + prev_tp);
        points.push(RocPoint {
            fpr: fp as f64 / n,
            tpr: tp as f64 / p,
            threshold: group[0].0,
        });
    }
    let auc = twice_area as f64 / (2.0 * p * n);
    Ok(RocCurve { class, points, auc })
}
