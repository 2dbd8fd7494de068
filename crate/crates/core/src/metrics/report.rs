use super::{ConfusionMatrix, MetricsError};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// No sample was predicted as this class; precision reported as 0.
    pub precision_undefined: bool,
    /// No sample of this class was present; recall reported as 0.
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub classes: Vec<ClassMetrics>,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub accuracy: f64,
    pub total: u64,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn class_report(cm: &ConfusionMatrix) -> Result<ClassReport, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let classes: Vec<ClassMetrics> = (0..cm.num_classes())
        .map(|k| {
            let tp = cm.counts[k][k];
            let (precision, precision_undefined) = ratio(tp, cm.col_sum(k));
            let (recall, recall_undefined) = ratio(tp, cm.row_sum(k));
            ClassMetrics {
                name: cm.class_names[k].clone(),
                precision,
                recall,
                f1: harmonic(precision, recall),
                support: cm.row_sum(k),
                precision_undefined,
                recall_undefined,
            }
        })
        .collect();
    let k = classes.len() as f64;
    let macro_avg = Averages {
        precision: classes.iter().map(|c| c.precision).sum::<f64>() / k,
        recall: classes.iter().map(|c| c.recall).sum::<f64>() / k,
        f1: classes.iter().map(|c| c.f1).sum::<f64>() / k,
    };
    let n = total as f64;
    let w = |f: fn(&ClassMetrics) -> f64| {
        classes.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / n
    };
    let weighted_avg = Averages {
        precision: w(|c| c.precision),
        recall: w(|c| c.recall),
        f1: w(|c| c.f1),
    };
    Ok(ClassReport {
        accuracy: cm.trace() as f64 / n,
        classes,
        macro_avg,
        weighted_avg,
        total,
    })
}
