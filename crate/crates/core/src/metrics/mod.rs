//! Evaluation artifacts: confusion matrix, per-class precision/recall/F1 with
//! macro and weighted averages, and one-vs-rest ROC curves with AUC.

mod confusion;
mod render;
mod report;
mod roc;

pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use render::{confusion_csv, render_report, report_csv, roc_csv, RenderedReport};
pub use report::{class_report, Averages, ClassMetrics, ClassReport};
pub use roc::{roc_curve, RocCurve, RocPoint};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("y_true has {truth} entries but y_pred has {pred}")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("label {label} outside 0..{classes}")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("confusion matrix holds no samples")]
    Empty,
    #[error("class {class} is degenerate for ROC: {positives} positives, {negatives} negatives")]
    DegenerateClass {
        class: usize,
        positives: usize,
        negatives: usize,
    },
    #[error("malformed input: {0}")]
    Malformed(String),
}
