//! End-to-end runs: preprocess, train, evaluate, predict and report artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::acqsim::AcqError;
use crate::config::{ConfigError, RunConfig};
use crate::dataio::{
    apply_scaler, drop_missing, encode, encode_features, fit_label_maps, fit_scaler,
    stratified_split, ColumnMapping, DataError, DatasetManifest, EncodedDataset, FeatureMatrix,
    LabelMaps, RawTable, ScalerParams, SplitIndices,
};
use crate::metrics::{
    class_report, confusion_matrix, render_report, roc_curve, ClassReport, ConfusionMatrix,
    MetricsError, RenderedReport, RocCurve,
};
use crate::nncore::{Model, NnError};
use crate::scalar::Scalar;
use crate::trainer::{fit, Checkpoint, CheckpointError, FitOutcome, TrainError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Acq(#[from] AcqError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Process exit status: 1 for runtime failures, 2 for configuration and
    /// input validation errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Data(DataError::EmptyDataset) => 1,
            PipelineError::Config(_)
            | PipelineError::Data(_)
            | PipelineError::Checkpoint(_)
            | PipelineError::Acq(_)
            | PipelineError::Usage(_) => 2,
            PipelineError::Train(TrainError::InvalidConfig(_) | TrainError::Data(_)) => 2,
            PipelineError::Nn(NnError::InvalidConfig(_)) => 2,
            PipelineError::Train(TrainError::Nn(NnError::InvalidConfig(_))) => 2,
            _ => 1,
        }
    }
}

/// Encoded, scaled and split dataset plus the fitted preprocessing.
#[derive(Debug, Clone)]
pub struct Prepared<T> {
    pub mapping: ColumnMapping,
    pub label_maps: LabelMaps,
    pub scaler: ScalerParams<T>,
    pub split: SplitIndices,
    pub train: EncodedDataset<T>,
    pub test: EncodedDataset<T>,
    /// Rows left after dropping missing values, in file order.
    pub table: RawTable,
    pub dropped_rows: usize,
    pub paper_faithful: bool,
}

impl<T: Scalar> Prepared<T> {
    pub fn manifest(&self, source: &str, seed: u64) -> DatasetManifest<T> {
        DatasetManifest {
            source: source.to_string(),
            mapping: self.mapping.clone(),
            label_maps: self.label_maps.clone(),
            scaler: self.scaler.clone(),
            paper_faithful: self.paper_faithful,
            dropped_rows: self.dropped_rows,
            seed,
            split: self.split.clone(),
        }
    }
}

/// Drops incomplete rows, encodes, splits and standardises.
///
/// The scaler is fitted on the training rows, or on every row when
/// `paper_faithful` is set.
pub fn prepare<T: Scalar>(
    table: RawTable,
    mapping: &ColumnMapping,
    paper_faithful: bool,
    test_frac: f64,
    seed: u64,
) -> Result<Prepared<T>, PipelineError> {
    mapping.validate()?;
    let (table, dropped_rows) = drop_missing(table)?;
    if table.is_empty() {
        return Err(DataError::EmptyDataset.into());
    }
    let label_maps = fit_label_maps(&table, mapping)?;
    let (features, labels) = encode::<T>(&table, &label_maps, mapping)?;
    let k = label_maps.num_classes();
    let split = stratified_split(&labels, k, test_frac, seed)?;
    let fit_rows: Vec<usize> = if paper_faithful {
        (0..table.len()).collect()
    } else {
        split.train_idx.clone()
    };
    let scaler = fit_scaler(&features, &fit_rows)?;
    let scaled = apply_scaler(&features, &scaler)?;
    let all = EncodedDataset::new(scaled, labels, k)?;
    Ok(Prepared {
        mapping: mapping.clone(),
        label_maps,
        scaler,
        train: all.subset(&split.train_idx),
        test: all.subset(&split.test_idx),
        split,
        table,
        dropped_rows,
        paper_faithful,
    })
}

/// Predictions and every report artifact for one labelled dataset.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub y_true: Vec<usize>,
    pub y_pred: Vec<usize>,
    /// Row-major class probabilities.
    pub probs: Vec<Vec<f64>>,
    pub class_names: Vec<String>,
    pub confusion: ConfusionMatrix,
    pub report: ClassReport,
    /// Classes with both positives and negatives present.
    pub rocs: Vec<RocCurve>,
    pub rendered: RenderedReport,
}

impl Evaluation {
    pub fn accuracy(&self) -> f64 {
        self.report.accuracy
    }

    /// `label,p_<class>...` per row with round-trip float formatting.
    pub fn scores_csv(&self) -> String {
        let mut s = String::from("label");
        for n in &self.class_names {
            write!(s, ",p_{n}").unwrap();
        }
        s.push('\n');
        for (y, p) in self.y_true.iter().zip(&self.probs) {
            s.push_str(&self.class_names[*y]);
            for v in p {
                write!(s, ",{v:?}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

fn argmax(p: &[f64]) -> usize {
    // first index wins ties
    p.iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > p[best] { i } else { best })
}

/// Builds every report artifact from true labels and class probabilities.
pub fn report_from_scores(
    y_true: Vec<usize>,
    probs: Vec<Vec<f64>>,
    class_names: Vec<String>,
) -> Result<Evaluation, PipelineError> {
    let k = class_names.len();
    if probs.iter().any(|p| p.len() != k) {
        return Err(MetricsError::Malformed(
            "probability rows must have one entry per class".into(),
        )
        .into());
    }
    let y_pred: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();
    let confusion = confusion_matrix(&y_true, &y_pred, k)?.with_names(class_names.clone());
    let report = class_report(&confusion)?;
    let mut rocs = Vec::new();
    for c in 0..k {
        let scores: Vec<f64> = probs.iter().map(|p| p[c]).collect();
        match roc_curve(&scores, &y_true, c) {
            Ok(r) => rocs.push(r),
            Err(MetricsError::DegenerateClass { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let rendered = render_report(&report, &confusion, &rocs);
    Ok(Evaluation {
        y_true,
        y_pred,
        probs,
        class_names,
        confusion,
        report,
        rocs,
        rendered,
    })
}

/// Parses the output of [`Evaluation::scores_csv`].
pub fn parse_scores_csv(
    text: &str,
) -> Result<(Vec<usize>, Vec<Vec<f64>>, Vec<String>), PipelineError> {
    let malformed = |m: String| PipelineError::Data(DataError::Csv(m));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| malformed(e.to_string()))?.clone();
    if header.get(0) != Some("label") || header.len() < 2 {
        return Err(malformed(
            "scores header must be `label,p_<class>...`".into(),
        ));
    }
    let names: Vec<String> = header
        .iter()
        .skip(1)
        .map(|h| h.strip_prefix("p_").unwrap_or(h).to_string())
        .collect();
    let (mut y, mut probs) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| malformed(e.to_string()))?;
        let label = &rec[0];
        let code = names.iter().position(|n| n == label).ok_or_else(|| {
            PipelineError::Data(DataError::UnseenValue {
                column: "label".into(),
                value: label.to_string(),
            })
        })?;
        let p = rec
            .iter()
            .skip(1)
            .map(|c| {
                c.parse::<f64>().map_err(|_| {
                    PipelineError::Data(DataError::NotNumeric {
                        row: i + 1,
                        column: "score".into(),
                        value: c.to_string(),
                    })
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        y.push(code);
        probs.push(p);
    }
    Ok((y, probs, names))
}

/// Class probabilities for every row, computed in fixed-size batches.
pub fn predict_proba<T: Scalar>(
    model: &Model<T>,
    features: &FeatureMatrix<T>,
) -> Result<Vec<Vec<f64>>, PipelineError> {
    const BATCH: usize = 256;
    let mut out = Vec::with_capacity(features.rows);
    let cols = features.cols;
    for start in (0..features.rows).step_by(BATCH) {
        let end = (start + BATCH).min(features.rows);
        let x = model.input_tensor(
            end - start,
            features.data[start * cols..end * cols].to_vec(),
        )?;
        let p = model.predict(&x)?;
        out.extend(
            p.data()
                .chunks(model.cfg.num_classes)
                .map(|r| r.iter().map(|v| v.as_f64()).collect()),
        );
    }
    Ok(out)
}

pub fn class_names(maps: &LabelMaps) -> Vec<String> {
    maps.class_map.values().to_vec()
}

pub fn evaluate_dataset<T: Scalar>(
    model: &Model<T>,
    data: &EncodedDataset<T>,
    class_names: Vec<String>,
) -> Result<Evaluation, PipelineError> {
    if data.is_empty() {
        return Err(DataError::EmptyDataset.into());
    }
    let probs = predict_proba(model, &data.features)?;
    report_from_scores(data.labels.clone(), probs, class_names)
}

/// Encodes labelled rows with a checkpoint's stored preprocessing (never refits).
pub fn encode_with_checkpoint<T: Scalar>(
    ck: &Checkpoint<T>,
    table: &RawTable,
) -> Result<EncodedDataset<T>, PipelineError> {
    let (table, _) = drop_missing(table.clone())?;
    if table.is_empty() {
        return Err(DataError::EmptyDataset.into());
    }
    let (features, labels) = encode::<T>(&table, &ck.label_maps, &ck.mapping)?;
    let scaled = apply_scaler(&features, &ck.scaler)?;
    Ok(EncodedDataset::new(
        scaled,
        labels,
        ck.label_maps.num_classes(),
    )?)
}

pub fn evaluate_checkpoint<T: Scalar>(
    ck: &Checkpoint<T>,
    table: &RawTable,
) -> Result<Evaluation, PipelineError> {
    let data = encode_with_checkpoint(ck, table)?;
    evaluate_dataset(&ck.model(), &data, class_names(&ck.label_maps))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub label: String,
    pub probabilities: Vec<f64>,
}

/// Predicts unlabelled rows; the label column is ignored if present.
pub fn predict_rows<T: Scalar>(
    ck: &Checkpoint<T>,
    table: &RawTable,
) -> Result<Vec<Prediction>, PipelineError> {
    if table.is_empty() {
        return Err(DataError::EmptyDataset.into());
    }
    let features = encode_features::<T>(table, &ck.label_maps, &ck.mapping)?;
    let scaled = apply_scaler(&features, &ck.scaler)?;
    let names = class_names(&ck.label_maps);
    Ok(predict_proba(&ck.model(), &scaled)?
        .into_iter()
        .map(|p| Prediction {
            label: names[argmax(&p)].clone(),
            probabilities: p,
        })
        .collect())
}

/// Everything produced by a training run.
#[derive(Debug, Clone)]
pub struct TrainRun<T> {
    pub prepared: Prepared<T>,
    pub outcome: FitOutcome<T>,
    pub checkpoint: Checkpoint<T>,
    pub evaluation: Evaluation,
}

/// Preprocess → fit → evaluate on the held-out split.
pub fn train_run<T: Scalar>(
    cfg: &RunConfig,
    table: RawTable,
) -> Result<TrainRun<T>, PipelineError> {
    cfg.validate()?;
    let mapping = cfg.column_mapping();
    let prepared = prepare::<T>(table, &mapping, cfg.paper_faithful, cfg.test_frac, cfg.seed)?;
    let model_cfg = cfg.model_config(prepared.train.seq_len(), prepared.label_maps.num_classes());
    model_cfg.validate()?;
    let train_cfg = cfg.train_config();
    let outcome = fit(&model_cfg, &train_cfg, &prepared.train)?;
    let checkpoint = Checkpoint {
        model_cfg,
        params: outcome.params.clone(),
        label_maps: prepared.label_maps.clone(),
        scaler: prepared.scaler.clone(),
        train_cfg,
        mapping,
    };
    let evaluation = evaluate_dataset(
        &checkpoint.model(),
        &prepared.test,
        class_names(&prepared.label_maps),
    )?;
    Ok(TrainRun {
        prepared,
        outcome,
        checkpoint,
        evaluation,
    })
}

/// Sidecar written next to every set of artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub dataset: Option<String>,
    pub paper_faithful: bool,
    /// Extra facts about the run (split sizes, best epoch, accuracy, ...).
    pub summary: BTreeMap<String, serde_json::Value>,
    /// SHA-256 of each artifact, by file name.
    pub artifacts: BTreeMap<String, String>,
}

/// Collects named artifacts and writes them with a manifest.
#[derive(Debug, Default)]
pub struct ArtifactSet {
    files: BTreeMap<String, Vec<u8>>,
}

impl ArtifactSet {
    pub fn add(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.to_string(), bytes.into());
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    pub fn add_report(&mut self, ev: &Evaluation) {
        self.add("report.txt", ev.rendered.text.clone());
        self.add("report.csv", ev.rendered.report_csv.clone());
        self.add("confusion.csv", ev.rendered.confusion_csv.clone());
        self.add("roc.csv", ev.rendered.roc_csv.clone());
        self.add("scores.csv", ev.scores_csv());
    }

    /// Writes every artifact plus `manifest.json` into `dir` and returns the manifest.
    pub fn write(
        &self,
        dir: &Path,
        command: &str,
        cfg: &RunConfig,
        summary: BTreeMap<String, serde_json::Value>,
    ) -> Result<RunManifest, PipelineError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| PipelineError::Write { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut artifacts = BTreeMap::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(io(&path))?;
            artifacts.insert(name.clone(), format!("{:x}", Sha256::digest(bytes)));
        }
        let manifest = RunManifest {
            command: command.to_string(),
            seed: cfg.seed,
            config_hash: cfg.hash(),
            dataset: cfg.dataset.as_ref().map(|p| p.display().to_string()),
            paper_faithful: cfg.paper_faithful,
            summary,
            artifacts,
        };
        let path = dir.join("manifest.json");
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        json.push('\n');
        std::fs::write(&path, json).map_err(io(&path))?;
        Ok(manifest)
    }
}
