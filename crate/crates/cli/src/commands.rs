use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use koa_core::acqsim::generate_dataset;
use koa_core::config::{Precision, RunConfig};
use koa_core::dataio::{load_csv, load_csv_columns, write_encoded_csv, DataError, RawTable};
use koa_core::pipeline::{
    evaluate_checkpoint, parse_scores_csv, predict_rows, prepare, report_from_scores, train_run,
    ArtifactSet, PipelineError,
};
use koa_core::trainer::{checkpoint_from_bytes, checkpoint_to_bytes, Checkpoint, CheckpointError};
use koa_core::Scalar;
use serde_json::{json, Value};

use crate::{Cli, Command, DataArgs};

const OUTPUT_ENV: &str = "KOA_OUTPUT_DIR";

type Result<T> = std::result::Result<T, PipelineError>;

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.global.seed {
        cfg.seed = s;
    }
    if let Some(dir) = std::env::var_os(OUTPUT_ENV) {
        cfg.output_dir = PathBuf::from(dir);
    }
    if let Some(dir) = &cli.global.out {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn apply_data_args(cfg: &mut RunConfig, a: &DataArgs) -> Result<()> {
    if let Some(d) = &a.dataset {
        cfg.dataset = Some(d.clone());
    }
    cfg.paper_faithful |= a.paper_faithful;
    cfg.validate()?;
    Ok(())
}

fn dataset_path(cfg: &RunConfig) -> Result<&Path> {
    cfg.dataset.as_deref().ok_or_else(|| {
        PipelineError::Usage("no dataset given (use --dataset or `dataset` in the config)".into())
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = resolve_config(&cli)?;
    match &cli.command {
        Command::Simulate {
            grades,
            severity_scale,
        } => {
            if let Some(g) = grades {
                cfg.simulate.grades = *g;
            }
            if let Some(s) = severity_scale {
                cfg.simulate.severity_scale = *s;
            }
            cfg.validate()?;
            simulate(&cfg)
        }
        Command::Preprocess(a) => {
            apply_data_args(&mut cfg, a)?;
            with_precision(&cfg, preprocess::<f64>, preprocess::<f32>)
        }
        Command::Train(a) => {
            apply_data_args(&mut cfg, a)?;
            with_precision(&cfg, train::<f64>, train::<f32>)
        }
        Command::Evaluate {
            checkpoint,
            dataset,
        } => {
            cfg.dataset = Some(dataset.clone());
            let bytes = read(checkpoint)?;
            match checkpoint_from_bytes::<f64>(&bytes) {
                Err(CheckpointError::ScalarWidth { .. }) => {
                    evaluate(&cfg, checkpoint_from_bytes::<f32>(&bytes)?, dataset)
                }
                ck => evaluate(&cfg, ck?, dataset),
            }
        }
        Command::Predict { checkpoint, input } => {
            let bytes = read(checkpoint)?;
            match checkpoint_from_bytes::<f64>(&bytes) {
                Err(CheckpointError::ScalarWidth { .. }) => {
                    predict(checkpoint_from_bytes::<f32>(&bytes)?, input)
                }
                ck => predict(ck?, input),
            }
        }
        Command::Report { scores } => report(&cfg, scores),
    }
}

fn with_precision(
    cfg: &RunConfig,
    f64_run: impl FnOnce(&RunConfig) -> Result<()>,
    f32_run: impl FnOnce(&RunConfig) -> Result<()>,
) -> Result<()> {
    match cfg.precision {
        Precision::F64 => f64_run(cfg),
        Precision::F32 => f32_run(cfg),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| {
        CheckpointError::Io {
            path: path.display().to_string(),
            source,
        }
        .into()
    })
}

fn csv(t: &RawTable) -> Result<String> {
    Ok(t.to_csv()?)
}

fn simulate(cfg: &RunConfig) -> Result<()> {
    let d = generate_dataset(&cfg.simulate, cfg.seed)?;
    let mut set = ArtifactSet::default();
    set.add("dataset.csv", csv(&d.table)?);
    set.add("instrument.log", d.log);
    set.add("config.toml", cfg.to_toml());
    let summary = BTreeMap::from([("rows".to_string(), json!(d.table.len()))]);
    set.write(&cfg.output_dir, "simulate", cfg, summary)?;
    println!(
        "wrote {} rows to {}",
        d.table.len(),
        cfg.output_dir.join("dataset.csv").display()
    );
    Ok(())
}

fn load_dataset(cfg: &RunConfig) -> Result<RawTable> {
    Ok(load_csv(dataset_path(cfg)?, &cfg.column_mapping())?)
}

fn preprocess<T: Scalar>(cfg: &RunConfig) -> Result<()> {
    let table = load_dataset(cfg)?;
    let p = prepare::<T>(
        table,
        &cfg.column_mapping(),
        cfg.paper_faithful,
        cfg.test_frac,
        cfg.seed,
    )?;
    let source = dataset_path(cfg)?.display().to_string();
    let mut set = ArtifactSet::default();
    set.add("train_encoded.csv", write_encoded_csv(&p.train));
    set.add("test_encoded.csv", write_encoded_csv(&p.test));
    let mut m =
        serde_json::to_string_pretty(&p.manifest(&source, cfg.seed)).expect("manifest serialises");
    m.push('\n');
    set.add("dataset_manifest.json", m);
    set.add("config.toml", cfg.to_toml());
    let summary = BTreeMap::from([
        ("train_rows".to_string(), json!(p.train.len())),
        ("test_rows".to_string(), json!(p.test.len())),
        ("dropped_rows".to_string(), json!(p.dropped_rows)),
    ]);
    set.write(&cfg.output_dir, "preprocess", cfg, summary)?;
    println!(
        "encoded {} train and {} test rows (sequence length {})",
        p.train.len(),
        p.test.len(),
        p.train.seq_len()
    );
    Ok(())
}

fn train<T: Scalar>(cfg: &RunConfig) -> Result<()> {
    let table = load_dataset(cfg)?;
    let run = train_run::<T>(cfg, table)?;
    let p = &run.prepared;
    let mut set = ArtifactSet::default();
    set.add("checkpoint.bin", checkpoint_to_bytes(&run.checkpoint));
    set.add("history.csv", run.outcome.history.to_csv());
    set.add(
        "test_rows.csv",
        csv(&p.table.select_rows(&p.split.test_idx))?,
    );
    set.add("config.toml", cfg.to_toml());
    set.add_report(&run.evaluation);
    let o = &run.outcome;
    let summary = BTreeMap::from([
        ("train_rows".to_string(), json!(p.train.len())),
        ("test_rows".to_string(), json!(p.test.len())),
        ("dropped_rows".to_string(), json!(p.dropped_rows)),
        ("best_epoch".to_string(), json!(o.best_epoch)),
        ("best_loss".to_string(), json!(o.best_loss)),
        ("stopped_epoch".to_string(), json!(o.stopped_epoch)),
        ("early_stopped".to_string(), json!(o.early_stopped)),
        (
            "test_accuracy".to_string(),
            json!(run.evaluation.accuracy()),
        ),
        ("scalar_bytes".to_string(), json!(T::BYTES)),
    ]);
    set.write(&cfg.output_dir, "train", cfg, summary)?;
    print!("{}", run.evaluation.rendered.text);
    println!(
        "best epoch {} of {}; test accuracy {:.4}",
        o.best_epoch,
        o.stopped_epoch,
        run.evaluation.accuracy()
    );
    Ok(())
}

fn evaluate<T: Scalar>(cfg: &RunConfig, ck: Checkpoint<T>, dataset: &Path) -> Result<()> {
    let table = load_csv(dataset, &ck.mapping)?;
    let ev = evaluate_checkpoint(&ck, &table)?;
    let mut set = ArtifactSet::default();
    set.add_report(&ev);
    let summary = BTreeMap::from([
        ("rows".to_string(), json!(ev.y_true.len())),
        ("accuracy".to_string(), json!(ev.accuracy())),
    ]);
    set.write(&cfg.output_dir, "evaluate", cfg, summary)?;
    print!("{}", ev.rendered.text);
    Ok(())
}

fn predict<T: Scalar>(ck: Checkpoint<T>, input: &Path) -> Result<()> {
    let table = load_csv_columns(input, &ck.mapping.input_cols())?;
    let preds = predict_rows(&ck, &table)?;
    let names = ck.label_maps.class_map.values();
    let header: Vec<String> = names.iter().map(|n| format!("p_{n}")).collect();
    println!("prediction,{}", header.join(","));
    for p in preds {
        let probs: Vec<String> = p.probabilities.iter().map(|v| format!("{v:?}")).collect();
        println!("{},{}", p.label, probs.join(","));
    }
    Ok(())
}

fn report(cfg: &RunConfig, scores: &Path) -> Result<()> {
    let text = std::fs::read_to_string(scores).map_err(|source| {
        PipelineError::Data(DataError::Io {
            path: scores.display().to_string(),
            source,
        })
    })?;
    let (y, probs, names) = parse_scores_csv(&text)?;
    let ev = report_from_scores(y, probs, names)?;
    let mut set = ArtifactSet::default();
    set.add_report(&ev);
    let summary: BTreeMap<String, Value> =
        BTreeMap::from([("accuracy".to_string(), json!(ev.accuracy()))]);
    set.write(&cfg.output_dir, "report", cfg, summary)?;
    print!("{}", ev.rendered.text);
    Ok(())
}
