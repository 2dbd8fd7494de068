//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs as a plain binary (`harness = false`) so the summary is always shown.
//! Criterion 7 needs an external dataset: set `KOA_IEEE_DATASET` to its CSV
//! and optionally `KOA_IEEE_CONFIG` to a run config carrying the column
//! mapping. Without it the criterion defers to criterion 8.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use koa_core::acqsim::{
    calibrate, dft_measure, generate_dataset, impedance_from_reading, relay_scan, ScanPolicy,
    SimulationConfig, SweepConfig, TissueModel,
};
use koa_core::config::RunConfig;
use koa_core::dataio::{load_csv, RawTable};
use koa_core::metrics::{class_report, roc_curve, ConfusionMatrix};
use koa_core::nncore::{
    conv1d_backward, conv1d_forward, cross_entropy, dense_backward, dense_forward, dropout,
    init_params, maxpool1d_backward, maxpool1d_forward, model_backward, model_forward, relu,
    relu_backward, softmax, Mode, Model, ModelConfig, ParamStore, Tensor,
};
use koa_core::pipeline::train_run;
use koa_core::trainer::{
    adam_step, checkpoint_from_bytes, checkpoint_to_bytes, train_loop, AdamState, EpochRecord,
    TrainConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_tensor(r: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor<f64> {
    Tensor::from_fn(shape, |_| r.random_range(-1.0..1.0))
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale == 0.0 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

const H: f64 = 1e-6;

/// Central difference of `f` with respect to `t[i]`.
fn central(t: &Tensor<f64>, i: usize, f: &dyn Fn(&Tensor<f64>) -> f64) -> f64 {
    let mut plus = t.clone();
    plus.data_mut()[i] += H;
    let mut minus = t.clone();
    minus.data_mut()[i] -= H;
    (f(&plus) - f(&minus)) / (2.0 * H)
}

/// Largest relative error between `analytic` and finite differences of `f` over every entry of `t`.
fn max_rel(
    t: &Tensor<f64>,
    analytic: &Tensor<f64>,
    f: &dyn Fn(&Tensor<f64>) -> f64,
) -> (f64, usize) {
    let worst = (0..t.len())
        .map(|i| rel_err(analytic.data()[i], central(t, i, f)))
        .fold(0.0, f64::max);
    (worst, t.len())
}

/// `Σ r ⊙ y`: a random linear read-out so every output gets an O(1) gradient.
fn readout(y: &Tensor<f64>, r: &Tensor<f64>) -> f64 {
    y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

fn mini_config() -> ModelConfig {
    ModelConfig {
        input_len: 12,
        input_channels: 1,
        conv1_filters: 2,
        conv1_kernel: 3,
        conv2_filters: 3,
        conv2_kernel: 3,
        pool_size: 2,
        drop1: 0.5,
        drop2: 0.6,
        drop3: 0.6,
        dense_units: 5,
        num_classes: 4,
    }
}

fn criterion_1() -> Check {
    let mut r = rng(1);
    let mut lines = Vec::new();
    let mut checked = 0;

    // conv1d
    let x = random_tensor(&mut r, vec![2, 9, 3]);
    let w = random_tensor(&mut r, vec![4, 3, 3]);
    let b = random_tensor(&mut r, vec![4]);
    let ro = random_tensor(&mut r, vec![2, 7, 4]);
    let (gx, gw, gb) = conv1d_backward(&x, &w, &ro).unwrap();
    let (ex, nx) = max_rel(&x, &gx, &|t| {
        readout(&conv1d_forward(t, &w, &b).unwrap(), &ro)
    });
    let (ew, nw) = max_rel(&w, &gw, &|t| {
        readout(&conv1d_forward(&x, t, &b).unwrap(), &ro)
    });
    let (eb, nb) = max_rel(&b, &gb, &|t| {
        readout(&conv1d_forward(&x, &w, t).unwrap(), &ro)
    });
    lines.push(("conv1d", ex.max(ew).max(eb)));
    checked += nx + nw + nb;

    // dense
    let x = random_tensor(&mut r, vec![3, 7]);
    let w = random_tensor(&mut r, vec![5, 7]);
    let b = random_tensor(&mut r, vec![5]);
    let ro = random_tensor(&mut r, vec![3, 5]);
    let (gx, gw, gb) = dense_backward(&x, &w, &ro).unwrap();
    let (ex, nx) = max_rel(&x, &gx, &|t| {
        readout(&dense_forward(t, &w, &b).unwrap(), &ro)
    });
    let (ew, nw) = max_rel(&w, &gw, &|t| {
        readout(&dense_forward(&x, t, &b).unwrap(), &ro)
    });
    let (eb, nb) = max_rel(&b, &gb, &|t| {
        readout(&dense_forward(&x, &w, t).unwrap(), &ro)
    });
    lines.push(("dense", ex.max(ew).max(eb)));
    checked += nx + nw + nb;

    // relu, away from the kink
    let x = Tensor::from_fn(vec![4, 6], |_| {
        let v: f64 = r.random_range(0.01..1.0);
        if r.random_bool(0.5) {
            v
        } else {
            -v
        }
    });
    let ro = random_tensor(&mut r, vec![4, 6]);
    let g = relu_backward(&x, &ro).unwrap();
    let (e, n) = max_rel(&x, &g, &|t| readout(&relu(t), &ro));
    lines.push(("relu", e));
    checked += n;

    // max-pool, distinct values so the argmax is stable under perturbation
    let x = Tensor::from_fn(vec![2, 9, 3], |i| {
        (i as f64 * 0.7311).sin() * 2.0 + i as f64 * 1e-3
    });
    let ro = random_tensor(&mut r, vec![2, 4, 3]);
    let (_, argmax) = maxpool1d_forward(&x, 2).unwrap();
    let g = maxpool1d_backward(x.shape(), &argmax, &ro).unwrap();
    let (e, n) = max_rel(&x, &g, &|t| {
        readout(&maxpool1d_forward(t, 2).unwrap().0, &ro)
    });
    lines.push(("maxpool1d", e));
    checked += n;

    // dropout with a fixed mask
    let x = random_tensor(&mut r, vec![3, 8]);
    let ro = random_tensor(&mut r, vec![3, 8]);
    let (_, mask) = dropout(&x, 0.5, Mode::Train, &mut rng(9)).unwrap();
    let g = ro.mul(&mask).unwrap();
    let (e, n) = max_rel(&x, &g, &|t| {
        readout(&dropout(t, 0.5, Mode::Train, &mut rng(9)).unwrap().0, &ro)
    });
    lines.push(("dropout", e));
    checked += n;

    // softmax + cross-entropy on logits
    let z = random_tensor(&mut r, vec![3, 4]);
    let y = Tensor::from_fn(vec![3, 4], |i| if i % 4 == (i / 4) % 4 { 1.0 } else { 0.0 });
    let (_, g) = cross_entropy(&softmax(&z).unwrap(), &y).unwrap();
    let (e, n) = max_rel(&z, &g, &|t| {
        cross_entropy(&softmax(t).unwrap(), &y).unwrap().0
    });
    lines.push(("softmax+ce", e));
    checked += n;

    let worst_layer = lines.iter().map(|l| l.1).fold(0.0, f64::max);
    for (name, e) in &lines {
        ensure(*e < 1e-5, format!("{name}: relative error {e:.2e} >= 1e-5"))?;
    }

    // end to end on the miniature network, dropout active with a fixed mask
    let cfg = mini_config();
    cfg.validate().map_err(|e| e.to_string())?;
    let mut e2e_worst: f64 = 0.0;
    let mut e2e_checked = 0;
    for trial in 0..3u64 {
        let mut r = rng(100 + trial);
        let mut params: ParamStore<f64> = init_params(&cfg, trial).unwrap();
        for i in 0..params.num_params() {
            params.set_flat(i, r.random_range(-0.5..0.5));
        }
        let x = random_tensor(&mut r, vec![4, 12, 1]);
        let y = Tensor::from_fn(vec![4, 4], |i| if i % 4 == i / 4 { 1.0 } else { 0.0 });
        let loss = |p: &ParamStore<f64>| {
            let (probs, _) = model_forward(&cfg, p, &x, Mode::Train, &mut rng(7)).unwrap();
            cross_entropy(&probs, &y).unwrap().0
        };
        let (_, cache) = model_forward(&cfg, &params, &x, Mode::Train, &mut rng(7)).unwrap();
        let (_, grads) = model_backward(&params, &cache, &y).unwrap();
        for i in 0..params.num_params() {
            let mut plus = params.clone();
            plus.set_flat(i, params.get_flat(i) + H);
            let mut minus = params.clone();
            minus.set_flat(i, params.get_flat(i) - H);
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * H);
            e2e_worst = e2e_worst.max(rel_err(grads.get_flat(i), numeric));
            e2e_checked += 1;
        }
    }
    ensure(
        e2e_checked >= 100,
        format!("only {e2e_checked} parameters checked"),
    )?;
    ensure(
        e2e_worst < 1e-4,
        format!("end-to-end relative error {e2e_worst:.2e} >= 1e-4"),
    )?;
    Ok(format!(
        "per-layer max rel err {worst_layer:.1e} over {checked} entries; end-to-end {e2e_worst:.1e} over {e2e_checked} parameters"
    ))
}

fn naive_conv(x: &Tensor<f64>, w: &Tensor<f64>, b: &Tensor<f64>) -> Vec<f64> {
    let (n, len, cin) = (x.dim(0), x.dim(1), x.dim(2));
    let (f, k) = (w.dim(0), w.dim(2));
    let out_len = len - k + 1;
    let mut y = vec![0.0; n * out_len * f];
    for s in 0..n {
        for t in 0..out_len {
            for o in 0..f {
                let mut acc = b.data()[o];
                for c in 0..cin {
                    for j in 0..k {
                        acc +=
                            x.data()[(s * len + t + j) * cin + c] * w.data()[(o * cin + c) * k + j];
                    }
                }
                y[(s * out_len + t) * f + o] = acc;
            }
        }
    }
    y
}

fn criterion_2() -> Check {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = r.random_range(1..5);
        let k = r.random_range(1..6);
        let len = r.random_range(k..k + 20);
        let cin = r.random_range(1..5);
        let f = r.random_range(1..7);
        let x = random_tensor(&mut r, vec![n, len, cin]);
        let w = random_tensor(&mut r, vec![f, cin, k]);
        let b = random_tensor(&mut r, vec![f]);
        let y = conv1d_forward(&x, &w, &b).unwrap();
        ensure(
            y.shape() == [n, len - k + 1, f],
            format!("shape {:?}", y.shape()),
        )?;
        for (a, o) in y.data().iter().zip(naive_conv(&x, &w, &b)) {
            worst = worst.max((a - o).abs());
        }
    }
    ensure(worst < 1e-12, format!("max abs diff {worst:.2e}"))?;
    Ok(format!("50 random shapes, max abs diff {worst:.1e}"))
}

fn criterion_3() -> Check {
    let mut r = rng(3);
    let z = Tensor::from_fn(vec![16, 4], |_| r.random_range(-30.0..30.0));
    let p = softmax(&z).unwrap();
    let worst_sum = p
        .data()
        .chunks(4)
        .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(worst_sum < 1e-12, format!("row sum off by {worst_sum:.2e}"))?;

    let y = Tensor::from_fn(
        vec![16, 4],
        |i| if i % 4 == (i / 4) % 4 { 1.0 } else { 0.0 },
    );
    let (_, g) = cross_entropy(&p, &y).unwrap();
    let worst_grad = g
        .data()
        .iter()
        .zip(p.data().iter().zip(y.data()))
        .map(|(gv, (pv, yv))| (gv - (pv - yv) / 16.0).abs())
        .fold(0.0, f64::max);
    ensure(
        worst_grad < 1e-12,
        format!("logits gradient off by {worst_grad:.2e}"),
    )?;

    let uniform = softmax(&Tensor::filled(vec![8, 4], 0.3)).unwrap();
    let y = Tensor::from_fn(vec![8, 4], |i| if i % 4 == (i / 4) % 4 { 1.0 } else { 0.0 });
    let (loss, _) = cross_entropy(&uniform, &y).unwrap();
    let dev = (loss - 4f64.ln()).abs();
    ensure(
        dev <= 1e-9,
        format!("uniform loss {loss} differs from ln 4 by {dev:.2e}"),
    )?;
    Ok(format!(
        "row sums {worst_sum:.1e}, gradient {worst_grad:.1e}, |loss - ln 4| {dev:.1e}"
    ))
}

fn scalar_store(v: f64) -> ParamStore<f64> {
    ParamStore {
        layers: vec![koa_core::nncore::LayerParams {
            name: "theta".into(),
            weight: Tensor::new(vec![1], vec![v]).unwrap(),
            bias: Tensor::new(vec![1], vec![0.0]).unwrap(),
        }],
    }
}

fn criterion_4() -> Check {
    let cfg = TrainConfig::default();
    ensure(
        cfg.learning_rate == 6.5e-5,
        "default learning rate is not 6.5e-5",
    )?;
    let theta0 = 0.3;
    let mut p = scalar_store(theta0);
    let mut g = scalar_store(0.1);
    g.layers[0].bias = Tensor::new(vec![1], vec![0.0]).unwrap();
    let mut st = AdamState::new(&p);
    adam_step(&mut p, &g, &mut st, &cfg).map_err(|e| e.to_string())?;
    let expected = -cfg.learning_rate * 0.1 / (0.1f64.abs() + 1e-8);
    let got = p.get_flat(0) - theta0;
    let dev = (got - expected).abs();
    ensure(dev < 1e-12, format!("first step {got:e} vs {expected:e}"))?;

    let mut p = scalar_store(theta0);
    let before = p.clone();
    let zero = p.zeros_like();
    let mut st = AdamState::new(&p);
    for _ in 0..1000 {
        adam_step(&mut p, &zero, &mut st, &cfg).map_err(|e| e.to_string())?;
    }
    ensure(p.bit_eq(&before), "parameters moved under zero gradient")?;
    Ok(format!(
        "first-step deviation {dev:.1e}; 1000 zero-gradient steps bit-identical"
    ))
}

fn criterion_5() -> Check {
    let cfg = mini_config();
    let tcfg = TrainConfig::default();
    let best = 7;
    // improving until `best`, then a flat-or-worse tail
    let losses: Vec<f64> = (1..=40)
        .map(|e| {
            if e <= best {
                2.0 - 0.1 * e as f64
            } else {
                2.0 - 0.1 * best as f64 + 0.01 * ((e % 3) as f64)
            }
        })
        .collect();
    let params: ParamStore<f64> = init_params(&cfg, 5).unwrap();
    let mut r = rng(5);
    let mut snapshot = None;
    let mut adam = AdamState::new(&params);
    let out = train_loop(params, &tcfg, |epoch, p| {
        let mut g = p.zeros_like();
        for i in 0..g.num_params() {
            g.set_flat(i, r.random_range(-1.0..1.0));
        }
        adam_step(p, &g, &mut adam, &tcfg)?;
        if epoch == best {
            snapshot = Some(p.clone());
        }
        Ok(EpochRecord {
            epoch,
            loss: losses[epoch - 1],
            accuracy: 0.0,
            val_loss: None,
        })
    })
    .map_err(|e| e.to_string())?;
    ensure(
        out.best_epoch == best,
        format!("best epoch {}", out.best_epoch),
    )?;
    ensure(
        out.stopped_epoch == best + tcfg.patience,
        format!(
            "stopped at {} instead of {}",
            out.stopped_epoch,
            best + tcfg.patience
        ),
    )?;
    ensure(out.early_stopped, "early stop not flagged")?;
    ensure(
        out.params.bit_eq(&snapshot.unwrap()),
        "restored weights differ from the best-epoch snapshot",
    )?;
    Ok(format!(
        "best epoch {best}, halted at {} with patience {}, restored weights bit-identical",
        out.stopped_epoch, tcfg.patience
    ))
}

fn brute_auc(scores: &[f64], y: &[usize], class: usize) -> f64 {
    let pos: Vec<f64> = scores
        .iter()
        .zip(y)
        .filter(|(_, &l)| l == class)
        .map(|(s, _)| *s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(y)
        .filter(|(_, &l)| l != class)
        .map(|(s, _)| *s)
        .collect();
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

fn r2(v: f64) -> String {
    format!("{v:.2}")
}

fn criterion_6() -> Check {
    let cm = ConfusionMatrix::from_counts(vec![vec![5, 0], vec![1, 4]]).unwrap();
    let rep = class_report(&cm).unwrap();
    let p: Vec<f64> = rep.classes.iter().map(|c| c.precision).collect();
    let rc: Vec<f64> = rep.classes.iter().map(|c| c.recall).collect();
    ensure(p == vec![5.0 / 6.0, 1.0], format!("precision {p:?}"))?;
    ensure(rc == vec![1.0, 0.8], format!("recall {rc:?}"))?;
    ensure(rep.accuracy == 0.9, format!("accuracy {}", rep.accuracy))?;

    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = r.random_range(2..=200);
        let y: Vec<usize> = (0..n).map(|_| r.random_range(0..4)).collect();
        // coarse scores so ties occur
        let s: Vec<f64> = (0..n)
            .map(|_| f64::from(r.random_range(0..20u8)) / 20.0)
            .collect();
        let class = y[0];
        if y.iter().all(|&l| l == class) {
            continue;
        }
        let auc = roc_curve(&s, &y, class).unwrap().auc;
        worst = worst.max((auc - brute_auc(&s, &y, class)).abs());
    }
    ensure(
        worst < 1e-12,
        format!("AUC differs from the pair count by {worst:.2e}"),
    )?;

    // per-class rows: g1 recall 12/13, g3 precision 8/9
    let table = ConfusionMatrix::from_counts(vec![
        vec![15, 0, 0, 0],
        vec![0, 12, 0, 1],
        vec![0, 0, 14, 0],
        vec![0, 0, 0, 8],
    ])
    .unwrap();
    let t = class_report(&table).unwrap();
    let printed = [
        ["1.00", "1.00", "1.00"],
        ["1.00", "0.92", "0.96"],
        ["1.00", "1.00", "1.00"],
        ["0.89", "1.00", "0.94"],
    ];
    for (c, want) in t.classes.iter().zip(printed) {
        let got = [r2(c.precision), r2(c.recall), r2(c.f1)];
        ensure(got == want, format!("{}: {got:?} vs {want:?}", c.name))?;
    }
    // The summary row 0.97/0.98/0.97 is a macro average, and it is only
    // reproduced when g1 has 11 of 12 correct (still rounds to 0.92/0.96).
    let alt = ConfusionMatrix::from_counts(vec![
        vec![15, 0, 0, 0],
        vec![0, 11, 0, 1],
        vec![0, 0, 15, 0],
        vec![0, 0, 0, 8],
    ])
    .unwrap();
    let a = class_report(&alt).unwrap();
    for (c, want) in a.classes.iter().zip(printed) {
        let got = [r2(c.precision), r2(c.recall), r2(c.f1)];
        ensure(got == want, format!("alt {}: {got:?} vs {want:?}", c.name))?;
    }
    let m = a.macro_avg;
    let avg = [r2(m.precision), r2(m.recall), r2(m.f1)];
    ensure(
        avg == ["0.97", "0.98", "0.97"],
        format!("macro avg {avg:?}"),
    )?;
    ensure(r2(a.accuracy) == "0.98", format!("accuracy {}", a.accuracy))?;
    Ok(format!(
        "2x2 report exact; AUC vs pair count {worst:.1e} on 100 instances; table rows reproduced (macro avg {} {} {})",
        avg[0], avg[1], avg[2]
    ))
}

fn accuracy_on(table: RawTable, cfg: &RunConfig) -> Result<f64, String> {
    Ok(train_run::<f64>(cfg, table)
        .map_err(|e| e.to_string())?
        .evaluation
        .accuracy())
}

fn criterion_7() -> Check {
    let Some(path) = std::env::var_os("KOA_IEEE_DATASET").map(PathBuf::from) else {
        return Err("DEFERRED".into());
    };
    let start = Instant::now();
    let base = match std::env::var_os("KOA_IEEE_CONFIG") {
        Some(c) => RunConfig::load(PathBuf::from(c)).map_err(|e| e.to_string())?,
        None => RunConfig::default(),
    };
    let table = load_csv(&path, &base.column_mapping()).map_err(|e| e.to_string())?;
    let mut accs = Vec::new();
    for seed in 0..5 {
        let cfg = RunConfig {
            seed,
            ..base.clone()
        };
        accs.push(accuracy_on(table.clone(), &cfg)?);
    }
    accs.sort_by(f64::total_cmp);
    let median = accs[2];
    let elapsed = start.elapsed();
    ensure(
        median >= 0.90,
        format!("median accuracy {median:.4} < 0.90 ({accs:?})"),
    )?;
    ensure(
        elapsed < Duration::from_secs(600),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "median test accuracy {median:.4} over 5 seeds ({accs:?})"
    ))
}

fn criterion_8() -> Check {
    let start = Instant::now();
    let sim = SimulationConfig::default();
    let d = generate_dataset(&sim, 2024).map_err(|e| e.to_string())?;
    let label = d.table.header.len() - 1;
    let mean_z = |r: &Vec<String>| {
        r[3..label]
            .iter()
            .map(|c| c.parse::<f64>().unwrap())
            .sum::<f64>()
            / (label - 3) as f64
    };
    let grade_means = |g: &str| -> Vec<f64> {
        d.table
            .rows
            .iter()
            .filter(|r| r[label] == g)
            .map(mean_z)
            .collect()
    };
    let max_g0 = grade_means("g0").into_iter().fold(f64::MIN, f64::max);
    let min_g3 = grade_means("g3").into_iter().fold(f64::MAX, f64::min);
    ensure(
        max_g0 < min_g3,
        "mean |Z| threshold does not separate g0 from g3",
    )?;
    let cfg = RunConfig {
        seed: 2024,
        mapping: Some(d.mapping.clone()),
        ..RunConfig::default()
    };
    ensure(cfg.train_config().epochs == 40, "epoch budget is not 40")?;
    let run = train_run::<f64>(&cfg, d.table).map_err(|e| e.to_string())?;
    let acc = run.evaluation.accuracy();
    let elapsed = start.elapsed();
    ensure(acc >= 0.95, format!("test accuracy {acc:.4} < 0.95"))?;
    ensure(
        elapsed < Duration::from_secs(120),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "test accuracy {acc:.4} on {} held-out rows after {} epochs",
        run.prepared.test.len(),
        run.outcome.stopped_epoch
    ))
}

fn criterion_9() -> Check {
    let sweep = SweepConfig {
        start_hz: 1_000.0,
        step_hz: 1_000.0,
        points: 30,
        feedback_ohms: 100.0,
        ..SweepConfig::default()
    };
    let cal = calibrate(200.0, &sweep).map_err(|e| e.to_string())?;
    let load = TissueModel::series_rc(100.0, 1e-6);
    let (mut worst_mag, mut worst_ph): (f64, f64) = (0.0, 0.0);
    for f in sweep.frequencies() {
        let z = load.impedance_of(f);
        let reading = dft_measure(z, f, &sweep, &mut rng(0)).map_err(|e| e.to_string())?;
        let (mag, phase) = impedance_from_reading(&reading, &cal).map_err(|e| e.to_string())?;
        worst_mag = worst_mag.max((mag / z.norm() - 1.0).abs());
        worst_ph = worst_ph.max((phase - z.arg()).to_degrees().abs());
    }
    ensure(
        worst_mag < 0.005,
        format!("|Z| error {:.3}%", worst_mag * 100.0),
    )?;
    ensure(worst_ph < 1.0, format!("phase error {worst_ph:.3} deg"))?;
    let pairs = relay_scan(8, ScanPolicy::AllPairs).map_err(|e| e.to_string())?;
    let distinct: std::collections::BTreeSet<_> =
        pairs.iter().map(|p| (p.source, p.sink)).collect();
    ensure(
        pairs.len() == 28 && distinct.len() == 28,
        format!("{} pairs, {} distinct", pairs.len(), distinct.len()),
    )?;
    Ok(format!(
        "30 points: max |Z| error {:.3}%, max phase error {worst_ph:.3} deg; 28 distinct pairs",
        worst_mag * 100.0
    ))
}

fn criterion_10() -> Check {
    let sim = SimulationConfig {
        participants_per_grade: 1,
        repetitions: 6,
        patterns: 2,
        ..SimulationConfig::default()
    };
    let d = generate_dataset(&sim, 10).map_err(|e| e.to_string())?;
    let mut cfg = RunConfig {
        seed: 10,
        mapping: Some(d.mapping.clone()),
        ..RunConfig::default()
    };
    cfg.train.epochs = Some(5);
    let a = train_run::<f64>(&cfg, d.table.clone()).map_err(|e| e.to_string())?;
    let b = train_run::<f64>(&cfg, d.table).map_err(|e| e.to_string())?;
    ensure(
        a.outcome.history.to_csv() == b.outcome.history.to_csv(),
        "history CSVs differ",
    )?;
    let bytes = checkpoint_to_bytes(&a.checkpoint);
    ensure(
        bytes == checkpoint_to_bytes(&b.checkpoint),
        "checkpoints differ",
    )?;

    let restored = checkpoint_from_bytes::<f64>(&bytes).map_err(|e| e.to_string())?;
    let (m1, m2): (Model<f64>, Model<f64>) = (a.checkpoint.model(), restored.model());
    let len = m1.cfg.input_len;
    let mut r = rng(11);
    let data: Vec<f64> = (0..100 * len).map(|_| r.random_range(-3.0..3.0)).collect();
    let p1 = m1
        .predict(&m1.input_tensor(100, data.clone()).unwrap())
        .unwrap();
    let p2 = m2.predict(&m2.input_tensor(100, data).unwrap()).unwrap();
    let same = p1
        .data()
        .iter()
        .zip(p2.data())
        .all(|(x, y)| x.to_bits() == y.to_bits());
    ensure(same, "restored checkpoint predicts differently")?;
    Ok(format!(
        "history and {}-byte checkpoint identical across runs; 100 predictions bit-identical after reload",
        bytes.len()
    ))
}

type Criterion = (u32, &'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "gradient correctness", criterion_1),
        (2, "convolution oracle", criterion_2),
        (3, "softmax / cross-entropy identities", criterion_3),
        (4, "Adam closed form", criterion_4),
        (5, "early stopping", criterion_5),
        (6, "metrics oracles", criterion_6),
        (7, "external dataset reproduction", criterion_7),
        (8, "synthetic end-to-end", criterion_8),
        (9, "acquisition round-trip", criterion_9),
        (10, "determinism and persistence", criterion_10),
    ];
    let limits = [30, 5, 5, 5, 5, 5, 600, 120, 5, 60];
    let mut failures = 0;
    let mut deferred = false;
    for ((n, name, f), limit) in criteria.into_iter().zip(limits) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let result = match result {
            Ok(_) if secs >= limit as f64 => Err(format!("runtime {secs:.1}s exceeds {limit}s")),
            other => other,
        };
        match result {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{secs:.2}s]"),
            Err(e) if n == 7 && e == "DEFERRED" => {
                deferred = true;
                println!(
                    "criterion {n:>2} DEFER {name}: KOA_IEEE_DATASET not set; gated by criterion 8"
                );
            }
            Err(e) => {
                failures += 1;
                println!("criterion {n:>2} FAIL  {name}: {e} [{secs:.2}s]");
            }
        }
    }
    if deferred {
        println!("criterion 7 outcome follows criterion 8");
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
