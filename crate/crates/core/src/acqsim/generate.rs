//! Synthetic labelled datasets produced through the simulated instrument.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::instrument::DftKernel;
use super::{
    calibrate, impedance_from_reading, relay_scan, AcqError, ScanPolicy, SweepConfig, TissueKind,
    TissueModel,
};
use crate::dataio::{ColumnMapping, RawTable};
use crate::rng::{SeedStreams, Stream};

/// Posture/load effect of one exercise on the tissue model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExerciseEffect {
    pub name: String,
    pub r0_factor: f64,
    pub tau_factor: f64,
}

/// Default exercises with their `(r0_factor, tau_factor)`.
pub const EXERCISES: [(&str, f64, f64); 5] = [
    ("cyclic", 1.00, 1.00),
    ("extension", 0.98, 1.04),
    ("flexion", 1.02, 0.96),
    ("gait", 1.01, 1.02),
    ("standing", 0.99, 0.98),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    /// Number of grades, labelled `g0..`.
    pub grades: u8,
    pub participants_per_grade: usize,
    pub repetitions: usize,
    pub exercises: Vec<ExerciseEffect>,
    pub electrodes: u8,
    pub scan_policy: ScanPolicy,
    /// How many pairs of the scan to record (from the start of the scan order).
    pub patterns: usize,
    pub base: TissueKind,
    /// |Z| grows by this fraction per grade.
    pub severity_scale: f64,
    /// Half-width of the uniform per-participant |Z| factor.
    pub participant_spread: f64,
    /// Per-pattern |Z| step: pattern `E{s}-E{t}` is scaled by `1 + spread·(t − s − 1)`.
    pub pattern_spread: f64,
    /// Half-width of the uniform per-repetition |Z| factor.
    pub repetition_jitter: f64,
    pub calibration_ohms: f64,
    pub sweep: SweepConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            grades: 4,
            participants_per_grade: 2,
            repetitions: 20,
            exercises: EXERCISES
                .iter()
                .map(|&(name, r0_factor, tau_factor)| ExerciseEffect {
                    name: name.to_string(),
                    r0_factor,
                    tau_factor,
                })
                .collect(),
            electrodes: 8,
            scan_policy: ScanPolicy::AllPairs,
            patterns: 4,
            base: TissueKind::Cole {
                r0: 400.0,
                rinf: 150.0,
                tau: 1.0 / (2.0 * PI * 50_000.0),
                alpha: 0.8,
            },
            severity_scale: 0.3,
            participant_spread: 0.03,
            pattern_spread: 0.02,
            repetition_jitter: 0.01,
            calibration_ohms: 500.0,
            sweep: SweepConfig::default(),
        }
    }
}

impl SimulationConfig {
    pub fn participants(&self) -> usize {
        usize::from(self.grades) * self.participants_per_grade
    }

    /// Feature column names, one per sweep frequency.
    pub fn feature_cols(&self) -> Vec<String> {
        self.sweep
            .frequencies()
            .iter()
            .map(|f| format!("z_{f}"))
            .collect()
    }

    /// Column mapping matching the generated CSV.
    pub fn column_mapping(&self) -> ColumnMapping {
        ColumnMapping {
            exercise_col: "exercise".into(),
            participant_col: "participant".into(),
            pattern_col: "pattern".into(),
            label_col: "affectation".into(),
            feature_cols: self.feature_cols(),
            include_participant_as_feature: true,
        }
    }

    pub fn validate(&self) -> Result<(), AcqError> {
        let bad = |m: String| Err(AcqError::InvalidConfig(m));
        if !(1..=4).contains(&self.grades) {
            return bad(format!("grades {} outside 1..=4", self.grades));
        }
        if self.participants_per_grade == 0 {
            return bad("at least one participant per grade is required".into());
        }
        if self.repetitions == 0 || self.exercises.is_empty() || self.patterns == 0 {
            return bad("repetitions, exercises and patterns must be non-empty".into());
        }
        let scan_len = relay_scan(self.electrodes, self.scan_policy)?.len();
        if self.patterns > scan_len {
            return bad(format!(
                "{} patterns requested but the scan has {scan_len}",
                self.patterns
            ));
        }
        for (name, v) in [
            ("participant_spread", self.participant_spread),
            ("pattern_spread", self.pattern_spread),
            ("repetition_jitter", self.repetition_jitter),
        ] {
            if !(0.0..0.5).contains(&v) {
                return bad(format!("{name} {v} outside [0, 0.5)"));
            }
        }
        for e in &self.exercises {
            if !(e.r0_factor > 0.0 && e.tau_factor > 0.0) {
                return bad(format!("exercise `{}` has a non-positive factor", e.name));
            }
        }
        TissueModel {
            kind: self.base,
            severity_grade: 0,
            severity_scale: self.severity_scale,
        }
        .validate()?;
        self.sweep.validate()
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub table: RawTable,
    /// `freq_hz,real,imag` per measurement, header first.
    pub log: String,
    pub mapping: ColumnMapping,
}

/// Scales magnitude by `mag` and the exercise-sensitive terms by `r0`/`tau`.
fn perturb(kind: TissueKind, mag: f64, r0_f: f64, tau_f: f64) -> TissueKind {
    match kind {
        TissueKind::Cole {
            r0,
            rinf,
            tau,
            alpha,
        } => TissueKind::Cole {
            r0: r0 * r0_f * mag,
            rinf: rinf * mag,
            tau: tau * tau_f,
            alpha,
        },
        TissueKind::SeriesRc {
            resistance,
            capacitance,
        } => TissueKind::SeriesRc {
            resistance: resistance * r0_f * mag,
            capacitance: capacitance * tau_f / mag,
        },
    }
}

fn uniform<R: Rng>(rng: &mut R, half_width: f64) -> f64 {
    if half_width == 0.0 {
        1.0
    } else {
        rng.random_range(1.0 - half_width..=1.0 + half_width)
    }
}

/// Runs the full simulated acquisition and returns labelled rows.
///
/// Participant `i` has grade `i % grades`. Participants in the same slot
/// (`i / grades`) share their tissue perturbations, so grades differ only by
/// the severity factor and by measurement noise.
pub fn generate_dataset(cfg: &SimulationConfig, seed: u64) -> Result<SimulatedDataset, AcqError> {
    cfg.validate()?;
    let streams = SeedStreams::new(seed);
    let sweep = &cfg.sweep;
    let freqs = sweep.frequencies();
    let kernels: Vec<DftKernel> = freqs.iter().map(|&f| DftKernel::new(f, sweep)).collect();
    let cal = calibrate(cfg.calibration_ohms, sweep)?;
    let pairs = &relay_scan(cfg.electrodes, cfg.scan_policy)?[..cfg.patterns];
    let mapping = cfg.column_mapping();

    let mut header = vec![
        mapping.participant_col.clone(),
        mapping.exercise_col.clone(),
        mapping.pattern_col.clone(),
    ];
    header.extend(mapping.feature_cols.iter().cloned());
    header.push(mapping.label_col.clone());

    let mut rows = Vec::new();
    let mut log = String::from("freq_hz,real,imag\n");
    let grades = usize::from(cfg.grades);
    for p in 0..cfg.participants() {
        let grade = (p % grades) as u8;
        let slot = (p / grades) as u64;
        let mut tissue_rng = streams.rng(Stream::Simulate, slot);
        let mut noise_rng = streams.rng(Stream::Simulate, (1 << 32) | p as u64);
        let participant_f = uniform(&mut tissue_rng, cfg.participant_spread);
        let pid = format!("P{:02}", p + 1);
        for ex in &cfg.exercises {
            for pair in pairs {
                let span = f64::from(pair.sink.abs_diff(pair.source));
                let pattern_f = 1.0 + cfg.pattern_spread * (span - 1.0);
                for _ in 0..cfg.repetitions {
                    let mag =
                        participant_f * pattern_f * uniform(&mut tissue_rng, cfg.repetition_jitter);
                    let model = TissueModel {
                        kind: perturb(cfg.base, mag, ex.r0_factor, ex.tau_factor),
                        severity_grade: grade,
                        severity_scale: cfg.severity_scale,
                    };
                    model.validate()?;
                    let mut row = vec![pid.clone(), ex.name.clone(), pair.label()];
                    for (k, &f) in kernels.iter().zip(&freqs) {
                        let reading = k.measure(model.impedance_of(f), sweep, &mut noise_rng)?;
                        let (z, _) = impedance_from_reading(&reading, &cal)?;
                        log.push_str(&reading.log_line());
                        log.push('\n');
                        row.push(format!("{z:.4}"));
                    }
                    row.push(format!("g{grade}"));
                    rows.push(row);
                }
            }
        }
    }
    Ok(SimulatedDataset {
        table: RawTable { header, rows },
        log,
        mapping,
    })
}
