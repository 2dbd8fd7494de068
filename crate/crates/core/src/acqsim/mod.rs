//! Signal-level simulation of the acquisition chain: a DFT impedance
//! converter measuring a tissue model, gain-factor calibration, relay
//! sequencing over eight electrodes, and a generator that turns all of it
//! into labelled CSV records.

mod generate;
mod instrument;
mod relay;
mod tissue;

pub use generate::{
    generate_dataset, ExerciseEffect, SimulatedDataset, SimulationConfig, EXERCISES,
};
pub use instrument::{
    calibrate, dft_measure, impedance_from_reading, CalibrationPoint, CalibrationRecord,
    DftReading, FreqHz, SweepConfig,
};
pub use relay::{relay_scan, ElectrodePair, ScanPolicy};
pub use tissue::{TissueKind, TissueModel};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AcqError {
    #[error("ADC clipping at {freq_hz} Hz: peak {peak_counts:.1} counts exceeds {limit} counts")]
    Clipping {
        freq_hz: f64,
        peak_counts: f64,
        limit: i32,
    },
    #[error("signal at {freq_hz} Hz is below one ADC count (impedance out of range)")]
    BelowRange { freq_hz: f64 },
    #[error("zero DFT magnitude at {freq_hz} Hz")]
    ZeroMagnitude { freq_hz: f64 },
    #[error("no calibration point at {freq_hz} Hz")]
    NoCalibration { freq_hz: f64 },
    #[error("invalid tissue model: {0}")]
    InvalidModel(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}
