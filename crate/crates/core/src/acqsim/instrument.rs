//! DFT impedance converter model.
//!
//! The load is excited with a sinusoid; the current through it is converted to
//! a voltage by a feedback resistor, sampled by a signed ADC, and correlated
//! with the excitation over a fixed number of samples. The correlation uses
//! `real = Σ x[n]·cos(ωn)` and `imag = Σ x[n]·sin(ωn)`, so the reading's phase
//! follows the load phase minus the instrument's own phase shift. Magnitude is
//! inversely proportional to |Z| and is mapped back to ohms by a per-frequency
//! gain factor obtained from a known resistor.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::AcqError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub start_hz: f64,
    pub step_hz: f64,
    pub points: usize,
    /// Peak excitation voltage.
    pub excitation_volts: f64,
    /// Samples per DFT.
    pub samples: usize,
    pub adc_bits: u32,
    /// Master clock; the ADC samples at `mclk_hz / 16`.
    pub mclk_hz: f64,
    /// Current-to-voltage gain.
    pub feedback_ohms: f64,
    /// Input voltage mapped to the largest positive ADC code.
    pub adc_full_scale_volts: f64,
    /// Constant phase shift of the analog path.
    pub system_phase_rad: f64,
    /// Group delay of the analog path (adds a frequency-proportional phase shift).
    pub system_delay_s: f64,
    /// Standard deviation of additive Gaussian noise, in ADC counts.
    pub noise_counts: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            start_hz: 10_000.0,
            step_hz: 10_000.0,
            points: 10,
            excitation_volts: 0.99,
            samples: 1024,
            adc_bits: 12,
            // 1.024 MHz sampling puts every multiple of 1 kHz exactly on a DFT bin.
            mclk_hz: 16.384e6,
            feedback_ohms: 200.0,
            adc_full_scale_volts: 1.5,
            system_phase_rad: 0.35,
            system_delay_s: 150e-9,
            noise_counts: 0.0,
        }
    }
}

impl SweepConfig {
    pub fn sample_rate(&self) -> f64 {
        self.mclk_hz / 16.0
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.points)
            .map(|i| self.start_hz + self.step_hz * i as f64)
            .collect()
    }

    /// Largest positive ADC code.
    pub fn max_code(&self) -> i32 {
        (1i32 << (self.adc_bits - 1)) - 1
    }

    pub fn system_phase(&self, freq_hz: f64) -> f64 {
        self.system_phase_rad - 2.0 * PI * freq_hz * self.system_delay_s
    }

    pub fn validate(&self) -> Result<(), AcqError> {
        let bad = |m: String| Err(AcqError::InvalidSweep(m));
        if self.points == 0 {
            return bad("at least one sweep point is required".into());
        }
        if !(2..=24).contains(&self.adc_bits) {
            return bad(format!("adc_bits {} outside 2..=24", self.adc_bits));
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if !(self.mclk_hz > 0.0 && self.feedback_ohms > 0.0 && self.adc_full_scale_volts > 0.0) {
            return bad("clock, feedback resistance and full scale must be positive".into());
        }
        if !(self.excitation_volts >= 0.0) || !(self.noise_counts >= 0.0) {
            return bad("excitation and noise must be non-negative".into());
        }
        let nyquist = self.sample_rate() / 2.0;
        for f in self.frequencies() {
            if !(f > 0.0 && f < nyquist) {
                return bad(format!("frequency {f} Hz outside (0, {nyquist}) Hz"));
            }
        }
        Ok(())
    }
}

/// Raw correlation words at one excitation frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DftReading {
    #[serde(with = "freq_bits")]
    pub frequency_hz: FreqHz,
    pub real: i32,
    pub imag: i32,
}

/// Frequency stored by bit pattern so readings can be `Eq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreqHz(u64);

impl FreqHz {
    pub fn new(hz: f64) -> Self {
        Self(hz.to_bits())
    }

    pub fn hz(self) -> f64 {
        f64::from_bits(self.0)
    }
}

mod freq_bits {
    use super::FreqHz;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(f: &FreqHz, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(f.hz())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FreqHz, D::Error> {
        f64::deserialize(d).map(FreqHz::new)
    }
}

impl DftReading {
    pub fn magnitude(&self) -> f64 {
        (f64::from(self.real)).hypot(f64::from(self.imag))
    }

    pub fn phase(&self) -> f64 {
        f64::from(self.imag).atan2(f64::from(self.real))
    }

    /// Line in the instrument log: `freq_hz,real,imag`.
    pub fn log_line(&self) -> String {
        format!("{},{},{}", self.frequency_hz.hz(), self.real, self.imag)
    }
}

/// Precomputed correlation tables for one excitation frequency.
pub(crate) struct DftKernel {
    freq_hz: f64,
    omega: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl DftKernel {
    pub(crate) fn new(freq_hz: f64, sweep: &SweepConfig) -> Self {
        let omega = 2.0 * PI * freq_hz / sweep.sample_rate();
        let (cos, sin) = (0..sweep.samples)
            .map(|n| {
                let a = omega * n as f64;
                (a.cos(), a.sin())
            })
            .unzip();
        Self {
            freq_hz,
            omega,
            cos,
            sin,
        }
    }

    /// Quantised ADC samples of the sensed current for load `z`.
    pub(crate) fn samples<R: Rng + ?Sized>(
        &self,
        z: Complex64,
        sweep: &SweepConfig,
        rng: &mut R,
    ) -> Result<Vec<i32>, AcqError> {
        let max = sweep.max_code();
        let lsb = sweep.adc_full_scale_volts / f64::from(max);
        let zn = z.norm();
        if !(zn > 0.0 && zn.is_finite()) {
            return Err(AcqError::InvalidModel(format!("|Z| = {zn}")));
        }
        let amp_counts = sweep.excitation_volts * sweep.feedback_ohms / zn / lsb;
        if amp_counts > f64::from(max) {
            return Err(AcqError::Clipping {
                freq_hz: self.freq_hz,
                peak_counts: amp_counts,
                limit: max,
            });
        }
        if amp_counts > 0.0 && amp_counts < 1.0 {
            return Err(AcqError::BelowRange {
                freq_hz: self.freq_hz,
            });
        }
        let psi = sweep.system_phase(self.freq_hz) - z.arg();
        let noise = (sweep.noise_counts > 0.0)
            .then(|| Normal::new(0.0, sweep.noise_counts).expect("finite noise"));
        Ok((0..sweep.samples)
            .map(|n| {
                let mut v = amp_counts * (self.omega * n as f64 + psi).cos();
                if let Some(d) = &noise {
                    v += d.sample(rng);
                }
                (v.round() as i32).clamp(-max - 1, max)
            })
            .collect())
    }

    pub(crate) fn correlate(&self, x: &[i32]) -> DftReading {
        let (mut re, mut im) = (0.0, 0.0);
        for ((&s, &c), &si) in x.iter().zip(&self.cos).zip(&self.sin) {
            re += f64::from(s) * c;
            im += f64::from(s) * si;
        }
        DftReading {
            frequency_hz: FreqHz::new(self.freq_hz),
            real: re.round() as i32,
            imag: im.round() as i32,
        }
    }

    pub(crate) fn measure<R: Rng + ?Sized>(
        &self,
        z: Complex64,
        sweep: &SweepConfig,
        rng: &mut R,
    ) -> Result<DftReading, AcqError> {
        Ok(self.correlate(&self.samples(z, sweep, rng)?))
    }
}

/// Excites load `z` at `freq_hz` and returns the DFT words.
pub fn dft_measure<R: Rng + ?Sized>(
    z: Complex64,
    freq_hz: f64,
    sweep: &SweepConfig,
    rng: &mut R,
) -> Result<DftReading, AcqError> {
    DftKernel::new(freq_hz, sweep).measure(z, sweep, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub frequency_hz: f64,
    /// `1 / (R_cal · magnitude)`.
    pub gain_factor: f64,
    pub system_phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub reference_ohms: f64,
    pub points: Vec<CalibrationPoint>,
}

impl CalibrationRecord {
    pub fn point(&self, freq_hz: f64) -> Option<&CalibrationPoint> {
        let tol = 1e-9 * freq_hz.abs().max(1.0);
        self.points
            .iter()
            .find(|p| (p.frequency_hz - freq_hz).abs() <= tol)
    }
}

/// Noiseless sweep of a known resistor.
pub fn calibrate(reference_ohms: f64, sweep: &SweepConfig) -> Result<CalibrationRecord, AcqError> {
    sweep.validate()?;
    if !(reference_ohms > 0.0) {
        return Err(AcqError::InvalidModel(
            "calibration resistor must be positive".into(),
        ));
    }
    let quiet = SweepConfig {
        noise_counts: 0.0,
        ..sweep.clone()
    };
    // noise is off, so this generator is never drawn from
    let mut unused = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let points = quiet
        .frequencies()
        .into_iter()
        .map(|f| {
            let r = dft_measure(Complex64::new(reference_ohms, 0.0), f, &quiet, &mut unused)?;
            let mag = r.magnitude();
            if mag == 0.0 {
                return Err(AcqError::ZeroMagnitude { freq_hz: f });
            }
            Ok(CalibrationPoint {
                frequency_hz: f,
                gain_factor: 1.0 / (reference_ohms * mag),
                system_phase: r.phase(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CalibrationRecord {
        reference_ohms,
        points,
    })
}

fn wrap_phase(p: f64) -> f64 {
    let w = (p + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Converts a reading to `(|Z| ohms, phase radians)`.
pub fn impedance_from_reading(
    r: &DftReading,
    cal: &CalibrationRecord,
) -> Result<(f64, f64), AcqError> {
    let f = r.frequency_hz.hz();
    let p = cal.point(f).ok_or(AcqError::NoCalibration { freq_hz: f })?;
    let mag = r.magnitude();
    if mag == 0.0 {
        return Err(AcqError::ZeroMagnitude { freq_hz: f });
    }
    Ok((
        1.0 / (p.gain_factor * mag),
        wrap_phase(r.phase() - p.system_phase),
    ))
}
