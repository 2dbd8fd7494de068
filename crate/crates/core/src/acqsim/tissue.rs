use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::AcqError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TissueKind {
    /// `R + 1/(jωC)`.
    SeriesRc { resistance: f64, capacitance: f64 },
    /// Single-dispersion Cole: `R∞ + (R0 − R∞) / (1 + (jωτ)^α)`.
    Cole {
        r0: f64,
        rinf: f64,
        tau: f64,
        alpha: f64,
    },
}

/// Tissue impedance with a grade-dependent magnitude increase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TissueModel {
    pub kind: TissueKind,
    pub severity_grade: u8,
    /// |Z| is multiplied by `1 + severity_scale * grade`.
    pub severity_scale: f64,
}

impl TissueModel {
    pub fn cole(r0: f64, rinf: f64, tau: f64, alpha: f64) -> Self {
        Self {
            kind: TissueKind::Cole {
                r0,
                rinf,
                tau,
                alpha,
            },
            severity_grade: 0,
            severity_scale: 0.0,
        }
    }

    pub fn series_rc(resistance: f64, capacitance: f64) -> Self {
        Self {
            kind: TissueKind::SeriesRc {
                resistance,
                capacitance,
            },
            severity_grade: 0,
            severity_scale: 0.0,
        }
    }

    pub fn with_severity(mut self, grade: u8, scale: f64) -> Self {
        self.severity_grade = grade;
        self.severity_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<(), AcqError> {
        let bad = |m: &str| Err(AcqError::InvalidModel(m.to_string()));
        match self.kind {
            TissueKind::SeriesRc {
                resistance,
                capacitance,
            } => {
                if !(resistance > 0.0 && capacitance > 0.0) {
                    return bad("series-RC needs R > 0 and C > 0");
                }
            }
            TissueKind::Cole {
                r0,
                rinf,
                tau,
                alpha,
            } => {
                if !(r0 > rinf && rinf > 0.0) {
                    return bad("Cole model needs R0 > Rinf > 0");
                }
                if !(tau > 0.0) {
                    return bad("Cole model needs tau > 0");
                }
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return bad("Cole exponent must lie in (0, 1]");
                }
            }
        }
        if !(self.severity_scale >= 0.0) {
            return bad("severity_scale must be non-negative");
        }
        Ok(())
    }

    pub fn severity_factor(&self) -> f64 {
        1.0 + self.severity_scale * f64::from(self.severity_grade)
    }

    /// Complex impedance in ohms at `freq_hz`.
    pub fn impedance_of(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz;
        let z = match self.kind {
            TissueKind::SeriesRc {
                resistance,
                capacitance,
            } => Complex64::new(resistance, -1.0 / (w * capacitance)),
            TissueKind::Cole {
                r0,
                rinf,
                tau,
                alpha,
            } => {
                let jwt = Complex64::new(0.0, w * tau);
                Complex64::new(rinf, 0.0) + (r0 - rinf) / (1.0 + jwt.powf(alpha))
            }
        };
        z * self.severity_factor()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cole_limits() {
        let m = TissueModel::cole(500.0, 120.0, 3e-6, 0.8);
        assert_abs_diff_eq!(m.impedance_of(1e-6).re, 500.0, epsilon = 1e-3);
        assert_abs_diff_eq!(m.impedance_of(1e-6).im, 0.0, epsilon = 1e-3);
        let hi = m.impedance_of(1e15);
        assert_abs_diff_eq!(hi.re, 120.0, epsilon = 1e-2);
    }

    #[test]
    fn series_rc_at_unit_omega_rc() {
        // ω = 1e4 rad/s, 1/(ωC) = 100 Ω
        let m = TissueModel::series_rc(100.0, 1e-6);
        let f = 1e4 / (2.0 * PI);
        assert_abs_diff_eq!(f, 1591.55, epsilon = 0.01);
        let z = m.impedance_of(f);
        assert_abs_diff_eq!(z.re, 100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(z.im, -100.0, epsilon = 1e-9);
    }

    #[test]
    fn severity_scales_magnitude_only() {
        let base = TissueModel::cole(500.0, 120.0, 3e-6, 0.8);
        let z0 = base.impedance_of(5e4);
        let z3 = base.with_severity(3, 0.25).impedance_of(5e4);
        assert_abs_diff_eq!(z3.norm() / z0.norm(), 1.75, epsilon = 1e-12);
        assert_abs_diff_eq!(z3.arg(), z0.arg(), epsilon = 1e-12);
    }

    #[test]
    fn validation() {
        assert!(TissueModel::cole(100.0, 200.0, 1e-6, 0.5)
            .validate()
            .is_err());
        assert!(TissueModel::cole(300.0, 200.0, 1e-6, 1.5)
            .validate()
            .is_err());
        assert!(TissueModel::cole(300.0, 200.0, 0.0, 0.5)
            .validate()
            .is_err());
        assert!(TissueModel::series_rc(-1.0, 1e-6).validate().is_err());
        assert!(TissueModel::cole(300.0, 200.0, 1e-6, 1.0)
            .validate()
            .is_ok());
    }
}
