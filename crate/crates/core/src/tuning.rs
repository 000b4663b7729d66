//! Temperature dependence of the bare lines.
//!
//! The exciton follows a Varshni band-gap shift, the cavity mode a slower
//! quadratic thermo-optic redshift, and the exciton linewidth broadens
//! linearly (with an optional phonon-activated term). Defaults are a
//! calibration: the lines cross at 30 K, where the exciton width reaches
//! the 0.2 meV mode width.

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::model::CoupledSystem;

/// Boltzmann constant in meV/K.
const K_B_MEV: f64 = 8.617333262e-2;

/// Bisection stops once `|δ(T)|` is below this (meV).
pub const DETUNING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningModel {
    /// meV
    pub qd_e0: f64,
    /// meV/K
    pub qd_alpha: f64,
    /// K
    pub qd_beta: f64,
    /// meV
    pub cm_e0: f64,
    /// meV/K
    pub cm_c1: f64,
    /// meV/K²
    pub cm_c2: f64,
    /// meV
    pub gamma_qd_0: f64,
    /// meV/K
    pub gamma_qd_slope: f64,
    /// Amplitude (meV) of the activated term `a/(exp(E_a/k_BT) − 1)`; zero disables it.
    pub gamma_qd_act_amp: f64,
    /// Activation energy E_a (meV).
    pub gamma_qd_act_energy: f64,
    /// meV, temperature independent
    pub gamma_cm: f64,
}

impl Default for TuningModel {
    fn default() -> Self {
        Self {
            qd_e0: 1663.08,
            qd_alpha: 0.5405,
            qd_beta: 204.0,
            cm_e0: 1661.6,
            cm_c1: 0.005,
            cm_c2: 0.0005,
            gamma_qd_0: 0.08,
            gamma_qd_slope: 0.004,
            gamma_qd_act_amp: 0.0,
            gamma_qd_act_energy: 10.0,
            gamma_cm: 0.2,
        }
    }
}

impl TuningModel {
    pub fn validate(&self) -> Result<()> {
        check_positive("qd_e0", self.qd_e0)?;
        check_positive("cm_e0", self.cm_e0)?;
        check_positive("qd_beta", self.qd_beta)?;
        check_positive("gamma_qd_0", self.gamma_qd_0)?;
        check_positive("gamma_cm", self.gamma_cm)?;
        check_non_negative("qd_alpha", self.qd_alpha)?;
        check_non_negative("cm_c1", self.cm_c1)?;
        check_non_negative("cm_c2", self.cm_c2)?;
        check_non_negative("gamma_qd_slope", self.gamma_qd_slope)?;
        check_non_negative("gamma_qd_act_amp", self.gamma_qd_act_amp)?;
        check_positive("gamma_qd_act_energy", self.gamma_qd_act_energy)
    }

    /// Bare exciton energy, `qd_e0 − α·T²/(T + β)`.
    pub fn qd_energy(&self, t: f64) -> f64 {
        self.qd_e0 - self.qd_alpha * t * t / (t + self.qd_beta)
    }

    /// Bare mode energy, `cm_e0 − c1·T − c2·T²`.
    pub fn cm_energy(&self, t: f64) -> f64 {
        self.cm_e0 - self.cm_c1 * t - self.cm_c2 * t * t
    }

    pub fn gamma_qd(&self, t: f64) -> f64 {
        let mut gamma = self.gamma_qd_0 + self.gamma_qd_slope * t;
        if self.gamma_qd_act_amp > 0.0 && t > 0.0 {
            gamma +=
                self.gamma_qd_act_amp / ((self.gamma_qd_act_energy / (K_B_MEV * t)).exp() - 1.0);
        }
        gamma
    }

    pub fn detuning(&self, t: f64) -> f64 {
        self.qd_energy(t) - self.cm_energy(t)
    }

    pub fn qd_slope(&self, t: f64) -> f64 {
        let b = self.qd_beta;
        -self.qd_alpha * t * (t + 2.0 * b) / ((t + b) * (t + b))
    }

    pub fn cm_slope(&self, t: f64) -> f64 {
        -self.cm_c1 - 2.0 * self.cm_c2 * t
    }

    /// Bare-line parameters at temperature `t` with coupling `g`.
    pub fn system_at(&self, t: f64, g: f64) -> Result<CoupledSystem> {
        check_temperature(t)?;
        CoupledSystem::new(
            self.qd_energy(t),
            self.cm_energy(t),
            g,
            self.gamma_qd(t),
            self.gamma_cm,
        )
    }

    /// Temperature in `[t_lo, t_hi]` where the bare lines cross.
    pub fn resonance_temperature(&self, t_lo: f64, t_hi: f64) -> Result<f64> {
        check_temperature(t_lo)?;
        check_temperature(t_hi)?;
        let (mut lo, mut hi) = if t_lo <= t_hi {
            (t_lo, t_hi)
        } else {
            (t_hi, t_lo)
        };
        let mut d_lo = self.detuning(lo);
        let d_hi = self.detuning(hi);
        if d_lo == 0.0 {
            return Ok(lo);
        }
        if d_hi == 0.0 {
            return Ok(hi);
        }
        if d_lo.signum() == d_hi.signum() {
            return Err(Error::NoSignChange { t_lo, t_hi });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let d = self.detuning(mid);
            if d == 0.0 || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if hi - lo < 1e-12 && d.abs() < DETUNING_TOLERANCE {
                break;
            }
            if d.signum() == d_lo.signum() {
                lo = mid;
                d_lo = d;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn check_temperature(t: f64) -> Result<()> {
    check_non_negative("temperature", t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_temperature_values() {
        let m = TuningModel::default();
        assert_eq!(m.qd_energy(0.0), m.qd_e0);
        assert_eq!(m.cm_energy(0.0), m.cm_e0);
        assert_eq!(m.gamma_qd(0.0), m.gamma_qd_0);
    }

    #[test]
    fn worked_values() {
        let m = TuningModel {
            qd_e0: 1685.0,
            qd_alpha: 0.54,
            qd_beta: 204.0,
            cm_e0: 1684.0,
            cm_c1: 0.005,
            cm_c2: 0.0005,
            gamma_qd_0: 0.08,
            gamma_qd_slope: 0.004,
            ..TuningModel::default()
        };
        assert!((m.qd_energy(30.0) - (1685.0 - 0.54 * 900.0 / 234.0)).abs() < 1e-12);
        assert!((m.qd_energy(30.0) - 1682.923).abs() < 1e-3);
        assert!((m.cm_energy(30.0) - 1683.40).abs() < 1e-9);
        assert!((m.gamma_qd(30.0) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn redshifts_and_broadening_are_monotone() {
        let m = TuningModel::default();
        assert!(m.qd_energy(40.0) < m.qd_energy(20.0));
        assert!(m.cm_energy(40.0) < m.cm_energy(20.0));
        assert!(m.gamma_qd(40.0) >= m.gamma_qd(10.0));
        assert!(m.qd_slope(26.0).abs() > m.cm_slope(26.0).abs());
    }

    #[test]
    fn slopes_match_finite_differences() {
        let m = TuningModel::default();
        for t in [4.0, 26.0, 51.0] {
            let h = 1e-4;
            let fd_qd = (m.qd_energy(t + h) - m.qd_energy(t - h)) / (2.0 * h);
            let fd_cm = (m.cm_energy(t + h) - m.cm_energy(t - h)) / (2.0 * h);
            assert!((fd_qd - m.qd_slope(t)).abs() < 1e-7);
            assert!((fd_cm - m.cm_slope(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn activated_broadening_adds_width() {
        let m = TuningModel {
            gamma_qd_act_amp: 0.5,
            gamma_qd_act_energy: 5.0,
            ..TuningModel::default()
        };
        let base = TuningModel::default();
        assert!(m.gamma_qd(30.0) > base.gamma_qd(30.0));
        assert_eq!(m.gamma_qd(0.0), base.gamma_qd(0.0));
    }

    #[test]
    fn default_resonance_near_thirty_kelvin() {
        let m = TuningModel::default();
        let t = m.resonance_temperature(4.0, 51.0).unwrap();
        assert!((29.0..=32.0).contains(&t), "T* = {t}");
        assert!(m.detuning(t).abs() < DETUNING_TOLERANCE);
    }

    #[test]
    fn no_sign_change_is_reported() {
        let m = TuningModel {
            qd_alpha: 0.0,
            cm_c1: 0.0,
            cm_c2: 0.0,
            qd_e0: 1662.0,
            cm_e0: 1661.0,
            ..TuningModel::default()
        };
        assert!(matches!(
            m.resonance_temperature(4.0, 51.0),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn analytically_placed_crossing() {
        // Pick the mode offset so that E_C(25) = E_QD(25) exactly.
        let mut m = TuningModel::default();
        let t0 = 25.0;
        let qd = m.qd_e0 - m.qd_alpha * t0 * t0 / (t0 + m.qd_beta);
        m.cm_e0 = qd + m.cm_c1 * t0 + m.cm_c2 * t0 * t0;
        let t = m.resonance_temperature(4.0, 51.0).unwrap();
        assert!((t - 25.0).abs() < 1e-4, "T* = {t}");
    }

    #[test]
    fn refinement_is_idempotent() {
        let m = TuningModel::default();
        let t = m.resonance_temperature(4.0, 51.0).unwrap();
        let again = m.resonance_temperature(t - 0.5, t + 0.5).unwrap();
        assert!((again - t).abs() < 1e-9);
        assert!(m.detuning(t - 0.5).signum() != m.detuning(t + 0.5).signum());
    }

    #[test]
    fn system_at_rejects_negative_temperature() {
        assert!(TuningModel::default().system_at(-1.0, 0.2).is_err());
    }
}
