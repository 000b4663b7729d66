//! Two-level exciton–photon model.
//!
//! The bare exciton (`e_qd`) and cavity mode (`e_c`) couple through `g`; the
//! eigenstates of `[[e_qd, g], [g, e_c]]` are the dressed states. All widths are
//! FWHM in meV, and a branch inherits the exciton and photon widths in
//! proportion to its exciton and photon content.

use std::fmt;

use crate::error::{check_non_negative, check_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledSystem {
    pub e_qd: f64,
    pub e_c: f64,
    pub g: f64,
    pub gamma_qd: f64,
    pub gamma_cm: f64,
}

impl CoupledSystem {
    pub fn new(e_qd: f64, e_c: f64, g: f64, gamma_qd: f64, gamma_cm: f64) -> Result<Self> {
        let sys = Self {
            e_qd,
            e_c,
            g,
            gamma_qd,
            gamma_cm,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("e_qd", self.e_qd)?;
        check_positive("e_c", self.e_c)?;
        check_non_negative("g", self.g)?;
        check_positive("gamma_qd", self.gamma_qd)?;
        check_positive("gamma_cm", self.gamma_cm)
    }

    /// `δ = E_QD − E_C`.
    pub fn detuning(&self) -> f64 {
        self.e_qd - self.e_c
    }

    /// The same physics with exciton and cavity labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            e_qd: self.e_c,
            e_c: self.e_qd,
            gamma_qd: self.gamma_cm,
            gamma_cm: self.gamma_qd,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedStates {
    pub e_upper: f64,
    pub e_lower: f64,
    pub exciton_fraction_upper: f64,
    pub exciton_fraction_lower: f64,
    pub gamma_upper: f64,
    pub gamma_lower: f64,
}

impl DressedStates {
    pub fn splitting(&self) -> f64 {
        self.e_upper - self.e_lower
    }
}

/// Upper and lower dressed-state energies, `(E_C+E_QD)/2 ± ½√((E_C−E_QD)² + 4g²)`.
pub fn dressed_energies(sys: &CoupledSystem) -> Result<(f64, f64)> {
    sys.validate()?;
    let mean = 0.5 * (sys.e_qd + sys.e_c);
    let half = 0.5 * sys.detuning().hypot(2.0 * sys.g);
    Ok((mean + half, mean - half))
}

/// Exciton weights `(x_upper, x_lower)` of the two branches, `x_upper = ½(1 + δ/√(δ² + 4g²))`
/// and `x_lower = 1 − x_upper`.
///
/// The minority weight is evaluated without cancellation, so both keep full
/// relative precision far from resonance.
pub fn mixing_fractions(sys: &CoupledSystem) -> Result<(f64, f64)> {
    sys.validate()?;
    let delta = sys.detuning();
    if sys.g == 0.0 && delta == 0.0 {
        return Err(Error::DegenerateUncoupled);
    }
    let s = delta.hypot(2.0 * sys.g);
    let minority = 2.0 * sys.g * sys.g / (s * (s + delta.abs()));
    let majority = 1.0 - minority;
    Ok(if delta >= 0.0 {
        (majority, minority)
    } else {
        (minority, majority)
    })
}

/// Branch FWHMs `x·γ_QD + (1 − x)·γ_CM`, with `x` each branch's exciton fraction.
pub fn branch_linewidths(sys: &CoupledSystem) -> Result<(f64, f64)> {
    let (x_upper, x_lower) = mixing_fractions(sys)?;
    Ok((
        x_upper * sys.gamma_qd + x_lower * sys.gamma_cm,
        x_lower * sys.gamma_qd + x_upper * sys.gamma_cm,
    ))
}

pub fn dressed_states(sys: &CoupledSystem) -> Result<DressedStates> {
    let (e_upper, e_lower) = dressed_energies(sys)?;
    let (exciton_fraction_upper, exciton_fraction_lower) = mixing_fractions(sys)?;
    let (gamma_upper, gamma_lower) = branch_linewidths(sys)?;
    Ok(DressedStates {
        e_upper,
        e_lower,
        exciton_fraction_upper,
        exciton_fraction_lower,
        gamma_upper,
        gamma_lower,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Strong,
    Weak,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Strong => "strong",
            Regime::Weak => "weak",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub splitting_at_resonance: f64,
    /// `2g` over the mean bare linewidth.
    pub resolvability_ratio: f64,
}

/// Strong coupling means the resonant doublet `2g` exceeds the mean linewidth.
pub fn classify_regime(sys: &CoupledSystem) -> Result<RegimeReport> {
    sys.validate()?;
    let splitting = 2.0 * sys.g;
    let ratio = splitting / (0.5 * (sys.gamma_qd + sys.gamma_cm));
    Ok(RegimeReport {
        regime: if ratio > 1.0 {
            Regime::Strong
        } else {
            Regime::Weak
        },
        splitting_at_resonance: splitting,
        resolvability_ratio: ratio,
    })
}

/// Purcell enhancement `3Qλ³/(4π²n³V)` for a mode of volume `volume_factor·(λ/n)³`.
///
/// The standard weak-coupling expression; with the volume quoted in cubic
/// reduced wavelengths it reduces to `3Q/(4π²·volume_factor)`.
pub fn purcell_factor(q: f64, volume_factor: f64, n: f64, wavelength_nm: f64) -> Result<f64> {
    check_positive("q", q)?;
    check_positive("volume_factor", volume_factor)?;
    check_positive("n", n)?;
    check_positive("wavelength_nm", wavelength_nm)?;
    let lambda_m = wavelength_nm * 1e-9;
    let volume = volume_factor * (lambda_m / n).powi(3);
    Ok(3.0 * q * lambda_m.powi(3) / (4.0 * std::f64::consts::PI.powi(2) * n.powi(3) * volume))
}
