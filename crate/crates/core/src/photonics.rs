//! Cavity photonics: oscillator strength ↔ coupling constant, mode volume,
//! quality factor, and energy/wavelength conversion.
//!
//! The coupling expression `√(e²f / (4ε₀ε_r m V))` is an angular frequency; it is
//! evaluated in SI and multiplied by ħ to obtain the coupling energy `g`. With
//! `V = 6(λ/n)³` this lands `g ≈ 0.2 meV` for `f ≈ 100`.

use crate::error::{check_positive, Result};

/// `hc` in eV·nm (CODATA 2018).
pub const HC_EV_NM: f64 = 1239.841984;

/// Vacuum wavelength in nm of a photon of energy `energy_mev`.
pub fn wavelength_from_energy(energy_mev: f64) -> f64 {
    HC_EV_NM * 1e3 / energy_mev
}

pub fn energy_from_wavelength(wavelength_nm: f64) -> f64 {
    HC_EV_NM * 1e3 / wavelength_nm
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// F/m
    pub vacuum_permittivity: f64,
    /// kg
    pub electron_mass: f64,
    /// C
    pub elementary_charge: f64,
    /// J·s
    pub reduced_planck: f64,
    /// eV·nm
    pub hc: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        vacuum_permittivity: 8.8541878128e-12,
        electron_mass: 9.1093837015e-31,
        elementary_charge: 1.602176634e-19,
        reduced_planck: 1.054571817e-34,
        hc: HC_EV_NM,
    };

    pub fn validate(&self) -> Result<()> {
        check_positive("vacuum_permittivity", self.vacuum_permittivity)?;
        check_positive("electron_mass", self.electron_mass)?;
        check_positive("elementary_charge", self.elementary_charge)?;
        check_positive("reduced_planck", self.reduced_planck)?;
        check_positive("hc", self.hc)
    }

    fn joules_per_mev(&self) -> f64 {
        self.elementary_charge * 1e-3
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityOptics {
    pub emission_energy_mev: f64,
    pub n_eff: f64,
    /// Relative permittivity seen by the emitter; `None` means `n_eff²`.
    pub eps_r: Option<f64>,
    /// `V = mode_volume_factor · (λ/n_eff)³`.
    pub mode_volume_factor: f64,
    /// Field-amplitude overlap between the dot and the mode antinode, in (0, 1].
    pub spatial_overlap: f64,
    pub constants: PhysicalConstants,
}

impl Default for CavityOptics {
    fn default() -> Self {
        Self {
            emission_energy_mev: 1661.0,
            n_eff: 3.2,
            eps_r: None,
            mode_volume_factor: 6.0,
            spatial_overlap: 1.0,
            constants: PhysicalConstants::CODATA_2018,
        }
    }
}

impl CavityOptics {
    pub fn validate(&self) -> Result<()> {
        use crate::error::Error;
        check_positive("emission_energy_mev", self.emission_energy_mev)?;
        if !(1.0..=4.0).contains(&self.n_eff) {
            return Err(Error::InvalidParameter {
                name: "n_eff",
                value: self.n_eff,
                reason: "must lie in [1, 4]",
            });
        }
        let eps_r = self.eps_r();
        if !(eps_r.is_finite() && eps_r > 1.0) {
            return Err(Error::InvalidParameter {
                name: "eps_r",
                value: eps_r,
                reason: "must be finite and > 1",
            });
        }
        check_positive("mode_volume_factor", self.mode_volume_factor)?;
        if !(self.spatial_overlap > 0.0 && self.spatial_overlap <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "spatial_overlap",
                value: self.spatial_overlap,
                reason: "must lie in (0, 1]",
            });
        }
        self.constants.validate()
    }

    pub fn eps_r(&self) -> f64 {
        self.eps_r.unwrap_or(self.n_eff * self.n_eff)
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.constants.hc * 1e3 / self.emission_energy_mev
    }

    /// Mode volume in m³.
    pub fn mode_volume(&self) -> f64 {
        let reduced_m = self.wavelength_nm() * 1e-9 / self.n_eff;
        self.mode_volume_factor * reduced_m.powi(3)
    }

    /// `e²/(4ε₀ε_r m V)` in s⁻²; the squared coupling rate per unit oscillator strength.
    fn rate_sq_per_f(&self) -> f64 {
        let c = &self.constants;
        c.elementary_charge.powi(2)
            / (4.0 * c.vacuum_permittivity * self.eps_r() * c.electron_mass * self.mode_volume())
    }
}

/// Coupling energy `g` (meV) of an exciton with oscillator strength `f`.
pub fn coupling_from_f(f: f64, optics: &CavityOptics) -> Result<f64> {
    check_positive("f", f)?;
    optics.validate()?;
    let omega = (f * optics.rate_sq_per_f()).sqrt();
    let c = &optics.constants;
    Ok(optics.spatial_overlap * c.reduced_planck * omega / c.joules_per_mev())
}

/// Oscillator strength that produces coupling `g_mev`; the exact inverse of [`coupling_from_f`].
pub fn f_from_coupling(g_mev: f64, optics: &CavityOptics) -> Result<f64> {
    check_positive("g", g_mev)?;
    optics.validate()?;
    let c = &optics.constants;
    let omega = g_mev / optics.spatial_overlap * c.joules_per_mev() / c.reduced_planck;
    Ok(omega * omega / optics.rate_sq_per_f())
}

/// `Q = E/γ`.
pub fn quality_factor(energy_mev: f64, gamma_mev: f64) -> Result<f64> {
    check_positive("energy", energy_mev)?;
    check_positive("gamma", gamma_mev)?;
    Ok(energy_mev / gamma_mev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optics(n: f64) -> CavityOptics {
        CavityOptics {
            emission_energy_mev: energy_from_wavelength(746.4),
            n_eff: n,
            ..CavityOptics::default()
        }
    }

    #[test]
    fn wavelength_conversions() {
        assert!((wavelength_from_energy(1661.0) - 746.4425).abs() < 1e-3);
        assert!((wavelength_from_energy(1239.841984) - 1000.0).abs() < 1e-12);
        for e in [1.0, 1661.0, 2.5e4] {
            let back = energy_from_wavelength(wavelength_from_energy(e));
            assert!((back - e).abs() <= 1e-12 * e);
        }
    }

    #[test]
    fn mode_volume_values() {
        let o = CavityOptics {
            n_eff: 3.5,
            ..optics(3.5)
        };
        assert!(
            (o.mode_volume() - 5.82e-20).abs() < 0.01e-20,
            "{}",
            o.mode_volume()
        );

        // λ/n = 1000 nm, factor 1 → 1e-18 m³
        let unit = CavityOptics {
            emission_energy_mev: energy_from_wavelength(2000.0),
            n_eff: 2.0,
            mode_volume_factor: 1.0,
            ..CavityOptics::default()
        };
        assert!((unit.mode_volume() - 1e-18).abs() < 1e-30);

        let a = optics(1.6).mode_volume();
        let b = optics(3.2).mode_volume();
        assert!((a / b - 8.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_near_reference_scale() {
        let g = coupling_from_f(100.0, &optics(3.2)).unwrap();
        assert!((g - 0.21).abs() < 0.005, "g = {g}");
        let g4 = coupling_from_f(400.0, &optics(3.2)).unwrap();
        assert!((g4 / g - 2.0).abs() < 1e-12);
    }

    #[test]
    fn oscillator_strength_from_reference_coupling() {
        let f = f_from_coupling(0.2, &optics(3.2)).unwrap();
        assert!((f - 90.0).abs() < 1.5, "f = {f}");
        let f3 = f_from_coupling(0.2, &optics(3.0)).unwrap();
        assert!((f3 - 97.0).abs() < 1.5, "f = {f3}");
    }

    #[test]
    fn inverse_round_trip() {
        for f in [1.0, 37.5, 100.0, 2.0e3] {
            let o = optics(3.3);
            let back = f_from_coupling(coupling_from_f(f, &o).unwrap(), &o).unwrap();
            assert!((back - f).abs() <= 1e-12 * f);
        }
    }

    #[test]
    fn spatial_overlap_reduces_coupling() {
        let full = coupling_from_f(100.0, &optics(3.2)).unwrap();
        let partial = coupling_from_f(
            100.0,
            &CavityOptics {
                spatial_overlap: 0.5,
                ..optics(3.2)
            },
        )
        .unwrap();
        assert!((partial / full - 0.5).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_f_volume_and_permittivity() {
        let base = optics(3.2);
        let g = |o: &CavityOptics, f: f64| coupling_from_f(f, o).unwrap();
        assert!(g(&base, 120.0) > g(&base, 100.0));
        let bigger = CavityOptics {
            mode_volume_factor: 8.0,
            ..base
        };
        assert!(g(&bigger, 100.0) < g(&base, 100.0));
        let stiffer = CavityOptics {
            eps_r: Some(12.0),
            ..base
        };
        assert!(g(&stiffer, 100.0) < g(&base, 100.0));
    }

    #[test]
    fn quality_factor_values() {
        let q = quality_factor(1660.0, 0.2).unwrap();
        assert!((q - 8300.0).abs() < 1e-9);
        assert!((q - 8000.0).abs() / 8000.0 < 0.05);
        assert_eq!(quality_factor(3.0, 3.0).unwrap(), 1.0);
        assert!((quality_factor(1660.0, 0.1).unwrap() / q - 2.0).abs() < 1e-12);
        assert!(quality_factor(1660.0, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_optics() {
        let bad = CavityOptics {
            n_eff: 5.0,
            ..CavityOptics::default()
        };
        assert!(f_from_coupling(0.2, &bad).is_err());
        assert!(f_from_coupling(-0.2, &CavityOptics::default()).is_err());
    }
}
