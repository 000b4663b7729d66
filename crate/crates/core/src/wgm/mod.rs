//! Whispering-gallery modes of a thin microdisk.
//!
//! The vertical confinement is collapsed into a slab effective index, and the
//! in-plane problem is treated as a closed disk of radius `R`: a mode `(m, p)`
//! resonates where `n_eff(λ)·(2π/λ)·R` equals the `p`-th zero of `J_m`. The
//! closed boundary ignores radiation leakage, so positions carry an error of a
//! fraction of a free spectral range; mode counts are the intended use.

mod bessel;
mod slab;

use std::fmt;
use std::str::FromStr;

pub use bessel::{bessel_j, bessel_zero, bessel_zeros_in};
pub use slab::{slab_n_eff, GUIDANCE_THRESHOLD};

use crate::error::{check_positive, Error, Result};
use crate::photonics::wavelength_from_energy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexModel {
    Constant(f64),
    /// `n(λ) = n0 + dn_dlambda·(λ − lambda0)`, wavelengths in nm.
    Linear {
        n0: f64,
        lambda0_nm: f64,
        dn_dlambda_per_nm: f64,
    },
}

impl IndexModel {
    pub fn at(&self, wavelength_nm: f64) -> f64 {
        match *self {
            IndexModel::Constant(n) => n,
            IndexModel::Linear {
                n0,
                lambda0_nm,
                dn_dlambda_per_nm,
            } => n0 + dn_dlambda_per_nm * (wavelength_nm - lambda0_nm),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskGeometry {
    pub diameter_um: f64,
    pub thickness_nm: f64,
    pub core_index: IndexModel,
    pub clad_index: f64,
}

impl Default for DiskGeometry {
    fn default() -> Self {
        Self {
            diameter_um: 2.0,
            thickness_nm: 250.0,
            core_index: IndexModel::Constant(3.5),
            clad_index: 1.0,
        }
    }
}

impl DiskGeometry {
    pub fn validate(&self) -> Result<()> {
        check_positive("diameter_um", self.diameter_um)?;
        check_positive("thickness_nm", self.thickness_nm)?;
        check_positive("clad_index", self.clad_index)?;
        Ok(())
    }

    fn radius_nm(&self) -> f64 {
        self.diameter_um * 500.0
    }

    /// Normalized in-plane size `n_eff·k·R` at photon energy `energy_mev`.
    pub fn size_parameter(&self, energy_mev: f64, pol: Polarization) -> Result<f64> {
        let lambda = wavelength_from_energy(energy_mev);
        let n = slab_n_eff(self, lambda, pol)?;
        Ok(n * 2.0 * std::f64::consts::PI * self.radius_nm() / lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    Te,
    Tm,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::Te, Polarization::Tm];
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::Te => "TE",
            Polarization::Tm => "TM",
        })
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TE" => Ok(Polarization::Te),
            "TM" => Ok(Polarization::Tm),
            _ => Err(Error::Config(format!("unknown polarization `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WgmMode {
    pub azimuthal_m: u32,
    pub radial_p: u32,
    pub polarization: Polarization,
    pub energy_mev: f64,
    pub n_eff: f64,
}

/// All `(m ≥ 1, p, pol)` resonances with energy in `[e_min, e_max]`, sorted by energy.
pub fn find_modes(geom: &DiskGeometry, e_min: f64, e_max: f64) -> Result<Vec<WgmMode>> {
    geom.validate()?;
    if e_max.is_nan() || e_min.is_nan() || e_max <= e_min {
        return Ok(Vec::new());
    }
    check_positive("e_min", e_min)?;

    let mut modes = Vec::new();
    for pol in Polarization::ALL {
        let x_lo = geom.size_parameter(e_min, pol)?;
        let x_hi = geom.size_parameter(e_max, pol)?;
        let m_max = x_hi.floor() as u32;
        for m in 1..=m_max {
            for (p, zero) in bessel_zeros_in(m, x_lo, x_hi) {
                let energy = solve_resonance(geom, pol, zero, e_min, e_max)?;
                let lambda = wavelength_from_energy(energy);
                modes.push(WgmMode {
                    azimuthal_m: m,
                    radial_p: p,
                    polarization: pol,
                    energy_mev: energy,
                    n_eff: slab_n_eff(geom, lambda, pol)?,
                });
            }
        }
    }
    modes.sort_by(|a, b| a.energy_mev.total_cmp(&b.energy_mev));
    Ok(modes)
}

/// Energy of the `(m, p, pol)` resonance, searching outward from `near_mev`.
pub fn resonance_energy(
    geom: &DiskGeometry,
    m: u32,
    p: u32,
    pol: Polarization,
    near_mev: f64,
) -> Result<f64> {
    geom.validate()?;
    check_positive("near_mev", near_mev)?;
    let zero = bessel_zero(m, p);
    let x_near = geom.size_parameter(near_mev, pol)?;
    let (mut lo, mut hi) = (near_mev, near_mev);
    if x_near < zero {
        while geom.size_parameter(hi, pol)? < zero {
            lo = hi;
            hi *= 1.05;
        }
    } else {
        while geom.size_parameter(lo, pol)? > zero {
            hi = lo;
            lo /= 1.05;
        }
    }
    solve_resonance(geom, pol, zero, lo, hi)
}

/// Spacing between the consecutive-`m` resonances of family `(p, pol)` that bracket `near_mev`.
pub fn free_spectral_range(
    geom: &DiskGeometry,
    near_mev: f64,
    pol: Polarization,
    p: u32,
) -> Result<f64> {
    geom.validate()?;
    let x = geom.size_parameter(near_mev, pol)?;
    let not_found = || Error::FamilyNotFound {
        p,
        energy_mev: near_mev,
    };
    if p == 0 || bessel_zero(1, p) > x {
        return Err(not_found());
    }
    let mut m = 1;
    while bessel_zero(m + 1, p) <= x {
        m += 1;
    }
    let lower = resonance_energy(geom, m, p, pol, near_mev)?;
    let upper = resonance_energy(geom, m + 1, p, pol, near_mev)?;
    Ok(upper - lower)
}

/// Bisection on `n_eff(E)·k(E)·R − zero`, which increases with `E`.
fn solve_resonance(
    geom: &DiskGeometry,
    pol: Polarization,
    zero: f64,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-14 * mid {
            break;
        }
        if geom.size_parameter(mid, pol)? < zero {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
