//! Fundamental guided mode of a symmetric three-layer slab.

use std::f64::consts::FRAC_PI_2;

use super::{DiskGeometry, Polarization};
use crate::error::{Error, Result};

/// Below this normalized propagation constant `b = (n² − n_clad²)/(n_core² − n_clad²)`
/// the field lives almost entirely in the cladding and the mode is reported as cut off.
pub const GUIDANCE_THRESHOLD: f64 = 1e-2;

/// Effective index of the lowest-order vertical mode at vacuum wavelength `wavelength_nm`.
///
/// Solves `u·tan u = c·√(V² − u²)` on the first branch `u ∈ (0, π/2)`, where
/// `c = 1` for TE and `c = (n_core/n_clad)²` for TM.
pub fn slab_n_eff(geom: &DiskGeometry, wavelength_nm: f64, pol: Polarization) -> Result<f64> {
    let n_core = geom.core_index.at(wavelength_nm);
    let n_clad = geom.clad_index;
    if n_core.is_nan() || n_core <= n_clad {
        return Err(Error::InvalidParameter {
            name: "core_index",
            value: n_core,
            reason: "must exceed the cladding index",
        });
    }
    let half_phase = std::f64::consts::PI * geom.thickness_nm / wavelength_nm;
    let v = half_phase * (n_core * n_core - n_clad * n_clad).sqrt();
    let c = match pol {
        Polarization::Te => 1.0,
        Polarization::Tm => (n_core / n_clad).powi(2),
    };
    let f = |u: f64| u * u.tan() - c * (v * v - u * u).max(0.0).sqrt();

    let mut lo = 0.0;
    let mut hi = v.min(FRAC_PI_2);
    // f(0) < 0 and f → +∞ (or f(V) > 0) at the upper end.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let b = 1.0 - (u / v).powi(2);
    if b < GUIDANCE_THRESHOLD {
        return Err(Error::SlabCutoff { wavelength_nm, b });
    }
    let n_sq = n_core * n_core - (u / half_phase).powi(2);
    Ok(n_sq.sqrt())
}
