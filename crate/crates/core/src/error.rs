use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("mixing fractions undefined: g = 0 at zero detuning (degenerate uncoupled states)")]
    DegenerateUncoupled,

    #[error("detuning does not change sign on [{t_lo} K, {t_hi} K]")]
    NoSignChange { t_lo: f64, t_hi: f64 },

    #[error("invalid energy grid: {0}")]
    InvalidGrid(String),

    #[error("grid spacing {spacing} meV is coarser than {limit} meV (a quarter of the narrowest feature)")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("peak initialization found {found} maxima, {requested} requested")]
    Initialization { found: usize, requested: usize },

    #[error("residual is not finite at the starting point")]
    NonFiniteResidual,

    #[error("fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("under-determined fit: {data} data values for {params} free parameters")]
    UnderDetermined { data: usize, params: usize },

    #[error("fit failed at T = {temperature} K: {source}")]
    AtTemperature {
        temperature: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid peak table: {0}")]
    InvalidTable(String),

    #[error("no guided slab mode at {wavelength_nm} nm (normalized index {b:.3e} below guidance threshold)")]
    SlabCutoff { wavelength_nm: f64, b: f64 },

    #[error("mode family p = {p} not found near {energy_mev} meV")]
    FamilyNotFound { p: u32, energy_mev: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}
