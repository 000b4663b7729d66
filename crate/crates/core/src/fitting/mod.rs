//! Inverse problems: Lorentzian peak extraction per spectrum and the
//! anticrossing fit of branch energies against temperature.

mod anticrossing;
pub mod lm;
mod peaks;

pub use anticrossing::{
    fit_anticrossing, linewidth_consistency, AnticrossingFit, LinewidthRow, TuningParam,
    DEFAULT_FREE,
};
pub use lm::{lm_minimize, Bounds, LmOptions, LmReport, Termination};
pub use peaks::{
    build_peak_table, build_peak_table_with, fit_doublet, LorentzPeak, PeakFit, PeakInit,
    INITIAL_FWHM,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FitParam {
    /// Parameter name with its unit suffix, e.g. `g_meV`.
    pub name: String,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<FitParam>,
    pub residual_rms: f64,
    pub n_iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.value)
    }
}

/// Variances of `(e_upper, e_lower, gamma_upper, gamma_lower, amp_upper, amp_lower)`.
pub type RowCovariance = [f64; 6];

#[derive(Debug, Clone, PartialEq)]
pub struct PeakRow {
    pub temperature: f64,
    pub e_upper: f64,
    pub e_lower: f64,
    pub gamma_upper: f64,
    pub gamma_lower: f64,
    pub amp_upper: f64,
    pub amp_lower: f64,
    pub covariance: Option<RowCovariance>,
}

impl PeakRow {
    pub fn splitting(&self) -> f64 {
        self.e_upper - self.e_lower
    }
}

/// Branch energies, widths, and amplitudes per temperature, upper branch always the
/// higher energy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakTable {
    pub rows: Vec<PeakRow>,
}

impl PeakTable {
    pub fn new(rows: Vec<PeakRow>) -> Result<Self> {
        let table = Self { rows };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            let fields = [
                r.temperature,
                r.e_upper,
                r.e_lower,
                r.gamma_upper,
                r.gamma_lower,
                r.amp_upper,
                r.amp_lower,
            ];
            if fields.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTable(format!("row {i}: non-finite value")));
            }
            if r.e_upper < r.e_lower {
                return Err(Error::InvalidTable(format!("row {i}: e_upper < e_lower")));
            }
            if !(r.gamma_upper > 0.0 && r.gamma_lower > 0.0) {
                return Err(Error::InvalidTable(format!("row {i}: widths must be > 0")));
            }
            if i > 0 && r.temperature <= self.rows[i - 1].temperature {
                return Err(Error::InvalidTable(format!(
                    "row {i}: temperatures must be strictly increasing"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn min_splitting(&self) -> Option<f64> {
        self.rows.iter().map(PeakRow::splitting).reduce(f64::min)
    }
}
