//! Photoluminescence spectrum synthesis.
//!
//! Each dressed branch emits an area-normalized Lorentzian whose weight is the
//! branch's exciton/photon mix of the two detection efficiencies. The sum is
//! convolved with a Gaussian instrument response on a uniform energy grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::model::{dressed_states, CoupledSystem};
use crate::tuning::TuningModel;

/// FWHM / σ for a Gaussian.
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Kernel half-length in standard deviations.
const KERNEL_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl EnergyGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !start.is_finite() || !(step.is_finite() && step > 0.0) || len < 2 {
            return Err(Error::InvalidGrid(format!(
                "start={start} step={step} len={len}"
            )));
        }
        Ok(Self { start, step, len })
    }

    /// Odd-length grid `center + k·step` for `|k·step| ≤ half_width`.
    pub fn centered(center: f64, half_width: f64, step: f64) -> Result<Self> {
        check_positive("half_width", half_width)?;
        check_positive("step", step)?;
        let k = (half_width / step).round().max(1.0) as usize;
        Self::new(center - k as f64 * step, step, 2 * k + 1)
    }

    pub fn energies(&self) -> Vec<f64> {
        let center_index = (self.len - 1) as f64 / 2.0;
        let center = self.start + center_index * self.step;
        // Offsets from the center keep mirror-image points symmetric in floating point.
        (0..self.len)
            .map(|i| center + (i as f64 - center_index) * self.step)
            .collect()
    }
}

/// Where each spectrum of a series is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// Same grid for every temperature.
    Fixed(EnergyGrid),
    /// Grid centered on the mean bare energy at each temperature.
    Centered { half_width: f64, step: f64 },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Centered {
            half_width: 3.0,
            step: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// K
    pub temperature: f64,
    /// meV, uniformly spaced and increasing
    pub energies: Vec<f64>,
    pub intensities: Vec<f64>,
    /// FWHM (meV) of the Gaussian instrument response; 0 disables it.
    pub resolution_fwhm: f64,
}

impl Spectrum {
    pub fn new(
        temperature: f64,
        energies: Vec<f64>,
        intensities: Vec<f64>,
        resolution_fwhm: f64,
    ) -> Result<Self> {
        let spec = Self {
            temperature,
            energies,
            intensities,
            resolution_fwhm,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpectrum(msg));
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad(format!("temperature {} K", self.temperature));
        }
        if !(self.resolution_fwhm.is_finite() && self.resolution_fwhm >= 0.0) {
            return bad(format!("resolution {} meV", self.resolution_fwhm));
        }
        if self.energies.len() != self.intensities.len() {
            return bad(format!(
                "{} energies vs {} intensities",
                self.energies.len(),
                self.intensities.len()
            ));
        }
        if self.energies.len() < 2 {
            return bad("fewer than two samples".into());
        }
        if let Some(i) = self
            .intensities
            .iter()
            .position(|v| !(v.is_finite() && *v >= 0.0))
        {
            return bad(format!("intensity {} at sample {i}", self.intensities[i]));
        }
        let step = self.step();
        if !(step.is_finite() && step > 0.0) {
            return bad("energies must be finite and strictly increasing".into());
        }
        let first = self.energies[0];
        for (i, e) in self.energies.iter().enumerate() {
            let expected = first + i as f64 * step;
            let tol = 1e-9 * step + 8.0 * f64::EPSILON * e.abs();
            if (e - expected).abs() > tol || e.is_nan() {
                return bad(format!("non-uniform grid at sample {i}"));
            }
            if i > 0 && *e <= self.energies[i - 1] {
                return bad(format!("energies not increasing at sample {i}"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn step(&self) -> f64 {
        let n = self.energies.len();
        (self.energies[n - 1] - self.energies[0]) / (n - 1) as f64
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensities.iter().copied().fold(0.0, f64::max)
    }

    /// Trapezoidal integral of the intensity over energy.
    pub fn area(&self) -> f64 {
        trapezoid(&self.intensities, self.step())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionModel {
    /// Detection efficiency of the exciton channel.
    pub eta_x: f64,
    /// Detection efficiency of the cavity channel.
    pub eta_c: f64,
    /// Flat background (counts).
    pub background: f64,
}

impl Default for EmissionModel {
    fn default() -> Self {
        Self {
            eta_x: 100.0,
            eta_c: 250.0,
            background: 10.0,
        }
    }
}

impl EmissionModel {
    pub fn validate(&self) -> Result<()> {
        check_non_negative("eta_x", self.eta_x)?;
        check_non_negative("eta_c", self.eta_c)?;
        check_non_negative("background", self.background)?;
        if self.eta_x + self.eta_c <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "eta_x + eta_c",
                value: self.eta_x + self.eta_c,
                reason: "must be > 0",
            });
        }
        Ok(())
    }

    /// Integrated weight of a branch with exciton fraction `x`.
    pub fn branch_amplitude(&self, x: f64) -> f64 {
        self.eta_x * x + self.eta_c * (1.0 - x)
    }
}

/// Area-normalized Lorentzian of full width `fwhm`.
pub fn lorentzian(e: f64, center: f64, fwhm: f64) -> f64 {
    let hw = 0.5 * fwhm;
    let d = e - center;
    hw / (std::f64::consts::PI * (d * d + hw * hw))
}

/// Sampled unit-sum Gaussian kernel for a response of full width `fwhm` on grid spacing `step`.
pub fn gaussian_kernel(step: f64, fwhm: f64) -> Vec<f64> {
    if fwhm <= 0.0 {
        return vec![1.0];
    }
    let sigma = fwhm / FWHM_PER_SIGMA;
    let half = (KERNEL_SIGMAS * sigma / step).ceil() as isize;
    let mut kernel: Vec<f64> = (-half..=half)
        .map(|k| {
            let x = k as f64 * step / sigma;
            (-0.5 * x * x).exp()
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= norm);
    kernel
}

/// Convolution with a Gaussian instrument response, padding each edge with its end value.
pub fn convolve_gaussian(values: &[f64], step: f64, fwhm: f64) -> Vec<f64> {
    let kernel = gaussian_kernel(step, fwhm);
    if kernel.len() == 1 {
        return values.to_vec();
    }
    let half = (kernel.len() / 2) as isize;
    let last = values.len() as isize - 1;
    (0..values.len() as isize)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(j, w)| {
                    let src = (i + half - j as isize).clamp(0, last);
                    w * values[src as usize]
                })
                .sum()
        })
        .collect()
}

/// Intensities of the two-branch emission of `sys` sampled at `energies`.
pub fn doublet_intensities(
    sys: &CoupledSystem,
    em: &EmissionModel,
    energies: &[f64],
    step: f64,
    resolution_fwhm: f64,
) -> Result<Vec<f64>> {
    em.validate()?;
    check_non_negative("resolution_fwhm", resolution_fwhm)?;
    let ds = dressed_states(sys)?;
    let narrowest = ds.gamma_upper.min(ds.gamma_lower);
    if step > narrowest / 4.0 {
        return Err(Error::GridTooCoarse {
            spacing: step,
            limit: narrowest / 4.0,
        });
    }
    let a_upper = em.branch_amplitude(ds.exciton_fraction_upper);
    let a_lower = em.branch_amplitude(ds.exciton_fraction_lower);
    let lines: Vec<f64> = energies
        .iter()
        .map(|&e| {
            a_upper * lorentzian(e, ds.e_upper, ds.gamma_upper)
                + a_lower * lorentzian(e, ds.e_lower, ds.gamma_lower)
        })
        .collect();
    Ok(convolve_gaussian(&lines, step, resolution_fwhm)
        .into_iter()
        .map(|v| v + em.background)
        .collect())
}

pub fn doublet_spectrum(
    sys: &CoupledSystem,
    em: &EmissionModel,
    grid: &EnergyGrid,
    resolution_fwhm: f64,
    temperature: f64,
) -> Result<Spectrum> {
    let energies = grid.energies();
    let intensities = doublet_intensities(sys, em, &energies, grid.step, resolution_fwhm)?;
    Spectrum::new(temperature, energies, intensities, resolution_fwhm)
}

/// One spectrum per temperature, in input order.
pub fn simulate_series(
    model: &TuningModel,
    g: f64,
    em: &EmissionModel,
    temps: &[f64],
    grid: &GridSpec,
    resolution_fwhm: f64,
) -> Result<Vec<Spectrum>> {
    model.validate()?;
    if temps.is_empty() {
        return Err(Error::InvalidParameter {
            name: "temps",
            value: 0.0,
            reason: "at least one temperature is required",
        });
    }
    temps
        .par_iter()
        .map(|&t| {
            let sys = model.system_at(t, g)?;
            let grid = match *grid {
                GridSpec::Fixed(grid) => grid,
                GridSpec::Centered { half_width, step } => {
                    EnergyGrid::centered(0.5 * (sys.e_qd + sys.e_c), half_width, step)?
                }
            };
            doublet_spectrum(&sys, em, &grid, resolution_fwhm, t)
        })
        .collect()
}

/// Adds independent Gaussian noise of standard deviation `sigma` to every sample,
/// clamping at zero. The same seed always yields the same spectrum.
pub fn add_noise(spec: &Spectrum, sigma: f64, seed: u64) -> Result<Spectrum> {
    check_non_negative("sigma", sigma)?;
    if sigma == 0.0 {
        return Ok(spec.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    let intensities = spec
        .intensities
        .iter()
        .map(|v| (v + normal.sample(&mut rng)).max(0.0))
        .collect();
    Ok(Spectrum {
        intensities,
        ..spec.clone()
    })
}

pub(crate) fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    step * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}
