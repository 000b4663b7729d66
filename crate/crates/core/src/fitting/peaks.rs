use rayon::prelude::*;

use super::lm::{lm_minimize, Bounds, LmOptions, LmReport};
use super::{FitParam, FitResult, PeakRow, PeakTable};
use crate::error::{Error, Result};
use crate::lineshape::{convolve_gaussian, lorentzian, Spectrum};

/// Starting FWHM (meV) for auto-initialized peaks.
pub const INITIAL_FWHM: f64 = 0.2;

/// Starting point for a peak fit. Amplitudes are integrated areas.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakInit {
    pub centers: Vec<f64>,
    pub fwhms: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub background: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzPeak {
    pub center: f64,
    pub fwhm: f64,
    /// Integrated area (counts·meV).
    pub amplitude: f64,
    pub sigma_center: f64,
    pub sigma_fwhm: f64,
    pub sigma_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakFit {
    pub temperature: f64,
    /// Sorted by increasing center.
    pub peaks: Vec<LorentzPeak>,
    pub background: f64,
    pub sigma_background: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl PeakFit {
    /// Two-peak fit as a peak-table row; the higher-energy peak is the upper branch.
    pub fn to_row(&self) -> Result<PeakRow> {
        let [lower, upper] = self.peaks[..] else {
            return Err(Error::InvalidTable(format!(
                "a table row needs 2 peaks, fit has {}",
                self.peaks.len()
            )));
        };
        Ok(PeakRow {
            temperature: self.temperature,
            e_upper: upper.center,
            e_lower: lower.center,
            gamma_upper: upper.fwhm,
            gamma_lower: lower.fwhm,
            amp_upper: upper.amplitude,
            amp_lower: lower.amplitude,
            covariance: Some([
                upper.sigma_center.powi(2),
                lower.sigma_center.powi(2),
                upper.sigma_fwhm.powi(2),
                lower.sigma_fwhm.powi(2),
                upper.sigma_amplitude.powi(2),
                lower.sigma_amplitude.powi(2),
            ]),
        })
    }

    pub fn to_fit_result(&self) -> FitResult {
        let mut params = vec![FitParam {
            name: "background".into(),
            value: self.background,
            sigma: self.sigma_background,
        }];
        for (i, p) in self.peaks.iter().enumerate() {
            let k = i + 1;
            params.push(FitParam {
                name: format!("center_{k}_meV"),
                value: p.center,
                sigma: p.sigma_center,
            });
            params.push(FitParam {
                name: format!("fwhm_{k}_meV"),
                value: p.fwhm,
                sigma: p.sigma_fwhm,
            });
            params.push(FitParam {
                name: format!("area_{k}"),
                value: p.amplitude,
                sigma: p.sigma_amplitude,
            });
        }
        FitResult {
            params,
            residual_rms: self.residual_rms,
            n_iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// Fits `n_peaks` (1 or 2) Lorentzians plus a flat background to `spec`, with the
/// spectrum's instrument response applied inside the model.
pub fn fit_doublet(
    spec: &Spectrum,
    n_peaks: usize,
    init: Option<&PeakInit>,
    opts: &LmOptions,
) -> Result<PeakFit> {
    spec.validate()?;
    if !(1..=2).contains(&n_peaks) {
        return Err(Error::InvalidParameter {
            name: "n_peaks",
            value: n_peaks as f64,
            reason: "must be 1 or 2",
        });
    }
    let init = match init {
        Some(init) => {
            if init.centers.len() != n_peaks
                || init.fwhms.len() != n_peaks
                || init.amplitudes.len() != n_peaks
            {
                return Err(Error::Initialization {
                    found: init.centers.len(),
                    requested: n_peaks,
                });
            }
            init.clone()
        }
        None => auto_init(spec, n_peaks)?,
    };

    let step = spec.step();
    let first = spec.energies[0];
    let last = spec.energies[spec.len() - 1];
    // Centers are fitted as offsets from the grid midpoint so that the finite-difference
    // step is not set by the absolute photon energy.
    let origin = 0.5 * (first + last);
    let offsets: Vec<f64> = spec.energies.iter().map(|e| e - origin).collect();

    let mut p0 = vec![init.background];
    let mut bounds = Bounds::unbounded(1 + 3 * n_peaks);
    for k in 0..n_peaks {
        p0.extend([init.centers[k] - origin, init.fwhms[k], init.amplitudes[k]]);
        let base = 1 + 3 * k;
        bounds.lower[base] = Some(first - origin);
        bounds.upper[base] = Some(last - origin);
        bounds.lower[base + 1] = Some(0.1 * step);
        bounds.upper[base + 1] = Some(last - first);
        bounds.lower[base + 2] = Some(0.0);
    }

    let resolution = spec.resolution_fwhm;
    let data = &spec.intensities;
    let residuals = |p: &[f64]| -> Vec<f64> {
        let lines: Vec<f64> = offsets
            .iter()
            .map(|&x| {
                (0..n_peaks)
                    .map(|k| {
                        let b = 1 + 3 * k;
                        p[b + 2] * lorentzian(x, p[b], p[b + 1])
                    })
                    .sum()
            })
            .collect();
        convolve_gaussian(&lines, step, resolution)
            .iter()
            .zip(data)
            .map(|(m, d)| m + p[0] - d)
            .collect()
    };

    let report = lm_minimize(residuals, &p0, &bounds, opts)?;
    Ok(assemble(spec.temperature, origin, n_peaks, &report))
}

fn assemble(temperature: f64, origin: f64, n_peaks: usize, rep: &LmReport) -> PeakFit {
    let mut peaks: Vec<LorentzPeak> = (0..n_peaks)
        .map(|k| {
            let b = 1 + 3 * k;
            LorentzPeak {
                center: rep.params[b] + origin,
                fwhm: rep.params[b + 1],
                amplitude: rep.params[b + 2],
                sigma_center: rep.sigmas[b],
                sigma_fwhm: rep.sigmas[b + 1],
                sigma_amplitude: rep.sigmas[b + 2],
            }
        })
        .collect();
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    PeakFit {
        temperature,
        peaks,
        background: rep.params[0],
        sigma_background: rep.sigmas[0],
        residual_rms: rep.residual_rms,
        iterations: rep.iterations,
        converged: rep.converged(),
    }
}

/// Candidate peaks from the 5-sample moving average: the highest local maxima,
/// kept at least half the starting FWHM (and two grid steps) apart.
fn auto_init(spec: &Spectrum, n_peaks: usize) -> Result<PeakInit> {
    let smooth = moving_average(&spec.intensities, 5);
    let step = spec.step();
    let background = percentile(&spec.intensities, 5.0);

    let mut maxima: Vec<usize> = (1..smooth.len() - 1)
        .filter(|&i| smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1])
        .collect();
    maxima.sort_by(|&a, &b| smooth[b].total_cmp(&smooth[a]));

    let min_sep = (2.0 * step).max(0.5 * INITIAL_FWHM);
    let mut picked: Vec<usize> = Vec::with_capacity(n_peaks);
    for i in maxima {
        if picked
            .iter()
            .all(|&j| (spec.energies[i] - spec.energies[j]).abs() >= min_sep - 1e-12)
        {
            picked.push(i);
            if picked.len() == n_peaks {
                break;
            }
        }
    }
    if picked.len() < n_peaks {
        return Err(Error::Initialization {
            found: picked.len(),
            requested: n_peaks,
        });
    }
    picked.sort_unstable();
    let area_per_height = std::f64::consts::PI * INITIAL_FWHM / 2.0;
    Ok(PeakInit {
        centers: picked.iter().map(|&i| spec.energies[i]).collect(),
        fwhms: vec![INITIAL_FWHM; n_peaks],
        amplitudes: picked
            .iter()
            .map(|&i| ((smooth[i] - background) * area_per_height).max(f64::EPSILON))
            .collect(),
        background,
    })
}

fn moving_average(values: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

fn percentile(values: &[f64], pct: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (pct / 100.0 * (sorted.len() - 1) as f64).round() as usize;
    sorted[rank]
}

/// Two-peak fits of every spectrum, one row per temperature.
pub fn build_peak_table(series: &[Spectrum], opts: &LmOptions) -> Result<PeakTable> {
    build_peak_table_with(series, opts, |_| None)
}

/// Like [`build_peak_table`] with a per-spectrum starting point; `None` falls back to
/// auto-initialization.
pub fn build_peak_table_with<F>(series: &[Spectrum], opts: &LmOptions, init: F) -> Result<PeakTable>
where
    F: Fn(&Spectrum) -> Option<PeakInit> + Sync,
{
    if series.len() < 3 {
        return Err(Error::InvalidTable(format!(
            "at least 3 spectra required, got {}",
            series.len()
        )));
    }
    let rows = series
        .par_iter()
        .map(|spec| {
            let at = |e: Error| Error::AtTemperature {
                temperature: spec.temperature,
                source: Box::new(e),
            };
            let start = init(spec);
            let fit = fit_doublet(spec, 2, start.as_ref(), opts).map_err(at)?;
            if !fit.converged {
                return Err(at(Error::NotConverged {
                    iterations: fit.iterations,
                }));
            }
            fit.to_row().map_err(at)
        })
        .collect::<Result<Vec<_>>>()?;
    PeakTable::new(rows)
}
