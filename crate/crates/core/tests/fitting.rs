use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use cqed::fitting::{
    build_peak_table, build_peak_table_with, fit_anticrossing, fit_doublet, linewidth_consistency,
    lm_minimize, Bounds, LmOptions, PeakInit, PeakRow, PeakTable, TuningParam, DEFAULT_FREE,
};
use cqed::formats::read_peak_table;
use cqed::lineshape::{
    add_noise, doublet_spectrum, simulate_series, EmissionModel, EnergyGrid, GridSpec, Spectrum,
};
use cqed::model::{branch_linewidths, dressed_energies, CoupledSystem};
use cqed::tuning::TuningModel;

fn resonant_doublet() -> Spectrum {
    let sys = CoupledSystem::new(1684.0, 1684.0, 0.2, 0.2, 0.2).unwrap();
    let grid = EnergyGrid::centered(1684.0, 3.0, 0.01).unwrap();
    doublet_spectrum(&sys, &EmissionModel::default(), &grid, 0.08, 30.0).unwrap()
}

fn temps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

/// Exact branch observables of `model` at each temperature.
fn model_table(model: &TuningModel, g: f64, ts: &[f64]) -> PeakTable {
    let rows = ts
        .iter()
        .map(|&t| {
            let sys = model.system_at(t, g).unwrap();
            let (e_upper, e_lower) = dressed_energies(&sys).unwrap();
            let (gamma_upper, gamma_lower) = branch_linewidths(&sys).unwrap();
            PeakRow {
                temperature: t,
                e_upper,
                e_lower,
                gamma_upper,
                gamma_lower,
                amp_upper: 1.0,
                amp_lower: 1.0,
                covariance: None,
            }
        })
        .collect();
    PeakTable::new(rows).unwrap()
}

fn with_energy_noise(table: &PeakTable, sigma: f64, seed: u64) -> PeakTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut noisy = table.clone();
    for r in &mut noisy.rows {
        r.e_upper += normal.sample(&mut rng);
        r.e_lower += normal.sample(&mut rng);
    }
    noisy.validate().unwrap();
    noisy
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn noisy_doublet_centers_over_100_seeds() {
    let clean = resonant_doublet();
    let sigma = 0.05 * clean.max_intensity();
    let sq_errors: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let noisy = add_noise(&clean, sigma, seed).unwrap();
            let fit = fit_doublet(&noisy, 2, None, &LmOptions::default()).unwrap();
            assert!(fit.converged, "seed {seed}");
            (fit.peaks[0].center - 1683.8).powi(2) + (fit.peaks[1].center - 1684.2).powi(2)
        })
        .collect();
    let rms = (sq_errors.iter().sum::<f64>() / (2.0 * sq_errors.len() as f64)).sqrt();
    assert!(rms < 0.020, "center rms error {rms} meV");
}

#[test]
fn noise_free_doublet_widths_and_centers() {
    let fit = fit_doublet(&resonant_doublet(), 2, None, &LmOptions::default()).unwrap();
    for (p, c) in fit.peaks.iter().zip([1683.8, 1684.2]) {
        assert!((p.center - c).abs() < 1e-3);
        assert!((p.fwhm - 0.2).abs() < 1e-3);
    }
}

#[test]
fn shifting_energies_shifts_centers_exactly() {
    let clean = add_noise(&resonant_doublet(), 10.0, 3).unwrap();
    let base = fit_doublet(&clean, 2, None, &LmOptions::default()).unwrap();
    for delta in [0.37, -5.0, 12.25] {
        let shifted = Spectrum::new(
            clean.temperature,
            clean.energies.iter().map(|e| e + delta).collect(),
            clean.intensities.clone(),
            clean.resolution_fwhm,
        )
        .unwrap();
        let fit = fit_doublet(&shifted, 2, None, &LmOptions::default()).unwrap();
        for (a, b) in base.peaks.iter().zip(&fit.peaks) {
            assert!((b.center - a.center - delta).abs() < 1e-7, "Δ = {delta}");
            assert!((b.fwhm - a.fwhm).abs() < 1e-7);
        }
    }
}

#[test]
fn shifting_table_energies_leaves_g_unchanged() {
    let table = with_energy_noise(
        &model_table(&TuningModel::default(), 0.2, &temps(4.0, 44.0, 2.0)),
        0.02,
        5,
    );
    let opts = LmOptions::default();
    let base =
        fit_anticrossing(&table, &TuningModel::default(), None, &DEFAULT_FREE, &opts).unwrap();
    let delta = 1.75;
    let mut shifted = table.clone();
    for r in &mut shifted.rows {
        r.e_upper += delta;
        r.e_lower += delta;
    }
    let fit = fit_anticrossing(
        &shifted,
        &TuningModel::default(),
        None,
        &DEFAULT_FREE,
        &opts,
    )
    .unwrap();
    assert!((fit.g - base.g).abs() < 1e-6, "{} vs {}", fit.g, base.g);
    assert!((fit.model.qd_e0 - base.model.qd_e0 - delta).abs() < 1e-6);
    assert!((fit.model.cm_e0 - base.model.cm_e0 - delta).abs() < 1e-6);
}

#[test]
fn anticrossing_noise_free_within_one_percent() {
    let truth = TuningModel {
        qd_alpha: 0.52,
        cm_c2: 0.00045,
        ..TuningModel::default()
    };
    let table = model_table(&truth, 0.2, &temps(4.0, 44.0, 2.0));
    let fit = fit_anticrossing(
        &table,
        &TuningModel::default(),
        None,
        &DEFAULT_FREE,
        &LmOptions::default(),
    )
    .unwrap();
    assert!(fit.result.converged);
    assert!((fit.g - 0.2).abs() <= 0.002, "g = {}", fit.g);
}

#[test]
fn anticrossing_median_over_100_noisy_tables() {
    let clean = model_table(&TuningModel::default(), 0.2, &temps(4.0, 44.0, 2.0));
    let gs: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let table = with_energy_noise(&clean, 0.020, seed);
            let fit = fit_anticrossing(
                &table,
                &TuningModel::default(),
                None,
                &DEFAULT_FREE,
                &LmOptions::default(),
            )
            .unwrap();
            fit.g
        })
        .collect();
    let m = median(gs);
    assert!((m - 0.2).abs() < 0.02, "median g = {m}");
}

#[test]
fn g_uncertainty_grows_with_noise() {
    let clean = model_table(&TuningModel::default(), 0.2, &temps(4.0, 44.0, 2.0));
    let sigma_of = |t: &PeakTable| {
        fit_anticrossing(
            t,
            &TuningModel::default(),
            None,
            &DEFAULT_FREE,
            &LmOptions::default(),
        )
        .unwrap()
        .result
        .get("g_meV")
        .unwrap()
        .sigma
    };
    let s0 = sigma_of(&clean);
    for noise in [0.005, 0.02, 0.05] {
        let s = sigma_of(&with_energy_noise(&clean, noise, 11));
        assert!(s0 < s, "noise {noise}: {s0} !< {s}");
    }

    let spec = resonant_doublet();
    let s0 = fit_doublet(&spec, 2, None, &LmOptions::default())
        .unwrap()
        .peaks[0]
        .sigma_center;
    for frac in [0.01, 0.05, 0.1] {
        let noisy = add_noise(&spec, frac * spec.max_intensity(), 2).unwrap();
        let s = fit_doublet(&noisy, 2, None, &LmOptions::default())
            .unwrap()
            .peaks[0]
            .sigma_center;
        assert!(s0 < s && s.is_finite(), "noise {frac}: {s0} !< {s}");
    }
}

#[test]
fn series_table_has_four_hundred_microvolt_gap_and_fits_back() {
    let model = TuningModel::default();
    let ts = temps(4.0, 44.0, 2.0);
    let series = simulate_series(
        &model,
        0.2,
        &EmissionModel::default(),
        &ts,
        &GridSpec::default(),
        0.08,
    )
    .unwrap();
    let table = build_peak_table(&series, &LmOptions::default()).unwrap();
    assert_eq!(table.len(), ts.len());
    assert!(table.rows.iter().all(|r| r.e_upper >= r.e_lower));
    let gap = table.min_splitting().unwrap();
    assert!((gap - 0.4).abs() < 0.01, "minimum splitting {gap}");

    let fit = fit_anticrossing(&table, &model, None, &DEFAULT_FREE, &LmOptions::default()).unwrap();
    assert!((fit.g - 0.2).abs() < 0.002, "g = {}", fit.g);
}

#[test]
fn uncoupled_series_crosses() {
    let model = TuningModel::default();
    let ts = temps(20.0, 40.0, 1.0);
    let series = simulate_series(
        &model,
        0.0,
        &EmissionModel::default(),
        &ts,
        &GridSpec::default(),
        0.08,
    )
    .unwrap();
    // Start each fit on the bare lines so the two peaks keep their identities.
    let init = |s: &Spectrum| {
        let sys = model.system_at(s.temperature, 0.0).unwrap();
        Some(PeakInit {
            centers: vec![sys.e_c.min(sys.e_qd), sys.e_c.max(sys.e_qd)],
            fwhms: vec![0.2, 0.2],
            amplitudes: vec![100.0, 100.0],
            background: 10.0,
        })
    };
    let table = build_peak_table_with(&series, &LmOptions::default(), init).unwrap();
    assert_eq!(table.len(), ts.len());
    let gap = table.min_splitting().unwrap();
    assert!(gap < 0.08, "uncoupled minimum splitting {gap}");
}

#[test]
fn shipped_dataset_gives_g_near_two_tenths_mev() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_peaks.csv");
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# Synthetic data"));
    let table = read_peak_table(&text, std::path::Path::new(path)).unwrap();
    assert_eq!(table.len(), 10);
    let fit = fit_anticrossing(
        &table,
        &TuningModel::default(),
        None,
        &DEFAULT_FREE,
        &LmOptions::default(),
    )
    .unwrap();
    assert!((0.18..=0.22).contains(&fit.g), "g = {}", fit.g);
}

#[test]
fn fixed_parameter_subset() {
    let table = model_table(&TuningModel::default(), 0.2, &temps(4.0, 44.0, 4.0));
    let fit = fit_anticrossing(
        &table,
        &TuningModel::default(),
        Some(0.1),
        &[TuningParam::G, TuningParam::QdE0, TuningParam::CmE0],
        &LmOptions::default(),
    )
    .unwrap();
    assert!((fit.g - 0.2).abs() < 1e-6);
    assert_eq!(fit.result.get("cm_c1_meV_per_K").unwrap().sigma, 0.0);
}

#[test]
fn linewidths_rise_then_narrow_through_resonance() {
    let ts = temps(4.0, 51.0, 0.5);
    for gamma_cm in [0.2, 0.15] {
        let model = TuningModel {
            gamma_cm,
            ..TuningModel::default()
        };
        let t_star = model.resonance_temperature(4.0, 51.0).unwrap();
        let rows = linewidth_consistency(&model_table(&model, 0.2, &ts), &model, 0.2).unwrap();
        let upper: Vec<f64> = rows.iter().map(|r| r.predicted_upper).collect();
        let (i_max, w_max) =
            upper.iter().enumerate().fold(
                (0, f64::MIN),
                |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc },
            );
        // Broadening then narrowing: an interior maximum, narrower at both ends.
        assert!(i_max > 0 && i_max < upper.len() - 1, "γ_CM = {gamma_cm}");
        assert!(upper[0] < w_max && *upper.last().unwrap() < w_max);
        assert!((upper.last().unwrap() - gamma_cm).abs() < 0.02);
        // With a clearly broader exciton at resonance the maximum precedes the crossing.
        if model.gamma_qd(t_star) > gamma_cm + 0.01 {
            assert!(
                ts[i_max] < t_star,
                "maximum at {} K, T* = {t_star}",
                ts[i_max]
            );
        }
        let at_star = model.system_at(t_star, 0.2).unwrap();
        let (u, l) = branch_linewidths(&at_star).unwrap();
        let mean = 0.5 * (model.gamma_qd(t_star) + gamma_cm);
        assert!((u - mean).abs() < 1e-6 && (l - mean).abs() < 1e-6);
    }
}

/// Inverse of a symmetric 3×3 matrix by cofactors.
fn inverse3(a: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c = |i: usize, j: usize| {
        let r = |k: usize, skip: usize| if k < skip { k } else { k + 1 };
        let (r0, r1, c0, c1) = (r(0, i), r(1, i), r(0, j), r(1, j));
        let minor = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
        if (i + j).is_multiple_of(2) {
            minor
        } else {
            -minor
        }
    };
    let det: f64 = (0..3).map(|j| a[0][j] * c(0, j)).sum();
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = c(j, i) / det;
        }
    }
    inv
}

#[test]
fn quadratic_model_covariance_matches_closed_form() {
    let xs: Vec<f64> = (0..25).map(|i| -1.0 + 0.1 * i as f64).collect();
    let ys: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| 1.5 - 0.7 * x + 2.0 * x * x + 0.05 * ((i * 7 % 5) as f64 - 2.0))
        .collect();
    let residuals = |p: &[f64]| -> Vec<f64> {
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| p[0] + p[1] * x + p[2] * x * x - y)
            .collect()
    };
    for scale in [false, true] {
        let opts = LmOptions {
            scale_covariance: scale,
            ..LmOptions::default()
        };
        let rep = lm_minimize(residuals, &[0.0, 0.0, 0.0], &Bounds::unbounded(3), &opts).unwrap();
        let mut ata = [[0.0; 3]; 3];
        for x in &xs {
            let row = [1.0, *x, x * x];
            for i in 0..3 {
                for j in 0..3 {
                    ata[i][j] += row[i] * row[j];
                }
            }
        }
        let inv = inverse3(ata);
        let dof = (xs.len() - 3) as f64;
        let s2 = if scale { 2.0 * rep.cost / dof } else { 1.0 };
        for (i, row) in inv.iter().enumerate() {
            let expected = (row[i] * s2).sqrt();
            assert!(
                ((rep.sigmas[i] - expected) / expected).abs() < 1e-6,
                "param {i}: {} vs {expected}",
                rep.sigmas[i]
            );
        }
        assert!(rep.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }
}
