use std::fmt;
use std::str::FromStr;

use super::lm::{lm_minimize, Bounds, LmOptions};
use super::{FitParam, FitResult, PeakTable};
use crate::error::{Error, Result};
use crate::model::{branch_linewidths, dressed_energies, CoupledSystem};
use crate::tuning::TuningModel;

/// Parameters of the anticrossing model that can be freed or held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TuningParam {
    G,
    QdE0,
    QdAlpha,
    QdBeta,
    CmE0,
    CmC1,
    CmC2,
}

/// Varshni β is held fixed by default: over a few tens of kelvin it is nearly
/// degenerate with α.
pub const DEFAULT_FREE: [TuningParam; 6] = [
    TuningParam::G,
    TuningParam::QdE0,
    TuningParam::QdAlpha,
    TuningParam::CmE0,
    TuningParam::CmC1,
    TuningParam::CmC2,
];

impl TuningParam {
    pub const ALL: [TuningParam; 7] = [
        TuningParam::G,
        TuningParam::QdE0,
        TuningParam::QdAlpha,
        TuningParam::QdBeta,
        TuningParam::CmE0,
        TuningParam::CmC1,
        TuningParam::CmC2,
    ];

    pub fn key(self) -> &'static str {
        match self {
            TuningParam::G => "g",
            TuningParam::QdE0 => "qd_e0",
            TuningParam::QdAlpha => "qd_alpha",
            TuningParam::QdBeta => "qd_beta",
            TuningParam::CmE0 => "cm_e0",
            TuningParam::CmC1 => "cm_c1",
            TuningParam::CmC2 => "cm_c2",
        }
    }

    /// Name with unit suffix as written in fit results.
    pub fn result_name(self) -> &'static str {
        match self {
            TuningParam::G => "g_meV",
            TuningParam::QdE0 => "qd_e0_meV",
            TuningParam::QdAlpha => "qd_alpha_meV_per_K",
            TuningParam::QdBeta => "qd_beta_K",
            TuningParam::CmE0 => "cm_e0_meV",
            TuningParam::CmC1 => "cm_c1_meV_per_K",
            TuningParam::CmC2 => "cm_c2_meV_per_K2",
        }
    }

    fn lower_bound(self) -> Option<f64> {
        match self {
            TuningParam::QdE0 | TuningParam::CmE0 => None,
            TuningParam::QdBeta => Some(1e-3),
            _ => Some(0.0),
        }
    }
}

impl fmt::Display for TuningParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for TuningParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TuningParam::ALL
            .into_iter()
            .find(|p| p.key() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown fit parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Values([f64; 7]);

impl Values {
    fn from_model(model: &TuningModel, g: f64) -> Self {
        Values([
            g,
            model.qd_e0,
            model.qd_alpha,
            model.qd_beta,
            model.cm_e0,
            model.cm_c1,
            model.cm_c2,
        ])
    }

    fn get(&self, p: TuningParam) -> f64 {
        self.0[p as usize]
    }

    fn set(&mut self, p: TuningParam, v: f64) {
        self.0[p as usize] = v;
    }

    fn model(&self, base: &TuningModel) -> TuningModel {
        TuningModel {
            qd_e0: self.get(TuningParam::QdE0),
            qd_alpha: self.get(TuningParam::QdAlpha),
            qd_beta: self.get(TuningParam::QdBeta),
            cm_e0: self.get(TuningParam::CmE0),
            cm_c1: self.get(TuningParam::CmC1),
            cm_c2: self.get(TuningParam::CmC2),
            ..*base
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnticrossingFit {
    pub result: FitResult,
    pub model: TuningModel,
    pub g: f64,
}

fn dressed_pair(model: &TuningModel, g: f64, t: f64) -> (f64, f64) {
    let (e_qd, e_c) = (model.qd_energy(t), model.cm_energy(t));
    let mean = 0.5 * (e_qd + e_c);
    let half = 0.5 * (e_qd - e_c).hypot(2.0 * g);
    (mean + half, mean - half)
}

/// Joint least-squares fit of both branch energies to the coupled-oscillator
/// dispersion, with the bare lines following `init`'s temperature model.
///
/// Parameters not in `free` stay at their starting values. When every row
/// carries a covariance the residuals are weighted by the fitted energy σ.
pub fn fit_anticrossing(
    table: &PeakTable,
    init: &TuningModel,
    g_init: Option<f64>,
    free: &[TuningParam],
    opts: &LmOptions,
) -> Result<AnticrossingFit> {
    table.validate()?;
    init.validate()?;
    let mut free: Vec<TuningParam> = free.to_vec();
    free.dedup();
    if free.is_empty() || 2 * table.len() < 2 * free.len() {
        return Err(Error::UnderDetermined {
            data: 2 * table.len(),
            params: free.len(),
        });
    }

    let first = &table.rows[0];
    let g0 = g_init
        .unwrap_or_else(|| 0.5 * table.min_splitting().unwrap_or(0.2))
        .max(1e-6);
    // Anchor free bare energies on the coldest row, keeping the initial model's ordering.
    let mut start = Values::from_model(init, g0);
    let t0 = first.temperature;
    let (qd_branch, cm_branch) = if init.detuning(t0) >= 0.0 {
        (first.e_upper, first.e_lower)
    } else {
        (first.e_lower, first.e_upper)
    };
    if free.contains(&TuningParam::QdE0) {
        start.set(
            TuningParam::QdE0,
            qd_branch + (init.qd_e0 - init.qd_energy(t0)),
        );
    }
    if free.contains(&TuningParam::CmE0) {
        start.set(
            TuningParam::CmE0,
            cm_branch + (init.cm_e0 - init.cm_energy(t0)),
        );
    }

    // Energy offsets are fitted relative to their starting values.
    let origin = |p: TuningParam| match p {
        TuningParam::QdE0 | TuningParam::CmE0 => start.get(p),
        _ => 0.0,
    };
    let unpack = |x: &[f64]| {
        let mut v = start;
        for (k, p) in free.iter().enumerate() {
            v.set(*p, x[k] + origin(*p));
        }
        v
    };

    let weights: Vec<(f64, f64)> = match table
        .rows
        .iter()
        .map(|r| r.covariance.map(|c| (c[0], c[1])))
        .collect::<Option<Vec<_>>>()
    {
        Some(v)
            if v.iter()
                .all(|(a, b)| *a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) =>
        {
            v.into_iter()
                .map(|(a, b)| (1.0 / a.sqrt(), 1.0 / b.sqrt()))
                .collect()
        }
        _ => vec![(1.0, 1.0); table.len()],
    };

    let residuals = |x: &[f64]| -> Vec<f64> {
        let v = unpack(x);
        let model = v.model(init);
        let g = v.get(TuningParam::G);
        table
            .rows
            .iter()
            .zip(&weights)
            .flat_map(|(row, (wu, wl))| {
                let (up, lo) = dressed_pair(&model, g, row.temperature);
                [(up - row.e_upper) * wu, (lo - row.e_lower) * wl]
            })
            .collect()
    };

    let x0: Vec<f64> = free.iter().map(|p| start.get(*p) - origin(*p)).collect();
    let mut bounds = Bounds::unbounded(free.len());
    for (k, p) in free.iter().enumerate() {
        bounds.lower[k] = p.lower_bound();
    }
    let rep = lm_minimize(residuals, &x0, &bounds, opts)?;

    let best = unpack(&rep.params);
    let params = TuningParam::ALL
        .iter()
        .map(|p| FitParam {
            name: p.result_name().to_string(),
            value: best.get(*p),
            sigma: free
                .iter()
                .position(|f| f == p)
                .map_or(0.0, |k| rep.sigmas[k]),
        })
        .collect();

    Ok(AnticrossingFit {
        result: FitResult {
            params,
            residual_rms: rep.residual_rms,
            n_iterations: rep.iterations,
            converged: rep.converged(),
        },
        model: best.model(init),
        g: best.get(TuningParam::G),
    })
}

/// Predicted versus measured branch widths at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinewidthRow {
    pub temperature: f64,
    pub predicted_upper: f64,
    pub predicted_lower: f64,
    pub measured_upper: f64,
    pub measured_lower: f64,
}

impl LinewidthRow {
    pub fn residual_upper(&self) -> f64 {
        self.measured_upper - self.predicted_upper
    }

    pub fn residual_lower(&self) -> f64 {
        self.measured_lower - self.predicted_lower
    }
}

/// Mixed-state linewidth predictions along the table's temperatures.
pub fn linewidth_consistency(
    table: &PeakTable,
    model: &TuningModel,
    g: f64,
) -> Result<Vec<LinewidthRow>> {
    table
        .rows
        .iter()
        .map(|row| {
            let sys: CoupledSystem = model.system_at(row.temperature, g)?;
            dressed_energies(&sys)?;
            let (predicted_upper, predicted_lower) = branch_linewidths(&sys)?;
            Ok(LinewidthRow {
                temperature: row.temperature,
                predicted_upper,
                predicted_lower,
                measured_upper: row.gamma_upper,
                measured_lower: row.gamma_lower,
            })
        })
        .collect()
}
