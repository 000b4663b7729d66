//! Flat `key = value` run configuration.
//!
//! Every key has a default, so an empty file describes the calibrated scenario.
//! Unknown or repeated keys are errors. `#` starts a comment anywhere on a line.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fitting::{LmOptions, TuningParam, DEFAULT_FREE};
use crate::formats::num;
use crate::lineshape::{EmissionModel, GridSpec};
use crate::photonics::CavityOptics;
use crate::tuning::TuningModel;
use crate::wgm::{DiskGeometry, IndexModel};

/// Environment variable naming a config file when `--config` is absent.
pub const CONFIG_ENV: &str = "CQED_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tuning: TuningModel,
    /// meV
    pub g: f64,
    pub emission: EmissionModel,
    pub grid_half_width: f64,
    pub grid_step: f64,
    /// Gaussian instrument FWHM, meV; 0 disables the convolution.
    pub resolution: f64,
    pub temps: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
    pub optics: CavityOptics,
    pub disk: DiskGeometry,
    pub wgm_center: f64,
    pub wgm_width: f64,
    pub fit: LmOptions,
    pub fit_free: Vec<TuningParam>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tuning: TuningModel::default(),
            g: 0.2,
            emission: EmissionModel::default(),
            grid_half_width: 3.0,
            grid_step: 0.01,
            resolution: 0.08,
            temps: parse_temps("4:44:2").expect("default range"),
            noise_sigma: 0.0,
            seed: 1,
            optics: CavityOptics::default(),
            disk: DiskGeometry::default(),
            wgm_center: 1661.0,
            wgm_width: 15.0,
            fit: LmOptions::default(),
            fit_free: DEFAULT_FREE.to_vec(),
        }
    }
}

/// Key, unit or format, description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("tuning.qd_e0", "meV", "exciton energy at 0 K"),
    ("tuning.qd_alpha", "meV/K", "Varshni alpha"),
    ("tuning.qd_beta", "K", "Varshni beta"),
    ("tuning.cm_e0", "meV", "cavity mode energy at 0 K"),
    ("tuning.cm_c1", "meV/K", "linear mode redshift"),
    ("tuning.cm_c2", "meV/K^2", "quadratic mode redshift"),
    ("tuning.gamma_qd_0", "meV", "exciton FWHM at 0 K"),
    (
        "tuning.gamma_qd_slope",
        "meV/K",
        "linear exciton broadening",
    ),
    (
        "tuning.gamma_qd_act_amp",
        "meV",
        "activated broadening amplitude",
    ),
    ("tuning.gamma_qd_act_energy", "meV", "activation energy"),
    ("tuning.gamma_cm", "meV", "cavity mode FWHM"),
    ("coupling.g_meV", "meV", "coupling constant"),
    ("emission.eta_x", "counts", "exciton emission efficiency"),
    ("emission.eta_c", "counts", "cavity emission efficiency"),
    ("emission.background", "counts", "flat background"),
    (
        "grid.half_width_meV",
        "meV",
        "half-width of the grid around the branch midpoint",
    ),
    ("grid.step_meV", "meV", "grid spacing"),
    (
        "instrument.resolution_meV",
        "meV",
        "Gaussian instrument FWHM, 0 for none",
    ),
    (
        "series.temps",
        "K",
        "list a,b,c or inclusive range start:stop:step",
    ),
    ("noise.sigma", "counts", "Gaussian noise standard deviation"),
    ("noise.seed", "integer", "noise RNG seed"),
    (
        "optics.energy_meV",
        "meV",
        "emission energy for the mode volume",
    ),
    ("optics.n_eff", "", "refractive index in the mode volume"),
    (
        "optics.eps_r",
        "",
        "relative permittivity, or auto for n_eff^2",
    ),
    ("optics.volume_factor", "", "V = factor*(lambda/n)^3"),
    ("optics.spatial_overlap", "", "field overlap in (0, 1]"),
    ("disk.diameter_um", "um", "microdisk diameter"),
    ("disk.thickness_nm", "nm", "microdisk thickness"),
    ("disk.core_index", "", "core index at disk.core_lambda0_nm"),
    (
        "disk.core_lambda0_nm",
        "nm",
        "reference wavelength of the index model",
    ),
    (
        "disk.core_dn_dlambda_per_nm",
        "1/nm",
        "linear index dispersion, 0 for constant",
    ),
    ("disk.clad_index", "", "cladding index"),
    ("wgm.window_center_meV", "meV", "mode search window center"),
    ("wgm.window_width_meV", "meV", "mode search window width"),
    ("fit.max_iterations", "integer", "iteration cap"),
    (
        "fit.cost_tolerance",
        "",
        "relative cost change for convergence",
    ),
    (
        "fit.gradient_tolerance",
        "",
        "gradient inf-norm for convergence",
    ),
    ("fit.free", "list", "anticrossing parameters to fit"),
    ("constants.vacuum_permittivity", "F/m", ""),
    ("constants.electron_mass", "kg", ""),
    ("constants.elementary_charge", "C", ""),
    ("constants.reduced_planck", "J*s", ""),
    ("constants.hc", "eV*nm", ""),
];

/// Temperatures from `a,b,c` or the inclusive range `start:stop:step`.
pub fn parse_temps(s: &str) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::Config(format!("temperatures `{s}`: {m}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let temps = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad("range must be start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0 && stop >= start) {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| start + i as f64 * step).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if temps.is_empty() || temps.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(bad("temperatures must be finite and >= 0"));
    }
    if temps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("temperatures must be strictly increasing"));
    }
    Ok(temps)
}

fn format_list(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Config from `path`, else from `$CQED_CONFIG`, else the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let path = path
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                Self::parse(&text, &path)
            }
        }
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("expected key = value, found `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            cfg.set(key, value).map_err(|e| err(e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("`{key}`: `{value}` is not a number")))
        };
        let int = || {
            value
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("`{key}`: `{value}` is not an integer")))
        };
        let t = &mut self.tuning;
        let c = &mut self.optics.constants;
        match key {
            "tuning.qd_e0" => t.qd_e0 = num()?,
            "tuning.qd_alpha" => t.qd_alpha = num()?,
            "tuning.qd_beta" => t.qd_beta = num()?,
            "tuning.cm_e0" => t.cm_e0 = num()?,
            "tuning.cm_c1" => t.cm_c1 = num()?,
            "tuning.cm_c2" => t.cm_c2 = num()?,
            "tuning.gamma_qd_0" => t.gamma_qd_0 = num()?,
            "tuning.gamma_qd_slope" => t.gamma_qd_slope = num()?,
            "tuning.gamma_qd_act_amp" => t.gamma_qd_act_amp = num()?,
            "tuning.gamma_qd_act_energy" => t.gamma_qd_act_energy = num()?,
            "tuning.gamma_cm" => t.gamma_cm = num()?,
            "coupling.g_meV" => self.g = num()?,
            "emission.eta_x" => self.emission.eta_x = num()?,
            "emission.eta_c" => self.emission.eta_c = num()?,
            "emission.background" => self.emission.background = num()?,
            "grid.half_width_meV" => self.grid_half_width = num()?,
            "grid.step_meV" => self.grid_step = num()?,
            "instrument.resolution_meV" => self.resolution = num()?,
            "series.temps" => self.temps = parse_temps(value)?,
            "noise.sigma" => self.noise_sigma = num()?,
            "noise.seed" => self.seed = int()?,
            "optics.energy_meV" => self.optics.emission_energy_mev = num()?,
            "optics.n_eff" => self.optics.n_eff = num()?,
            "optics.eps_r" => self.optics.eps_r = if value == "auto" { None } else { Some(num()?) },
            "optics.volume_factor" => self.optics.mode_volume_factor = num()?,
            "optics.spatial_overlap" => self.optics.spatial_overlap = num()?,
            "disk.diameter_um" => self.disk.diameter_um = num()?,
            "disk.thickness_nm" => self.disk.thickness_nm = num()?,
            "disk.core_index" => {
                let (_, l0, d) = self.index_parts();
                self.set_index(num()?, l0, d);
            }
            "disk.core_lambda0_nm" => {
                let (n0, _, d) = self.index_parts();
                self.set_index(n0, num()?, d);
            }
            "disk.core_dn_dlambda_per_nm" => {
                let (n0, l0, _) = self.index_parts();
                self.set_index(n0, l0, num()?);
            }
            "disk.clad_index" => self.disk.clad_index = num()?,
            "wgm.window_center_meV" => self.wgm_center = num()?,
            "wgm.window_width_meV" => self.wgm_width = num()?,
            "fit.max_iterations" => self.fit.max_iterations = int()? as usize,
            "fit.cost_tolerance" => self.fit.cost_tolerance = num()?,
            "fit.gradient_tolerance" => self.fit.gradient_tolerance = num()?,
            "fit.free" => self.fit_free = parse_free(value)?,
            "constants.vacuum_permittivity" => c.vacuum_permittivity = num()?,
            "constants.electron_mass" => c.electron_mass = num()?,
            "constants.elementary_charge" => c.elementary_charge = num()?,
            "constants.reduced_planck" => c.reduced_planck = num()?,
            "constants.hc" => c.hc = num()?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Current value of `key` in the same textual form [`RunConfig::set`] accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let t = &self.tuning;
        let c = &self.optics.constants;
        let (n0, l0, d) = self.index_parts();
        let v = match key {
            "tuning.qd_e0" => t.qd_e0,
            "tuning.qd_alpha" => t.qd_alpha,
            "tuning.qd_beta" => t.qd_beta,
            "tuning.cm_e0" => t.cm_e0,
            "tuning.cm_c1" => t.cm_c1,
            "tuning.cm_c2" => t.cm_c2,
            "tuning.gamma_qd_0" => t.gamma_qd_0,
            "tuning.gamma_qd_slope" => t.gamma_qd_slope,
            "tuning.gamma_qd_act_amp" => t.gamma_qd_act_amp,
            "tuning.gamma_qd_act_energy" => t.gamma_qd_act_energy,
            "tuning.gamma_cm" => t.gamma_cm,
            "coupling.g_meV" => self.g,
            "emission.eta_x" => self.emission.eta_x,
            "emission.eta_c" => self.emission.eta_c,
            "emission.background" => self.emission.background,
            "grid.half_width_meV" => self.grid_half_width,
            "grid.step_meV" => self.grid_step,
            "instrument.resolution_meV" => self.resolution,
            "series.temps" => return Some(format_list(&self.temps)),
            "noise.sigma" => self.noise_sigma,
            "noise.seed" => return Some(self.seed.to_string()),
            "optics.energy_meV" => self.optics.emission_energy_mev,
            "optics.n_eff" => self.optics.n_eff,
            "optics.eps_r" => match self.optics.eps_r {
                None => return Some("auto".into()),
                Some(e) => e,
            },
            "optics.volume_factor" => self.optics.mode_volume_factor,
            "optics.spatial_overlap" => self.optics.spatial_overlap,
            "disk.diameter_um" => self.disk.diameter_um,
            "disk.thickness_nm" => self.disk.thickness_nm,
            "disk.core_index" => n0,
            "disk.core_lambda0_nm" => l0,
            "disk.core_dn_dlambda_per_nm" => d,
            "disk.clad_index" => self.disk.clad_index,
            "wgm.window_center_meV" => self.wgm_center,
            "wgm.window_width_meV" => self.wgm_width,
            "fit.max_iterations" => return Some(self.fit.max_iterations.to_string()),
            "fit.cost_tolerance" => self.fit.cost_tolerance,
            "fit.gradient_tolerance" => self.fit.gradient_tolerance,
            "fit.free" => {
                let keys: Vec<&str> = self.fit_free.iter().map(|p| p.key()).collect();
                return Some(keys.join(","));
            }
            "constants.vacuum_permittivity" => c.vacuum_permittivity,
            "constants.electron_mass" => c.electron_mass,
            "constants.elementary_charge" => c.elementary_charge,
            "constants.reduced_planck" => c.reduced_planck,
            "constants.hc" => c.hc,
            _ => return None,
        };
        Some(num(v))
    }

    fn index_parts(&self) -> (f64, f64, f64) {
        match self.disk.core_index {
            IndexModel::Constant(n) => (n, 750.0, 0.0),
            IndexModel::Linear {
                n0,
                lambda0_nm,
                dn_dlambda_per_nm,
            } => (n0, lambda0_nm, dn_dlambda_per_nm),
        }
    }

    fn set_index(&mut self, n0: f64, lambda0_nm: f64, dn_dlambda_per_nm: f64) {
        self.disk.core_index = if dn_dlambda_per_nm == 0.0 && lambda0_nm == 750.0 {
            IndexModel::Constant(n0)
        } else {
            IndexModel::Linear {
                n0,
                lambda0_nm,
                dn_dlambda_per_nm,
            }
        };
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::Centered {
            half_width: self.grid_half_width,
            step: self.grid_step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tuning.validate()?;
        self.emission.validate()?;
        self.optics.validate()?;
        self.disk.validate()?;
        let positive = [
            ("grid.half_width_meV", self.grid_half_width),
            ("grid.step_meV", self.grid_step),
            ("wgm.window_center_meV", self.wgm_center),
            ("fit.cost_tolerance", self.fit.cost_tolerance),
            ("fit.gradient_tolerance", self.fit.gradient_tolerance),
        ];
        let non_negative = [
            ("coupling.g_meV", self.g),
            ("instrument.resolution_meV", self.resolution),
            ("noise.sigma", self.noise_sigma),
            ("wgm.window_width_meV", self.wgm_width),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("`{key}` = {v} must be > 0")));
            }
        }
        for (key, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("`{key}` = {v} must be >= 0")));
            }
        }
        if self.fit.max_iterations == 0 {
            return Err(Error::Config("`fit.max_iterations` must be >= 1".into()));
        }
        Ok(())
    }

    /// The full configuration as a documented file that parses back to `self`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, unit, doc) in KEYS {
            let value = self.get(key).expect("every listed key is readable");
            let comment = match (unit.is_empty(), doc.is_empty()) {
                (true, true) => String::new(),
                (true, false) => format!("  # {doc}"),
                (false, true) => format!("  # {unit}"),
                (false, false) => format!("  # {unit}; {doc}"),
            };
            writeln!(out, "{key} = {value}{comment}").unwrap();
        }
        out
    }
}

fn parse_free(value: &str) -> Result<Vec<TuningParam>> {
    let mut free = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let p: TuningParam = item.parse()?;
        if !free.contains(&p) {
            free.push(p);
        }
    }
    if free.is_empty() {
        return Err(Error::Config(
            "`fit.free` must name at least one parameter".into(),
        ));
    }
    Ok(free)
}
