use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cqed::config::{parse_temps, RunConfig};
use cqed::fitting::{build_peak_table, fit_anticrossing, fit_doublet, TuningParam};
use cqed::formats::{
    num, read_peak_table, read_spectra, read_text, write_atomic, write_curves, write_fit_result,
    write_modes, write_peak_table, write_spectra,
};
use cqed::lineshape::{add_noise, simulate_series};
use cqed::model::{classify_regime, CoupledSystem};
use cqed::photonics::{f_from_coupling, wavelength_from_energy};
use cqed::wgm::{find_modes, IndexModel};
use cqed::Error;

/// Exit codes.
const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;
const EXIT_UNDER_DETERMINED: u8 = 5;
const EXIT_CUTOFF: u8 = 6;

#[derive(Parser)]
#[command(
    name = "cqed",
    version,
    about = "Quantum-dot/microdisk strong-coupling toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Run configuration (key = value); falls back to $CQED_CONFIG, then defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> cqed::Result<RunConfig> {
        RunConfig::load(self.config.as_deref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize photoluminescence spectra over a temperature series.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Temperatures: a,b,c or start:stop:step (K).
        #[arg(long)]
        temps: Option<String>,
        /// Coupling constant override (meV).
        #[arg(long)]
        g: Option<f64>,
        /// Gaussian noise standard deviation (counts).
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit one spectrum with one or two Lorentzians.
    FitSpectrum {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        peaks: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit every spectrum of a series and write the branch peak table.
    PeakTable {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit branch energies against temperature for g and the tuning coefficients.
    FitAnticrossing {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long = "in")]
        input: PathBuf,
        /// Free parameters, e.g. g,qd_e0,cm_e0 (default from config).
        #[arg(long)]
        free: Option<String>,
        /// Starting coupling constant (meV); default half the smallest splitting.
        #[arg(long)]
        g_init: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Oscillator strength from a coupling constant.
    ExtractF {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        g: f64,
        #[arg(long)]
        energy: Option<f64>,
        #[arg(long)]
        n_eff: Option<f64>,
        #[arg(long)]
        eps_r: Option<f64>,
        #[arg(long)]
        volume_factor: Option<f64>,
    },
    /// Whispering-gallery modes of the microdisk inside an energy window.
    Wgm {
        #[command(flatten)]
        config: ConfigArg,
        /// µm
        #[arg(long)]
        diameter: Option<f64>,
        /// nm
        #[arg(long)]
        thickness: Option<f64>,
        /// MIN:MAX in meV.
        #[arg(long)]
        window: Option<String>,
        /// Constant core index.
        #[arg(long)]
        index: Option<f64>,
    },
    /// Strong or weak coupling from g and the two linewidths.
    Classify {
        #[arg(long)]
        g: f64,
        #[arg(long)]
        gamma_qd: f64,
        #[arg(long)]
        gamma_cm: f64,
    },
    /// Bare and dressed energies and widths versus temperature as CSV.
    Curves {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        temps: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the effective configuration with every key documented.
    Config {
        #[command(flatten)]
        config: ConfigArg,
    },
}

/// Failure carrying the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::NotConverged { .. } | Error::NonFiniteResidual => EXIT_NOT_CONVERGED,
        Error::UnderDetermined { .. } => EXIT_UNDER_DETERMINED,
        Error::SlabCutoff { .. } => EXIT_CUTOFF,
        Error::AtTemperature { source, .. } => exit_code(source),
        _ => EXIT_INVALID,
    }
}

fn emit(out: Option<&Path>, text: &str) -> cqed::Result<()> {
    match out {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate {
            config,
            temps,
            g,
            noise,
            seed,
            out,
        } => {
            let cfg = config.load()?;
            let temps = match temps {
                Some(t) => parse_temps(&t)?,
                None => cfg.temps.clone(),
            };
            let g = g.unwrap_or(cfg.g);
            let sigma = noise.unwrap_or(cfg.noise_sigma);
            let seed = seed.unwrap_or(cfg.seed);
            let series = simulate_series(
                &cfg.tuning,
                g,
                &cfg.emission,
                &temps,
                &cfg.grid_spec(),
                cfg.resolution,
            )?;
            // Each spectrum gets its own stream derived from the seed and its index.
            let series = series
                .iter()
                .enumerate()
                .map(|(i, s)| add_noise(s, sigma, seed.wrapping_add(i as u64)))
                .collect::<cqed::Result<Vec<_>>>()?;
            emit(out.as_deref(), &write_spectra(&series))?;
            if let Some(path) = out {
                eprintln!("wrote {} spectra to {}", series.len(), path.display());
            }
            Ok(())
        }
        Command::FitSpectrum {
            config,
            input,
            peaks,
            out,
        } => {
            let cfg = config.load()?;
            let spectra = read_spectra(&read_text(&input)?, &input)?;
            let [spec] = &spectra[..] else {
                return Err(Failure {
                    code: EXIT_INVALID,
                    message: format!(
                        "{}: expected one spectrum, found {} (use peak-table for series)",
                        input.display(),
                        spectra.len()
                    ),
                });
            };
            let fit = fit_doublet(spec, peaks, None, &cfg.fit)?;
            emit(out.as_deref(), &write_fit_result(&fit.to_fit_result()))?;
            if out.is_some() {
                let centers: Vec<String> = fit.peaks.iter().map(|p| num(p.center)).collect();
                let widths: Vec<String> = fit.peaks.iter().map(|p| num(p.fwhm)).collect();
                let mut line = format!(
                    "T={} K centers_meV={} fwhm_meV={}",
                    num(fit.temperature),
                    centers.join(","),
                    widths.join(",")
                );
                if let [lo, hi] = fit.peaks[..] {
                    line.push_str(&format!(" splitting_meV={}", num(hi.center - lo.center)));
                }
                println!("{line}");
            }
            if !fit.converged {
                return Err(Error::NotConverged {
                    iterations: fit.iterations,
                }
                .into());
            }
            Ok(())
        }
        Command::PeakTable { config, input, out } => {
            let cfg = config.load()?;
            let spectra = read_spectra(&read_text(&input)?, &input)?;
            let table = build_peak_table(&spectra, &cfg.fit)?;
            emit(out.as_deref(), &write_peak_table(&table))?;
            Ok(())
        }
        Command::FitAnticrossing {
            config,
            input,
            free,
            g_init,
            out,
        } => {
            let cfg = config.load()?;
            let table = read_peak_table(&read_text(&input)?, &input)?;
            let free: Vec<TuningParam> = match free {
                Some(list) => list
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<cqed::Result<_>>()?,
                None => cfg.fit_free.clone(),
            };
            let fit = fit_anticrossing(&table, &cfg.tuning, g_init, &free, &cfg.fit)?;
            emit(out.as_deref(), &write_fit_result(&fit.result))?;
            if out.is_some() {
                let g = fit.result.get("g_meV").expect("g is always reported");
                println!(
                    "g = {} ± {} meV, minimum splitting 2g = {} meV",
                    num(g.value),
                    num(g.sigma),
                    num(2.0 * g.value)
                );
            }
            if !fit.result.converged {
                return Err(Error::NotConverged {
                    iterations: fit.result.n_iterations,
                }
                .into());
            }
            Ok(())
        }
        Command::ExtractF {
            config,
            g,
            energy,
            n_eff,
            eps_r,
            volume_factor,
        } => {
            let mut optics = config.load()?.optics;
            if let Some(e) = energy {
                optics.emission_energy_mev = e;
            }
            if let Some(n) = n_eff {
                optics.n_eff = n;
            }
            if eps_r.is_some() {
                optics.eps_r = eps_r;
            }
            if let Some(v) = volume_factor {
                optics.mode_volume_factor = v;
            }
            let f = f_from_coupling(g, &optics)?;
            println!("f={}", num(f));
            println!(
                "wavelength_nm={}",
                num(wavelength_from_energy(optics.emission_energy_mev))
            );
            println!("mode_volume_m3={}", num(optics.mode_volume()));
            println!("eps_r={}", num(optics.eps_r()));
            Ok(())
        }
        Command::Wgm {
            config,
            diameter,
            thickness,
            window,
            index,
        } => {
            let cfg = config.load()?;
            let mut disk = cfg.disk;
            if let Some(d) = diameter {
                disk.diameter_um = d;
            }
            if let Some(t) = thickness {
                disk.thickness_nm = t;
            }
            if let Some(n) = index {
                disk.core_index = IndexModel::Constant(n);
            }
            let (lo, hi) = match window {
                Some(w) => parse_window(&w)?,
                None => (
                    cfg.wgm_center - 0.5 * cfg.wgm_width,
                    cfg.wgm_center + 0.5 * cfg.wgm_width,
                ),
            };
            let modes = find_modes(&disk, lo, hi)?;
            print!("{}", write_modes(&modes));
            println!("# count={}", modes.len());
            Ok(())
        }
        Command::Classify {
            g,
            gamma_qd,
            gamma_cm,
        } => {
            // Energies only enter through the detuning, which classification ignores.
            let sys = CoupledSystem::new(1.0, 1.0, g, gamma_qd, gamma_cm)?;
            let report = classify_regime(&sys)?;
            println!("regime={}", report.regime);
            println!("resolvability_ratio={}", num(report.resolvability_ratio));
            println!(
                "splitting_at_resonance_meV={}",
                num(report.splitting_at_resonance)
            );
            Ok(())
        }
        Command::Curves { config, temps, out } => {
            let cfg = config.load()?;
            let temps = match temps {
                Some(t) => parse_temps(&t)?,
                None => cfg.temps.clone(),
            };
            emit(out.as_deref(), &write_curves(&cfg.tuning, cfg.g, &temps)?)?;
            Ok(())
        }
        Command::Config { config } => {
            print!("{}", config.load()?.render());
            Ok(())
        }
    }
}

fn parse_window(s: &str) -> cqed::Result<(f64, f64)> {
    let bad = || Error::Config(format!("window `{s}` must be MIN:MAX in meV"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(bad());
    }
    Ok((lo, hi))
}
