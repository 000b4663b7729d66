//! Text formats for spectra, peak tables, fit results, mode tables and curves.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so reading a
//! written file and writing it again reproduces it byte for byte.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fitting::{FitParam, FitResult, PeakRow, PeakTable};
use crate::lineshape::Spectrum;
use crate::model::{dressed_states, CoupledSystem};
use crate::tuning::TuningModel;
use crate::wgm::WgmMode;

pub const SPECTRUM_COLUMNS: &str = "energy_meV,intensity";
pub const PEAK_TABLE_COLUMNS: &str =
    "temperature_K,e_upper_meV,e_lower_meV,fwhm_upper_meV,fwhm_lower_meV,amp_upper,amp_lower";
pub const MODE_COLUMNS: &str = "m,p,pol,energy_meV,n_eff";
pub const CURVE_COLUMNS: &str = "temperature_K,e_qd_meV,e_c_meV,detuning_meV,e_upper_meV,\
e_lower_meV,fwhm_upper_meV,fwhm_lower_meV,exciton_fraction_upper";

/// Shortest round-trip text for `v`, in exponent form outside `[1e-4, 1e16)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_f64(path: &Path, line: usize, what: &str, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| {
        parse_err(
            path,
            line,
            format!("{what}: `{}` is not a number", s.trim()),
        )
    })
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_spectra(spectra: &[Spectrum]) -> String {
    let mut out = String::new();
    for (i, s) in spectra.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(
            out,
            "# temperature_K={} resolution_meV={}",
            num(s.temperature),
            num(s.resolution_fwhm)
        )
        .unwrap();
        writeln!(out, "{SPECTRUM_COLUMNS}").unwrap();
        for (e, y) in s.energies.iter().zip(&s.intensities) {
            writeln!(out, "{},{}", num(*e), num(*y)).unwrap();
        }
    }
    out
}

struct Block {
    header_line: usize,
    temperature: f64,
    resolution: f64,
    energies: Vec<f64>,
    intensities: Vec<f64>,
}

fn parse_header(path: &Path, line: usize, text: &str) -> Result<(f64, f64)> {
    let (mut t, mut r) = (None, None);
    for field in text.trim_start_matches('#').split_whitespace() {
        let Some((k, v)) = field.split_once('=') else {
            return Err(parse_err(
                path,
                line,
                format!("malformed header field `{field}`"),
            ));
        };
        match k {
            "temperature_K" => t = Some(parse_f64(path, line, k, v)?),
            "resolution_meV" => r = Some(parse_f64(path, line, k, v)?),
            _ => return Err(parse_err(path, line, format!("unknown header field `{k}`"))),
        }
    }
    match (t, r) {
        (Some(t), Some(r)) => Ok((t, r)),
        _ => Err(parse_err(
            path,
            line,
            "header needs temperature_K= and resolution_meV=",
        )),
    }
}

/// Reads one or more spectra; blocks are separated by a new `# temperature_K=` header.
pub fn read_spectra(text: &str, path: &Path) -> Result<Vec<Spectrum>> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            let (temperature, resolution) = parse_header(path, n, line)?;
            blocks.push(Block {
                header_line: n,
                temperature,
                resolution,
                energies: Vec::new(),
                intensities: Vec::new(),
            });
            continue;
        }
        let Some(block) = blocks.last_mut() else {
            return Err(parse_err(
                path,
                n,
                "data before the first `# temperature_K=` header",
            ));
        };
        if line == SPECTRUM_COLUMNS {
            if !block.energies.is_empty() {
                return Err(parse_err(path, n, "column header inside data"));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [e, y] = fields[..] else {
            return Err(parse_err(
                path,
                n,
                format!("expected 2 columns, found {}", fields.len()),
            ));
        };
        block.energies.push(parse_f64(path, n, "energy", e)?);
        block.intensities.push(parse_f64(path, n, "intensity", y)?);
    }
    if blocks.is_empty() {
        return Err(parse_err(path, 1, "no spectrum found"));
    }
    blocks
        .into_iter()
        .map(|b| {
            Spectrum::new(b.temperature, b.energies, b.intensities, b.resolution)
                .map_err(|e| parse_err(path, b.header_line, e.to_string()))
        })
        .collect()
}

pub fn write_peak_table(table: &PeakTable) -> String {
    let mut out = format!("{PEAK_TABLE_COLUMNS}\n");
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(r.temperature),
            num(r.e_upper),
            num(r.e_lower),
            num(r.gamma_upper),
            num(r.gamma_lower),
            num(r.amp_upper),
            num(r.amp_lower)
        )
        .unwrap();
    }
    out
}

/// Reads a peak table; `#` lines are comments. Row covariances are not stored.
pub fn read_peak_table(text: &str, path: &Path) -> Result<PeakTable> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != PEAK_TABLE_COLUMNS {
                return Err(parse_err(
                    path,
                    n,
                    format!("expected column header `{PEAK_TABLE_COLUMNS}`"),
                ));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(parse_err(
                path,
                n,
                format!("expected 7 columns, found {}", fields.len()),
            ));
        }
        let names: Vec<&str> = PEAK_TABLE_COLUMNS.split(',').collect();
        let mut v = [0.0; 7];
        for (k, f) in fields.iter().enumerate() {
            v[k] = parse_f64(path, n, names[k], f)?;
        }
        let row = PeakRow {
            temperature: v[0],
            e_upper: v[1],
            e_lower: v[2],
            gamma_upper: v[3],
            gamma_lower: v[4],
            amp_upper: v[5],
            amp_lower: v[6],
            covariance: None,
        };
        PeakTable::new(vec![row.clone()]).map_err(|e| parse_err(path, n, e.to_string()))?;
        if rows
            .last()
            .is_some_and(|prev: &PeakRow| row.temperature <= prev.temperature)
        {
            return Err(parse_err(
                path,
                n,
                "temperatures must be strictly increasing",
            ));
        }
        rows.push(row);
    }
    if !header_seen {
        return Err(parse_err(path, 1, "empty peak table"));
    }
    PeakTable::new(rows)
}

pub fn write_fit_result(result: &FitResult) -> String {
    let mut out = String::new();
    for p in &result.params {
        writeln!(out, "{}={} ± {}", p.name, num(p.value), num(p.sigma)).unwrap();
    }
    writeln!(out, "converged={}", result.converged).unwrap();
    writeln!(out, "residual_rms={}", num(result.residual_rms)).unwrap();
    writeln!(out, "iterations={}", result.n_iterations).unwrap();
    out
}

pub fn read_fit_result(text: &str, path: &Path) -> Result<FitResult> {
    let mut params = Vec::new();
    let (mut converged, mut rms, mut iterations) = (None, None, None);
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(path, n, "expected name=value"));
        };
        match key {
            "converged" => {
                converged = Some(value.parse::<bool>().map_err(|_| {
                    parse_err(path, n, format!("converged: `{value}` is not a boolean"))
                })?)
            }
            "residual_rms" => rms = Some(parse_f64(path, n, key, value)?),
            "iterations" => {
                iterations = Some(value.parse::<usize>().map_err(|_| {
                    parse_err(path, n, format!("iterations: `{value}` is not an integer"))
                })?)
            }
            _ => {
                let Some((v, s)) = value.split_once('±') else {
                    return Err(parse_err(
                        path,
                        n,
                        format!("`{key}`: expected value ± sigma"),
                    ));
                };
                params.push(FitParam {
                    name: key.to_string(),
                    value: parse_f64(path, n, key, v)?,
                    sigma: parse_f64(path, n, key, s)?,
                });
            }
        }
    }
    match (converged, rms, iterations) {
        (Some(converged), Some(residual_rms), Some(n_iterations)) => Ok(FitResult {
            params,
            residual_rms,
            n_iterations,
            converged,
        }),
        _ => Err(parse_err(
            path,
            text.lines().count().max(1),
            "missing converged=, residual_rms= or iterations=",
        )),
    }
}

/// Mode table; the leading comment records the closed-boundary approximation.
pub fn write_modes(modes: &[WgmMode]) -> String {
    let mut out = String::from("# closed-disk Bessel-zero resonances with slab effective index\n");
    writeln!(out, "{MODE_COLUMNS}").unwrap();
    for m in modes {
        writeln!(
            out,
            "{},{},{},{},{}",
            m.azimuthal_m,
            m.radial_p,
            m.polarization,
            num(m.energy_mev),
            num(m.n_eff)
        )
        .unwrap();
    }
    out
}

pub fn read_modes(text: &str, path: &Path) -> Result<Vec<WgmMode>> {
    let mut modes = Vec::new();
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != MODE_COLUMNS {
                return Err(parse_err(
                    path,
                    n,
                    format!("expected column header `{MODE_COLUMNS}`"),
                ));
            }
            header_seen = true;
            continue;
        }
        let [m, p, pol, e, n_eff] = line.split(',').collect::<Vec<_>>()[..] else {
            return Err(parse_err(path, n, "expected 5 columns"));
        };
        let index = |what: &str, s: &str| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| parse_err(path, n, format!("{what}: `{s}` is not an integer")))
        };
        modes.push(WgmMode {
            azimuthal_m: index("m", m)?,
            radial_p: index("p", p)?,
            polarization: pol
                .parse()
                .map_err(|e: Error| parse_err(path, n, e.to_string()))?,
            energy_mev: parse_f64(path, n, "energy_meV", e)?,
            n_eff: parse_f64(path, n, "n_eff", n_eff)?,
        });
    }
    if !header_seen {
        return Err(parse_err(path, 1, "empty mode table"));
    }
    Ok(modes)
}

/// Bare and dressed energies, widths and exciton weight along `temps`.
pub fn write_curves(model: &TuningModel, g: f64, temps: &[f64]) -> Result<String> {
    let mut out = format!("{CURVE_COLUMNS}\n");
    for &t in temps {
        let sys: CoupledSystem = model.system_at(t, g)?;
        let d = dressed_states(&sys)?;
        writeln!(
            out,
            "{}",
            [
                t,
                sys.e_qd,
                sys.e_c,
                sys.detuning(),
                d.e_upper,
                d.e_lower,
                d.gamma_upper,
                d.gamma_lower,
                d.exciton_fraction_upper
            ]
            .map(num)
            .join(",")
        )
        .unwrap();
    }
    Ok(out)
}
