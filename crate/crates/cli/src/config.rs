//! Resolution of command-line inputs into model objects, with an exact echo
//! of the resolved values for the results document.

use crate::{CliError, Result};
use icta::constants::{angular_from_mhz, mhz_from_angular, PLANCK};
use icta::{BiasDistribution, DeviceParams, Error, LorentzianComponent};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Resolved device parameters in CLI units (MHz, Ω).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub omega_s_mhz: f64,
    pub omega_i_mhz: f64,
    pub kappa_s_mhz: f64,
    pub kappa_i_mhz: f64,
    pub z_s_ohm: f64,
    pub z_i_ohm: f64,
    pub phi_s: f64,
    pub phi_i: f64,
    pub ej_over_h_mhz: f64,
    pub degenerate: bool,
}

impl DeviceEcho {
    pub fn from_params(params: &DeviceParams, preset: Option<String>) -> Self {
        Self {
            preset,
            omega_s_mhz: mhz_from_angular(params.omega_s()),
            omega_i_mhz: mhz_from_angular(params.omega_i()),
            kappa_s_mhz: mhz_from_angular(params.kappa_s()),
            kappa_i_mhz: mhz_from_angular(params.kappa_i()),
            z_s_ohm: params.z_s(),
            z_i_ohm: params.z_i(),
            phi_s: params.phi_s(),
            phi_i: params.phi_i(),
            ej_over_h_mhz: params.e_j() / PLANCK / 1e6,
            degenerate: params.is_degenerate(),
        }
    }
}

/// Device description accepted in a `--device <file>` JSON file.
#[derive(Debug, Clone, Deserialize)]
pub struct DeviceFile {
    pub omega_s_mhz: f64,
    pub omega_i_mhz: f64,
    pub kappa_s_mhz: f64,
    pub kappa_i_mhz: f64,
    pub z_s_ohm: f64,
    pub z_i_ohm: f64,
    /// Zero-point phases; derived from the impedances when absent.
    #[serde(default)]
    pub phi_s: Option<f64>,
    #[serde(default)]
    pub phi_i: Option<f64>,
    #[serde(default)]
    pub ej_over_h_mhz: Option<f64>,
}

/// Resolves `--device`: a named preset (`sample_A`, `sample_B`) or a JSON
/// parameter file.
pub fn resolve_device(spec: &str) -> Result<(DeviceParams, DeviceEcho)> {
    match spec.to_ascii_lowercase().as_str() {
        "sample_a" => {
            let p = DeviceParams::sample_a();
            let echo = DeviceEcho::from_params(&p, Some("sample_A".into()));
            return Ok((p, echo));
        }
        "sample_b" => {
            let p = DeviceParams::sample_b();
            let echo = DeviceEcho::from_params(&p, Some("sample_B".into()));
            return Ok((p, echo));
        }
        _ => {}
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Model(Error::Validation(format!(
            "--device: `{spec}` is neither a preset (sample_A, sample_B) nor \
             an existing file"
        ))));
    }
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: spec.to_string(),
        source,
    })?;
    let file: DeviceFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("--device {spec}: {e}")))?;
    let e_j = PLANCK * file.ej_over_h_mhz.unwrap_or(0.0) * 1e6;
    let params = match (file.phi_s, file.phi_i) {
        (Some(phi_s), Some(phi_i)) => DeviceParams::with_phases(
            angular_from_mhz(file.omega_s_mhz),
            angular_from_mhz(file.omega_i_mhz),
            angular_from_mhz(file.kappa_s_mhz),
            angular_from_mhz(file.kappa_i_mhz),
            phi_s,
            phi_i,
            e_j,
        )?,
        (None, None) => DeviceParams::new(
            angular_from_mhz(file.omega_s_mhz),
            angular_from_mhz(file.omega_i_mhz),
            angular_from_mhz(file.kappa_s_mhz),
            angular_from_mhz(file.kappa_i_mhz),
            file.z_s_ohm,
            file.z_i_ohm,
            e_j,
        )?,
        _ => {
            return Err(CliError::Model(Error::Validation(
                "--device file: give both phi_s and phi_i or neither".into(),
            )))
        }
    };
    let echo = DeviceEcho::from_params(&params, None);
    Ok((params, echo))
}

/// One mixture component in CLI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentEcho {
    pub weight: f64,
    pub center_mhz: f64,
    pub fwhm_mhz: f64,
}

/// Resolved bias distribution in CLI units; centers are offsets from the
/// nominal bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistEcho {
    pub components: Vec<ComponentEcho>,
}

impl DistEcho {
    pub fn to_distribution(&self, nominal: f64) -> Result<BiasDistribution> {
        let comps = self
            .components
            .iter()
            .map(|c| {
                LorentzianComponent::new(
                    c.weight,
                    angular_from_mhz(c.center_mhz),
                    angular_from_mhz(c.fwhm_mhz),
                )
            })
            .collect::<icta::Result<Vec<_>>>()?;
        Ok(BiasDistribution::from_weights(comps, nominal)?)
    }

    pub fn from_distribution(dist: &BiasDistribution) -> Self {
        Self {
            components: dist
                .components()
                .iter()
                .map(|c| ComponentEcho {
                    weight: c.weight,
                    center_mhz: mhz_from_angular(c.center),
                    fwhm_mhz: mhz_from_angular(c.fwhm),
                })
                .collect(),
        }
    }
}

fn parse_lorentzian_spec(spec: &str) -> Result<ComponentEcho> {
    let body = spec
        .strip_prefix("lorentzian:")
        .ok_or_else(|| bad_dist(spec))?;
    let parts: Vec<&str> = body.split(',').collect();
    if parts.is_empty() || parts.len() > 3 {
        return Err(bad_dist(spec));
    }
    let num = |s: &str| -> Result<f64> { s.trim().parse::<f64>().map_err(|_| bad_dist(spec)) };
    let fwhm_mhz = num(parts[0])?;
    let center_mhz = if parts.len() > 1 { num(parts[1])? } else { 0.0 };
    let weight = if parts.len() > 2 { num(parts[2])? } else { 1.0 };
    if fwhm_mhz <= 0.0 || weight <= 0.0 || !fwhm_mhz.is_finite() || !weight.is_finite() {
        return Err(CliError::Model(Error::Validation(format!(
            "--dist {spec}: FWHM and weight must be positive"
        ))));
    }
    Ok(ComponentEcho {
        weight,
        center_mhz,
        fwhm_mhz,
    })
}

fn bad_dist(spec: &str) -> CliError {
    CliError::Model(Error::Validation(format!(
        "--dist `{spec}` is not a file and does not match \
         lorentzian:FWHM_MHZ[,CENTER_MHZ[,WEIGHT]]"
    )))
}

/// Resolves `--dist`: either exactly one fit-result or distribution JSON
/// file, or one or more `lorentzian:FWHM[,CENTER[,WEIGHT]]` components.
pub fn resolve_distribution(specs: &[String]) -> Result<DistEcho> {
    if specs.is_empty() {
        return Err(CliError::Model(Error::Validation(
            "--dist: no distribution given".into(),
        )));
    }
    let analytic = specs.iter().all(|s| s.starts_with("lorentzian:"));
    if analytic {
        let mut components = Vec::with_capacity(specs.len());
        for s in specs {
            components.push(parse_lorentzian_spec(s)?);
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        for c in &mut components {
            c.weight /= total;
        }
        return Ok(DistEcho { components });
    }
    if specs.len() != 1 {
        return Err(CliError::Model(Error::Validation(
            "--dist: give exactly one file, or only lorentzian: components".into(),
        )));
    }
    let path = &specs[0];
    if !Path::new(path).exists() {
        return Err(bad_dist(path));
    }
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("--dist {path}: {e}")))?;
    // accept a bare distribution object or a fit-results document carrying one
    let dist_value = if value.get("components").is_some() {
        value
    } else if let Some(d) = value.get("distribution") {
        d.clone()
    } else {
        return Err(CliError::Parse(format!(
            "--dist {path}: no `components` array and no `distribution` \
             section found"
        )));
    };
    let echo: DistEcho = serde_json::from_value(dist_value)
        .map_err(|e| CliError::Parse(format!("--dist {path}: {e}")))?;
    if echo.components.is_empty() {
        return Err(CliError::Model(Error::Validation(format!(
            "--dist {path}: empty component list"
        ))));
    }
    Ok(echo)
}

/// Parses a `start:stop:n` grid specification into a sorted linear grid.
pub fn parse_grid(spec: &str, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let err = || {
        CliError::Model(Error::Validation(format!(
            "--{what} `{spec}` does not match start:stop:n"
        )))
    };
    if parts.len() != 3 {
        return Err(err());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| err())?;
    let n: usize = parts[2].trim().parse().map_err(|_| err())?;
    if n == 0 {
        return Err(CliError::Model(Error::Validation(format!(
            "--{what}: grid must have at least one point"
        ))));
    }
    if n == 1 {
        if start != stop {
            return Err(CliError::Model(Error::Validation(format!(
                "--{what}: a single-point grid needs start == stop"
            ))));
        }
        return Ok(vec![start]);
    }
    if stop <= start || stop.is_nan() || start.is_nan() {
        return Err(CliError::Model(Error::Validation(format!(
            "--{what}: stop must exceed start"
        ))));
    }
    Ok((0..n)
        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Parses and validates a pump-strength grid: values in [0, 1).
pub fn parse_xi_grid(spec: &str) -> Result<Vec<f64>> {
    let grid = parse_grid(spec, "xi-grid")?;
    for &xi in &grid {
        if !(0.0..1.0).contains(&xi) {
            return Err(CliError::Model(Error::Validation(format!(
                "--xi-grid: pump strength {xi} is outside [0, 1)"
            ))));
        }
    }
    Ok(grid)
}

/// Parses a frequency grid given in MHz into rad/s.
pub fn parse_freq_grid(spec: &str) -> Result<Vec<f64>> {
    Ok(parse_grid(spec, "freq-grid")?
        .into_iter()
        .map(angular_from_mhz)
        .collect())
}

/// Output path resolution: `--out` verbatim when given, otherwise a default
/// name inside `$ICTA_OUT_DIR` (or the working directory).
pub fn resolve_out_path(out: Option<std::path::PathBuf>, default_name: &str) -> std::path::PathBuf {
    match out {
        Some(p) => p,
        None => {
            let dir = std::env::var_os("ICTA_OUT_DIR")
                .map(std::path::PathBuf::from)
                .unwrap_or_else(|| std::path::PathBuf::from("."));
            dir.join(default_name)
        }
    }
}
