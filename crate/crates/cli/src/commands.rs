//! The four workflow commands. Each resolves its inputs, runs the model or
//! analysis and assembles a [`ResultsDocument`].

use crate::config::{ComponentEcho, DeviceEcho, DistEcho};
use crate::csvio::read_two_columns;
use crate::results::{ResultsDocument, Table};
use crate::{CliError, Result};
use icta::constants::{angular_from_mhz, mhz_from_angular};
use icta::{
    bandwidth_analytic, device_output_noise, fit_mixture_with, frequency_sweep,
    gain_noise_tradeoff, line_attenuation, max_gain, monte_carlo_oracle, noise_ratio,
    referenced_gain, y_factor, BiasDistribution, DeviceParams, FitOptions, LoadLabel, LoadSpectrum,
    SpectrumRecord,
};
use serde_json::json;
use std::path::Path;

fn stage<T>(name: &'static str, r: icta::Result<T>) -> Result<T> {
    r.map_err(|source| CliError::Stage {
        stage: name,
        source,
    })
}

fn centered(dist_echo: &DistEcho, device: &DeviceParams) -> Result<BiasDistribution> {
    dist_echo.to_distribution(device.omega_s() + device.omega_i())
}

/// Gain/bandwidth/noise tradeoff over a pump-strength grid, with the
/// zero-noise reference curve and an optional Monte-Carlo cross-check.
pub fn cmd_predict(
    device: &DeviceParams,
    device_echo: &DeviceEcho,
    dist_echo: &DistEcho,
    xi_grid: &[f64],
    mc_samples: usize,
    seed: u64,
) -> Result<ResultsDocument> {
    let dist = centered(dist_echo, device)?;
    let points = stage("tradeoff", gain_noise_tradeoff(device, &dist, xi_grid))?;

    let mut tradeoff = Table::new(
        "tradeoff",
        &[
            "xi",
            "gain_db",
            "bandwidth_mhz",
            "noise_ratio",
            "omega_opt_mhz",
        ],
    );
    for p in &points {
        tradeoff.push_row(&[
            Some(p.xi),
            Some(p.gain_db),
            Some(mhz_from_angular(p.bandwidth)),
            p.noise_ratio,
            Some(mhz_from_angular(p.omega_opt)),
        ]);
    }

    let mut reference = Table::new(
        "reference",
        &["xi", "gain_db", "bandwidth_mhz", "noise_ratio"],
    );
    for &xi in xi_grid {
        let g0 = stage("reference", max_gain(xi))?;
        let bw = if g0 > 1.0 {
            Some(mhz_from_angular(bandwidth_analytic(device, g0).map_err(
                |source| CliError::Stage {
                    stage: "reference",
                    source,
                },
            )?))
        } else {
            None
        };
        reference.push_row(&[Some(xi), Some(20.0 * g0.log10()), bw, Some(1.0)]);
    }

    let mut doc = ResultsDocument::new(
        "predict",
        json!({
            "device": device_echo,
            "distribution": dist_echo,
            "xi_grid": xi_grid,
            "mc_samples": mc_samples,
            "seed": seed,
        }),
    );
    doc.tables.push(tradeoff);
    doc.tables.push(reference);

    if mc_samples > 0 {
        let mut mc = Table::new(
            "monte_carlo",
            &["xi", "gain_db", "output_noise", "se_amplitude", "se_power"],
        );
        for p in &points {
            let est = stage(
                "monte-carlo",
                monte_carlo_oracle(device, p.xi, p.omega_opt, &dist, mc_samples, seed),
            )?;
            mc.push_row(&[
                Some(p.xi),
                Some(est.response.gain_db()),
                Some(est.response.output_noise),
                Some(est.se_mean_amplitude),
                Some(est.se_mean_power),
            ]);
        }
        doc.tables.push(mc);
    }

    doc.distribution = Some(dist_echo.clone());
    doc.validate()?;
    Ok(doc)
}

/// Two-dimensional gain and noise map over pump strength and input
/// frequency.
pub fn cmd_sweep(
    device: &DeviceParams,
    device_echo: &DeviceEcho,
    dist_echo: &DistEcho,
    xi_grid: &[f64],
    freq_grid: &[f64],
) -> Result<ResultsDocument> {
    let dist = centered(dist_echo, device)?;
    let mut map = Table::new(
        "map",
        &["xi", "freq_mhz", "gain_db", "output_noise", "noise_ratio"],
    );
    for &xi in xi_grid {
        let curve = stage("sweep", frequency_sweep(device, xi, &dist, freq_grid))?;
        for (w, r) in curve.omega_in.iter().zip(&curve.responses) {
            map.push_row(&[
                Some(xi),
                Some(mhz_from_angular(*w)),
                Some(r.gain_db()),
                Some(r.output_noise),
                r.noise_ratio,
            ]);
        }
    }
    let mut doc = ResultsDocument::new(
        "sweep",
        json!({
            "device": device_echo,
            "distribution": dist_echo,
            "xi_grid": xi_grid,
            "freq_grid_mhz": freq_grid.iter().map(|&w| mhz_from_angular(w)).collect::<Vec<_>>(),
        }),
    );
    doc.tables.push(map);
    doc.distribution = Some(dist_echo.clone());
    doc.validate()?;
    Ok(doc)
}

/// Lorentzian-mixture fit of a measured linewidth scan, with effective
/// bias-impedance temperatures when an impedance is given.
pub fn cmd_fit_linewidth(
    input: &Path,
    n_components: usize,
    impedance_ohm: Option<f64>,
    symmetric: bool,
) -> Result<ResultsDocument> {
    let cols = read_two_columns(input, "wj_mhz", "psd")?;
    let mut pairs: Vec<(f64, f64)> = cols
        .x
        .iter()
        .map(|&f| angular_from_mhz(f))
        .zip(cols.y.iter().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite frequencies"));
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let record = stage("input", SpectrumRecord::new(x, y, None))?;

    let opts = FitOptions {
        symmetric_sides: symmetric,
        ..Default::default()
    };
    let fit = stage("fit", fit_mixture_with(&record, n_components, &opts))?;

    let area_total: f64 = fit.peaks.iter().map(|p| p.amplitude * p.fwhm).sum();
    let mut components = Table::new(
        "components",
        &[
            "center_mhz",
            "fwhm_mhz",
            "amplitude",
            "weight",
            "center_sigma_mhz",
            "fwhm_sigma_mhz",
            "amplitude_sigma",
            "effective_temperature_mk",
        ],
    );
    for p in &fit.peaks {
        let temp_mk = match impedance_ohm {
            Some(z) => Some(stage("temperature", icta::effective_temperature(p.fwhm, z))? * 1e3),
            None => None,
        };
        components.push_row(&[
            Some(mhz_from_angular(p.center)),
            Some(mhz_from_angular(p.fwhm)),
            Some(p.amplitude),
            Some(p.amplitude * p.fwhm / area_total),
            Some(mhz_from_angular(p.center_sigma)),
            Some(mhz_from_angular(p.fwhm_sigma)),
            Some(p.amplitude_sigma),
            temp_mk,
        ]);
    }

    let mut summary = Table::new(
        "fit",
        &[
            "background",
            "background_sigma",
            "residual_norm",
            "converged",
            "iterations",
        ],
    );
    summary.push_row(&[
        Some(fit.background),
        Some(fit.background_sigma),
        Some(fit.residual_norm),
        Some(if fit.converged { 1.0 } else { 0.0 }),
        Some(fit.iterations as f64),
    ]);

    let mut curve = Table::new("fitted_curve", &["wj_mhz", "psd", "psd_fit"]);
    for (&w, &p) in record.omega_j().iter().zip(record.psd()) {
        curve.push_row(&[Some(mhz_from_angular(w)), Some(p), Some(fit.evaluate(w))]);
    }

    let dist = stage("distribution", fit.to_bias_distribution(0.0))?;
    let mut doc = ResultsDocument::new(
        "fit-linewidth",
        json!({
            "input": input.display().to_string(),
            "components": n_components,
            "impedance_ohm": impedance_ohm,
            "symmetric": symmetric,
        }),
    );
    doc.record_input(input)?;
    doc.tables.push(components);
    doc.tables.push(summary);
    doc.tables.push(curve);
    doc.distribution = Some(DistEcho::from_distribution(&dist));
    doc.validate()?;
    Ok(doc)
}

/// Inputs of the calibration pipeline, all on one frequency grid.
pub struct CalibrateInputs<'a> {
    pub hot: &'a Path,
    pub cold: &'a Path,
    pub short: &'a Path,
    pub gain_on: &'a Path,
    pub gain_off: &'a Path,
    pub noise_on: &'a Path,
    pub noise_sc: &'a Path,
    pub t_hot_mk: f64,
    pub t_cold_mk: f64,
    pub max_ripple_db: f64,
}

/// Full chain calibration: Y-factor, line attenuation, on/off gain
/// referencing and quantum-limit-referred device noise.
pub fn cmd_calibrate(inputs: &CalibrateInputs) -> Result<ResultsDocument> {
    let read = |path: &Path, temp_mk: Option<f64>, label: LoadLabel| -> Result<LoadSpectrum> {
        let cols = read_two_columns(path, "freq_mhz", "value")?;
        let freq: Vec<f64> = cols.x.iter().map(|&f| angular_from_mhz(f)).collect();
        stage(
            "input",
            LoadSpectrum::new(freq, cols.y, temp_mk.map(|t| t * 1e-3), label),
        )
    };

    let hot = read(inputs.hot, Some(inputs.t_hot_mk), LoadLabel::Hot)?;
    let cold = read(inputs.cold, Some(inputs.t_cold_mk), LoadLabel::Cold)?;
    let short = read(inputs.short, None, LoadLabel::Short)?;
    let gain_on = read(inputs.gain_on, None, LoadLabel::DeviceOn)?;
    let gain_off = read(inputs.gain_off, None, LoadLabel::DeviceOff)?;
    let noise_on = read(inputs.noise_on, None, LoadLabel::DeviceOn)?;
    let noise_sc = read(inputs.noise_sc, None, LoadLabel::DeviceSuperconducting)?;

    let chain = stage("y-factor", y_factor(&hot, &cold))?;
    let att = stage(
        "line-attenuation",
        line_attenuation(&gain_off, &short, inputs.max_ripple_db),
    )?;
    let chain = chain.with_attenuation(&att);
    let device_gain = stage("referenced-gain", referenced_gain(&gain_on, &gain_off))?;
    let noise = stage(
        "device-noise",
        device_output_noise(&noise_on, &noise_sc, &chain),
    )?;
    let ratios = noise_ratio(&noise.photons, &device_gain);

    let mut chain_table = Table::new("chain", &["freq_mhz", "chain_gain", "chain_noise_photons"]);
    for i in 0..chain.frequency.len() {
        chain_table.push_row(&[
            Some(mhz_from_angular(chain.frequency[i])),
            Some(chain.gain[i]),
            Some(chain.noise[i]),
        ]);
    }

    let mut att_table = Table::new(
        "attenuation",
        &["db_loss", "linear", "flat", "max_deviation_db"],
    );
    att_table.push_row(&[
        Some(att.db_loss),
        Some(att.linear),
        Some(if att.flat { 1.0 } else { 0.0 }),
        Some(att.max_deviation_db),
    ]);

    let mut device = Table::new(
        "device",
        &["freq_mhz", "gain_db", "output_noise_photons", "noise_ratio"],
    );
    for i in 0..chain.frequency.len() {
        device.push_row(&[
            Some(mhz_from_angular(chain.frequency[i])),
            Some(10.0 * device_gain[i].log10()),
            Some(noise.photons[i]),
            ratios[i],
        ]);
    }

    let mut doc = ResultsDocument::new(
        "calibrate",
        json!({
            "hot": inputs.hot.display().to_string(),
            "cold": inputs.cold.display().to_string(),
            "short": inputs.short.display().to_string(),
            "gain_on": inputs.gain_on.display().to_string(),
            "gain_off": inputs.gain_off.display().to_string(),
            "noise_on": inputs.noise_on.display().to_string(),
            "noise_sc": inputs.noise_sc.display().to_string(),
            "t_hot_mk": inputs.t_hot_mk,
            "t_cold_mk": inputs.t_cold_mk,
            "max_ripple_db": inputs.max_ripple_db,
            "clipped_noise_bins": noise.clipped,
        }),
    );
    for p in [
        inputs.hot,
        inputs.cold,
        inputs.short,
        inputs.gain_on,
        inputs.gain_off,
        inputs.noise_on,
        inputs.noise_sc,
    ] {
        doc.record_input(p)?;
    }
    doc.tables.push(chain_table);
    doc.tables.push(att_table);
    doc.tables.push(device);
    doc.validate()?;
    Ok(doc)
}

/// Adds a component echo for one analytic Lorentzian (used by tests and the
/// Python bindings' smoke checks).
pub fn single_component_echo(fwhm_mhz: f64) -> DistEcho {
    DistEcho {
        components: vec![ComponentEcho {
            weight: 1.0,
            center_mhz: 0.0,
            fwhm_mhz,
        }],
    }
}
