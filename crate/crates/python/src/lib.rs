//! Python bindings for the amplifier model, bias-noise averaging, linewidth
//! fitting and Y-factor calibration. All frequencies cross this boundary in
//! MHz and temperatures in mK, matching the command-line interface.

use icta::constants::{angular_from_mhz, mhz_from_angular, PLANCK};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: icta::Error) -> PyErr {
    match e {
        icta::Error::Numerical(_) | icta::Error::FitNonConvergence { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Resonator and junction parameters of a two-mode amplifier.
#[pyclass(name = "DeviceParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDeviceParams {
    inner: icta::DeviceParams,
}

#[pymethods]
impl PyDeviceParams {
    /// Non-degenerate device; zero-point phases derived from the impedances.
    #[new]
    #[pyo3(signature = (omega_s_mhz, omega_i_mhz, kappa_s_mhz, kappa_i_mhz, z_s_ohm, z_i_ohm, ej_over_h_mhz=0.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        omega_s_mhz: f64,
        omega_i_mhz: f64,
        kappa_s_mhz: f64,
        kappa_i_mhz: f64,
        z_s_ohm: f64,
        z_i_ohm: f64,
        ej_over_h_mhz: f64,
    ) -> PyResult<Self> {
        let inner = icta::DeviceParams::new(
            angular_from_mhz(omega_s_mhz),
            angular_from_mhz(omega_i_mhz),
            angular_from_mhz(kappa_s_mhz),
            angular_from_mhz(kappa_i_mhz),
            z_s_ohm,
            z_i_ohm,
            PLANCK * ej_over_h_mhz * 1e6,
        )
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Degenerate device where signal and idler share one mode.
    #[staticmethod]
    #[pyo3(signature = (omega_mhz, kappa_mhz, z_ohm, ej_over_h_mhz=0.0))]
    fn degenerate(
        omega_mhz: f64,
        kappa_mhz: f64,
        z_ohm: f64,
        ej_over_h_mhz: f64,
    ) -> PyResult<Self> {
        let inner = icta::DeviceParams::degenerate(
            angular_from_mhz(omega_mhz),
            angular_from_mhz(kappa_mhz),
            z_ohm,
            PLANCK * ej_over_h_mhz * 1e6,
        )
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Published sample A parameters.
    #[staticmethod]
    fn sample_a() -> Self {
        Self {
            inner: icta::DeviceParams::sample_a(),
        }
    }

    /// Published sample B parameters.
    #[staticmethod]
    fn sample_b() -> Self {
        Self {
            inner: icta::DeviceParams::sample_b(),
        }
    }

    #[getter]
    fn omega_s_mhz(&self) -> f64 {
        mhz_from_angular(self.inner.omega_s())
    }
    #[getter]
    fn omega_i_mhz(&self) -> f64 {
        mhz_from_angular(self.inner.omega_i())
    }
    #[getter]
    fn kappa_s_mhz(&self) -> f64 {
        mhz_from_angular(self.inner.kappa_s())
    }
    #[getter]
    fn kappa_i_mhz(&self) -> f64 {
        mhz_from_angular(self.inner.kappa_i())
    }
    #[getter]
    fn phi_s(&self) -> f64 {
        self.inner.phi_s()
    }
    #[getter]
    fn phi_i(&self) -> f64 {
        self.inner.phi_i()
    }
    #[getter]
    fn degenerate_mode(&self) -> bool {
        self.inner.is_degenerate()
    }

    /// Dimensionless pump strength from the stored Josephson energy.
    fn coupling_xi(&self) -> f64 {
        self.inner.coupling_xi()
    }

    /// Josephson energy (as E_J/h in MHz) at which the gain diverges.
    fn ej_critical_over_h_mhz(&self) -> f64 {
        self.inner.ej_critical() / PLANCK / 1e6
    }

    /// Copy with a different Josephson energy (E_J/h in MHz).
    fn with_ej_over_h_mhz(&self, ej_over_h_mhz: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self
                .inner
                .with_ej(PLANCK * ej_over_h_mhz * 1e6)
                .map_err(to_py)?,
        })
    }

    /// Signal and idler detunings (MHz) of an input tone at a given bias.
    fn detunings_mhz(&self, omega_in_mhz: f64, omega_j_mhz: f64) -> PyResult<(f64, f64)> {
        let bias = icta::BiasPoint::new(angular_from_mhz(omega_j_mhz)).map_err(to_py)?;
        let d = self.inner.detunings(angular_from_mhz(omega_in_mhz), bias);
        Ok((mhz_from_angular(d.delta_s), mhz_from_angular(d.delta_i)))
    }

    /// Effective linewidth (MHz) for `axis` = "signal" or "bias".
    fn effective_linewidth_mhz(&self, axis: &str) -> PyResult<f64> {
        let axis = match axis {
            "signal" => icta::SweepAxis::Signal,
            "bias" => icta::SweepAxis::Bias,
            other => {
                return Err(PyValueError::new_err(format!(
                    "axis must be 'signal' or 'bias', got '{other}'"
                )))
            }
        };
        Ok(mhz_from_angular(self.inner.effective_linewidth(axis)))
    }

    fn __repr__(&self) -> String {
        format!(
            "DeviceParams(omega_s={:.1} MHz, omega_i={:.1} MHz, kappa_s={:.1} MHz, \
             kappa_i={:.1} MHz, xi={:.4})",
            self.omega_s_mhz(),
            self.omega_i_mhz(),
            self.kappa_s_mhz(),
            self.kappa_i_mhz(),
            self.coupling_xi()
        )
    }
}

/// Normalized Lorentzian mixture over the Josephson frequency; component
/// centers are offsets (MHz) from the nominal bias.
#[pyclass(name = "BiasDistribution", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBiasDistribution {
    inner: icta::BiasDistribution,
}

impl PyBiasDistribution {
    fn centered_on(&self, params: &icta::DeviceParams) -> icta::BiasDistribution {
        self.inner.with_nominal(params.omega_s() + params.omega_i())
    }
}

#[pymethods]
impl PyBiasDistribution {
    /// Single Lorentzian of the given FWHM.
    #[staticmethod]
    fn single(fwhm_mhz: f64) -> PyResult<Self> {
        Ok(Self {
            inner: icta::BiasDistribution::single(angular_from_mhz(fwhm_mhz), 0.0)
                .map_err(to_py)?,
        })
    }

    /// Mixture from (weight, center_mhz, fwhm_mhz) components; weights are
    /// renormalized.
    #[staticmethod]
    fn mixture(components: Vec<(f64, f64, f64)>) -> PyResult<Self> {
        let comps = components
            .into_iter()
            .map(|(w, c, f)| {
                icta::LorentzianComponent::new(w, angular_from_mhz(c), angular_from_mhz(f))
            })
            .collect::<icta::Result<Vec<_>>>()
            .map_err(to_py)?;
        Ok(Self {
            inner: icta::BiasDistribution::from_weights(comps, 0.0).map_err(to_py)?,
        })
    }

    /// Published low-noise configuration (5.6 MHz single Lorentzian).
    #[staticmethod]
    fn low_noise() -> Self {
        Self {
            inner: icta::BiasDistribution::low_noise(0.0),
        }
    }

    /// Published medium-noise configuration (28.5 MHz central peak, 45.8 MHz
    /// side peaks at ±48 MHz).
    #[staticmethod]
    fn medium_noise() -> Self {
        Self {
            inner: icta::BiasDistribution::medium_noise(0.0),
        }
    }

    /// Published high-noise configuration (73.8 MHz single Lorentzian).
    #[staticmethod]
    fn high_noise() -> Self {
        Self {
            inner: icta::BiasDistribution::high_noise(0.0),
        }
    }

    /// (weight, center_mhz, fwhm_mhz) triples.
    #[getter]
    fn components(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .components()
            .iter()
            .map(|c| {
                (
                    c.weight,
                    mhz_from_angular(c.center),
                    mhz_from_angular(c.fwhm),
                )
            })
            .collect()
    }

    /// Probability density per MHz at an offset (MHz) from the nominal bias.
    fn density_per_mhz(&self, offset_mhz: f64) -> f64 {
        self.inner.density(angular_from_mhz(offset_mhz)) * angular_from_mhz(1.0)
    }

    /// FWHM (MHz) of the dominant component.
    fn principal_fwhm_mhz(&self) -> f64 {
        mhz_from_angular(self.inner.principal_fwhm())
    }

    fn __repr__(&self) -> String {
        format!(
            "BiasDistribution({} components)",
            self.inner.components().len()
        )
    }
}

/// Gain and noise of the amplifier averaged over bias noise.
#[pyclass(name = "AveragedResponse", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyAveragedResponse {
    inner: icta::AveragedResponse,
}

#[pymethods]
impl PyAveragedResponse {
    /// Complex mean amplitude gain.
    #[getter]
    fn mean_amplitude(&self) -> Complex64 {
        self.inner.mean_amplitude
    }
    /// Effective (coherent) power gain.
    #[getter]
    fn power_gain(&self) -> f64 {
        self.inner.power_gain
    }
    /// Effective power gain in dB.
    #[getter]
    fn gain_db(&self) -> f64 {
        self.inner.gain_db()
    }
    /// Mean output noise in photons.
    #[getter]
    fn output_noise(&self) -> f64 {
        self.inner.output_noise
    }
    /// Noise relative to the quantum limit; None below unit gain.
    #[getter]
    fn noise_ratio(&self) -> Option<f64> {
        self.inner.noise_ratio
    }

    fn __repr__(&self) -> String {
        format!(
            "AveragedResponse(gain={:.2} dB, noise_ratio={:?})",
            self.inner.gain_db(),
            self.inner.noise_ratio
        )
    }
}

/// Zero-point phase fluctuation of a mode with characteristic impedance z.
#[pyfunction]
fn zero_point_phase(z_ohm: f64) -> PyResult<f64> {
    icta::zero_point_phase(z_ohm).map_err(to_py)
}

/// Maximum amplitude gain (1 + xi^2)/(1 - xi^2).
#[pyfunction]
fn max_gain(xi: f64) -> PyResult<f64> {
    icta::max_gain(xi).map_err(to_py)
}

/// Complex amplitude gain at the given detunings (MHz).
#[pyfunction]
fn amplitude_gain(
    delta_s_mhz: f64,
    delta_i_mhz: f64,
    xi: f64,
    device: &PyDeviceParams,
) -> PyResult<Complex64> {
    icta::amplitude_gain(
        icta::Detunings {
            delta_s: angular_from_mhz(delta_s_mhz),
            delta_i: angular_from_mhz(delta_i_mhz),
        },
        xi,
        &device.inner,
    )
    .map_err(to_py)
}

/// Analytic 3 dB bandwidth (MHz) of a signal sweep at maximum gain g0.
#[pyfunction]
fn bandwidth_analytic_mhz(device: &PyDeviceParams, g0: f64) -> PyResult<f64> {
    icta::bandwidth_analytic(&device.inner, g0)
        .map(mhz_from_angular)
        .map_err(to_py)
}

/// Thermal Josephson linewidth (MHz) of a bias impedance at temperature
/// t_mk.
#[pyfunction]
fn fwhm_from_thermal_mhz(t_mk: f64, z_ohm: f64) -> PyResult<f64> {
    icta::fwhm_from_thermal(t_mk * 1e-3, z_ohm)
        .map(mhz_from_angular)
        .map_err(to_py)
}

/// Effective bias-impedance temperature (mK) from a linewidth (MHz).
#[pyfunction]
fn effective_temperature_mk(fwhm_mhz: f64, z_ohm: f64) -> PyResult<f64> {
    icta::effective_temperature(angular_from_mhz(fwhm_mhz), z_ohm)
        .map(|t| t * 1e3)
        .map_err(to_py)
}

/// Thermal photon occupancy (vacuum included) of a load at t_mk seen at
/// freq_mhz.
#[pyfunction]
fn planck_occupancy(t_mk: f64, freq_mhz: f64) -> PyResult<f64> {
    icta::planck_occupancy(t_mk * 1e-3, angular_from_mhz(freq_mhz)).map_err(to_py)
}

/// Bias-averaged response at one input frequency.
#[pyfunction]
fn averaged_response(
    device: &PyDeviceParams,
    xi: f64,
    omega_in_mhz: f64,
    dist: &PyBiasDistribution,
) -> PyResult<PyAveragedResponse> {
    icta::averaged_response(
        &device.inner,
        xi,
        angular_from_mhz(omega_in_mhz),
        &dist.centered_on(&device.inner),
    )
    .map(|inner| PyAveragedResponse { inner })
    .map_err(to_py)
}

/// Bias-averaged responses over a frequency grid (MHz).
#[pyfunction]
fn frequency_sweep(
    device: &PyDeviceParams,
    xi: f64,
    dist: &PyBiasDistribution,
    freqs_mhz: Vec<f64>,
) -> PyResult<Vec<PyAveragedResponse>> {
    let grid: Vec<f64> = freqs_mhz.iter().map(|&f| angular_from_mhz(f)).collect();
    let curve = icta::frequency_sweep(&device.inner, xi, &dist.centered_on(&device.inner), &grid)
        .map_err(to_py)?;
    Ok(curve
        .responses
        .into_iter()
        .map(|inner| PyAveragedResponse { inner })
        .collect())
}

/// One tradeoff row: (xi, gain_db, bandwidth_mhz, noise_ratio).
type TradeoffRow = (f64, f64, f64, Option<f64>);

/// Tradeoff scan: (xi, gain_db, bandwidth_mhz, noise_ratio) per pump
/// strength, sorted by gain.
#[pyfunction]
fn gain_noise_tradeoff(
    device: &PyDeviceParams,
    dist: &PyBiasDistribution,
    xi_grid: Vec<f64>,
) -> PyResult<Vec<TradeoffRow>> {
    let points =
        icta::gain_noise_tradeoff(&device.inner, &dist.centered_on(&device.inner), &xi_grid)
            .map_err(to_py)?;
    Ok(points
        .into_iter()
        .map(|p| {
            (
                p.xi,
                p.gain_db,
                mhz_from_angular(p.bandwidth),
                p.noise_ratio,
            )
        })
        .collect())
}

/// Pump strength and gain (dB) where the noise ratio crosses a threshold.
#[pyfunction]
fn gain_at_noise_threshold(
    device: &PyDeviceParams,
    dist: &PyBiasDistribution,
    r_threshold: f64,
) -> PyResult<(f64, f64)> {
    let c =
        icta::gain_at_noise_threshold(&device.inner, &dist.centered_on(&device.inner), r_threshold)
            .map_err(to_py)?;
    Ok((c.xi, c.response.gain_db()))
}

/// Monte-Carlo verification of the averaged response. Returns the estimate
/// plus the standard errors of the mean amplitude and mean power.
#[pyfunction]
fn monte_carlo_oracle(
    device: &PyDeviceParams,
    xi: f64,
    omega_in_mhz: f64,
    dist: &PyBiasDistribution,
    n_samples: usize,
    seed: u64,
) -> PyResult<(PyAveragedResponse, f64, f64)> {
    let est = icta::monte_carlo_oracle(
        &device.inner,
        xi,
        angular_from_mhz(omega_in_mhz),
        &dist.centered_on(&device.inner),
        n_samples,
        seed,
    )
    .map_err(to_py)?;
    Ok((
        PyAveragedResponse {
            inner: est.response,
        },
        est.se_mean_amplitude,
        est.se_mean_power,
    ))
}

/// Fits a Lorentzian mixture to (wj_mhz, psd) data. Returns a dict with the
/// background, residual norm, convergence flag, iteration count and a list
/// of (amplitude, center_mhz, fwhm_mhz) peaks.
#[pyfunction]
#[pyo3(signature = (wj_mhz, psd, n_components, symmetric=false))]
fn fit_lorentzian_mixture(
    py: Python<'_>,
    wj_mhz: Vec<f64>,
    psd: Vec<f64>,
    n_components: usize,
    symmetric: bool,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let x: Vec<f64> = wj_mhz.iter().map(|&f| angular_from_mhz(f)).collect();
    let record = icta::SpectrumRecord::new(x, psd, None).map_err(to_py)?;
    let opts = icta::FitOptions {
        symmetric_sides: symmetric,
        ..Default::default()
    };
    let fit = icta::fit_mixture_with(&record, n_components, &opts).map_err(to_py)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("background", fit.background)?;
    dict.set_item("residual_norm", fit.residual_norm)?;
    dict.set_item("converged", fit.converged)?;
    dict.set_item("iterations", fit.iterations)?;
    let peaks: Vec<(f64, f64, f64)> = fit
        .peaks
        .iter()
        .map(|p| {
            (
                p.amplitude,
                mhz_from_angular(p.center),
                mhz_from_angular(p.fwhm),
            )
        })
        .collect();
    dict.set_item("peaks", peaks)?;
    Ok(dict.unbind())
}

/// Y-factor chain calibration from hot/cold load spectra on a common grid.
/// Returns (chain_gain, chain_noise_photons) per frequency.
#[pyfunction]
fn y_factor(
    freq_mhz: Vec<f64>,
    p_hot: Vec<f64>,
    p_cold: Vec<f64>,
    t_hot_mk: f64,
    t_cold_mk: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let freq: Vec<f64> = freq_mhz.iter().map(|&f| angular_from_mhz(f)).collect();
    let hot = icta::LoadSpectrum::new(
        freq.clone(),
        p_hot,
        Some(t_hot_mk * 1e-3),
        icta::LoadLabel::Hot,
    )
    .map_err(to_py)?;
    let cold = icta::LoadSpectrum::new(freq, p_cold, Some(t_cold_mk * 1e-3), icta::LoadLabel::Cold)
        .map_err(to_py)?;
    let chain = icta::y_factor(&hot, &cold).map_err(to_py)?;
    Ok((chain.gain, chain.noise))
}

#[pymodule]
fn icta_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDeviceParams>()?;
    m.add_class::<PyBiasDistribution>()?;
    m.add_class::<PyAveragedResponse>()?;
    m.add_function(wrap_pyfunction!(zero_point_phase, m)?)?;
    m.add_function(wrap_pyfunction!(max_gain, m)?)?;
    m.add_function(wrap_pyfunction!(amplitude_gain, m)?)?;
    m.add_function(wrap_pyfunction!(bandwidth_analytic_mhz, m)?)?;
    m.add_function(wrap_pyfunction!(fwhm_from_thermal_mhz, m)?)?;
    m.add_function(wrap_pyfunction!(effective_temperature_mk, m)?)?;
    m.add_function(wrap_pyfunction!(planck_occupancy, m)?)?;
    m.add_function(wrap_pyfunction!(averaged_response, m)?)?;
    m.add_function(wrap_pyfunction!(frequency_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(gain_noise_tradeoff, m)?)?;
    m.add_function(wrap_pyfunction!(gain_at_noise_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(fit_lorentzian_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(y_factor, m)?)?;
    Ok(())
}
