//! Adiabatic averaging of gain and quantum-limited noise over a distribution
//! of Josephson frequencies.
//!
//! Bias-voltage fluctuations are slow compared to the amplifier response, so
//! the observed response is the ensemble average of frozen-bias responses:
//! the coherent power gain is |⟨g⟩|² while the output noise is ⟨|g|²⟩ − 1.
//! Averaging can only make the noise ratio worse, since ⟨|g|²⟩ ≥ |⟨g⟩|².
//!
//! Only fluctuations slower than roughly Δω_J/(16·ln 2) contribute to the
//! measured line width; faster noise would require a spectral convolution
//! treatment that is deliberately out of scope here.

use crate::bias::BiasDistribution;
use crate::device::{Detunings, DeviceParams};
use crate::error::{Error, Result};
use crate::gain::{self, check_xi};
use crate::quad::{average_over, QuadratureSettings};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Response of the amplifier averaged over bias noise at one input frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragedResponse {
    /// Complex mean amplitude gain ⟨g⟩.
    pub mean_amplitude: Complex64,
    /// Effective (coherent) power gain |⟨g⟩|².
    pub power_gain: f64,
    /// Mean output noise ⟨|g|²⟩ − 1 in photons at the device output.
    pub output_noise: f64,
    /// Output noise relative to an ideal amplifier of the same effective
    /// gain, (⟨|g|²⟩ − 1)/(|⟨g⟩|² − 1). `None` when the effective gain does
    /// not exceed unity and the ratio is undefined.
    pub noise_ratio: Option<f64>,
}

impl AveragedResponse {
    fn from_moments(mean_g: Complex64, mean_power: f64) -> Self {
        let power_gain = mean_g.norm_sqr();
        let output_noise = mean_power - 1.0;
        let noise_ratio = if power_gain > 1.0 + 1e-12 {
            Some(output_noise / (power_gain - 1.0))
        } else {
            None
        };
        Self {
            mean_amplitude: mean_g,
            power_gain,
            output_noise,
            noise_ratio,
        }
    }

    /// Effective power gain in dB.
    pub fn gain_db(&self) -> f64 {
        gain::db_from_power(self.power_gain)
    }
}

fn gain_average(
    params: &DeviceParams,
    xi: f64,
    omega_in: f64,
    dist: &BiasDistribution,
    settings: &QuadratureSettings,
) -> Result<(Complex64, f64)> {
    check_xi(xi)?;
    let delta_s = omega_in - params.omega_s();
    // the parametric resonance sits at zero idler detuning and has half-width
    // kappa_I (1 - xi^2)/2 in the Josephson frequency
    let resonance = omega_in + params.omega_i();
    let res_width = (params.kappa_i() * (1.0 - xi * xi) / 2.0).max(1e-9 * params.kappa_i());
    average_over(
        dist,
        &[(resonance, res_width)],
        |omega_j| {
            gain::amplitude_gain_unchecked(
                Detunings {
                    delta_s,
                    delta_i: omega_j - omega_in - params.omega_i(),
                },
                xi,
                params,
            )
        },
        settings,
    )
}

/// Gain and noise at input frequency `omega_in` (rad/s), averaged over the
/// bias distribution with the default quadrature settings.
pub fn averaged_response(
    params: &DeviceParams,
    xi: f64,
    omega_in: f64,
    dist: &BiasDistribution,
) -> Result<AveragedResponse> {
    averaged_response_with(params, xi, omega_in, dist, &QuadratureSettings::default())
}

/// [`averaged_response`] with explicit quadrature settings.
pub fn averaged_response_with(
    params: &DeviceParams,
    xi: f64,
    omega_in: f64,
    dist: &BiasDistribution,
    settings: &QuadratureSettings,
) -> Result<AveragedResponse> {
    let (mean_g, mean_power) = gain_average(params, xi, omega_in, dist, settings)?;
    Ok(AveragedResponse::from_moments(mean_g, mean_power))
}

/// Averaged responses on a grid of input frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    /// Input frequencies (rad/s), strictly increasing.
    pub omega_in: Vec<f64>,
    /// One averaged response per grid point.
    pub responses: Vec<AveragedResponse>,
}

/// Evaluates [`averaged_response`] over a sorted grid of input frequencies.
/// Grid points are processed in parallel; results keep the grid order.
pub fn frequency_sweep(
    params: &DeviceParams,
    xi: f64,
    dist: &BiasDistribution,
    grid: &[f64],
) -> Result<SweepCurve> {
    frequency_sweep_with(params, xi, dist, grid, &QuadratureSettings::default())
}

/// [`frequency_sweep`] with explicit quadrature settings.
pub fn frequency_sweep_with(
    params: &DeviceParams,
    xi: f64,
    dist: &BiasDistribution,
    grid: &[f64],
    settings: &QuadratureSettings,
) -> Result<SweepCurve> {
    if grid.is_empty() {
        return Err(Error::Validation("frequency grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(
            "frequency grid must be strictly increasing".into(),
        ));
    }
    check_xi(xi)?;
    let responses: Result<Vec<_>> = grid
        .par_iter()
        .map(|&w| averaged_response_with(params, xi, w, dist, settings))
        .collect();
    Ok(SweepCurve {
        omega_in: grid.to_vec(),
        responses: responses?,
    })
}

/// 3 dB full width (rad/s) of the effective power gain along a sweep curve:
/// the width of the region where the gain stays within 3 dB of its maximum,
/// found by linear interpolation between bracketing grid points.
///
/// The curve must peak strictly inside the grid and fall below half the peak
/// power on both sides of it.
pub fn extract_bandwidth(curve: &SweepCurve) -> Result<f64> {
    let n = curve.responses.len();
    if n < 3 {
        return Err(Error::Range("need at least 3 sweep points".into()));
    }
    let gains: Vec<f64> = curve.responses.iter().map(|r| r.power_gain).collect();
    let (i_max, &g_max) = gains
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite gains"))
        .expect("non-empty curve");
    if i_max == 0 || i_max == n - 1 {
        return Err(Error::Range(
            "gain maximum sits on the grid edge; widen the sweep".into(),
        ));
    }
    let target = g_max / 2.0;
    let cross = |i0: usize, i1: usize| -> f64 {
        // linear interpolation of the crossing between samples i0 and i1
        let (x0, x1) = (curve.omega_in[i0], curve.omega_in[i1]);
        let (y0, y1) = (gains[i0], gains[i1]);
        x0 + (target - y0) * (x1 - x0) / (y1 - y0)
    };
    let mut right = None;
    for i in i_max..n - 1 {
        if gains[i] >= target && gains[i + 1] < target {
            right = Some(cross(i, i + 1));
            break;
        }
    }
    let mut left = None;
    for i in (1..=i_max).rev() {
        if gains[i] >= target && gains[i - 1] < target {
            left = Some(cross(i, i - 1));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::Range(
            "gain does not drop 3 dB below the maximum inside the grid".into(),
        )),
    }
}

/// One operating point of the gain/bandwidth/noise tradeoff scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    /// Pump strength.
    pub xi: f64,
    /// Input frequency (rad/s) that maximizes the averaged gain.
    pub omega_opt: f64,
    /// Effective power gain in dB at the optimum.
    pub gain_db: f64,
    /// Numerical 3 dB bandwidth (rad/s) of the averaged gain curve.
    pub bandwidth: f64,
    /// Noise ratio at the optimum.
    pub noise_ratio: Option<f64>,
    /// Full averaged response at the optimum.
    pub response: AveragedResponse,
}

/// Golden-section maximization of the averaged power gain over the input
/// frequency, on ω_S ± κ_S, to 1 kHz.
fn maximize_gain(
    params: &DeviceParams,
    xi: f64,
    dist: &BiasDistribution,
    settings: &QuadratureSettings,
) -> Result<(f64, AveragedResponse)> {
    let eval = |w: f64| -> Result<f64> {
        Ok(averaged_response_with(params, xi, w, dist, settings)?.power_gain)
    };
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let tol = 2.0 * PI * 1e3;
    let mut a = params.omega_s() - params.kappa_s();
    let mut b = params.omega_s() + params.kappa_s();
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let w = 0.5 * (a + b);
    Ok((w, averaged_response_with(params, xi, w, dist, settings)?))
}

/// Numerical 3 dB bandwidth of the averaged gain around its optimum, with
/// the sweep span widened automatically until both crossings are bracketed.
fn bandwidth_around(
    params: &DeviceParams,
    xi: f64,
    dist: &BiasDistribution,
    omega_opt: f64,
    response: &AveragedResponse,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let g_amp = response.power_gain.sqrt().max(1.0 + 1e-9);
    let mut span = 4.0 * gain::bandwidth_analytic(params, g_amp.max(1.001))?;
    let span_cap = 8.0 * params.kappa_s();
    loop {
        let n = 513;
        let grid: Vec<f64> = (0..n)
            .map(|i| omega_opt - span + 2.0 * span * i as f64 / (n - 1) as f64)
            .collect();
        let curve = frequency_sweep_with(params, xi, dist, &grid, settings)?;
        match extract_bandwidth(&curve) {
            Ok(b) => return Ok(b),
            Err(Error::Range(_)) if span < span_cap => span *= 2.0,
            Err(e) => return Err(e),
        }
    }
}

/// Gain, bandwidth and noise ratio at the gain-maximizing input frequency
/// for each pump strength in `xi_grid`. The result is sorted by effective
/// gain.
pub fn gain_noise_tradeoff(
    params: &DeviceParams,
    dist: &BiasDistribution,
    xi_grid: &[f64],
) -> Result<Vec<TradeoffPoint>> {
    gain_noise_tradeoff_with(params, dist, xi_grid, &QuadratureSettings::default())
}

/// [`gain_noise_tradeoff`] with explicit quadrature settings.
pub fn gain_noise_tradeoff_with(
    params: &DeviceParams,
    dist: &BiasDistribution,
    xi_grid: &[f64],
    settings: &QuadratureSettings,
) -> Result<Vec<TradeoffPoint>> {
    if xi_grid.is_empty() {
        return Err(Error::Validation("pump strength grid is empty".into()));
    }
    for &xi in xi_grid {
        check_xi(xi)?;
    }
    let mut points: Vec<TradeoffPoint> = xi_grid
        .par_iter()
        .map(|&xi| -> Result<TradeoffPoint> {
            let (omega_opt, response) = maximize_gain(params, xi, dist, settings)?;
            let bandwidth = bandwidth_around(params, xi, dist, omega_opt, &response, settings)?;
            Ok(TradeoffPoint {
                xi,
                omega_opt,
                gain_db: response.gain_db(),
                bandwidth,
                noise_ratio: response.noise_ratio,
                response,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        a.response
            .power_gain
            .partial_cmp(&b.response.power_gain)
            .expect("finite gains")
    });
    Ok(points)
}

/// Operating point where the noise ratio reaches a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdCrossing {
    /// Pump strength at the crossing.
    pub xi: f64,
    /// Gain-maximizing input frequency (rad/s) at the crossing.
    pub omega_in: f64,
    /// Averaged response at the crossing.
    pub response: AveragedResponse,
}

/// Finds the pump strength at which the noise ratio R (evaluated at the
/// gain-maximizing input frequency) crosses `r_threshold`, and returns the
/// operating point there. The effective gain at this point is the maximum
/// gain achievable with R at or below the threshold, since both gain and R
/// increase monotonically with the pump strength.
pub fn gain_at_noise_threshold(
    params: &DeviceParams,
    dist: &BiasDistribution,
    r_threshold: f64,
) -> Result<ThresholdCrossing> {
    gain_at_noise_threshold_with(params, dist, r_threshold, &QuadratureSettings::default())
}

/// [`gain_at_noise_threshold`] with explicit quadrature settings.
pub fn gain_at_noise_threshold_with(
    params: &DeviceParams,
    dist: &BiasDistribution,
    r_threshold: f64,
    settings: &QuadratureSettings,
) -> Result<ThresholdCrossing> {
    if !r_threshold.is_finite() || r_threshold <= 1.0 {
        return Err(Error::Domain(format!(
            "noise-ratio threshold must exceed 1, got {r_threshold}"
        )));
    }
    // work in q = 1 - xi^2; R grows monotonically as q -> 0
    let eval = |q: f64| -> Result<(f64, f64, AveragedResponse)> {
        let xi = (1.0 - q).sqrt();
        let (w, r) = maximize_gain(params, xi, dist, settings)?;
        Ok((w, r.noise_ratio.unwrap_or(1.0), r))
    };
    let mut q_hi = 0.75; // low pump side, R near 1
    let (_, r_at_hi, _) = eval(q_hi)?;
    if r_at_hi > r_threshold {
        return Err(Error::Range(format!(
            "noise ratio already exceeds {r_threshold} at xi = 0.5"
        )));
    }
    let mut q_lo = q_hi;
    loop {
        q_lo /= 4.0;
        if q_lo < 1e-9 {
            return Err(Error::Range(format!(
                "noise ratio stays below {r_threshold} for all reachable gains"
            )));
        }
        let (_, r, _) = eval(q_lo)?;
        if r > r_threshold {
            break;
        }
        q_hi = q_lo;
    }
    for _ in 0..60 {
        let q_mid = (q_lo * q_hi).sqrt();
        let (_, r, _) = eval(q_mid)?;
        if r > r_threshold {
            q_lo = q_mid;
        } else {
            q_hi = q_mid;
        }
        if q_hi / q_lo < 1.0 + 1e-9 {
            break;
        }
    }
    let q = q_hi; // the last point at or below the threshold
    let xi = (1.0 - q).sqrt();
    let (omega_in, _, response) = eval(q)?;
    Ok(ThresholdCrossing {
        xi,
        omega_in,
        response,
    })
}

/// Monte-Carlo estimate of an averaged response, with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    /// Response assembled from the sample means.
    pub response: AveragedResponse,
    /// Standard error of the complex mean amplitude (combined components).
    pub se_mean_amplitude: f64,
    /// Standard error of the mean power ⟨|g|²⟩.
    pub se_mean_power: f64,
    /// Number of samples drawn.
    pub n_samples: usize,
}

/// Independent verification oracle for [`averaged_response`]: samples the
/// mixture by inverse-CDF draws (component chosen by weight, position by the
/// tangent quantile of the Lorentzian) and averages the frozen-bias gain.
///
/// Deterministic for a fixed seed: samples are drawn and accumulated in a
/// single sequence.
pub fn monte_carlo_oracle(
    params: &DeviceParams,
    xi: f64,
    omega_in: f64,
    dist: &BiasDistribution,
    n_samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_xi(xi)?;
    if n_samples < 10_000 {
        return Err(Error::Validation(format!(
            "Monte-Carlo oracle needs at least 10^4 samples, got {n_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta_s = omega_in - params.omega_s();
    let mut cum = Vec::with_capacity(dist.components().len());
    let mut acc = 0.0;
    for c in dist.components() {
        acc += c.weight;
        cum.push(acc);
    }
    let (mut sum_g, mut sum_re2, mut sum_im2) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    let (mut sum_p, mut sum_p2) = (0.0, 0.0);
    for _ in 0..n_samples {
        let u_comp: f64 = rng.random();
        let k = cum
            .iter()
            .position(|&c| u_comp < c)
            .unwrap_or(dist.components().len() - 1);
        let comp = &dist.components()[k];
        let u_pos: f64 = rng.random();
        let omega_j = dist.nominal() + comp.center + 0.5 * comp.fwhm * (PI * (u_pos - 0.5)).tan();
        let g = gain::amplitude_gain_unchecked(
            Detunings {
                delta_s,
                delta_i: omega_j - omega_in - params.omega_i(),
            },
            xi,
            params,
        );
        sum_g += g;
        sum_re2 += g.re * g.re;
        sum_im2 += g.im * g.im;
        let p = g.norm_sqr();
        sum_p += p;
        sum_p2 += p * p;
    }
    let n = n_samples as f64;
    let mean_g = sum_g / n;
    let mean_p = sum_p / n;
    let var_re = (sum_re2 / n - mean_g.re * mean_g.re).max(0.0);
    let var_im = (sum_im2 / n - mean_g.im * mean_g.im).max(0.0);
    let var_p = (sum_p2 / n - mean_p * mean_p).max(0.0);
    Ok(MonteCarloEstimate {
        response: AveragedResponse::from_moments(mean_g, mean_p),
        se_mean_amplitude: ((var_re + var_im) / n).sqrt(),
        se_mean_power: (var_p / n).sqrt(),
        n_samples,
    })
}
