//! Ideal two-mode parametric gain: complex amplitude gain versus detuning,
//! maximum gain, the high-gain Lorentzian approximation and the analytic
//! gain-bandwidth relation.

use crate::device::{Detunings, DeviceParams, SweepAxis};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Validates a pump strength for amplification: requires 0 ≤ Ξ < 1.
pub(crate) fn check_xi(xi: f64) -> Result<()> {
    if !xi.is_finite() || xi < 0.0 {
        return Err(Error::Domain(format!(
            "pump strength must be non-negative, got {xi}"
        )));
    }
    if xi >= 1.0 {
        return Err(Error::Divergence { xi });
    }
    Ok(())
}

/// Complex amplitude gain of the two-mode amplifier,
///
/// g = (τ_S·τ_I + Ξ²) / (τ_S*·τ_I − Ξ²),   τ_x = 1 + 2i·Δ_x/κ_x.
///
/// |g| ≥ 1 holds on the Δ_S = 0 and Δ_I = 0 slices but is not guaranteed for
/// arbitrary mixed detunings. The reflection phase at Ξ = 0 is convention
/// dependent; only |g| carries measurement meaning there.
pub fn amplitude_gain(det: Detunings, xi: f64, params: &DeviceParams) -> Result<Complex64> {
    check_xi(xi)?;
    Ok(amplitude_gain_unchecked(det, xi, params))
}

/// Same as [`amplitude_gain`] without the pump-strength check; used by inner
/// loops that validate once.
#[inline]
pub(crate) fn amplitude_gain_unchecked(
    det: Detunings,
    xi: f64,
    params: &DeviceParams,
) -> Complex64 {
    let xi2 = xi * xi;
    let tau_s = Complex64::new(1.0, 2.0 * det.delta_s / params.kappa_s());
    let tau_i = Complex64::new(1.0, 2.0 * det.delta_i / params.kappa_i());
    (tau_s * tau_i + xi2) / (tau_s.conj() * tau_i - xi2)
}

/// Maximum amplitude gain g₀ = (1 + Ξ²)/(1 − Ξ²), reached at zero detunings.
pub fn max_gain(xi: f64) -> Result<f64> {
    check_xi(xi)?;
    let xi2 = xi * xi;
    Ok((1.0 + xi2) / (1.0 - xi2))
}

/// Pump strength that produces a given maximum amplitude gain g₀ ≥ 1.
pub fn xi_for_max_gain(g0: f64) -> Result<f64> {
    if !g0.is_finite() || g0 < 1.0 {
        return Err(Error::Domain(format!(
            "maximum amplitude gain must be >= 1, got {g0}"
        )));
    }
    Ok(((g0 - 1.0) / (g0 + 1.0)).sqrt())
}

/// High-gain Lorentzian approximation of the gain profile,
/// g(δ) = g₀ / (1 − i·g₀·δ/κ_eff).
///
/// `kappa_eff` must match the sweep axis: the harmonic sum of the linewidths
/// for signal sweeps at optimal bias, κ_I for bias sweeps at Δ_S = 0 (see
/// [`DeviceParams::effective_linewidth`]).
pub fn lorentzian_gain_approx(delta: f64, kappa_eff: f64, g0: f64) -> Complex64 {
    debug_assert!(g0 >= 1.0 && kappa_eff > 0.0);
    g0 / Complex64::new(1.0, -g0 * delta / kappa_eff)
}

/// Analytic 3 dB bandwidth B₀ = 2·κ_eff/g₀ of a signal-frequency sweep at
/// optimal bias, with κ_eff the harmonic sum of the mode linewidths.
pub fn bandwidth_analytic(params: &DeviceParams, g0: f64) -> Result<f64> {
    if !g0.is_finite() || g0 <= 1.0 {
        return Err(Error::Domain(format!(
            "bandwidth is undefined at amplitude gain {g0} (need g0 > 1)"
        )));
    }
    Ok(2.0 * params.effective_linewidth(SweepAxis::Signal) / g0)
}

/// Power gain in dB of a complex amplitude gain.
pub fn power_gain_db(g: Complex64) -> f64 {
    20.0 * g.norm().log10()
}

/// Power gain in dB of a real power ratio.
pub fn db_from_power(p: f64) -> f64 {
    10.0 * p.log10()
}
