//! Distributions of the Josephson frequency caused by bias-voltage noise.
//!
//! Thermal noise of a flat, low bias impedance broadens the Josephson
//! frequency into a Lorentzian line; structured bias circuits produce
//! mixtures of Lorentzians. These distributions drive the adiabatic
//! averaging in [`crate::average`].

use crate::constants;
use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// One Lorentzian component of a bias distribution. The center is an offset
/// from the distribution's nominal Josephson frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorentzianComponent {
    /// Mixture weight, strictly positive.
    pub weight: f64,
    /// Center offset from the nominal bias (rad/s).
    pub center: f64,
    /// Full width at half maximum (rad/s), strictly positive.
    pub fwhm: f64,
}

impl LorentzianComponent {
    pub fn new(weight: f64, center: f64, fwhm: f64) -> Result<Self> {
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::Validation(format!(
                "component weight must be strictly positive, got {weight}"
            )));
        }
        if !fwhm.is_finite() || fwhm <= 0.0 {
            return Err(Error::Validation(format!(
                "component FWHM must be strictly positive, got {fwhm}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::Validation("component center must be finite".into()));
        }
        Ok(Self {
            weight,
            center,
            fwhm,
        })
    }

    /// Normalized Lorentzian density of this component at offset `x` from
    /// the component center.
    fn density_at_offset(&self, x: f64) -> f64 {
        let gamma = self.fwhm / 2.0;
        gamma / (PI * (x * x + gamma * gamma))
    }
}

/// Normalized mixture of Lorentzians over the Josephson frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasDistribution {
    components: Vec<LorentzianComponent>,
    nominal: f64,
}

impl BiasDistribution {
    /// Builds a distribution from components whose weights must already sum
    /// to one within 1e-9. `nominal` is the nominal Josephson frequency
    /// (rad/s) that component centers are offset from.
    pub fn new(components: Vec<LorentzianComponent>, nominal: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Validation(
                "bias distribution needs at least one component".into(),
            ));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "component weights must sum to 1 (got {total}); use from_weights to renormalize"
            )));
        }
        Ok(Self {
            components,
            nominal,
        })
    }

    /// Builds a distribution from arbitrary positive weights, renormalizing
    /// them to sum to one.
    pub fn from_weights(mut components: Vec<LorentzianComponent>, nominal: f64) -> Result<Self> {
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if total <= 0.0 {
            return Err(Error::Validation("total weight must be positive".into()));
        }
        for c in &mut components {
            c.weight /= total;
        }
        Self::new(components, nominal)
    }

    /// Single Lorentzian of the given FWHM (rad/s), centered on the nominal
    /// bias.
    pub fn single(fwhm: f64, nominal: f64) -> Result<Self> {
        Ok(Self {
            components: vec![LorentzianComponent::new(1.0, 0.0, fwhm)?],
            nominal,
        })
    }

    /// Low-noise configuration: single Lorentzian, 5.6 MHz FWHM.
    pub fn low_noise(nominal: f64) -> Self {
        Self::single(constants::angular_from_mhz(5.6), nominal).expect("valid preset")
    }

    /// Medium-noise configuration: 28.5 MHz central peak plus 45.8 MHz side
    /// peaks at ±48 MHz. The side-lobe weights are not published; they are
    /// pinned to a quarter of the total each, half for the central peak.
    pub fn medium_noise(nominal: f64) -> Self {
        let mhz = constants::angular_from_mhz;
        Self::new(
            vec![
                LorentzianComponent::new(0.5, 0.0, mhz(28.5)).expect("valid preset"),
                LorentzianComponent::new(0.25, mhz(48.0), mhz(45.8)).expect("valid preset"),
                LorentzianComponent::new(0.25, -mhz(48.0), mhz(45.8)).expect("valid preset"),
            ],
            nominal,
        )
        .expect("valid preset")
    }

    /// High-noise configuration: single Lorentzian, 73.8 MHz FWHM.
    pub fn high_noise(nominal: f64) -> Self {
        Self::single(constants::angular_from_mhz(73.8), nominal).expect("valid preset")
    }

    pub fn components(&self) -> &[LorentzianComponent] {
        &self.components
    }

    /// Nominal Josephson frequency (rad/s).
    pub fn nominal(&self) -> f64 {
        self.nominal
    }

    /// The same mixture shape shifted to a different nominal bias.
    pub fn with_nominal(&self, nominal: f64) -> Self {
        Self {
            components: self.components.clone(),
            nominal,
        }
    }

    /// Probability density (s/rad) at the absolute Josephson frequency
    /// `omega_j`.
    pub fn density(&self, omega_j: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.density_at_offset(omega_j - self.nominal - c.center))
            .sum()
    }

    /// FWHM (rad/s) of the component with the highest peak density. For a
    /// single Lorentzian this is its FWHM; for the mixtures used here it is
    /// the central peak's.
    pub fn principal_fwhm(&self) -> f64 {
        self.components
            .iter()
            .max_by(|a, b| {
                (a.weight / a.fwhm)
                    .partial_cmp(&(b.weight / b.fwhm))
                    .expect("weights and widths are finite")
            })
            .expect("at least one component")
            .fwhm
    }
}

/// Thermal FWHM of the Josephson-frequency line for a flat bias impedance
/// `z0` (Ω) at temperature `t` (K): Δω_J = 2·k_B·T·(4e²/ħ²)·Z(0).
pub fn fwhm_from_thermal(t: f64, z0: f64) -> Result<f64> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be non-negative, got {t}"
        )));
    }
    if z0 < 0.0 || !z0.is_finite() {
        return Err(Error::Domain(format!(
            "bias impedance must be non-negative, got {z0}"
        )));
    }
    let e = constants::ELEMENTARY_CHARGE;
    let hbar = constants::REDUCED_PLANCK;
    Ok(2.0 * constants::BOLTZMANN * t * (4.0 * e * e / (hbar * hbar)) * z0)
}

/// Effective temperature (K) of a bias impedance `z0` (Ω) producing a
/// Josephson line of the given FWHM (rad/s). Inverse of
/// [`fwhm_from_thermal`].
pub fn temperature_from_fwhm(fwhm: f64, z0: f64) -> Result<f64> {
    if !z0.is_finite() || z0 <= 0.0 {
        return Err(Error::Domain(format!(
            "bias impedance must be strictly positive, got {z0}"
        )));
    }
    if fwhm < 0.0 || !fwhm.is_finite() {
        return Err(Error::Domain(format!(
            "FWHM must be non-negative, got {fwhm}"
        )));
    }
    let e = constants::ELEMENTARY_CHARGE;
    let hbar = constants::REDUCED_PLANCK;
    Ok(fwhm * hbar * hbar / (2.0 * constants::BOLTZMANN * 4.0 * e * e * z0))
}
