//! Physical constants (CODATA 2018 exact SI definitions) and unit helpers.

use serde::Serialize;
use std::f64::consts::TAU;

/// Planck constant h (J·s), exact since the 2019 SI redefinition.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant ħ = h/2π (J·s).
pub const REDUCED_PLANCK: f64 = PLANCK / TAU;

/// Elementary charge e (C), exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Boltzmann constant k_B (J/K), exact.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Bundle of the constants used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant ħ (J·s).
    pub hbar: f64,
    /// Planck constant h = 2π·ħ (J·s).
    pub h: f64,
    /// Elementary charge e (C).
    pub e: f64,
    /// Boltzmann constant k_B (J/K).
    pub k_b: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values.
    pub const fn codata2018() -> Self {
        Self {
            hbar: REDUCED_PLANCK,
            h: PLANCK,
            e: ELEMENTARY_CHARGE,
            k_b: BOLTZMANN,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}

/// Converts ordinary frequency in MHz to angular frequency in rad/s.
#[inline]
pub fn angular_from_mhz(f_mhz: f64) -> f64 {
    f_mhz * 1e6 * TAU
}

/// Converts angular frequency in rad/s to ordinary frequency in MHz.
#[inline]
pub fn mhz_from_angular(omega: f64) -> f64 {
    omega / (1e6 * TAU)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planck_relation_is_exact_as_stored() {
        let c = PhysicalConstants::codata2018();
        assert_eq!(c.h, TAU * c.hbar);
        assert_eq!(c.h, 6.62607015e-34);
        assert_eq!(c.e, 1.602176634e-19);
        assert_eq!(c.k_b, 1.380649e-23);
    }

    #[test]
    fn unit_conversions_round_trip() {
        for &f in &[0.001, 1.0, 96.0, 4800.0, 12_000.0] {
            let w = angular_from_mhz(f);
            assert!((mhz_from_angular(w) - f).abs() <= 1e-12 * f);
        }
    }
}
