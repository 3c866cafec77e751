//! Device parameterization: mode frequencies, linewidths, impedances and the
//! Josephson coupling derived from them.

use crate::constants::{self, angular_from_mhz, PLANCK};
use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Zero-point phase fluctuation of a mode with characteristic impedance `z`
/// (Ω): φ = sqrt(π · (4e²/h) · Z).
pub fn zero_point_phase(z: f64) -> Result<f64> {
    if z < 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!(
            "characteristic impedance must be finite and non-negative, got {z}"
        )));
    }
    let conductance_quantum =
        4.0 * constants::ELEMENTARY_CHARGE * constants::ELEMENTARY_CHARGE / constants::PLANCK;
    Ok((PI * conductance_quantum * z).sqrt())
}

fn impedance_from_phase(phi: f64) -> f64 {
    let conductance_quantum =
        4.0 * constants::ELEMENTARY_CHARGE * constants::ELEMENTARY_CHARGE / constants::PLANCK;
    phi * phi / (PI * conductance_quantum)
}

/// Operating point of the DC bias, expressed as a Josephson frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasPoint {
    omega_j: f64,
}

impl BiasPoint {
    /// Bias at Josephson frequency `omega_j` (rad/s).
    pub fn new(omega_j: f64) -> Result<Self> {
        if !omega_j.is_finite() || omega_j <= 0.0 {
            return Err(Error::Domain(format!(
                "Josephson frequency must be positive, got {omega_j}"
            )));
        }
        Ok(Self { omega_j })
    }

    /// Bias from a DC voltage (V), using ω_J = 2eV/ħ.
    pub fn from_voltage(v: f64) -> Result<Self> {
        Self::new(2.0 * constants::ELEMENTARY_CHARGE * v / constants::REDUCED_PLANCK)
    }

    /// Josephson frequency (rad/s).
    pub fn omega_j(&self) -> f64 {
        self.omega_j
    }

    /// Equivalent DC voltage (V).
    pub fn voltage(&self) -> f64 {
        self.omega_j * constants::REDUCED_PLANCK / (2.0 * constants::ELEMENTARY_CHARGE)
    }
}

/// Signal and idler detunings of an input tone at a given bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detunings {
    /// Δ_S = ω_in − ω_S (rad/s).
    pub delta_s: f64,
    /// Δ_I = ω_J − ω_in − ω_I (rad/s).
    pub delta_i: f64,
}

/// Which frequency axis a Lorentzian gain profile is swept along. The
/// effective linewidth entering the profile differs between the two, so the
/// choice is always explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepAxis {
    /// Input (signal) frequency swept at optimal bias; the effective
    /// linewidth is the harmonic sum κ_eff⁻¹ = κ_S⁻¹ + κ_I⁻¹.
    Signal,
    /// Bias (Josephson frequency) swept at zero signal detuning; the
    /// effective linewidth is κ_I.
    Bias,
}

/// Resonator and junction parameters of a two-mode amplifier.
///
/// The zero-point phases are stored explicitly. [`DeviceParams::new`] derives
/// them from the characteristic impedances; [`DeviceParams::with_phases`] and
/// the sample presets pin them directly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceParams {
    omega_s: f64,
    omega_i: f64,
    kappa_s: f64,
    kappa_i: f64,
    z_s: f64,
    z_i: f64,
    phi_s: f64,
    phi_i: f64,
    e_j: f64,
    degenerate: bool,
}

impl DeviceParams {
    /// Builds a non-degenerate device; zero-point phases are derived from the
    /// impedances. Frequencies and linewidths in rad/s, impedances in Ω,
    /// Josephson energy in J.
    pub fn new(
        omega_s: f64,
        omega_i: f64,
        kappa_s: f64,
        kappa_i: f64,
        z_s: f64,
        z_i: f64,
        e_j: f64,
    ) -> Result<Self> {
        let phi_s = zero_point_phase(z_s)?;
        let phi_i = zero_point_phase(z_i)?;
        Self::build(
            omega_s, omega_i, kappa_s, kappa_i, z_s, z_i, phi_s, phi_i, e_j, false,
        )
    }

    /// Builds a non-degenerate device with the zero-point phases given
    /// directly; the impedances are back-computed from them.
    pub fn with_phases(
        omega_s: f64,
        omega_i: f64,
        kappa_s: f64,
        kappa_i: f64,
        phi_s: f64,
        phi_i: f64,
        e_j: f64,
    ) -> Result<Self> {
        if phi_s <= 0.0 || phi_i <= 0.0 || !phi_s.is_finite() || !phi_i.is_finite() {
            return Err(Error::Domain(format!(
                "zero-point phases must be positive, got {phi_s}, {phi_i}"
            )));
        }
        let z_s = impedance_from_phase(phi_s);
        let z_i = impedance_from_phase(phi_i);
        Self::build(
            omega_s, omega_i, kappa_s, kappa_i, z_s, z_i, phi_s, phi_i, e_j, false,
        )
    }

    /// Builds a degenerate device where signal and idler share one mode.
    pub fn degenerate(omega: f64, kappa: f64, z: f64, e_j: f64) -> Result<Self> {
        let phi = zero_point_phase(z)?;
        Self::build(omega, omega, kappa, kappa, z, z, phi, phi, e_j, true)
    }

    /// Degenerate device with the zero-point phase given directly.
    pub fn degenerate_with_phase(omega: f64, kappa: f64, phi: f64, e_j: f64) -> Result<Self> {
        if !phi.is_finite() || phi <= 0.0 {
            return Err(Error::Domain(format!(
                "zero-point phase must be positive, got {phi}"
            )));
        }
        let z = impedance_from_phase(phi);
        Self::build(omega, omega, kappa, kappa, z, z, phi, phi, e_j, true)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        omega_s: f64,
        omega_i: f64,
        kappa_s: f64,
        kappa_i: f64,
        z_s: f64,
        z_i: f64,
        phi_s: f64,
        phi_i: f64,
        e_j: f64,
        degenerate: bool,
    ) -> Result<Self> {
        for (name, v) in [
            ("omega_s", omega_s),
            ("omega_i", omega_i),
            ("kappa_s", kappa_s),
            ("kappa_i", kappa_i),
            ("z_s", z_s),
            ("z_i", z_i),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if !e_j.is_finite() || e_j < 0.0 {
            return Err(Error::Domain(format!(
                "Josephson energy must be non-negative, got {e_j}"
            )));
        }
        if degenerate && (omega_s != omega_i || kappa_s != kappa_i || z_s != z_i) {
            return Err(Error::Validation(
                "degenerate device requires identical signal and idler parameters".into(),
            ));
        }
        Ok(Self {
            omega_s,
            omega_i,
            kappa_s,
            kappa_i,
            z_s,
            z_i,
            phi_s,
            phi_i,
            e_j,
            degenerate,
        })
    }

    /// Sample A preset: LC signal and idler resonators at 4800 and 6200 MHz,
    /// linewidths 96 and 226 MHz, 400 Ω characteristic impedance. The
    /// zero-point phase is pinned to the published 0.44 and the Josephson
    /// energy to the published critical value E_J/h = 760 MHz.
    pub fn sample_a() -> Self {
        Self::build(
            angular_from_mhz(4800.0),
            angular_from_mhz(6200.0),
            angular_from_mhz(96.0),
            angular_from_mhz(226.0),
            400.0,
            400.0,
            0.44,
            0.44,
            PLANCK * 760.0e6,
            false,
        )
        .expect("preset parameters are valid")
    }

    /// Sample B preset: a single λ/4 mode at 4450 MHz with 185 MHz linewidth
    /// and 80 Ω resonance impedance, used degenerately. The zero-point phase
    /// is pinned to the published 0.19 and E_J/h to the published 5100 MHz.
    pub fn sample_b() -> Self {
        Self::build(
            angular_from_mhz(4450.0),
            angular_from_mhz(4450.0),
            angular_from_mhz(185.0),
            angular_from_mhz(185.0),
            80.0,
            80.0,
            0.19,
            0.19,
            PLANCK * 5100.0e6,
            true,
        )
        .expect("preset parameters are valid")
    }

    /// Copy with a different Josephson energy (J).
    pub fn with_ej(&self, e_j: f64) -> Result<Self> {
        let mut p = self.clone();
        if !e_j.is_finite() || e_j < 0.0 {
            return Err(Error::Domain(format!(
                "Josephson energy must be non-negative, got {e_j}"
            )));
        }
        p.e_j = e_j;
        Ok(p)
    }

    pub fn omega_s(&self) -> f64 {
        self.omega_s
    }
    pub fn omega_i(&self) -> f64 {
        self.omega_i
    }
    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }
    pub fn kappa_i(&self) -> f64 {
        self.kappa_i
    }
    pub fn z_s(&self) -> f64 {
        self.z_s
    }
    pub fn z_i(&self) -> f64 {
        self.z_i
    }
    pub fn phi_s(&self) -> f64 {
        self.phi_s
    }
    pub fn phi_i(&self) -> f64 {
        self.phi_i
    }
    pub fn e_j(&self) -> f64 {
        self.e_j
    }
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Dimensionless pump strength Ξ = E_J·φ_S·φ_I / (ħ·√(κ_S·κ_I)).
    ///
    /// Returns the value even when it is ≥ 1; amplification routines reject
    /// such values themselves.
    pub fn coupling_xi(&self) -> f64 {
        self.e_j * self.phi_s * self.phi_i
            / (constants::REDUCED_PLANCK * (self.kappa_s * self.kappa_i).sqrt())
    }

    /// Josephson energy (J) at which the gain diverges (Ξ = 1):
    /// E_J = ħ·√(κ_S·κ_I)/(φ_S·φ_I). The stored `e_j` is ignored.
    pub fn ej_critical(&self) -> f64 {
        constants::REDUCED_PLANCK * (self.kappa_s * self.kappa_i).sqrt() / (self.phi_s * self.phi_i)
    }

    /// Josephson energy (J) that realizes a given pump strength.
    pub fn ej_for_xi(&self, xi: f64) -> Result<f64> {
        if !xi.is_finite() || xi < 0.0 {
            return Err(Error::Domain(format!(
                "pump strength must be non-negative, got {xi}"
            )));
        }
        Ok(xi * self.ej_critical())
    }

    /// Signal and idler detunings of an input tone at `omega_in` (rad/s)
    /// under the given bias.
    pub fn detunings(&self, omega_in: f64, bias: BiasPoint) -> Detunings {
        Detunings {
            delta_s: omega_in - self.omega_s,
            delta_i: bias.omega_j() - omega_in - self.omega_i,
        }
    }

    /// Effective linewidth entering the Lorentzian gain profile for the given
    /// sweep axis.
    pub fn effective_linewidth(&self, axis: SweepAxis) -> f64 {
        match axis {
            SweepAxis::Signal => 1.0 / (1.0 / self.kappa_s + 1.0 / self.kappa_i),
            SweepAxis::Bias => self.kappa_i,
        }
    }

    /// Bias point at the sum of the mode frequencies, where both detunings
    /// can vanish simultaneously.
    pub fn optimal_bias(&self) -> BiasPoint {
        BiasPoint::new(self.omega_s + self.omega_i).expect("mode frequencies are positive")
    }
}
