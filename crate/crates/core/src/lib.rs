//! Modelling and measurement-analysis toolkit for DC-voltage-biased Josephson
//! parametric amplifiers (inelastic Cooper-pair tunneling amplifiers).
//!
//! The crate covers four areas:
//!
//! * [`device`] / [`gain`]: device parameterization and the ideal two-mode
//!   parametric gain model (complex amplitude gain, maximum gain, Lorentzian
//!   approximation, analytic bandwidth).
//! * [`bias`] / [`average`]: Lorentzian-mixture distributions of the Josephson
//!   frequency caused by bias-voltage noise, and adiabatic averaging of gain
//!   and quantum-limited output noise over those distributions.
//! * [`linefit`]: Lorentzian-mixture least-squares fitting of measured
//!   emission spectra versus Josephson frequency, with effective bias-impedance
//!   temperature extraction.
//! * [`calibration`]: Y-factor readout-chain calibration, line-attenuation
//!   extraction, on/off gain referencing and conversion of raw spectra to
//!   calibrated gain and quantum-limit-referred noise.
//!
//! All frequencies and linewidths are handled internally in angular units
//! (rad/s); conversion helpers to and from ordinary frequency in MHz live in
//! [`constants`].

pub mod average;
pub mod bias;
pub mod calibration;
pub mod constants;
pub mod device;
pub mod error;
pub mod gain;
pub mod linefit;
pub mod quad;

pub use average::{
    averaged_response, extract_bandwidth, frequency_sweep, gain_at_noise_threshold,
    gain_noise_tradeoff, monte_carlo_oracle, AveragedResponse, MonteCarloEstimate, SweepCurve,
    ThresholdCrossing, TradeoffPoint,
};
pub use bias::{fwhm_from_thermal, temperature_from_fwhm, BiasDistribution, LorentzianComponent};
pub use calibration::{
    device_output_noise, line_attenuation, noise_ratio, planck_occupancy, referenced_gain,
    y_factor, CalibrationChain, DeviceNoise, LineAttenuation, LoadLabel, LoadSpectrum,
};
pub use constants::{angular_from_mhz, mhz_from_angular, PhysicalConstants};
pub use device::{zero_point_phase, BiasPoint, Detunings, DeviceParams, SweepAxis};
pub use error::{Error, Result};
pub use gain::{amplitude_gain, bandwidth_analytic, lorentzian_gain_approx, max_gain};
pub use linefit::{
    effective_temperature, fit_mixture, fit_mixture_with, seed_parameters, FitOptions, FitResult,
    FittedPeak, SeedParameters, SpectrumRecord,
};
pub use quad::QuadratureSettings;
