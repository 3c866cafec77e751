//! Readout-chain calibration: Y-factor gain and noise extraction from hot
//! and cold loads, transmission-line attenuation from a switch-short
//! reference, on/off gain referencing and conversion of raw device spectra
//! to output noise in photon units.
//!
//! Noise is accounted in photons at each frequency with the vacuum half
//! photon included in load occupancies, so no half photon is ever counted
//! twice along the chain.

use crate::constants;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Role of a measured spectrum in the calibration pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadLabel {
    Hot,
    Cold,
    Short,
    DeviceOn,
    DeviceOff,
    DeviceSuperconducting,
}

/// A frequency-indexed power spectrum in arbitrary linear units, with the
/// metadata needed by the calibration steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadSpectrum {
    frequency: Vec<f64>,
    power: Vec<f64>,
    temperature: Option<f64>,
    label: LoadLabel,
}

impl LoadSpectrum {
    /// Builds a spectrum; `frequency` in rad/s (strictly increasing),
    /// `temperature` in K for hot/cold loads.
    pub fn new(
        frequency: Vec<f64>,
        power: Vec<f64>,
        temperature: Option<f64>,
        label: LoadLabel,
    ) -> Result<Self> {
        if frequency.is_empty() || frequency.len() != power.len() {
            return Err(Error::Validation(format!(
                "spectrum needs matching non-empty frequency/power arrays \
                 (got {} and {})",
                frequency.len(),
                power.len()
            )));
        }
        if frequency.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "spectrum frequencies must be strictly increasing".into(),
            ));
        }
        if power.iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation("spectrum powers must be finite".into()));
        }
        if matches!(label, LoadLabel::Hot | LoadLabel::Cold) {
            match temperature {
                Some(t) if t > 0.0 => {}
                _ => {
                    return Err(Error::Validation(
                        "hot and cold loads need a positive temperature".into(),
                    ))
                }
            }
        }
        Ok(Self {
            frequency,
            power,
            temperature,
            label,
        })
    }

    pub fn frequency(&self) -> &[f64] {
        &self.frequency
    }
    pub fn power(&self) -> &[f64] {
        &self.power
    }
    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }
    pub fn label(&self) -> LoadLabel {
        self.label
    }
}

/// Grids must match bin for bin; resampling would alias calibration ripple,
/// so any mismatch is a hard error.
fn ensure_same_grid(a: &LoadSpectrum, b: &LoadSpectrum) -> Result<()> {
    if a.frequency.len() != b.frequency.len()
        || a.frequency.iter().zip(&b.frequency).any(|(x, y)| x != y)
    {
        return Err(Error::GridMismatch(format!(
            "{:?} and {:?} spectra are on different frequency grids",
            a.label, b.label
        )));
    }
    Ok(())
}

/// Mean thermal photon occupancy of a load at temperature `t` (K) seen at
/// angular frequency `omega`, including the vacuum half photon:
/// n = 1/(exp(ħω/k_B·T) − 1) + 1/2. At T = 0 this is exactly 1/2.
pub fn planck_occupancy(t: f64, omega: f64) -> Result<f64> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be non-negative, got {t}"
        )));
    }
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::Domain(format!(
            "frequency must be positive, got {omega}"
        )));
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    let x = constants::REDUCED_PLANCK * omega / (constants::BOLTZMANN * t);
    Ok(1.0 / x.exp_m1() + 0.5)
}

/// Readout-chain calibration: per-frequency gain and noise referred to the
/// switch, plus the scalar line attenuation between switch and device.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationChain {
    /// Frequency grid (rad/s).
    pub frequency: Vec<f64>,
    /// Chain power gain from the switch to the digitizer (linear, arbitrary
    /// power units per photon).
    pub gain: Vec<f64>,
    /// Chain noise referred to the switch (photons).
    pub noise: Vec<f64>,
    /// One-way switch-to-device attenuation as a linear power factor in
    /// (0, 1]; unity until calibrated.
    pub attenuation: f64,
    /// Calibrated band (rad/s).
    pub band: (f64, f64),
}

impl CalibrationChain {
    /// Attenuation expressed as a positive loss in dB.
    pub fn attenuation_db_loss(&self) -> f64 {
        -10.0 * self.attenuation.log10()
    }

    /// Copy with the line attenuation applied.
    pub fn with_attenuation(&self, att: &LineAttenuation) -> Self {
        Self {
            attenuation: att.linear,
            ..self.clone()
        }
    }
}

/// Solves the two-temperature load measurement for the chain gain and noise.
///
/// The linear model P = G·(n(T, ω) + N_sys) is inverted exactly per
/// frequency:
///   G = (P_hot − P_cold)/(n_hot − n_cold),
///   N_sys = P_cold/G − n_cold.
pub fn y_factor(hot: &LoadSpectrum, cold: &LoadSpectrum) -> Result<CalibrationChain> {
    ensure_same_grid(hot, cold)?;
    let t_hot = hot
        .temperature
        .ok_or_else(|| Error::Validation("hot load temperature missing".into()))?;
    let t_cold = cold
        .temperature
        .ok_or_else(|| Error::Validation("cold load temperature missing".into()))?;
    if t_hot <= t_cold {
        return Err(Error::Validation(format!(
            "hot load must be hotter than cold load ({t_hot} K vs {t_cold} K)"
        )));
    }
    let mut gain = Vec::with_capacity(hot.frequency.len());
    let mut noise = Vec::with_capacity(hot.frequency.len());
    for ((&w, &p_hot), &p_cold) in hot.frequency.iter().zip(&hot.power).zip(&cold.power) {
        if p_hot <= p_cold {
            return Err(Error::Inconsistency(format!(
                "hot-load power does not exceed cold-load power at {:.3} MHz",
                constants::mhz_from_angular(w)
            )));
        }
        let n_hot = planck_occupancy(t_hot, w)?;
        let n_cold = planck_occupancy(t_cold, w)?;
        let g = (p_hot - p_cold) / (n_hot - n_cold);
        gain.push(g);
        noise.push(p_cold / g - n_cold);
    }
    let band = (
        hot.frequency[0],
        *hot.frequency.last().expect("non-empty grid"),
    );
    Ok(CalibrationChain {
        frequency: hot.frequency.clone(),
        gain,
        noise,
        attenuation: 1.0,
        band,
    })
}

/// Line attenuation between switch and device.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineAttenuation {
    /// One-way attenuation as a linear power factor in (0, 1].
    pub linear: f64,
    /// The same value as a positive loss in dB.
    pub db_loss: f64,
    /// Whether the per-frequency attenuation stayed within the ripple bound.
    pub flat: bool,
    /// Largest per-frequency deviation from the band mean (dB).
    pub max_deviation_db: f64,
    /// Per-frequency one-way attenuation before band averaging.
    pub per_frequency: Vec<f64>,
}

/// One-way line attenuation from two reflection gain calibrations, one
/// terminated at the device (off state) and one at a short on the switch.
///
/// The probe travels the line twice, so the measured gain ratio is the
/// square of the one-way power attenuation: a(ω) = sqrt(G_device/G_switch).
/// The per-frequency values are averaged over the band after a flatness
/// check against `max_ripple_db` (0.2 dB is the conventional bound); ripple
/// beyond the bound is reported in the result, not a hard error.
pub fn line_attenuation(
    to_device: &LoadSpectrum,
    to_switch: &LoadSpectrum,
    max_ripple_db: f64,
) -> Result<LineAttenuation> {
    ensure_same_grid(to_device, to_switch)?;
    let mut per_frequency = Vec::with_capacity(to_device.frequency.len());
    for ((&w, &g_dev), &g_sw) in to_device
        .frequency
        .iter()
        .zip(&to_device.power)
        .zip(&to_switch.power)
    {
        if g_sw <= 0.0 {
            return Err(Error::Domain(format!(
                "switch-reference gain must be positive at {:.3} MHz",
                constants::mhz_from_angular(w)
            )));
        }
        if g_dev <= 0.0 {
            return Err(Error::Domain(format!(
                "device-path gain must be positive at {:.3} MHz",
                constants::mhz_from_angular(w)
            )));
        }
        per_frequency.push((g_dev / g_sw).sqrt());
    }
    let mean = per_frequency.iter().sum::<f64>() / per_frequency.len() as f64;
    if mean > 1.0 + 1e-12 {
        return Err(Error::Inconsistency(format!(
            "mean attenuation {mean} exceeds unity; device and switch \
             references are probably swapped"
        )));
    }
    let mean_db = -10.0 * mean.log10();
    let max_deviation_db = per_frequency
        .iter()
        .map(|a| (-10.0 * a.log10() - mean_db).abs())
        .fold(0.0, f64::max);
    Ok(LineAttenuation {
        linear: mean.min(1.0),
        db_loss: mean_db,
        flat: max_deviation_db < max_ripple_db,
        max_deviation_db,
        per_frequency,
    })
}

/// Per-frequency device power gain from on/off referencing,
/// G(ω) = P_on(ω)/P_off(ω). Everything common to the two measurements
/// (chain gain, digitizer units) cancels exactly.
pub fn referenced_gain(on: &LoadSpectrum, off: &LoadSpectrum) -> Result<Vec<f64>> {
    ensure_same_grid(on, off)?;
    on.frequency
        .iter()
        .zip(&on.power)
        .zip(&off.power)
        .map(|((&w, &p_on), &p_off)| {
            if p_off <= 0.0 {
                return Err(Error::Domain(format!(
                    "off-state power must be positive at {:.3} MHz",
                    constants::mhz_from_angular(w)
                )));
            }
            Ok(p_on / p_off)
        })
        .collect()
}

/// Device output noise in photons per frequency bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceNoise {
    /// Output noise (photons) at the device output plane.
    pub photons: Vec<f64>,
    /// True when small negative bins (> −0.05 photons) were clipped to zero.
    pub clipped: bool,
}

/// Output noise of the device referred to its own output plane:
/// N_out(ω) = (P_on − P_sc)/(G_chain(ω)·A), with A the one-way power
/// attenuation of the line. The superconducting-state spectrum carries the
/// chain noise and is subtracted bin by bin.
///
/// Bins more negative than −0.05 photons are inconsistent with the model and
/// raise an error; smaller negatives are clipped to zero and flagged.
pub fn device_output_noise(
    on: &LoadSpectrum,
    superconducting: &LoadSpectrum,
    chain: &CalibrationChain,
) -> Result<DeviceNoise> {
    ensure_same_grid(on, superconducting)?;
    if on.frequency.len() != chain.frequency.len()
        || on
            .frequency
            .iter()
            .zip(&chain.frequency)
            .any(|(a, b)| a != b)
    {
        return Err(Error::GridMismatch(
            "device spectra are not on the calibration grid".into(),
        ));
    }
    if chain.attenuation <= 0.0 || chain.attenuation > 1.0 {
        return Err(Error::Validation(format!(
            "chain attenuation must lie in (0, 1], got {}",
            chain.attenuation
        )));
    }
    let mut clipped = false;
    let mut photons = Vec::with_capacity(on.frequency.len());
    for i in 0..on.frequency.len() {
        let g = chain.gain[i];
        if g <= 0.0 {
            return Err(Error::Validation(format!(
                "chain gain must be positive at {:.3} MHz",
                constants::mhz_from_angular(on.frequency[i])
            )));
        }
        let n = (on.power[i] - superconducting.power[i]) / (g * chain.attenuation);
        if n < -0.05 {
            return Err(Error::Inconsistency(format!(
                "output noise {n:.4} photons at {:.3} MHz is negative beyond \
                 the tolerance",
                constants::mhz_from_angular(on.frequency[i])
            )));
        }
        if n < 0.0 {
            clipped = true;
            photons.push(0.0);
        } else {
            photons.push(n);
        }
    }
    Ok(DeviceNoise { photons, clipped })
}

/// Noise ratio relative to the quantum limit per frequency bin,
/// R(ω) = N_out/(G − 1); `None` where the gain does not exceed unity.
pub fn noise_ratio(n_out: &[f64], gain: &[f64]) -> Vec<Option<f64>> {
    n_out
        .iter()
        .zip(gain)
        .map(|(&n, &g)| {
            if g > 1.0 + 1e-12 {
                Some(n / (g - 1.0))
            } else {
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::angular_from_mhz;
    use approx::assert_relative_eq;

    fn grid() -> Vec<f64> {
        (0..n_points())
            .map(|i| angular_from_mhz(4000.0 + 40.0 * i as f64))
            .collect()
    }

    fn n_points() -> usize {
        201
    }

    #[test]
    fn planck_occupancy_reference_points() {
        assert_eq!(
            planck_occupancy(0.0, angular_from_mhz(6000.0)).unwrap(),
            0.5
        );
        // frozen from an independent high-precision evaluation
        let n = planck_occupancy(1.0, angular_from_mhz(6000.0)).unwrap();
        assert_relative_eq!(n, 3.496_732_972_681_86, max_relative = 1e-12);
        assert!(planck_occupancy(-1.0, 1.0).is_err());
        assert!(planck_occupancy(1.0, 0.0).is_err());
    }

    #[test]
    fn planck_occupancy_rayleigh_jeans_limit() {
        // ħω/k_B·T = 1e-3: classical k_B·T/ħω within 0.1%
        let omega = angular_from_mhz(6000.0);
        let t = constants::REDUCED_PLANCK * omega / (constants::BOLTZMANN * 1e-3);
        let n = planck_occupancy(t, omega).unwrap();
        assert_relative_eq!(n, 1e3, max_relative = 1e-3);
    }

    #[test]
    fn planck_occupancy_monotonicity_and_floor() {
        let omega = angular_from_mhz(6000.0);
        let mut last = 0.5;
        for t in [0.05, 0.1, 0.3, 1.0, 10.0] {
            let n = planck_occupancy(t, omega).unwrap();
            assert!(n > last);
            last = n;
        }
        // decreasing in frequency, floored at the vacuum half photon
        let mut last = f64::INFINITY;
        for f in [100.0, 1000.0, 3000.0, 6000.0, 12_000.0] {
            let n = planck_occupancy(0.05, angular_from_mhz(f)).unwrap();
            assert!(n < last);
            assert!(n >= 0.5);
            last = n;
        }
        // far above k_B T / ħ the occupancy collapses onto the vacuum term
        assert_eq!(planck_occupancy(0.05, angular_from_mhz(6e6)).unwrap(), 0.5);
    }

    fn synth_loads(g0: f64, nsys: f64, t_hot: f64, t_cold: f64) -> (LoadSpectrum, LoadSpectrum) {
        let f = grid();
        let chain_gain: Vec<f64> = f
            .iter()
            .enumerate()
            .map(|(i, _)| g0 * (1.0 + 0.2 * (i as f64 * 0.37).sin()))
            .collect();
        let p = |t: f64| -> Vec<f64> {
            f.iter()
                .zip(&chain_gain)
                .map(|(&w, &g)| g * (planck_occupancy(t, w).unwrap() + nsys))
                .collect()
        };
        let (p_hot, p_cold) = (p(t_hot), p(t_cold));
        (
            LoadSpectrum::new(f.clone(), p_hot, Some(t_hot), LoadLabel::Hot).unwrap(),
            LoadSpectrum::new(f, p_cold, Some(t_cold), LoadLabel::Cold).unwrap(),
        )
    }

    #[test]
    fn y_factor_recovers_the_generating_model_exactly() {
        let (hot, cold) = synth_loads(3.2e7, 11.3, 1.0, 0.012);
        let chain = y_factor(&hot, &cold).unwrap();
        for (i, (&g, &n)) in chain.gain.iter().zip(&chain.noise).enumerate() {
            let g_true = 3.2e7 * (1.0 + 0.2 * (i as f64 * 0.37).sin());
            assert_relative_eq!(g, g_true, max_relative = 1e-12);
            assert_relative_eq!(n, 11.3, max_relative = 1e-12);
        }
    }

    #[test]
    fn y_factor_worked_example() {
        // hot 1 K, cold 10 mK, single bin at 6 GHz with P_hot/P_cold = 4;
        // the solved system noise is frozen from the independent oracle
        let f = vec![angular_from_mhz(6000.0), angular_from_mhz(6001.0)];
        let n_hot = planck_occupancy(1.0, f[0]).unwrap();
        let n_cold = planck_occupancy(0.010, f[0]).unwrap();
        let nsys = (n_hot - 4.0 * n_cold) / 3.0;
        assert_relative_eq!(nsys, 0.498_910_990_893, max_relative = 1e-9);
        let hot = LoadSpectrum::new(f.clone(), vec![4.0, 4.0], Some(1.0), LoadLabel::Hot).unwrap();
        let cold =
            LoadSpectrum::new(f.clone(), vec![1.0, 1.0], Some(0.010), LoadLabel::Cold).unwrap();
        let chain = y_factor(&hot, &cold).unwrap();
        assert_relative_eq!(chain.noise[0], nsys, max_relative = 1e-9);
    }

    #[test]
    fn y_factor_error_paths() {
        let (hot, cold) = synth_loads(1e6, 4.0, 1.0, 0.012);
        // inverted powers at one frequency
        let mut bad_power = hot.power().to_vec();
        bad_power[37] = cold.power()[37] * 0.5;
        let bad = LoadSpectrum::new(
            hot.frequency().to_vec(),
            bad_power,
            Some(1.0),
            LoadLabel::Hot,
        )
        .unwrap();
        match y_factor(&bad, &cold) {
            Err(Error::Inconsistency(msg)) => assert!(msg.contains("MHz")),
            other => panic!("expected inconsistency, got {other:?}"),
        }
        // equal temperatures
        let t_eq = LoadSpectrum::new(
            cold.frequency().to_vec(),
            cold.power().to_vec(),
            Some(1.0),
            LoadLabel::Cold,
        )
        .unwrap();
        assert!(matches!(y_factor(&hot, &t_eq), Err(Error::Validation(_))));
        // mismatched grids
        let shifted = LoadSpectrum::new(
            hot.frequency().iter().map(|w| w * 1.000001).collect(),
            hot.power().to_vec(),
            Some(1.0),
            LoadLabel::Hot,
        )
        .unwrap();
        assert!(matches!(
            y_factor(&shifted, &cold),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn attenuation_worked_example() {
        // two-way power ratio 0.795 -> one-way loss 0.498 dB
        let f = grid();
        let dev = LoadSpectrum::new(
            f.clone(),
            vec![0.795; n_points()],
            None,
            LoadLabel::DeviceOff,
        )
        .unwrap();
        let sw = LoadSpectrum::new(f, vec![1.0; n_points()], None, LoadLabel::Short).unwrap();
        let att = line_attenuation(&dev, &sw, 0.2).unwrap();
        assert_relative_eq!(att.linear, 0.795f64.sqrt(), max_relative = 1e-12);
        assert!((att.db_loss - 0.498).abs() < 5e-4, "loss {}", att.db_loss);
        assert!(att.flat);
    }

    #[test]
    fn attenuation_identity_and_errors() {
        let f = grid();
        let ones = vec![1.0; n_points()];
        let a = LoadSpectrum::new(f.clone(), ones.clone(), None, LoadLabel::DeviceOff).unwrap();
        let b = LoadSpectrum::new(f.clone(), ones.clone(), None, LoadLabel::Short).unwrap();
        let att = line_attenuation(&a, &b, 0.2).unwrap();
        assert_eq!(att.linear, 1.0);
        assert_eq!(att.db_loss, 0.0);

        let mut zeroed = ones.clone();
        zeroed[0] = 0.0;
        let z = LoadSpectrum::new(f, zeroed, None, LoadLabel::Short).unwrap();
        assert!(matches!(
            line_attenuation(&a, &z, 0.2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn attenuation_ripple_is_flagged_not_fatal() {
        let f = grid();
        let dev: Vec<f64> = (0..n_points())
            .map(|i| 0.795 * (1.0 + 0.3 * (i as f64 * 0.9).sin()))
            .collect();
        let a = LoadSpectrum::new(f.clone(), dev, None, LoadLabel::DeviceOff).unwrap();
        let b = LoadSpectrum::new(f, vec![1.0; n_points()], None, LoadLabel::Short).unwrap();
        let att = line_attenuation(&a, &b, 0.2).unwrap();
        assert!(!att.flat);
        assert!(att.max_deviation_db > 0.2);
    }

    #[test]
    fn referenced_gain_cancels_chain_ripple() {
        let f = grid();
        let device_gain = 100.0;
        let chain: Vec<f64> = (0..n_points())
            .map(|i| 5e6 * (1.0 + 0.4 * (i as f64 * 0.21).cos()))
            .collect();
        let off_p: Vec<f64> = chain.iter().map(|&c| 0.37 * c).collect();
        let on_p: Vec<f64> = chain.iter().map(|&c| 0.37 * c * device_gain).collect();
        let on = LoadSpectrum::new(f.clone(), on_p, None, LoadLabel::DeviceOn).unwrap();
        let off = LoadSpectrum::new(f, off_p, None, LoadLabel::DeviceOff).unwrap();
        for g in referenced_gain(&on, &off).unwrap() {
            assert_relative_eq!(g, device_gain, max_relative = 1e-12);
        }
    }

    #[test]
    fn referenced_gain_trivial_cases() {
        let f: Vec<f64> = (0..8)
            .map(|i| angular_from_mhz(4000.0 + i as f64))
            .collect();
        let p = vec![2.5; 8];
        let on = LoadSpectrum::new(f.clone(), p.clone(), None, LoadLabel::DeviceOn).unwrap();
        let off = LoadSpectrum::new(f.clone(), p.clone(), None, LoadLabel::DeviceOff).unwrap();
        for g in referenced_gain(&on, &off).unwrap() {
            assert_eq!(g, 1.0);
        }
        let on100 = LoadSpectrum::new(
            f.clone(),
            p.iter().map(|x| x * 100.0).collect(),
            None,
            LoadLabel::DeviceOn,
        )
        .unwrap();
        for g in referenced_gain(&on100, &off).unwrap() {
            assert_relative_eq!(10.0 * g.log10(), 20.0, max_relative = 1e-12);
        }
        let zero = LoadSpectrum::new(f, vec![0.0; 8], None, LoadLabel::DeviceOff).unwrap();
        assert!(referenced_gain(&on, &zero).is_err());
    }

    #[test]
    fn device_noise_subtraction_and_clipping() {
        let f = grid();
        let n = n_points();
        let chain = CalibrationChain {
            frequency: f.clone(),
            gain: vec![2e6; n],
            noise: vec![9.0; n],
            attenuation: 0.89,
            band: (f[0], f[n - 1]),
        };
        let sc_p = vec![1000.0; n];
        let mut on_p: Vec<f64> = (0..n)
            .map(|i| 1000.0 + 2e6 * 0.89 * (50.0 + i as f64))
            .collect();
        on_p[5] = 1000.0 - 2e6 * 0.89 * 0.01; // slightly negative bin
        let on = LoadSpectrum::new(f.clone(), on_p, None, LoadLabel::DeviceOn).unwrap();
        let sc = LoadSpectrum::new(
            f.clone(),
            sc_p.clone(),
            None,
            LoadLabel::DeviceSuperconducting,
        )
        .unwrap();
        let noise = device_output_noise(&on, &sc, &chain).unwrap();
        assert!(noise.clipped);
        assert_eq!(noise.photons[5], 0.0);
        assert_relative_eq!(noise.photons[0], 50.0, max_relative = 1e-12);
        assert_relative_eq!(
            noise.photons[n - 1],
            50.0 + (n - 1) as f64,
            max_relative = 1e-12
        );

        // equal spectra: zero photons everywhere
        let same = device_output_noise(
            &LoadSpectrum::new(f.clone(), sc_p.clone(), None, LoadLabel::DeviceOn).unwrap(),
            &sc,
            &chain,
        )
        .unwrap();
        assert!(same.photons.iter().all(|&x| x == 0.0));
        assert!(!same.clipped);

        // strongly negative bin is inconsistent
        let mut bad_p = sc_p;
        bad_p[0] -= 2e6 * 0.89 * 0.2;
        let bad = LoadSpectrum::new(f, bad_p, None, LoadLabel::DeviceOn).unwrap();
        assert!(matches!(
            device_output_noise(&bad, &sc, &chain),
            Err(Error::Inconsistency(_))
        ));
    }

    #[test]
    fn noise_ratio_quantum_limit_identity() {
        let r = noise_ratio(&[99.0, 1.0, 0.0], &[100.0, 1.0, 0.5]);
        assert_relative_eq!(r[0].unwrap(), 1.0, max_relative = 1e-12);
        assert!(r[1].is_none());
        assert!(r[2].is_none());
    }

    proptest::proptest! {
        #[test]
        fn y_factor_is_exact_for_any_positive_parameters(
            g0 in 1e3..1e9f64,
            nsys in 0.0..100.0f64,
            t_hot in 0.6..50.0f64,
            t_cold in 0.005..0.15f64,
        ) {
            // hot load well above the photon energy across the band, so the
            // two loads are numerically distinguishable everywhere
            let (hot, cold) = synth_loads(g0, nsys, t_hot, t_cold);
            let chain = y_factor(&hot, &cold).unwrap();
            for (i, (&g, &n)) in chain.gain.iter().zip(&chain.noise).enumerate() {
                let g_true = g0 * (1.0 + 0.2 * (i as f64 * 0.37).sin());
                proptest::prop_assert!((g - g_true).abs() <= 1e-9 * g_true);
                proptest::prop_assert!((n - nsys).abs() <= 1e-9 * nsys.max(1.0));
            }
        }

        #[test]
        fn referenced_gain_ignores_common_rescaling(scale in 1e-6..1e6f64) {
            let f: Vec<f64> = (0..16).map(|i| angular_from_mhz(4000.0 + i as f64)).collect();
            let on_p: Vec<f64> = (0..16).map(|i| 3.0 + i as f64).collect();
            let off_p: Vec<f64> = (0..16).map(|i| 0.7 + 0.1 * i as f64).collect();
            let on = LoadSpectrum::new(f.clone(), on_p.clone(), None, LoadLabel::DeviceOn).unwrap();
            let off = LoadSpectrum::new(f.clone(), off_p.clone(), None, LoadLabel::DeviceOff).unwrap();
            let base = referenced_gain(&on, &off).unwrap();
            let on_s = LoadSpectrum::new(
                f.clone(),
                on_p.iter().map(|p| p * scale).collect(),
                None,
                LoadLabel::DeviceOn,
            )
            .unwrap();
            let off_s = LoadSpectrum::new(
                f,
                off_p.iter().map(|p| p * scale).collect(),
                None,
                LoadLabel::DeviceOff,
            )
            .unwrap();
            let scaled = referenced_gain(&on_s, &off_s).unwrap();
            for (a, b) in base.iter().zip(&scaled) {
                proptest::prop_assert!((a - b).abs() <= 1e-12 * a);
            }
        }
    }
}
