//! Least-squares fitting of emission power spectral density versus Josephson
//! frequency to a constant background plus a mixture of Lorentzian peaks,
//!
//!   psd(ω_J) = b + Σ_k A_k · (Δω_k/2)² / ((ω_J − c_k)² + (Δω_k/2)²),
//!
//! by damped Gauss-Newton steps with Marquardt scaling. Amplitudes and
//! widths are fitted in log space, which keeps them positive without
//! constraint handling. Frequencies are shifted and scaled to an internal
//! dimensionless coordinate before fitting so the normal equations stay well
//! conditioned regardless of the input units.

use crate::bias::{self, BiasDistribution, LorentzianComponent};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// A measured spectrum of power versus Josephson frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRecord {
    omega_j: Vec<f64>,
    psd: Vec<f64>,
    uncertainty: Option<Vec<f64>>,
    /// Probe frequency at which the emission was recorded (rad/s).
    pub probe_frequency: Option<f64>,
    /// Free-form configuration label.
    pub label: Option<String>,
}

impl SpectrumRecord {
    pub fn new(omega_j: Vec<f64>, psd: Vec<f64>, uncertainty: Option<Vec<f64>>) -> Result<Self> {
        if omega_j.len() < 8 {
            return Err(Error::Validation(format!(
                "spectrum needs at least 8 points, got {}",
                omega_j.len()
            )));
        }
        if omega_j.len() != psd.len() {
            return Err(Error::Validation(format!(
                "frequency and psd lengths differ: {} vs {}",
                omega_j.len(),
                psd.len()
            )));
        }
        if omega_j.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "Josephson frequencies must be strictly increasing".into(),
            ));
        }
        if psd.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("psd values must be finite".into()));
        }
        if let Some(ref u) = uncertainty {
            if u.len() != psd.len() {
                return Err(Error::Validation(
                    "uncertainty length does not match the data".into(),
                ));
            }
            if u.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(Error::Validation(
                    "uncertainties must be finite and positive".into(),
                ));
            }
        }
        Ok(Self {
            omega_j,
            psd,
            uncertainty,
            probe_frequency: None,
            label: None,
        })
    }

    pub fn omega_j(&self) -> &[f64] {
        &self.omega_j
    }
    pub fn psd(&self) -> &[f64] {
        &self.psd
    }
    pub fn uncertainty(&self) -> Option<&[f64]> {
        self.uncertainty.as_deref()
    }
}

/// One fitted Lorentzian peak, with 1-sigma uncertainty estimates from the
/// Jacobian at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedPeak {
    /// Peak amplitude above background (same units as the psd).
    pub amplitude: f64,
    /// Peak center (rad/s).
    pub center: f64,
    /// Full width at half maximum (rad/s).
    pub fwhm: f64,
    pub amplitude_sigma: f64,
    pub center_sigma: f64,
    pub fwhm_sigma: f64,
}

/// Result of a mixture fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Fitted peaks, sorted by center.
    pub peaks: Vec<FittedPeak>,
    /// Constant background level.
    pub background: f64,
    pub background_sigma: f64,
    /// Weighted residual norm at the optimum (psd units when the data has no
    /// uncertainties, dimensionless otherwise).
    pub residual_norm: f64,
    /// True when the step and residual tolerances were met.
    pub converged: bool,
    /// Iterations spent (accepted and rejected steps).
    pub iterations: usize,
    /// Residual norm after each accepted step; non-increasing by
    /// construction.
    pub residual_history: Vec<f64>,
}

impl FitResult {
    /// Evaluates the fitted model at `omega_j` (rad/s).
    pub fn evaluate(&self, omega_j: f64) -> f64 {
        let mut y = self.background;
        for p in &self.peaks {
            let gamma = p.fwhm / 2.0;
            let u = omega_j - p.center;
            y += p.amplitude * gamma * gamma / (u * u + gamma * gamma);
        }
        y
    }

    /// Converts the fitted peaks to a normalized bias distribution. Weights
    /// are the component areas A_k·Δω_k·π/2 renormalized; centers become
    /// offsets from the tallest peak, which is placed at `nominal`.
    pub fn to_bias_distribution(&self, nominal: f64) -> Result<BiasDistribution> {
        if self.peaks.is_empty() {
            return Err(Error::Validation("fit has no peaks".into()));
        }
        let reference = self
            .peaks
            .iter()
            .max_by(|a, b| a.amplitude.partial_cmp(&b.amplitude).expect("finite"))
            .expect("non-empty")
            .center;
        let comps = self
            .peaks
            .iter()
            .map(|p| {
                LorentzianComponent::new(
                    p.amplitude * p.fwhm * std::f64::consts::FRAC_PI_2,
                    p.center - reference,
                    p.fwhm,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        BiasDistribution::from_weights(comps, nominal)
    }
}

/// Fit configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Iteration budget, accepted and rejected steps combined.
    pub max_iterations: usize,
    /// Relative step-size convergence tolerance.
    pub step_tol: f64,
    /// Relative residual-decrease convergence tolerance.
    pub residual_tol: f64,
    /// Constrain side peaks to mirror symmetrically around the central
    /// component (odd component counts only).
    pub symmetric_sides: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tol: 1e-8,
            residual_tol: 1e-10,
            symmetric_sides: false,
        }
    }
}

/// Initial parameter estimates derived from the data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedParameters {
    pub background: f64,
    /// (amplitude, center, fwhm) per component, tallest first.
    pub peaks: Vec<(f64, f64, f64)>,
}

fn median_smooth(y: &[f64], half_window: usize) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_window);
            let hi = (i + half_window + 1).min(n);
            let mut w: Vec<f64> = y[lo..hi].to_vec();
            w.sort_by(|a, b| a.partial_cmp(b).expect("finite psd"));
            w[w.len() / 2]
        })
        .collect()
}

/// Seeds a mixture fit: background from the data minimum, peak centers from
/// the `n_components` largest local maxima after 5-point median smoothing
/// (ties broken toward lower frequency), and a common initial FWHM from the
/// half-maximum crossings of the tallest peak, floored at two grid steps.
pub fn seed_parameters(data: &SpectrumRecord, n_components: usize) -> Result<SeedParameters> {
    if n_components == 0 {
        return Err(Error::Validation("need at least one component".into()));
    }
    let x = data.omega_j();
    let y = data.psd();
    let smooth = median_smooth(y, 2);
    let background = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = smooth.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - background;

    // plateau-aware local maxima (median smoothing flattens peak tops);
    // a run of equal values counts once, at its lowest-frequency index
    let mut maxima: Vec<usize> = Vec::new();
    let n = smooth.len();
    let mut i = 1;
    while i < n - 1 {
        if smooth[i] > smooth[i - 1] {
            let start = i;
            let mut j = i;
            while j + 1 < n && smooth[j + 1] == smooth[j] {
                j += 1;
            }
            if j < n - 1 && smooth[j + 1] < smooth[j] {
                maxima.push(start);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    maxima.sort_by(|&a, &b| {
        smooth[b]
            .partial_cmp(&smooth[a])
            .expect("finite psd")
            .then(a.cmp(&b))
    });
    if maxima.len() < n_components {
        return Err(Error::Validation(format!(
            "found {} local maxima but {n_components} components requested; \
             reduce the component count",
            maxima.len()
        )));
    }
    maxima.truncate(n_components);

    let tallest = maxima[0];
    let half_height = background + (smooth[tallest] - background) / 2.0;
    let mean_step = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    let crossing = |dir: isize| -> f64 {
        let mut i = tallest as isize;
        loop {
            let j = i + dir;
            if j < 0 || j as usize >= x.len() {
                // no crossing on this side: use the distance to the edge
                return (x[i as usize] - x[tallest]).abs();
            }
            if smooth[j as usize] < half_height {
                // linear interpolation between i and j
                let (x0, y0) = (x[i as usize], smooth[i as usize]);
                let (x1, y1) = (x[j as usize], smooth[j as usize]);
                let xc = x0 + (half_height - y0) * (x1 - x0) / (y1 - y0);
                return (xc - x[tallest]).abs();
            }
            i = j;
        }
    };
    let fwhm = (crossing(1) + crossing(-1)).max(2.0 * mean_step);

    let peaks = maxima
        .iter()
        .map(|&i| {
            let amp = (smooth[i] - background).max(1e-6 * span);
            (amp, x[i], fwhm)
        })
        .collect();
    Ok(SeedParameters { background, peaks })
}

/// Internal parameter layout. Free mode packs [b, (lnA, c, ln fwhm)...];
/// symmetric mode packs [b, lnA0, c0, ln fwhm0, (lnA, d, ln fwhm) per side
/// pair] with side peaks mirrored at c0 ± d.
#[derive(Clone, Copy)]
struct Layout {
    n_components: usize,
    symmetric: bool,
}

impl Layout {
    fn n_params(&self) -> usize {
        if self.symmetric {
            4 + 3 * (self.n_components - 1) / 2
        } else {
            1 + 3 * self.n_components
        }
    }

    /// Expands the packed vector into (amplitude, center, fwhm) triples.
    fn peaks(&self, theta: &DVector<f64>) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.n_components);
        if self.symmetric {
            let c0 = theta[2];
            out.push((theta[1].exp(), c0, theta[3].exp()));
            let pairs = (self.n_components - 1) / 2;
            for j in 0..pairs {
                let base = 4 + 3 * j;
                let (a, d, f) = (theta[base].exp(), theta[base + 1], theta[base + 2].exp());
                out.push((a, c0 + d, f));
                out.push((a, c0 - d, f));
            }
        } else {
            for k in 0..self.n_components {
                let base = 1 + 3 * k;
                out.push((theta[base].exp(), theta[base + 1], theta[base + 2].exp()));
            }
        }
        out
    }
}

struct Workspace<'a> {
    x: Vec<f64>,
    y: Vec<f64>,
    inv_sigma: Vec<f64>,
    layout: Layout,
    opts: &'a FitOptions,
    x_mid: f64,
    x_scale: f64,
    y_scale: f64,
}

impl Workspace<'_> {
    /// Residual vector, Jacobian and squared residual norm at `theta`.
    fn linearize(&self, theta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>, f64) {
        let m = self.x.len();
        let p = self.layout.n_params();
        let peaks = self.layout.peaks(theta);
        let mut r = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, p);
        for i in 0..m {
            let xi = self.x[i];
            let mut f = theta[0];
            jac[(i, 0)] = self.inv_sigma[i];
            for (k, &(a, c, fw)) in peaks.iter().enumerate() {
                let gamma = fw / 2.0;
                let u = xi - c;
                let denom = u * u + gamma * gamma;
                let l = a * gamma * gamma / denom;
                f += l;
                let dl_dc = 2.0 * u * l / denom;
                let dl_dlnf = 2.0 * l * u * u / denom;
                let w = self.inv_sigma[i];
                if self.layout.symmetric {
                    if k == 0 {
                        jac[(i, 1)] += w * l;
                        jac[(i, 2)] += w * dl_dc;
                        jac[(i, 3)] += w * dl_dlnf;
                    } else {
                        let pair = (k - 1) / 2;
                        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                        let base = 4 + 3 * pair;
                        jac[(i, 2)] += w * dl_dc;
                        jac[(i, base)] += w * l;
                        jac[(i, base + 1)] += w * sign * dl_dc;
                        jac[(i, base + 2)] += w * dl_dlnf;
                    }
                } else {
                    let base = 1 + 3 * k;
                    jac[(i, base)] = w * l;
                    jac[(i, base + 1)] = w * dl_dc;
                    jac[(i, base + 2)] = w * dl_dlnf;
                }
            }
            r[i] = (f - self.y[i]) * self.inv_sigma[i];
        }
        let ssr = r.norm_squared();
        (r, jac, ssr)
    }
}

/// Fits `n_components` Lorentzians plus a constant background with default
/// options.
pub fn fit_mixture(data: &SpectrumRecord, n_components: usize) -> Result<FitResult> {
    fit_mixture_with(data, n_components, &FitOptions::default())
}

/// [`fit_mixture`] with explicit options.
pub fn fit_mixture_with(
    data: &SpectrumRecord,
    n_components: usize,
    opts: &FitOptions,
) -> Result<FitResult> {
    if n_components == 0 {
        return Err(Error::Validation("need at least one component".into()));
    }
    if opts.symmetric_sides && n_components.is_multiple_of(2) {
        return Err(Error::Validation(
            "the symmetric-sides constraint needs an odd component count".into(),
        ));
    }
    if 3 * n_components + 1 > data.omega_j().len() {
        return Err(Error::Validation(format!(
            "{} parameters cannot be determined from {} points",
            3 * n_components + 1,
            data.omega_j().len()
        )));
    }
    let seed = seed_parameters(data, n_components)?;

    // normalize coordinates: x to [-1, 1]-ish, y to unit scale
    let (x_lo, x_hi) = (
        data.omega_j()[0],
        *data.omega_j().last().expect("non-empty"),
    );
    let x_mid = 0.5 * (x_lo + x_hi);
    let x_scale = 0.5 * (x_hi - x_lo);
    let y_scale = data
        .psd()
        .iter()
        .fold(0.0f64, |a, &b| a.max(b.abs()))
        .max(f64::MIN_POSITIVE);
    let layout = Layout {
        n_components,
        symmetric: opts.symmetric_sides,
    };
    let ws = Workspace {
        x: data
            .omega_j()
            .iter()
            .map(|&v| (v - x_mid) / x_scale)
            .collect(),
        y: data.psd().iter().map(|&v| v / y_scale).collect(),
        inv_sigma: match data.uncertainty() {
            Some(u) => u.iter().map(|&s| y_scale / s).collect(),
            None => vec![1.0; data.psd().len()],
        },
        layout,
        opts,
        x_mid,
        x_scale,
        y_scale,
    };

    let mut theta = DVector::zeros(layout.n_params());
    theta[0] = seed.background / y_scale;
    if layout.symmetric {
        // central component: the tallest seed; pairs from the remaining
        // seeds sorted by center
        let (a0, c0, f0) = seed.peaks[0];
        theta[1] = (a0 / y_scale).ln();
        theta[2] = (c0 - x_mid) / x_scale;
        theta[3] = (f0 / x_scale).ln();
        let mut rest: Vec<(f64, f64, f64)> = seed.peaks[1..].to_vec();
        rest.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite centers"));
        let pairs = (n_components - 1) / 2;
        for j in 0..pairs {
            let lo = rest[j];
            let hi = rest[rest.len() - 1 - j];
            let base = 4 + 3 * j;
            theta[base] = (0.5 * (lo.0 + hi.0) / y_scale).ln();
            theta[base + 1] = (0.5 * ((hi.1 - c0).abs() + (c0 - lo.1).abs()) / x_scale).max(1e-6);
            theta[base + 2] = (0.5 * (lo.2 + hi.2) / x_scale).ln();
        }
    } else {
        for (k, &(a, c, fw)) in seed.peaks.iter().enumerate() {
            let base = 1 + 3 * k;
            theta[base] = (a / y_scale).ln();
            theta[base + 1] = (c - x_mid) / x_scale;
            theta[base + 2] = (fw / x_scale).ln();
        }
    }

    levenberg_marquardt(&ws, theta)
}

fn levenberg_marquardt(ws: &Workspace, mut theta: DVector<f64>) -> Result<FitResult> {
    let opts = ws.opts;
    let (mut r, mut jac, mut ssr) = ws.linearize(&theta);
    if !ssr.is_finite() {
        return Err(Error::Numerical("seed model is not finite".into()));
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut history = vec![ssr.sqrt()];

    while iterations < opts.max_iterations {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let gradient = jac.transpose() * &r;
        let mut damped = jtj.clone();
        for i in 0..damped.nrows() {
            // Marquardt scaling with an absolute floor for flat directions
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
        }
        let step = match damped.cholesky() {
            Some(ch) => ch.solve(&(-&gradient)),
            None => {
                lambda *= 10.0;
                if lambda > 1e14 {
                    return Err(Error::Numerical(
                        "degenerate Jacobian: normal equations are not positive \
                         definite even with maximal damping"
                            .into(),
                    ));
                }
                continue;
            }
        };
        let trial = &theta + &step;
        let (r_new, jac_new, ssr_new) = ws.linearize(&trial);
        if ssr_new.is_finite() && ssr_new < ssr {
            let rel_decrease = (ssr - ssr_new) / ssr.max(f64::MIN_POSITIVE);
            let rel_step = step.norm() / (theta.norm() + opts.step_tol);
            theta = trial;
            r = r_new;
            jac = jac_new;
            ssr = ssr_new;
            history.push(ssr.sqrt());
            lambda = (lambda / 3.0).max(1e-14);
            if rel_step < opts.step_tol || rel_decrease < opts.residual_tol {
                converged = true;
                break;
            }
        } else {
            lambda *= 5.0;
            if lambda > 1e14 {
                // the step has collapsed below representable progress
                converged = true;
                break;
            }
        }
    }

    let result = assemble_result(ws, &theta, &jac, ssr, converged, iterations, history);
    if converged {
        Ok(result)
    } else {
        Err(Error::FitNonConvergence {
            iterations,
            residual_norm: result.residual_norm,
            best: Box::new(result),
        })
    }
}

fn assemble_result(
    ws: &Workspace,
    theta: &DVector<f64>,
    jac: &DMatrix<f64>,
    ssr: f64,
    converged: bool,
    iterations: usize,
    history: Vec<f64>,
) -> FitResult {
    let m = ws.x.len();
    let p = ws.layout.n_params();
    let norm_factor = if ws.inv_sigma.iter().all(|&w| w == 1.0) {
        ws.y_scale
    } else {
        1.0
    };

    // covariance of the normalized parameters
    let dof = m.saturating_sub(p);
    let variances: Option<DVector<f64>> = if dof > 0 {
        (jac.transpose() * jac).try_inverse().map(|c| {
            let s2 = ssr / dof as f64;
            DVector::from_iterator(p, (0..p).map(|i| (c[(i, i)] * s2).max(0.0)))
        })
    } else {
        None
    };
    let sigma = |i: usize| variances.as_ref().map_or(f64::NAN, |v| v[i].sqrt());

    let background = theta[0] * ws.y_scale;
    let background_sigma = sigma(0) * ws.y_scale;

    let mut peaks = Vec::with_capacity(ws.layout.n_components);
    let raw = ws.layout.peaks(theta);
    if ws.layout.symmetric {
        let (a0, c0, f0) = raw[0];
        peaks.push(FittedPeak {
            amplitude: a0 * ws.y_scale,
            center: ws.x_mid + c0 * ws.x_scale,
            fwhm: f0 * ws.x_scale,
            amplitude_sigma: a0 * ws.y_scale * sigma(1),
            center_sigma: sigma(2) * ws.x_scale,
            fwhm_sigma: f0 * ws.x_scale * sigma(3),
        });
        let pairs = (ws.layout.n_components - 1) / 2;
        for j in 0..pairs {
            let base = 4 + 3 * j;
            // raw holds (+d, -d) entries after the central one
            for side in 0..2 {
                let (a, c, fw) = raw[1 + 2 * j + side];
                peaks.push(FittedPeak {
                    amplitude: a * ws.y_scale,
                    center: ws.x_mid + c * ws.x_scale,
                    fwhm: fw * ws.x_scale,
                    amplitude_sigma: a * ws.y_scale * sigma(base),
                    center_sigma: (sigma(2).powi(2) + sigma(base + 1).powi(2)).sqrt() * ws.x_scale,
                    fwhm_sigma: fw * ws.x_scale * sigma(base + 2),
                });
            }
        }
    } else {
        for (k, &(a, c, fw)) in raw.iter().enumerate() {
            let base = 1 + 3 * k;
            peaks.push(FittedPeak {
                amplitude: a * ws.y_scale,
                center: ws.x_mid + c * ws.x_scale,
                fwhm: fw * ws.x_scale,
                amplitude_sigma: a * ws.y_scale * sigma(base),
                center_sigma: sigma(base + 1) * ws.x_scale,
                fwhm_sigma: fw * ws.x_scale * sigma(base + 2),
            });
        }
    }
    peaks.sort_by(|a, b| a.center.partial_cmp(&b.center).expect("finite centers"));

    FitResult {
        peaks,
        background,
        background_sigma,
        residual_norm: ssr.sqrt() * norm_factor,
        converged,
        iterations,
        residual_history: history.into_iter().map(|h| h * norm_factor).collect(),
    }
}

/// Effective temperature (K) of the bias impedance from a fitted Josephson
/// linewidth: T = ħ²·Δω_J/(2·k_B·4e²·Z₀).
pub fn effective_temperature(fwhm: f64, z0: f64) -> Result<f64> {
    bias::temperature_from_fwhm(fwhm, z0)
}
