//! Spectral characterization: two-Lorentzian modeling of scattering and
//! absorption spectra, Levenberg-Marquardt fitting, and the derivation of
//! mode rates, efficiencies, Purcell factors and coupling constants.
//!
//! Each resonance is a driven damped harmonic oscillator with complex
//! amplitude 𝓐(ω) = 𝓔 / (ω₀² − ω² + iΓω); the fitted power model is the
//! incoherent sum P(ω) = Σ_j |𝓐_j(ω)|² of two uncoupled resonances. Fits run
//! in rescaled units (frequencies near 1, powers near 1) so the normal
//! equations stay well conditioned at optical frequencies.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{rad_per_s_to_thz_over_2pi, thz_over_2pi_to_rad_per_s};
use crate::linalg::{lu_factor, lu_solve};
use crate::model::{gamma_fs, AntennaModel, EmitterModel, ModeRecord, ModelError};

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("spectrum invalid: {0}")]
    InvalidSeries(String),
    #[error("fewer than two peaks detected in the spectrum")]
    TooFewPeaks,
    #[error("fit has not converged")]
    NotConverged,
    #[error("scattering and absorption centers disagree by {0:.2}% (limit 2%)")]
    InconsistentCenters(f64),
    #[error("purcell contribution must be positive, got {0}")]
    InvalidPurcell(f64),
    #[error("csv error: {0}")]
    Csv(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which classical channel a spectrum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Scat,
    Abs,
}

/// A tabulated power spectrum: strictly increasing frequencies (rad/s),
/// nonnegative powers in arbitrary linear units.
#[derive(Debug, Clone)]
pub struct SpectrumSeries {
    pub channel: Channel,
    pub points: Vec<(f64, f64)>,
}

impl SpectrumSeries {
    pub fn new(channel: Channel, points: Vec<(f64, f64)>) -> Result<Self, SpectraError> {
        if points.len() < 16 {
            return Err(SpectraError::InvalidSeries(format!(
                "need at least 16 points, got {}",
                points.len()
            )));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(SpectraError::InvalidSeries(
                    "frequencies must be strictly increasing".into(),
                ));
            }
        }
        if points.iter().any(|&(_, p)| p < 0.0 || !p.is_finite()) {
            return Err(SpectraError::InvalidSeries(
                "powers must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { channel, points })
    }
}

/// One fitted oscillator: center ω₀, width Γ, drive amplitude 𝓔 (all rad/s
/// except the amplitude, which carries the model's power units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianParams {
    pub omega0: f64,
    pub gamma: f64,
    pub amp: f64,
}

/// Two-resonance fit of one spectrum, modes ordered by ascending ω₀.
#[derive(Debug, Clone)]
pub struct LorentzianFitResult {
    pub channel: Channel,
    pub modes: [LorentzianParams; 2],
    pub rms_residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Complex oscillator amplitude 𝓐(ω) = 𝓔 / (ω₀² − ω² + iΓω).
pub fn lorentzian_amplitude(omega: f64, omega0: f64, gamma: f64, amp: f64) -> Complex64 {
    debug_assert!(gamma > 0.0);
    amp / Complex64::new(omega0 * omega0 - omega * omega, gamma * omega)
}

/// Power model P(ω) = Σ_j |𝓐_j(ω)|².
pub fn power_model(omega: f64, modes: &[LorentzianParams]) -> f64 {
    modes
        .iter()
        .map(|m| lorentzian_amplitude(omega, m.omega0, m.gamma, m.amp).norm_sqr())
        .sum()
}

/// Synthesize a spectrum from model parameters on the given frequency grid,
/// with multiplicative Gaussian noise of relative width `noise_rel`;
/// deterministic for a fixed seed.
pub fn synth_spectrum(
    channel: Channel,
    modes: &[LorentzianParams; 2],
    grid: &[f64],
    noise_rel: f64,
    seed: u64,
) -> Result<SpectrumSeries, SpectraError> {
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let points = grid
        .iter()
        .map(|&w| {
            let clean = power_model(w, modes);
            let noisy = if noise_rel > 0.0 {
                (clean * (1.0 + noise_rel * normal.sample(&mut rng))).max(0.0)
            } else {
                clean
            };
            (w, noisy)
        })
        .collect();
    SpectrumSeries::new(channel, points)
}

/// Fitter options; the fit window keeps only points within
/// `window_gammas` initial widths of either detected peak.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub cost_rel_tol: f64,
    pub window_gammas: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            cost_rel_tol: 1e-12,
            window_gammas: Some(3.0),
        }
    }
}

/// Peak found by the prominence scan, in scaled units.
struct Peak {
    idx: usize,
    prominence: f64,
    half_prominence_width: f64,
}

/// Topographic prominences of interior local maxima.
fn detect_peaks(w: &[f64], p: &[f64]) -> Vec<Peak> {
    let n = p.len();
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(p[i] > p[i - 1] && p[i] >= p[i + 1]) {
            continue;
        }
        // Walk left and right to the nearest higher ground, tracking the
        // lowest valley on the way; prominence is peak minus the higher of
        // the two key valleys.
        let mut left_min = p[i];
        let mut l = i;
        while l > 0 {
            l -= 1;
            left_min = left_min.min(p[l]);
            if p[l] > p[i] {
                break;
            }
        }
        let left_bounded = p[l] > p[i];
        let mut right_min = p[i];
        let mut r = i;
        while r < n - 1 {
            r += 1;
            right_min = right_min.min(p[r]);
            if p[r] > p[i] {
                break;
            }
        }
        let right_bounded = p[r] > p[i];
        let key = match (left_bounded, right_bounded) {
            (true, true) => left_min.max(right_min),
            (true, false) => left_min,
            (false, true) => right_min,
            (false, false) => left_min.min(right_min),
        };
        let prominence = p[i] - key;
        if prominence <= 0.0 {
            continue;
        }
        // Width where the signal first drops below peak − prominence/2.
        let cut = p[i] - 0.5 * prominence;
        let mut wl = w[i];
        for k in (0..i).rev() {
            if p[k] <= cut {
                // Linear interpolation between k and k+1.
                let f = (cut - p[k]) / (p[k + 1] - p[k]).max(f64::MIN_POSITIVE);
                wl = w[k] + f * (w[k + 1] - w[k]);
                break;
            }
            wl = w[k];
        }
        let mut wr = w[i];
        for k in i + 1..n {
            if p[k] <= cut {
                let f = (p[k - 1] - cut) / (p[k - 1] - p[k]).max(f64::MIN_POSITIVE);
                wr = w[k - 1] + f * (w[k] - w[k - 1]);
                break;
            }
            wr = w[k];
        }
        peaks.push(Peak {
            idx: i,
            prominence,
            half_prominence_width: (wr - wl).max(f64::MIN_POSITIVE),
        });
    }
    peaks.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
    peaks
}

/// Levenberg-Marquardt fit of two uncoupled Lorentzian resonances to a power
/// spectrum, minimizing Σ_i (P_model(ω_i) − P_i)².
///
/// The Jacobian uses central finite differences with relative step 1e-6;
/// iteration stops when the relative cost change drops below 1e-12 or after
/// 200 iterations (a non-converged fit is flagged, not an error). When no
/// initial guess is given, the two most prominent local maxima seed it:
/// ω₀ at the peak, Γ from the half-prominence width, 𝓔 = √peak·Γ·ω₀.
pub fn fit_two_lorentzians(
    series: &SpectrumSeries,
    init: Option<[LorentzianParams; 2]>,
    options: &FitOptions,
) -> Result<LorentzianFitResult, SpectraError> {
    // Rescale: frequencies by their midpoint magnitude, powers by their max.
    let w_scale = series.points[series.points.len() / 2].0.abs().max(1.0);
    let p_scale = series
        .points
        .iter()
        .map(|&(_, p)| p)
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let ws: Vec<f64> = series.points.iter().map(|&(w, _)| w / w_scale).collect();
    let ps: Vec<f64> = series.points.iter().map(|&(_, p)| p / p_scale).collect();
    // Amplitude unit: 𝓔 scales as frequency² · √power.
    let amp_scale = w_scale * w_scale * p_scale.sqrt();

    let mut params = match init {
        Some(given) => {
            let mut p = [
                scale_params(&given[0], w_scale, amp_scale),
                scale_params(&given[1], w_scale, amp_scale),
            ];
            p.sort_by(|a, b| a.omega0.total_cmp(&b.omega0));
            p
        }
        None => {
            let peaks = detect_peaks(&ws, &ps);
            if peaks.len() < 2 {
                return Err(SpectraError::TooFewPeaks);
            }
            let mut seeds: Vec<LorentzianParams> = peaks[..2]
                .iter()
                .map(|pk| {
                    let w0 = ws[pk.idx];
                    let gamma = pk.half_prominence_width.max(1e-6);
                    let height = ps[pk.idx];
                    LorentzianParams {
                        omega0: w0,
                        gamma,
                        amp: height.sqrt() * gamma * w0,
                    }
                })
                .collect();
            seeds.sort_by(|a, b| a.omega0.total_cmp(&b.omega0));
            [seeds[0], seeds[1]]
        }
    };

    // Restrict to windows around the two seeds if requested.
    let keep: Vec<usize> = match options.window_gammas {
        Some(k) => (0..ws.len())
            .filter(|&i| {
                params
                    .iter()
                    .any(|m| (ws[i] - m.omega0).abs() <= k * m.gamma)
            })
            .collect(),
        None => (0..ws.len()).collect(),
    };
    let wfit: Vec<f64> = keep.iter().map(|&i| ws[i]).collect();
    let pfit: Vec<f64> = keep.iter().map(|&i| ps[i]).collect();
    if wfit.len() < 7 {
        return Err(SpectraError::InvalidSeries(
            "fit window keeps fewer points than parameters".into(),
        ));
    }

    let cost_of = |p: &[f64; 6]| -> f64 {
        let m = params_from_vec(p);
        wfit.iter()
            .zip(&pfit)
            .map(|(&w, &y)| {
                let r = power_model(w, &m) - y;
                r * r
            })
            .sum()
    };

    let mut pvec = params_to_vec(&params);
    let mut cost = cost_of(&pvec);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..options.max_iterations {
        iterations = iter + 1;
        // Jacobian by central differences, relative step 1e-6.
        let npts = wfit.len();
        let mut jac = vec![0.0; npts * 6];
        let mut resid = vec![0.0; npts];
        {
            let m = params_from_vec(&pvec);
            for (i, (&w, &y)) in wfit.iter().zip(&pfit).enumerate() {
                resid[i] = y - power_model(w, &m);
            }
        }
        for k in 0..6 {
            let step = 1e-6 * pvec[k].abs().max(1e-12);
            let mut plus = pvec;
            plus[k] += step;
            let mut minus = pvec;
            minus[k] -= step;
            let mp = params_from_vec(&plus);
            let mm = params_from_vec(&minus);
            for (i, &w) in wfit.iter().enumerate() {
                jac[i * 6 + k] = (power_model(w, &mp) - power_model(w, &mm)) / (2.0 * step);
            }
        }
        // Normal equations (JᵀJ + λ diag(JᵀJ)) δ = Jᵀ r.
        let mut jtj = [0.0f64; 36];
        let mut jtr = [0.0f64; 6];
        for i in 0..npts {
            let row = &jac[i * 6..(i + 1) * 6];
            for a in 0..6 {
                jtr[a] += row[a] * resid[i];
                for b in a..6 {
                    jtj[a * 6 + b] += row[a] * row[b];
                }
            }
        }
        for a in 1..6 {
            for b in 0..a {
                jtj[a * 6 + b] = jtj[b * 6 + a];
            }
        }

        let mut accepted = false;
        for _ in 0..16 {
            let mut damped = jtj;
            for a in 0..6 {
                damped[a * 6 + a] += lambda * jtj[a * 6 + a].max(1e-30);
            }
            let f = lu_factor(6, damped.to_vec());
            if f.smallest_pivot <= 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let delta = lu_solve(&f, &jtr);
            let mut trial = pvec;
            for (t, d) in trial.iter_mut().zip(&delta) {
                *t += d;
            }
            // Keep widths positive.
            trial[1] = trial[1].abs().max(1e-12);
            trial[4] = trial[4].abs().max(1e-12);
            let trial_cost = cost_of(&trial);
            if trial_cost < cost {
                // Accepted steps never increase the cost.
                let rel_change = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                pvec = trial;
                cost = trial_cost;
                lambda = (lambda * 0.1).max(1e-14);
                accepted = true;
                if rel_change < options.cost_rel_tol {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e14 {
                break;
            }
        }
        if converged {
            break;
        }
        if !accepted {
            // No downhill direction left at any damping: stationary point.
            converged = true;
            break;
        }
    }

    let mut fitted = params_from_vec(&pvec);
    fitted.sort_by(|a, b| a.omega0.total_cmp(&b.omega0));
    params = [fitted[0], fitted[1]];

    let rms = (cost / wfit.len() as f64).sqrt() * p_scale;
    Ok(LorentzianFitResult {
        channel: series.channel,
        modes: [
            unscale_params(&params[0], w_scale, amp_scale),
            unscale_params(&params[1], w_scale, amp_scale),
        ],
        rms_residual: rms,
        converged,
        iterations,
    })
}

fn scale_params(p: &LorentzianParams, w_scale: f64, amp_scale: f64) -> LorentzianParams {
    LorentzianParams {
        omega0: p.omega0 / w_scale,
        gamma: p.gamma / w_scale,
        amp: p.amp / amp_scale,
    }
}

fn unscale_params(p: &LorentzianParams, w_scale: f64, amp_scale: f64) -> LorentzianParams {
    LorentzianParams {
        omega0: p.omega0 * w_scale,
        gamma: p.gamma * w_scale,
        amp: p.amp * amp_scale,
    }
}

fn params_to_vec(p: &[LorentzianParams; 2]) -> [f64; 6] {
    [
        p[0].omega0,
        p[0].gamma,
        p[0].amp,
        p[1].omega0,
        p[1].gamma,
        p[1].amp,
    ]
}

fn params_from_vec(v: &[f64; 6]) -> [LorentzianParams; 2] {
    [
        LorentzianParams {
            omega0: v[0],
            gamma: v[1].abs(),
            amp: v[2],
        },
        LorentzianParams {
            omega0: v[3],
            gamma: v[4].abs(),
            amp: v[5],
        },
    ]
}

/// Table-shaped characterization of one antenna derived from its fits.
#[derive(Debug, Clone)]
pub struct ModeCharacterization {
    pub modes: [ModeRecord; 2],
}

/// Combine scattering and absorption fits with the externally supplied
/// partial Purcell contributions f_j into a full mode characterization:
/// Γ_j = Γ^scat+Γ^abs, η_j = Γ^scat/Γ_j, κ_j = √(f_j Γ_j γ_fs / (4η_j)),
/// ω_j from the scattering-channel centers.
pub fn characterize(
    fit_scat: &LorentzianFitResult,
    fit_abs: &LorentzianFitResult,
    purcell_f: [f64; 2],
    emitter: &EmitterModel,
) -> Result<ModeCharacterization, SpectraError> {
    if !fit_scat.converged || !fit_abs.converged {
        return Err(SpectraError::NotConverged);
    }
    for f in purcell_f {
        if !(f > 0.0) {
            return Err(SpectraError::InvalidPurcell(f));
        }
    }
    let gfs = gamma_fs(emitter);
    let mut modes = Vec::with_capacity(2);
    for j in 0..2 {
        let s = fit_scat.modes[j];
        let a = fit_abs.modes[j];
        let mismatch = 100.0 * (s.omega0 - a.omega0).abs() / s.omega0;
        if mismatch > 2.0 {
            return Err(SpectraError::InconsistentCenters(mismatch));
        }
        let gamma_total = s.gamma + a.gamma;
        let eta = s.gamma / gamma_total;
        let kappa = (purcell_f[j] * gamma_total * gfs / (4.0 * eta)).sqrt();
        modes.push(ModeRecord::new(
            s.omega0,
            s.gamma,
            a.gamma,
            kappa,
            purcell_f[j],
        )?);
    }
    Ok(ModeCharacterization {
        modes: [modes[0], modes[1]],
    })
}

impl ModeCharacterization {
    pub fn into_antenna(self, label: impl Into<String>) -> Result<AntennaModel, SpectraError> {
        Ok(AntennaModel::new(label, self.modes)?)
    }
}

/// Cavity-QED Purcell factor at the emitter frequency, with the per-mode
/// contributions and the classical counterpart F_class = 1 + Σ f_j.
#[derive(Debug, Clone, Copy)]
pub struct PurcellFactors {
    pub f_cqed: f64,
    pub contributions: [f64; 2],
    pub f_class: f64,
}

/// F_cQED = 1 + Σ_j η_j κ_j² Γ_j / ([(Γ_j/2)² + (ω_j−ω_qe)²] γ_fs).
pub fn purcell_cqed(char: &ModeCharacterization, emitter: &EmitterModel) -> PurcellFactors {
    let gfs = gamma_fs(emitter);
    let mut contributions = [0.0; 2];
    for j in 0..2 {
        let m = &char.modes[j];
        let gamma = m.gamma_total();
        let detune = m.omega - emitter.omega_qe;
        contributions[j] = m.efficiency() * m.kappa_max * m.kappa_max * gamma
            / (((0.5 * gamma).powi(2) + detune * detune) * gfs);
    }
    PurcellFactors {
        f_cqed: 1.0 + contributions[0] + contributions[1],
        contributions,
        f_class: 1.0 + char.modes[0].purcell_f + char.modes[1].purcell_f,
    }
}

// ---------------------------------------------------------------------------
// CSV I/O: `omega_thz_over_2pi,power`, one channel per file.
// ---------------------------------------------------------------------------

pub fn read_spectrum_csv<R: std::io::Read>(
    reader: R,
    channel: Channel,
) -> Result<SpectrumSeries, SpectraError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = rdr.headers().map_err(|e| SpectraError::Csv(e.to_string()))?;
        if headers.len() < 2 || &headers[0] != "omega_thz_over_2pi" || &headers[1] != "power" {
            return Err(SpectraError::Csv(format!(
                "expected header `omega_thz_over_2pi,power`, got {headers:?}"
            )));
        }
    }
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| SpectraError::Csv(e.to_string()))?;
        let w: f64 = record[0]
            .parse()
            .map_err(|e| SpectraError::Csv(format!("bad frequency {:?}: {e}", &record[0])))?;
        let p: f64 = record[1]
            .parse()
            .map_err(|e| SpectraError::Csv(format!("bad power {:?}: {e}", &record[1])))?;
        points.push((thz_over_2pi_to_rad_per_s(w), p));
    }
    SpectrumSeries::new(channel, points)
}

pub fn write_spectrum_csv<W: std::io::Write>(
    series: &SpectrumSeries,
    writer: W,
) -> Result<(), SpectraError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["omega_thz_over_2pi", "power"])
        .map_err(|e| SpectraError::Csv(e.to_string()))?;
    for &(w, p) in &series.points {
        wtr.write_record([format!("{}", rad_per_s_to_thz_over_2pi(w)), format!("{p}")])
            .map_err(|e| SpectraError::Csv(e.to_string()))?;
    }
    wtr.flush().map_err(|e| SpectraError::Csv(e.to_string()))?;
    Ok(())
}
