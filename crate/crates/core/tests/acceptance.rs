//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them).
//!
//! The scans that need an "optimal" emitter frequency obtain it from the
//! golden-section search over ω_qe ∈ [ω₁−Γ_max, ω₂+Γ_max] at ϑ = 90°, the
//! same optimizer the find-optimum command exposes.

use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use pqed::constants::thz_over_2pi_to_rad_per_s;
use pqed::entangle::{bell_like_state, log_negativity_of, LogBase};
use pqed::model::{
    build_collapse_channels, build_hamiltonian, default_emitter, gamma_fs, table1, table1_antenna,
    AntennaModel, EmitterModel, ModeRecord,
};
use pqed::observables::{antenna_for_dipole, find_optimum, solve_pipeline, ObservableRow};
use pqed::qspace::{DensityMatrix, Operator, PhotonSpace, Space, SpaceDescriptor};
use pqed::spectra::{fit_two_lorentzians, synth_spectrum, Channel, FitOptions, LorentzianParams};
use pqed::steady::{build_liouvillian, evolve_rk4, solve_steady};

const LEVELS: [usize; 2] = [4, 4];

fn emitter(omega_qe: f64, theta_deg: f64, pump: f64) -> EmitterModel {
    default_emitter(omega_qe, theta_deg, pump)
}

fn optimum_at_90(antenna: &AntennaModel, pump: f64) -> f64 {
    let base = emitter(antenna.omega_midpoint(), 90.0, pump);
    find_optimum(antenna, &base, LEVELS, LogBase::Two)
        .unwrap()
        .omega_qe_opt
}

fn solve(antenna: &AntennaModel, em: &EmitterModel) -> ObservableRow {
    solve_pipeline(antenna, em, LEVELS, LogBase::Two).unwrap()
}

/// Criterion 1: with κ₁ = κ₂ = 0 the steady state reproduces the two-level
/// rate equation p_e = P/(P+γ_fs) to 1e-10 relative over five pump decades,
/// in under a second.
#[test]
fn criterion_01_decoupled_limit_exactness() {
    let started = Instant::now();
    let mut antenna = table1_antenna("dl0").unwrap();
    antenna.modes[0].kappa_max = 0.0;
    antenna.modes[1].kappa_max = 0.0;
    let mut worst_rel = 0.0_f64;
    for pump in [1e6, 1e7, 1e8, 1e9, 1e10] {
        let em = emitter(antenna.omega_midpoint(), 90.0, pump);
        let row = solve(&antenna, &em);
        let expect = pump / (pump + gamma_fs(&em));
        worst_rel = worst_rel.max((row.p_e - expect).abs() / expect);
    }
    let elapsed = started.elapsed();
    assert!(
        worst_rel <= 1e-10,
        "criterion 1: FAIL p_e relative error {worst_rel:.3e}"
    );
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "criterion 1: FAIL runtime {elapsed:?} exceeds 1 s"
    );
    println!(
        "criterion 1: PASS decoupled p_e within {worst_rel:.3e} relative across 5 pump decades ({elapsed:?})"
    );
}

/// Criterion 2: the RK4 oracle integrated to t = 50/min-rate agrees with the
/// stationary solve element-wise to 1e-6 at ϑ ∈ {0°, 45°, 90°}, in < 30 s.
#[test]
fn criterion_02_oracle_equivalence() {
    let started = Instant::now();
    let antenna = table1_antenna("dl0").unwrap();
    let space = SpaceDescriptor::new(LEVELS).unwrap();
    let mut worst = 0.0_f64;
    for theta in [0.0, 45.0, 90.0] {
        let em = emitter(antenna.omega_midpoint(), theta, 1e9);
        let h = build_hamiltonian(&space, &antenna, &em).unwrap();
        let channels = build_collapse_channels(&space, &antenna, &em).unwrap();
        let liouvillian = build_liouvillian(&h, &channels).unwrap();
        let steady = solve_steady(&liouvillian).unwrap();

        let min_rate = channels.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let t_final = 50.0 / min_rate;
        let dt = 0.02 / liouvillian.max_rate();
        let vacuum = {
            let d = space.dim();
            let mut m = Array2::zeros((d, d));
            m[(0, 0)] = Complex64::ONE;
            DensityMatrix::new(Operator::new(m, Space::Full(space)).unwrap()).unwrap()
        };
        let evolved = evolve_rk4(&h, &channels, &vacuum, t_final, dt).unwrap();
        let diff = (evolved.entries() - steady.rho.entries())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    let elapsed = started.elapsed();
    assert!(
        worst <= 1e-6,
        "criterion 2: FAIL max |rk4 − steady| = {worst:.3e}"
    );
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "criterion 2: FAIL runtime {elapsed:?} exceeds 30 s"
    );
    println!(
        "criterion 2: PASS rk4 vs steady element-wise within {worst:.3e} at three orientations ({elapsed:?})"
    );
}

/// Criterion 3: the excitation balance P·p_g = γ_fs·p_e + ΣΓ_j⟨n_j⟩ holds to
/// 1e-8 relative for all six antennas at three pump values.
#[test]
fn criterion_03_excitation_balance() {
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for antenna in table1() {
        for pump in [1e8, 1e9, 1e10] {
            let em = emitter(antenna.omega_midpoint(), 90.0, pump);
            let row = solve(&antenna, &em);
            let gfs = gamma_fs(&em);
            let pump_flow = pump * row.p_g;
            let out_flow = gfs * row.p_e
                + antenna.modes[0].gamma_total() * row.n_mode[0]
                + antenna.modes[1].gamma_total() * row.n_mode[1];
            let violation = (pump_flow - out_flow).abs() / pump_flow;
            worst = worst.max(violation);
            cases += 1;
        }
    }
    assert_eq!(cases, 18);
    assert!(
        worst <= 1e-8,
        "criterion 3: FAIL worst excitation-balance violation {worst:.3e}"
    );
    println!("criterion 3: PASS balance violation ≤ {worst:.3e} over 18 cases");
}

/// Criterion 4: at a GHz pump the mean photon numbers sit in [1e-6, 1e-4]
/// and p(2)/p(1) is ten-ish orders down, within [−13, −7]; runtime < 5 s.
#[test]
fn criterion_04_photon_statistics_magnitudes() {
    let started = Instant::now();
    let antenna = table1_antenna("dl0").unwrap();
    let em = emitter(antenna.omega_midpoint(), 90.0, 1e9);
    let row = solve(&antenna, &em);
    for (j, n) in row.n_mode.iter().enumerate() {
        assert!(
            (1e-6..=1e-4).contains(n),
            "criterion 4: FAIL ⟨n_{}⟩ = {n:.3e} outside [1e-6, 1e-4]",
            j + 1
        );
    }
    let ratio = (row.p_total[2] / row.p_total[1]).log10();
    assert!(
        (-13.0..=-7.0).contains(&ratio),
        "criterion 4: FAIL log10 p(2)/p(1) = {ratio:.2}"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 4: FAIL runtime {elapsed:?}");
    println!(
        "criterion 4: PASS ⟨n⟩ = ({:.2e}, {:.2e}), log10 p2/p1 = {ratio:.2} ({elapsed:?})",
        row.n_mode[0], row.n_mode[1]
    );
}

/// Criterion 5: orientation structure on a 181-point grid at the optimum
/// emitter frequency and P = 0.1 GHz: dark points at 45°/135°, maxima within
/// 1° of 0°/90°, p_01 ≈ 1 at 45°, and p_bell(90°) > p_bell(45°) = 1/2.
#[test]
fn criterion_05_orientation_structure() {
    let antenna = table1_antenna("dl0").unwrap();
    let omega_opt = optimum_at_90(&antenna, 1e8);
    let rows: Vec<(f64, ObservableRow)> = (0..=180)
        .map(|i| {
            let theta = i as f64;
            let em = emitter(omega_opt, theta, 1e8);
            (theta, solve(&antenna, &em))
        })
        .collect();
    let at = |t: f64| &rows.iter().find(|(x, _)| *x == t).unwrap().1;

    assert!(
        at(45.0).e_n <= 1e-6 && at(135.0).e_n <= 1e-6,
        "criterion 5: FAIL E_N at dark orientations: {:.2e}, {:.2e}",
        at(45.0).e_n,
        at(135.0).e_n
    );
    let low_max = rows[0..=45]
        .iter()
        .max_by(|a, b| a.1.e_n.total_cmp(&b.1.e_n))
        .unwrap();
    let mid_max = rows[46..135]
        .iter()
        .max_by(|a, b| a.1.e_n.total_cmp(&b.1.e_n))
        .unwrap();
    assert!(
        low_max.0 <= 1.0,
        "criterion 5: FAIL lower maximum at ϑ = {}°",
        low_max.0
    );
    assert!(
        (mid_max.0 - 90.0).abs() <= 1.0,
        "criterion 5: FAIL central maximum at ϑ = {}°",
        mid_max.0
    );
    assert!(
        at(45.0).p_01 >= 0.99,
        "criterion 5: FAIL p_01(45°) = {}",
        at(45.0).p_01
    );
    assert!(
        (at(45.0).p_bell - 0.5).abs() <= 1e-6,
        "criterion 5: FAIL p_bell(45°) = {}",
        at(45.0).p_bell
    );
    assert!(
        at(90.0).p_bell > at(45.0).p_bell,
        "criterion 5: FAIL p_bell(90°) = {} not above p_bell(45°)",
        at(90.0).p_bell
    );
    println!(
        "criterion 5: PASS maxima at ϑ = {}°/{}°, E_N(45°) = {:.1e}, p_bell(90°) = {:.4}",
        low_max.0,
        mid_max.0,
        at(45.0).e_n,
        at(90.0).p_bell
    );
}

/// Criterion 6: across the six antennas at their per-antenna optimal emitter
/// frequency and P = 1 GHz, the dimmest antenna is ΔL = 24 nm and its rate
/// sits 30% ± 15 pp below the brightest.
#[test]
fn criterion_06_six_antenna_spread() {
    let mut rates: Vec<(String, f64)> = Vec::new();
    for antenna in table1() {
        let omega_opt = optimum_at_90(&antenna, 1e9);
        let em = emitter(omega_opt, 90.0, 1e9);
        let row = solve(&antenna, &em);
        rates.push((antenna.label.clone(), row.r_total));
    }
    let (min_label, r_min) = rates
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(l, r)| (l.clone(), *r))
        .unwrap();
    let r_max = rates.iter().map(|x| x.1).fold(0.0, f64::max);
    let reduction = 1.0 - r_min / r_max;
    assert_eq!(
        min_label, "dl24",
        "criterion 6: FAIL lowest-rate antenna is {min_label}, rates {rates:?}"
    );
    assert!(
        (0.15..=0.45).contains(&reduction),
        "criterion 6: FAIL reduction {:.1}% outside 30% ± 15 pp",
        100.0 * reduction
    );
    println!(
        "criterion 6: PASS dimmest antenna {min_label}, {:.1}% below the brightest",
        100.0 * reduction
    );
}

/// Criterion 7: analytic entanglement anchors.
#[test]
fn criterion_07_entanglement_anchors() {
    let ph = PhotonSpace::new([2, 2]).unwrap();
    for phi in [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI] {
        let e_n = log_negativity_of(&bell_like_state(ph, phi), LogBase::Two).unwrap();
        assert!(
            (e_n - 1.0).abs() <= 1e-10,
            "criterion 7: FAIL E_N(ψ_{phi}) = {e_n}"
        );
    }
    for (n1, n2) in [(1usize, 0usize), (0, 1)] {
        let mut amps = vec![Complex64::ZERO; 4];
        amps[ph.index(n1, n2)] = Complex64::ONE;
        let rho = DensityMatrix::pure(&amps, Space::Photonic(ph)).unwrap();
        assert_eq!(log_negativity_of(&rho, LogBase::Two).unwrap(), 0.0);
    }
    // All Fock-diagonal states are PPT, on larger spaces too.
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let ph4 = PhotonSpace::new([4, 4]).unwrap();
        let d = ph4.dim();
        let mut m = Array2::zeros((d, d));
        let mut w: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        for i in 0..d {
            m[(i, i)] = Complex64::new(w[i], 0.0);
        }
        let rho = DensityMatrix::new(Operator::new(m, Space::Photonic(ph4)).unwrap()).unwrap();
        assert_eq!(log_negativity_of(&rho, LogBase::Two).unwrap(), 0.0);
    }
    // Werner mixtures give log₂(1+p) exactly.
    for p in [0.0, 0.3, 0.7, 1.0] {
        let bell = bell_like_state(ph, 0.0);
        let mut m = bell.entries().mapv(|z| p * z);
        m[(ph.index(1, 0), ph.index(1, 0))] += Complex64::new((1.0 - p) * 0.5, 0.0);
        m[(ph.index(0, 1), ph.index(0, 1))] += Complex64::new((1.0 - p) * 0.5, 0.0);
        let rho = DensityMatrix::new(Operator::new(m, Space::Photonic(ph)).unwrap()).unwrap();
        let e_n = log_negativity_of(&rho, LogBase::Two).unwrap();
        assert!(
            (e_n - (1.0 + p).log2()).abs() <= 1e-9,
            "criterion 7: FAIL Werner p={p}: {e_n}"
        );
    }
    println!("criterion 7: PASS Bell, separable, Fock-diagonal and Werner anchors");
}

/// Criterion 8: E_N at the optimum varies by < 1% over three pump decades,
/// and E_N(ω_qe) decreases monotonically from the optimum to each edge of
/// the mode-overlap band on 41-point legs.
#[test]
fn criterion_08_pump_and_frequency_robustness() {
    let antenna = table1_antenna("dl0").unwrap();
    let omega_opt = optimum_at_90(&antenna, 1e9);

    let pumps = [1e7, 3.162e7, 1e8, 3.162e8, 1e9, 3.162e9, 1e10];
    let ens: Vec<f64> = pumps
        .iter()
        .map(|&p| solve(&antenna, &emitter(omega_opt, 90.0, p)).e_n)
        .collect();
    let e_min = ens.iter().cloned().fold(f64::INFINITY, f64::min);
    let e_max = ens.iter().cloned().fold(0.0_f64, f64::max);
    let spread = (e_max - e_min) / (0.5 * (e_max + e_min));
    assert!(
        spread < 0.01,
        "criterion 8: FAIL E_N pump spread {:.3}%",
        100.0 * spread
    );

    // Slack covers the optimizer tolerance (1e-4 of the mode gap) around the
    // starting point; the physical drop across each leg is 1e-3..1e-1.
    let slack = 1e-7;
    for (name, edge) in [
        ("lower", antenna.modes[0].omega),
        ("upper", antenna.modes[1].omega),
    ] {
        let leg: Vec<f64> = (0..41)
            .map(|i| {
                let w = omega_opt + (edge - omega_opt) * i as f64 / 40.0;
                solve(&antenna, &emitter(w, 90.0, 1e9)).e_n
            })
            .collect();
        for (i, pair) in leg.windows(2).enumerate() {
            assert!(
                pair[1] <= pair[0] + slack,
                "criterion 8: FAIL {name} leg rises at point {}: {} -> {}",
                i,
                pair[0],
                pair[1]
            );
        }
    }
    println!(
        "criterion 8: PASS pump spread {:.4}% and monotone drop to both band edges",
        100.0 * spread
    );
}

/// Criterion 9: emission grows quadratically with the dipole moment at small
/// d (log-log slope 2.0 ± 0.1 over the lowest decade), saturates at large d
/// (slope < 0.3 over the top decade), and E_N is flat to < 1% throughout.
#[test]
fn criterion_09_dipole_moment_behavior() {
    let antenna = table1_antenna("dl0").unwrap();
    let omega_opt = optimum_at_90(&antenna, 1e9);
    let d_lo = 1e-30;
    let d_hi = 3e-28;
    let n = 25;
    let points: Vec<(f64, f64, f64)> = (0..n)
        .map(|i| {
            let d = d_lo * (d_hi / d_lo).powf(i as f64 / (n - 1) as f64);
            let scaled = antenna_for_dipole(&antenna, d);
            let mut em = emitter(omega_opt, 90.0, 1e9);
            em.dipole_d = d;
            let row = solve(&scaled, &em);
            (d, row.r_total, row.e_n)
        })
        .collect();

    let ls_slope = |lo: f64, hi: f64| -> f64 {
        let sel: Vec<(f64, f64)> = points
            .iter()
            .filter(|(d, _, _)| *d >= lo * (1.0 - 1e-9) && *d <= hi * (1.0 + 1e-9))
            .map(|(d, r, _)| (d.ln(), r.ln()))
            .collect();
        let n = sel.len() as f64;
        let sx: f64 = sel.iter().map(|p| p.0).sum();
        let sy: f64 = sel.iter().map(|p| p.1).sum();
        let sxx: f64 = sel.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = sel.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    let low = ls_slope(1e-30, 1e-29);
    let top = ls_slope(3e-29, 3e-28);
    assert!(
        (1.9..=2.1).contains(&low),
        "criterion 9: FAIL lowest-decade slope {low:.3}"
    );
    assert!(top < 0.3, "criterion 9: FAIL top-decade slope {top:.3}");
    let e_min = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let e_max = points.iter().map(|p| p.2).fold(0.0_f64, f64::max);
    let spread = (e_max - e_min) / (0.5 * (e_max + e_min));
    assert!(
        spread < 0.01,
        "criterion 9: FAIL E_N spread over d: {:.3}%",
        100.0 * spread
    );
    println!(
        "criterion 9: PASS slopes {low:.3} (low) / {top:.3} (top), E_N spread {:.4}%",
        100.0 * spread
    );
}

/// Criterion 10: spectral fit round-trips on all 12 table-derived mode pairs:
/// exact recovery at zero noise (ω₀ to 0.01%, Γ to 0.1%) and statistical
/// recovery at 1% noise (ω₀ to 0.1%, Γ to 2% in ≥ 95% of 240 runs), < 60 s.
#[test]
fn criterion_10_spectral_fit_round_trips() {
    let started = Instant::now();
    let grid: Vec<f64> = (0..700)
        .map(|i| thz_over_2pi_to_rad_per_s(280.0 + 170.0 * i as f64 / 699.0))
        .collect();
    let series_params = |m: &ModeRecord, channel: Channel, height: f64| {
        let gamma = match channel {
            Channel::Scat => m.gamma_scat,
            Channel::Abs => m.gamma_abs,
        };
        LorentzianParams {
            omega0: m.omega,
            gamma,
            amp: height.sqrt() * gamma * m.omega,
        }
    };

    let mut pairs = Vec::new();
    for antenna in table1() {
        for channel in [Channel::Scat, Channel::Abs] {
            pairs.push((
                antenna.label.clone(),
                channel,
                [
                    series_params(&antenna.modes[0], channel, 1.0),
                    series_params(&antenna.modes[1], channel, 0.9),
                ],
            ));
        }
    }
    assert_eq!(pairs.len(), 12);

    // Noiseless round trips.
    for (label, channel, truth) in &pairs {
        let series = synth_spectrum(*channel, truth, &grid, 0.0, 0).unwrap();
        let fit = fit_two_lorentzians(&series, None, &FitOptions::default()).unwrap();
        assert!(fit.converged, "criterion 10: FAIL {label} {channel:?} did not converge");
        for j in 0..2 {
            let w_err = (fit.modes[j].omega0 - truth[j].omega0).abs() / truth[j].omega0;
            let g_err = (fit.modes[j].gamma - truth[j].gamma).abs() / truth[j].gamma;
            assert!(
                w_err <= 1e-4,
                "criterion 10: FAIL {label} {channel:?} mode {j} ω₀ error {w_err:.2e}"
            );
            assert!(
                g_err <= 1e-3,
                "criterion 10: FAIL {label} {channel:?} mode {j} Γ error {g_err:.2e}"
            );
        }
    }

    // Noisy statistics: 20 seeds per pair, ≥ 95% within tolerance overall.
    let mut good = 0;
    let mut total = 0;
    for (_, channel, truth) in &pairs {
        for seed in 0..20 {
            let series = synth_spectrum(*channel, truth, &grid, 0.01, seed).unwrap();
            let fit = fit_two_lorentzians(&series, None, &FitOptions::default()).unwrap();
            let ok = fit.converged
                && (0..2).all(|j| {
                    (fit.modes[j].omega0 - truth[j].omega0).abs() / truth[j].omega0 <= 1e-3
                        && (fit.modes[j].gamma - truth[j].gamma).abs() / truth[j].gamma <= 0.02
                });
            total += 1;
            if ok {
                good += 1;
            }
        }
    }
    let rate = good as f64 / total as f64;
    let elapsed = started.elapsed();
    assert!(
        rate >= 0.95,
        "criterion 10: FAIL only {good}/{total} noisy fits within tolerance"
    );
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "criterion 10: FAIL runtime {elapsed:?}"
    );
    println!(
        "criterion 10: PASS 12/12 exact round-trips; {good}/{total} noisy fits in tolerance ({elapsed:?})"
    );
}

/// Criterion 11: every observable of the criterion-5 scan is unchanged (to
/// 1e-8 relative) when the truncation grows from 4 to 5 levels per mode.
#[test]
fn criterion_11_truncation_convergence() {
    use rayon::prelude::*;
    let antenna = table1_antenna("dl0").unwrap();
    let omega_opt = optimum_at_90(&antenna, 1e8);
    let rel = |a: f64, b: f64| {
        let m = a.abs().max(b.abs());
        if m < 1e-30 {
            0.0
        } else {
            (a - b).abs() / m
        }
    };
    let worst = (0..=180)
        .into_par_iter()
        .map(|i| {
            let em = emitter(omega_opt, i as f64, 1e8);
            let small = solve_pipeline(&antenna, &em, [4, 4], LogBase::Two).unwrap();
            let large = solve_pipeline(&antenna, &em, [5, 5], LogBase::Two).unwrap();
            [
                rel(small.e_n, large.e_n),
                rel(small.p_bell, large.p_bell),
                rel(small.p_10, large.p_10),
                rel(small.p_01, large.p_01),
                rel(small.r_total, large.r_total),
                rel(small.n_mode[0], large.n_mode[0]),
                rel(small.n_mode[1], large.n_mode[1]),
                rel(small.p_total[0], large.p_total[0]),
                rel(small.p_total[1], large.p_total[1]),
                rel(small.p_total[2], large.p_total[2]),
                rel(small.p_e, large.p_e),
                rel(small.p_g, large.p_g),
            ]
            .into_iter()
            .fold(0.0_f64, f64::max)
        })
        .reduce(|| 0.0_f64, f64::max);
    assert!(
        worst <= 1e-8,
        "criterion 11: FAIL worst relative change {worst:.3e} between [4,4] and [5,5]"
    );
    println!("criterion 11: PASS truncation change ≤ {worst:.3e} across the 181-point scan");
}
