//! The full observable pipeline: steady state → emission rate and photon
//! statistics → trace out the emitter → vacuum projection → far-field
//! transform → entanglement diagnostics. Also hosts the golden-section
//! search for the optimal emitter frequency.

use thiserror::Error;

use crate::entangle::{
    bell_overlap, far_field_transform, log_negativity, project_out_vacuum, EntangleError, LogBase,
};
use crate::model::{
    build_collapse_channels, build_hamiltonian, AntennaModel, EmitterModel, ModelError,
};
use crate::qspace::{partial_trace_emitter, QspaceError, SpaceDescriptor};
use crate::steady::{
    build_liouvillian, emission_rate, photon_statistics, solve_steady, SteadyError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Qspace(#[from] QspaceError),
    #[error(transparent)]
    Steady(#[from] SteadyError),
    #[error(transparent)]
    Entangle(#[from] EntangleError),
}

/// One row of steady-state observables for a single parameter point.
#[derive(Debug, Clone)]
pub struct ObservableRow {
    /// Total photon emission rate r = Σ_j Γ^scat_j⟨n_j⟩, 1/s.
    pub r_total: f64,
    pub r_mode: [f64; 2],
    /// Mean photon numbers ⟨a_j†a_j⟩.
    pub n_mode: [f64; 2],
    /// Total-photon-number distribution p(0), p(1), ..., p(2·N_max).
    pub p_total: Vec<f64>,
    /// Logarithmic negativity of the far-field state.
    pub e_n: f64,
    pub p_bell: f64,
    pub phi_star: f64,
    pub p_10: f64,
    pub p_01: f64,
    /// Emitter populations.
    pub p_e: f64,
    pub p_g: f64,
    /// Stationary residual of the solve.
    pub residual: f64,
    /// Weight outside the single-photon block dropped by the far-field map.
    pub discarded_weight: f64,
    /// True when the stationary state carried no photons at all (e.g. P = 0):
    /// entanglement observables are reported as zero.
    pub vacuum: bool,
}

/// Solve one configuration end to end.
pub fn solve_pipeline(
    antenna: &AntennaModel,
    emitter: &EmitterModel,
    mode_levels: [usize; 2],
    log_base: LogBase,
) -> Result<ObservableRow, PipelineError> {
    let space = SpaceDescriptor::new(mode_levels)?;
    let h = build_hamiltonian(&space, antenna, emitter)?;
    let channels = build_collapse_channels(&space, antenna, emitter)?;
    let liouvillian = build_liouvillian(&h, &channels)?;
    let result = solve_steady(&liouvillian)?;

    let rate = emission_rate(&result, antenna)?;
    let stats = photon_statistics(&result)?;
    let p_e = result.observables["p_e"];
    let p_g = result.observables["p_g"];

    let rho_ph = partial_trace_emitter(&result.rho)?;
    let projected = match project_out_vacuum(&rho_ph) {
        Ok(p) => p,
        Err(EntangleError::VacuumState(_)) => {
            return Ok(ObservableRow {
                r_total: rate.total,
                r_mode: rate.per_mode,
                n_mode: stats.n_mean,
                p_total: stats.p_total,
                e_n: 0.0,
                p_bell: 0.0,
                phi_star: 0.0,
                p_10: 0.0,
                p_01: 0.0,
                p_e,
                p_g,
                residual: result.residual,
                discarded_weight: 0.0,
                vacuum: true,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let eta = [antenna.modes[0].efficiency(), antenna.modes[1].efficiency()];
    let ff = far_field_transform(&projected, eta)?;
    let e_n = log_negativity(&ff, log_base);
    let bell = bell_overlap(&ff);

    Ok(ObservableRow {
        r_total: rate.total,
        r_mode: rate.per_mode,
        n_mode: stats.n_mean,
        p_total: stats.p_total,
        e_n,
        p_bell: bell.p_bell,
        phi_star: bell.phi_star,
        p_10: bell.p_10,
        p_01: bell.p_01,
        p_e,
        p_g,
        residual: result.residual,
        discarded_weight: ff.discarded_weight(),
        vacuum: false,
    })
}

/// Result of the emitter-frequency optimization.
#[derive(Debug, Clone, Copy)]
pub struct OptimumReport {
    pub omega_qe_opt: f64,
    pub e_n_max: f64,
    /// ω_qe_opt − (ω₁+ω₂)/2.
    pub midpoint_offset: f64,
    pub deviates_from_midpoint: bool,
}

/// Golden-section maximization of E_N over
/// ω_qe ∈ [min(ω_j) − Γ_max, max(ω_j) + Γ_max] to an absolute tolerance of
/// 1e-4·(ω₂−ω₁). The emitter's pump, orientation and dephasing are taken
/// from `emitter`; only its transition frequency is scanned.
pub fn find_optimum(
    antenna: &AntennaModel,
    emitter: &EmitterModel,
    mode_levels: [usize; 2],
    log_base: LogBase,
) -> Result<OptimumReport, PipelineError> {
    let omega_lo = antenna.modes[0].omega.min(antenna.modes[1].omega) - antenna.gamma_max();
    let omega_hi = antenna.modes[0].omega.max(antenna.modes[1].omega) + antenna.gamma_max();
    let span = (antenna.modes[1].omega - antenna.modes[0].omega).abs();
    let tol = 1e-4 * span;

    let eval = |omega: f64| -> Result<f64, PipelineError> {
        let mut e = *emitter;
        e.omega_qe = omega;
        Ok(solve_pipeline(antenna, &e, mode_levels, log_base)?.e_n)
    };

    // Golden-section: keep the better interior point each iteration.
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = omega_lo;
    let mut b = omega_hi;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval(x1)?;
        }
    }
    let omega_qe_opt = 0.5 * (a + b);
    let e_n_max = eval(omega_qe_opt)?;
    let midpoint_offset = omega_qe_opt - antenna.omega_midpoint();
    Ok(OptimumReport {
        omega_qe_opt,
        e_n_max,
        midpoint_offset,
        deviates_from_midpoint: midpoint_offset.abs() > tol,
    })
}

/// The dipole moment at which the bundled coupling constants are quoted.
pub const REFERENCE_DIPOLE: f64 = 6e-29;

/// Rescale an antenna's couplings for a different emitter dipole moment:
/// κ_j ∝ d through the Weisskopf-Wigner rate.
pub fn antenna_for_dipole(antenna: &AntennaModel, dipole_d: f64) -> AntennaModel {
    let mut out = antenna.clone();
    let scale = dipole_d / REFERENCE_DIPOLE;
    out.modes[0].kappa_max *= scale;
    out.modes[1].kappa_max *= scale;
    out
}
