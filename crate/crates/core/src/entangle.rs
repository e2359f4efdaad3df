//! Post-processing of the photonic state: vacuum projection, far-field
//! efficiency transform, logarithmic negativity and Bell-state overlap.
//!
//! The stationary photon occupations are tiny, so the photonic density
//! matrix is vacuum-dominated. Conditioning on a detector click removes the
//! vacuum and renormalizes; the far-field map then weights the single-photon
//! components by the mode efficiencies. Entanglement of the result is
//! quantified by E_N = log‖ρ^T₂‖ with the trace norm from the in-house
//! Hermitian eigensolver.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::qspace::{
    partial_transpose_mode2, trace_norm, DensityMatrix, Operator, PhotonSpace, QspaceError, Space,
};

/// Trace norms within 1 + this are treated as PPT (E_N clamps to zero).
const PPT_CLAMP: f64 = 1e-12;
/// E_N values below this report as exactly zero.
const EN_FLOOR: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EntangleError {
    #[error("state is (numerically) exact vacuum: non-vacuum weight {0:.3e}")]
    VacuumState(f64),
    #[error("far-field transform annihilated the state (zero trace)")]
    EmptyFarField,
    #[error("expected a state on the two-mode photonic space")]
    NotPhotonic,
    #[error(transparent)]
    Qspace(#[from] QspaceError),
}

/// Logarithm base used for the negativity; base 2 makes a Bell-like state
/// measure exactly 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Two,
    E,
    Ten,
}

impl LogBase {
    pub fn log(&self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
            LogBase::Ten => x.log10(),
        }
    }
}

/// Far-field photonic state: vacuum-free, efficiency-weighted, normalized.
#[derive(Debug, Clone)]
pub struct FarFieldState {
    rho_ff: DensityMatrix,
    eta: [f64; 2],
    /// Weight outside the single-photon block discarded by the transform.
    discarded_weight: f64,
}

impl FarFieldState {
    pub fn rho(&self) -> &DensityMatrix {
        &self.rho_ff
    }

    pub fn eta(&self) -> [f64; 2] {
        self.eta
    }

    pub fn discarded_weight(&self) -> f64 {
        self.discarded_weight
    }
}

fn photon_space_of(rho: &DensityMatrix) -> Result<PhotonSpace, EntangleError> {
    match rho.space() {
        Space::Photonic(p) => Ok(p),
        _ => Err(EntangleError::NotPhotonic),
    }
}

/// ρ̃ = N(P⊥ ρ P⊥) with P⊥ = 1 − |00⟩⟨00|: condition on at least one photon.
///
/// The sandwich zeroes the vacuum row and column (coherences to the vacuum
/// drop out, they do not renormalize into the result) and the remainder is
/// divided by its trace.
pub fn project_out_vacuum(rho_ph: &DensityMatrix) -> Result<DensityMatrix, EntangleError> {
    let ph = photon_space_of(rho_ph)?;
    let vac = ph.index(0, 0);
    let d = ph.dim();
    let weight = 1.0 - rho_ph.entries()[(vac, vac)].re;
    if weight <= 1e-300 {
        return Err(EntangleError::VacuumState(weight));
    }
    let mut m = rho_ph.entries().clone();
    for k in 0..d {
        m[(vac, k)] = Complex64::ZERO;
        m[(k, vac)] = Complex64::ZERO;
    }
    let tr: Complex64 = m.diag().sum();
    m.mapv_inplace(|z| z / tr.re);
    Ok(DensityMatrix::new(Operator::new(m, Space::Photonic(ph))?)?)
}

/// ρ_ff = N(T_η ρ̃ T_η) with T_η = √η₁|10⟩⟨10| + √η₂|01⟩⟨01|.
///
/// Populations of |10⟩ and |01⟩ are scaled by η₁ and η₂, their coherence by
/// √(η₁η₂), and every component outside the single-photon block is
/// annihilated; the weight so discarded is recorded for auditing. This is
/// the multi-photon-free limit of the exact input-output map, valid here
/// because higher photon numbers are suppressed by many orders of magnitude.
pub fn far_field_transform(
    rho_tilde: &DensityMatrix,
    eta: [f64; 2],
) -> Result<FarFieldState, EntangleError> {
    for e in eta {
        assert!(e > 0.0 && e <= 1.0, "efficiencies must lie in (0, 1]");
    }
    let ph = photon_space_of(rho_tilde)?;
    let d = ph.dim();
    let i10 = ph.index(1, 0);
    let i01 = ph.index(0, 1);
    let p10 = rho_tilde.entries()[(i10, i10)].re;
    let p01 = rho_tilde.entries()[(i01, i01)].re;
    let discarded_weight = (1.0 - p10 - p01).max(0.0);

    let coh = rho_tilde.entries()[(i10, i01)];
    let trace = eta[0] * p10 + eta[1] * p01;
    if trace <= 1e-300 {
        return Err(EntangleError::EmptyFarField);
    }
    let mut m: Array2<Complex64> = Array2::zeros((d, d));
    m[(i10, i10)] = Complex64::new(eta[0] * p10 / trace, 0.0);
    m[(i01, i01)] = Complex64::new(eta[1] * p01 / trace, 0.0);
    m[(i10, i01)] = coh * (eta[0] * eta[1]).sqrt() / trace;
    m[(i01, i10)] = m[(i10, i01)].conj();
    let rho_ff = DensityMatrix::new(Operator::new(m, Space::Photonic(ph))?)?;
    Ok(FarFieldState {
        rho_ff,
        eta,
        discarded_weight,
    })
}

/// E_N(ρ_ff) = log‖ρ_ff^T₂‖, clamped to zero at the PPT boundary.
pub fn log_negativity(state: &FarFieldState, base: LogBase) -> f64 {
    log_negativity_of(&state.rho_ff, base).expect("far-field state is a valid photonic state")
}

/// Logarithmic negativity of an arbitrary two-mode photonic state.
pub fn log_negativity_of(rho: &DensityMatrix, base: LogBase) -> Result<f64, EntangleError> {
    let pt = partial_transpose_mode2(rho)?;
    let tn = trace_norm(&pt)?;
    if tn <= 1.0 + PPT_CLAMP {
        return Ok(0.0);
    }
    let e_n = base.log(tn);
    Ok(if e_n < EN_FLOOR { 0.0 } else { e_n })
}

/// Overlap diagnostics with the single-photon Bell-like family
/// |ψ_φ⟩ = (|10⟩ + e^{iφ}|01⟩)/√2.
#[derive(Debug, Clone, Copy)]
pub struct BellOverlap {
    /// max_φ ⟨ψ_φ|ρ|ψ_φ⟩.
    pub p_bell: f64,
    /// The maximizing phase φ*.
    pub phi_star: f64,
    /// Population of the separable state |10⟩.
    pub p_10: f64,
    /// Population of the separable state |01⟩.
    pub p_01: f64,
}

/// ⟨ψ_φ|ρ|ψ_φ⟩ = (ρ₁₀,₁₀+ρ₀₁,₀₁)/2 + Re(e^{iφ}ρ₁₀,₀₁) is maximized by
/// φ* = −arg ρ₁₀,₀₁ with value (ρ₁₀,₁₀+ρ₀₁,₀₁)/2 + |ρ₁₀,₀₁|.
pub fn bell_overlap(state: &FarFieldState) -> BellOverlap {
    let ph = match state.rho_ff.space() {
        Space::Photonic(p) => p,
        _ => unreachable!("far-field states are photonic"),
    };
    let r = state.rho_ff.entries();
    let i10 = ph.index(1, 0);
    let i01 = ph.index(0, 1);
    let p_10 = r[(i10, i10)].re;
    let p_01 = r[(i01, i01)].re;
    let coh = r[(i10, i01)];
    let phi_star = if coh.norm() > 0.0 { -coh.arg() } else { 0.0 };
    BellOverlap {
        p_bell: 0.5 * (p_10 + p_01) + coh.norm(),
        phi_star,
        p_10,
        p_01,
    }
}

/// |ψ_φ⟩⟨ψ_φ| on a given photonic space, for tests and anchors.
pub fn bell_like_state(ph: PhotonSpace, phi: f64) -> DensityMatrix {
    let mut amps = vec![Complex64::ZERO; ph.dim()];
    amps[ph.index(1, 0)] = Complex64::ONE;
    amps[ph.index(0, 1)] = Complex64::from_polar(1.0, phi);
    DensityMatrix::pure(&amps, Space::Photonic(ph)).expect("bell-like state is valid")
}
