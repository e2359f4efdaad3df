//! Liouvillian assembly, stationary state, time-domain oracle and
//! steady-state observables.
//!
//! The master equation ρ̇ = −i[H,ρ] + Σ γ(cρc† − ½{c†c,ρ}) is vectorized
//! column-major (vec(ρ)[i + d·j] = ρ_ij) into
//!
//!   L = −i(I⊗H − Hᵀ⊗I) + Σ γ (c̄⊗c − ½ I⊗c†c − ½ (c†c)ᵀ⊗I).
//!
//! The stationary state solves L·vec(ρ) = 0 with one row replaced by the
//! trace functional (right-hand side 1), factored by partial-pivot LU in the
//! real Hermitian-basis representation with compensated iterative refinement.
//! A degenerate stationary manifold is detected and reported as an error
//! rather than silently averaged over.

mod hermitian_basis;
mod rk4;

pub use rk4::evolve_rk4;

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{lu_factor, lu_solve, lu_solve_refined, LinalgError};
use crate::model::AntennaModel;
use crate::qspace::{number_operator, DensityMatrix, Operator, QspaceError, Space};
use hermitian_basis::HermitianBasis;

/// Relative threshold on the stationary residual ‖L·vec(ρ)‖_max.
pub const RESIDUAL_REL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SteadyError {
    #[error("liouvillian needs at least one dissipative channel")]
    NoChannels,
    #[error("hamiltonian is not hermitian: defect {0:.3e}")]
    NonHermitianHamiltonian(f64),
    #[error("channel rate {0} is negative")]
    NegativeRate(f64),
    #[error("operator dimensions do not match the hamiltonian space")]
    DimensionMismatch,
    #[error("degenerate steady-state manifold: the stationary state is not unique")]
    DegenerateSteadyState,
    #[error("stationary residual {residual:.3e} exceeds threshold {threshold:.3e}")]
    ResidualTooLarge { residual: f64, threshold: f64 },
    #[error("step size {dt:.3e} exceeds stability bound {max_allowed:.3e}")]
    StepSizeTooLarge { dt: f64, max_allowed: f64 },
    #[error("trace drift {drift:.3e} exceeded 1e-8 even after step halving")]
    TraceDriftExceeded { drift: f64 },
    #[error(transparent)]
    Qspace(#[from] QspaceError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Dense superoperator for a fixed Hamiltonian and set of collapse channels.
pub struct Liouvillian {
    space: Space,
    matrix: Array2<Complex64>,
    /// Largest |entry| of the superoperator.
    norm_max: f64,
    /// Largest of the channel rates and Hamiltonian entry magnitudes,
    /// the scale governing explicit integrator step limits.
    max_rate: f64,
}

impl Liouvillian {
    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn norm_max(&self) -> f64 {
        self.norm_max
    }

    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    /// L·vec(ρ) reshaped back into matrix form (the master-equation RHS).
    pub fn apply(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        let d = self.dim();
        let mut out = Array2::zeros((d, d));
        for ((r, c), &v) in self.matrix.indexed_iter() {
            if v == Complex64::ZERO {
                continue;
            }
            let (ri, rj) = (r % d, r / d);
            let (ci, cj) = (c % d, c / d);
            out[(ri, rj)] += v * rho[(ci, cj)];
        }
        out
    }
}

/// Nonzero entries of a dense matrix, for sparse superoperator assembly.
fn nonzeros(m: &Array2<Complex64>) -> Vec<(usize, usize, Complex64)> {
    m.indexed_iter()
        .filter(|(_, &v)| v != Complex64::ZERO)
        .map(|((i, j), &v)| (i, j, v))
        .collect()
}

/// Assemble the dense complex Liouvillian matrix.
pub fn build_liouvillian(
    h: &Operator,
    channels: &[(Operator, f64)],
) -> Result<Liouvillian, SteadyError> {
    let space = h.space();
    let d = space.dim();
    let defect = h.hermiticity_defect();
    if defect > 1e-10 * h.max_abs().max(1.0) {
        return Err(SteadyError::NonHermitianHamiltonian(defect));
    }
    let mut max_rate = h.max_abs();
    for (c, rate) in channels {
        if *rate < 0.0 {
            return Err(SteadyError::NegativeRate(*rate));
        }
        if c.space() != space {
            return Err(SteadyError::DimensionMismatch);
        }
        max_rate = max_rate.max(*rate);
    }

    let n = d * d;
    let vec_idx = |i: usize, j: usize| i + d * j;
    let mut l: Array2<Complex64> = Array2::zeros((n, n));

    // −i(Hρ − ρH): for S(ρ) = AρB, S[(i,j),(k,l)] = A[i,k]·B[l,j].
    let minus_i = -Complex64::I;
    for (i, k, v) in nonzeros(h.entries()) {
        for j in 0..d {
            l[(vec_idx(i, j), vec_idx(k, j))] += minus_i * v;
        }
    }
    for (lrow, j, v) in nonzeros(h.entries()) {
        for i in 0..d {
            l[(vec_idx(i, j), vec_idx(i, lrow))] += Complex64::I * v;
        }
    }

    for (c, rate) in channels {
        let g = Complex64::new(*rate, 0.0);
        let c_nnz = nonzeros(c.entries());
        let cdag = c.dagger();
        let cdc = cdag.dot(c).map_err(QspaceError::from)?;
        // γ cρc†: A = c, B = c† with B[l,j] = conj(c[j,l]).
        for &(i, k, v) in &c_nnz {
            for &(j, lcol, w) in &c_nnz {
                l[(vec_idx(i, j), vec_idx(k, lcol))] += g * v * w.conj();
            }
        }
        // −γ/2 {c†c, ρ}.
        let half = Complex64::new(0.5 * rate, 0.0);
        for (i, k, v) in nonzeros(cdc.entries()) {
            for j in 0..d {
                l[(vec_idx(i, j), vec_idx(k, j))] -= half * v;
            }
        }
        for (lrow, j, v) in nonzeros(cdc.entries()) {
            for i in 0..d {
                l[(vec_idx(i, j), vec_idx(i, lrow))] -= half * v;
            }
        }
    }

    let norm_max = l.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(Liouvillian {
        space,
        matrix: l,
        norm_max,
        max_rate,
    })
}

/// Outcome of the stationary solve.
pub struct SteadyResult {
    pub rho: DensityMatrix,
    /// ‖L·vec(ρ)‖_max excluding the replaced trace row.
    pub residual: f64,
    /// Basic named observables recorded at solve time.
    pub observables: BTreeMap<String, f64>,
}

/// Solve 0 = L·vec(ρ) with tr ρ = 1.
pub fn solve_steady(l: &Liouvillian) -> Result<SteadyResult, SteadyError> {
    if l.max_rate == 0.0 || l.matrix.iter().all(|z| *z == Complex64::ZERO) {
        return Err(SteadyError::NoChannels);
    }
    let d = l.dim();
    let n = d * d;
    let basis = HermitianBasis::new(d);
    let mut lr = basis.real_superoperator(&l.matrix);

    // Normalize the scale so pivot thresholds are dimensionless.
    let scale = lr.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(SteadyError::NoChannels);
    }
    let inv_scale = 1.0 / scale;
    lr.iter_mut().for_each(|x| *x *= inv_scale);

    // Replace the first diagonal-coordinate row with the trace functional.
    for j in 0..n {
        lr[j] = if j < d { 1.0 } else { 0.0 };
    }
    let mut b = vec![0.0; n];
    b[0] = 1.0;

    let factors = lu_factor(n, lr.clone());
    let near_singular = factors.smallest_pivot <= 1e-12 * factors.scale.max(f64::MIN_POSITIVE);

    let x = if near_singular {
        steady_by_inverse_iteration(&basis, &l.matrix, scale)?
    } else {
        lu_solve_refined(&factors, &lr, &b, 2)
    };

    finish_steady(l, &basis, x)
}

/// Normalize coordinates to unit trace and package the result.
fn finish_steady(
    l: &Liouvillian,
    basis: &HermitianBasis,
    mut x: Vec<f64>,
) -> Result<SteadyResult, SteadyError> {
    let _d = l.dim();
    let tr = basis.trace(&x);
    if tr.abs() < 1e-300 {
        return Err(SteadyError::DegenerateSteadyState);
    }
    let inv = 1.0 / tr;
    x.iter_mut().for_each(|v| *v *= inv);
    let rho_m = basis.from_real(&x);

    // Residual against the complex superoperator, skipping the row that was
    // replaced by the trace functional (vec index of (0,0)).
    let rhs = l.apply(&rho_m);
    let mut residual = 0.0_f64;
    for ((i, j), v) in rhs.indexed_iter() {
        if i == 0 && j == 0 {
            continue;
        }
        residual = residual.max(v.norm());
    }
    let threshold = RESIDUAL_REL_TOL * l.norm_max.max(1.0);
    if residual > threshold {
        return Err(SteadyError::ResidualTooLarge {
            residual,
            threshold,
        });
    }

    let rho = DensityMatrix::new(Operator::new(rho_m, l.space())?)?;
    let mut observables = BTreeMap::new();
    if let Space::Full(space) = l.space() {
        let mut p_e = 0.0;
        for n1 in 0..space.mode_levels()[0] {
            for n2 in 0..space.mode_levels()[1] {
                p_e += rho.entries()[(space.index(n1, n2, 1), space.index(n1, n2, 1))].re;
            }
        }
        observables.insert("p_e".into(), p_e);
        observables.insert("p_g".into(), 1.0 - p_e);
        for mode in 1..=2usize {
            let n_op = number_operator(&space, mode)?;
            observables.insert(format!("n{mode}"), rho.expectation(&n_op)?);
        }
    }
    Ok(SteadyResult {
        rho,
        residual,
        observables,
    })
}

/// Fallback for a near-singular trace-replaced system: shifted inverse
/// iteration extracts a stationary direction; two independent starts landing
/// on different directions, or a traceless direction, mean the stationary
/// manifold is degenerate.
fn steady_by_inverse_iteration(
    basis: &HermitianBasis,
    lmat: &Array2<Complex64>,
    scale: f64,
) -> Result<Vec<f64>, SteadyError> {
    let n = basis.len();
    let mut lr = basis.real_superoperator(lmat);
    let inv_scale = 1.0 / scale;
    lr.iter_mut().for_each(|x| *x *= inv_scale);
    // Small shift keeps the factorization regular while the eigenvalue
    // nearest the shift is still the stationary one.
    let sigma = 1e-10;
    for i in 0..n {
        lr[i * n + i] += sigma;
    }
    let factors = lu_factor(n, lr);
    if factors.smallest_pivot <= 1e-14 * factors.scale.max(f64::MIN_POSITIVE) {
        return Err(SteadyError::DegenerateSteadyState);
    }

    let mut converged: Vec<Vec<f64>> = Vec::new();
    for seed in [11u64, 1234u64] {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..60 {
            let y = lu_solve(&factors, &x);
            let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            x = y.into_iter().map(|v| v / norm).collect();
        }
        converged.push(x);
    }
    let dot: f64 = converged[0]
        .iter()
        .zip(&converged[1])
        .map(|(a, b)| a * b)
        .sum();
    if dot.abs() < 1.0 - 1e-8 {
        return Err(SteadyError::DegenerateSteadyState);
    }
    let x = converged.swap_remove(0);
    if basis.trace(&x).abs() < 1e-8 {
        return Err(SteadyError::DegenerateSteadyState);
    }
    Ok(x)
}

/// Photon emission rate r = Σ_j Γ^scat_j ⟨a_j†a_j⟩ and its per-mode parts.
pub struct EmissionRate {
    pub total: f64,
    pub per_mode: [f64; 2],
}

pub fn emission_rate(
    result: &SteadyResult,
    antenna: &AntennaModel,
) -> Result<EmissionRate, SteadyError> {
    let Space::Full(space) = result.rho.space() else {
        return Err(SteadyError::DimensionMismatch);
    };
    let mut per_mode = [0.0; 2];
    for j in 0..2 {
        let n_op = number_operator(&space, j + 1)?;
        per_mode[j] = antenna.modes[j].gamma_scat * result.rho.expectation(&n_op)?;
    }
    Ok(EmissionRate {
        total: per_mode[0] + per_mode[1],
        per_mode,
    })
}

/// Mean photon numbers per mode and the distribution p(n) of the total
/// photon number n = n₁+n₂ over 0..=N_max1+N_max2.
pub struct PhotonStatistics {
    pub n_mean: [f64; 2],
    pub p_total: Vec<f64>,
}

pub fn photon_statistics(result: &SteadyResult) -> Result<PhotonStatistics, SteadyError> {
    let Space::Full(space) = result.rho.space() else {
        return Err(SteadyError::DimensionMismatch);
    };
    let [l1, l2] = space.mode_levels();
    let mut n_mean = [0.0; 2];
    for j in 0..2 {
        let n_op = number_operator(&space, j + 1)?;
        n_mean[j] = result.rho.expectation(&n_op)?;
    }
    let mut p_total = vec![0.0; l1 + l2 - 1];
    for n1 in 0..l1 {
        for n2 in 0..l2 {
            for s in 0..2 {
                let idx = space.index(n1, n2, s);
                p_total[n1 + n2] += result.rho.entries()[(idx, idx)].re;
            }
        }
    }
    Ok(PhotonStatistics { n_mean, p_total })
}
