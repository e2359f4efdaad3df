//! Operator algebra on the truncated composite space mode1 ⊗ mode2 ⊗ emitter.
//!
//! Factor ordering is fixed: mode 1 is the most significant tensor factor,
//! the two-level emitter the least. A composite basis state |n₁, n₂, s⟩ sits
//! at index (n₁·L₂ + n₂)·2 + s where L₂ is the Fock truncation of mode 2.
//! Photonic-only objects (after tracing out the emitter) live on the reduced
//! space mode1 ⊗ mode2 with index n₁·L₂ + n₂.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{hermitian_eigenvalues_ascending, LinalgError};

/// Max |ρ − ρ†| element allowed in a density matrix.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// |tr ρ − 1| allowed in a density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue allowed in a density matrix.
pub const PSD_TOL: f64 = -1e-9;

#[derive(Debug, Error)]
pub enum QspaceError {
    #[error("mode truncation must keep at least 2 Fock levels, got {0}")]
    InvalidLevels(usize),
    #[error("mode index must be 1 or 2, got {0}")]
    InvalidModeIndex(usize),
    #[error("operator dimension {got} does not match space dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("operators live on different spaces")]
    SpaceMismatch,
    #[error("expected an operator on the {expected} space")]
    WrongSpaceKind { expected: &'static str },
    #[error("matrix is not hermitian: max |A - A†| element = {0:.3e}")]
    NotHermitian(f64),
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The composite Hilbert space: two truncated bosonic modes and the emitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceDescriptor {
    mode_levels: [usize; 2],
    emitter_levels: usize,
}

impl SpaceDescriptor {
    /// `mode_levels[j]` is the number of retained Fock levels of mode j+1,
    /// i.e. photon numbers 0..=N_max with N_max = mode_levels[j] − 1.
    pub fn new(mode_levels: [usize; 2]) -> Result<Self, QspaceError> {
        for &l in &mode_levels {
            if l < 2 {
                return Err(QspaceError::InvalidLevels(l));
            }
        }
        Ok(Self {
            mode_levels,
            emitter_levels: 2,
        })
    }

    /// Default truncation: 4 levels per mode (photon numbers 0..3).
    pub fn default_truncation() -> Self {
        Self::new([4, 4]).expect("static truncation is valid")
    }

    pub fn mode_levels(&self) -> [usize; 2] {
        self.mode_levels
    }

    pub fn emitter_levels(&self) -> usize {
        self.emitter_levels
    }

    pub fn dim(&self) -> usize {
        self.mode_levels[0] * self.mode_levels[1] * self.emitter_levels
    }

    /// Flat index of |n₁, n₂, s⟩.
    pub fn index(&self, n1: usize, n2: usize, s: usize) -> usize {
        debug_assert!(n1 < self.mode_levels[0] && n2 < self.mode_levels[1] && s < 2);
        (n1 * self.mode_levels[1] + n2) * self.emitter_levels + s
    }

    pub fn photon_space(&self) -> PhotonSpace {
        PhotonSpace {
            mode_levels: self.mode_levels,
        }
    }
}

/// The reduced two-mode photonic space left after tracing out the emitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhotonSpace {
    mode_levels: [usize; 2],
}

impl PhotonSpace {
    pub fn new(mode_levels: [usize; 2]) -> Result<Self, QspaceError> {
        for &l in &mode_levels {
            if l < 2 {
                return Err(QspaceError::InvalidLevels(l));
            }
        }
        Ok(Self { mode_levels })
    }

    pub fn mode_levels(&self) -> [usize; 2] {
        self.mode_levels
    }

    pub fn dim(&self) -> usize {
        self.mode_levels[0] * self.mode_levels[1]
    }

    /// Flat index of |n₁, n₂⟩.
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        debug_assert!(n1 < self.mode_levels[0] && n2 < self.mode_levels[1]);
        n1 * self.mode_levels[1] + n2
    }
}

/// Which space a dense operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Full(SpaceDescriptor),
    Photonic(PhotonSpace),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Full(s) => s.dim(),
            Space::Photonic(p) => p.dim(),
        }
    }
}

/// Dense complex matrix tied to a space.
#[derive(Debug, Clone)]
pub struct Operator {
    entries: Array2<Complex64>,
    space: Space,
}

impl Operator {
    pub fn new(entries: Array2<Complex64>, space: Space) -> Result<Self, QspaceError> {
        if entries.nrows() != entries.ncols() || entries.nrows() != space.dim() {
            return Err(QspaceError::DimensionMismatch {
                got: entries.nrows(),
                want: space.dim(),
            });
        }
        Ok(Self { entries, space })
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.dim();
        Self {
            entries: Array2::zeros((d, d)),
            space,
        }
    }

    pub fn identity(space: Space) -> Self {
        Self {
            entries: Array2::eye(space.dim()),
            space,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.entries
    }

    pub fn into_entries(self) -> Array2<Complex64> {
        self.entries
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            entries: self.entries.t().mapv(|z| z.conj()),
            space: self.space,
        }
    }

    pub fn dot(&self, rhs: &Self) -> Result<Self, QspaceError> {
        if self.space != rhs.space {
            return Err(QspaceError::SpaceMismatch);
        }
        Ok(Self {
            entries: self.entries.dot(&rhs.entries),
            space: self.space,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            entries: self.entries.mapv(|z| z * factor),
            space: self.space,
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, QspaceError> {
        if self.space != rhs.space {
            return Err(QspaceError::SpaceMismatch);
        }
        Ok(Self {
            entries: &self.entries + &rhs.entries,
            space: self.space,
        })
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.diag().sum()
    }

    /// Largest |A[i,j] − conj(A[j,i])|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// All real eigenvalues of a Hermitian operator, ascending.
pub fn hermitian_eigenvalues(m: &Operator) -> Result<Vec<f64>, QspaceError> {
    let defect = m.hermiticity_defect();
    if defect > HERMITICITY_TOL * m.max_abs().max(1.0) {
        return Err(QspaceError::NotHermitian(defect));
    }
    Ok(hermitian_eigenvalues_ascending(m.entries())?)
}

/// Trace norm Σ|λ| of a Hermitian operator.
pub fn trace_norm(m: &Operator) -> Result<f64, QspaceError> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|v| v.abs()).sum())
}

/// Single-mode annihilation matrix ⟨n−1|a|n⟩ = √n on `levels` Fock states.
fn mode_annihilation_matrix(levels: usize) -> Array2<Complex64> {
    let mut a = Array2::zeros((levels, levels));
    for n in 1..levels {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Embed a single-mode matrix into the full space on mode `mode_index` (1|2).
pub fn embed_mode(
    space: &SpaceDescriptor,
    mode_index: usize,
    m: &Array2<Complex64>,
) -> Result<Operator, QspaceError> {
    if mode_index != 1 && mode_index != 2 {
        return Err(QspaceError::InvalidModeIndex(mode_index));
    }
    let levels = space.mode_levels()[mode_index - 1];
    if m.nrows() != levels || m.ncols() != levels {
        return Err(QspaceError::DimensionMismatch {
            got: m.nrows(),
            want: levels,
        });
    }
    let [l1, l2] = space.mode_levels();
    let d = space.dim();
    let mut out = Array2::zeros((d, d));
    for ((r, c), &v) in m.indexed_iter() {
        if v == Complex64::ZERO {
            continue;
        }
        match mode_index {
            1 => {
                for n2 in 0..l2 {
                    for s in 0..2 {
                        out[(space.index(r, n2, s), space.index(c, n2, s))] = v;
                    }
                }
            }
            _ => {
                for n1 in 0..l1 {
                    for s in 0..2 {
                        out[(space.index(n1, r, s), space.index(n1, c, s))] = v;
                    }
                }
            }
        }
    }
    Operator::new(out, Space::Full(*space))
}

/// Embed a 2×2 emitter matrix into the full space.
pub fn embed_emitter(space: &SpaceDescriptor, m: &Array2<Complex64>) -> Result<Operator, QspaceError> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(QspaceError::DimensionMismatch {
            got: m.nrows(),
            want: 2,
        });
    }
    let [l1, l2] = space.mode_levels();
    let d = space.dim();
    let mut out = Array2::zeros((d, d));
    for ((r, c), &v) in m.indexed_iter() {
        if v == Complex64::ZERO {
            continue;
        }
        for n1 in 0..l1 {
            for n2 in 0..l2 {
                out[(space.index(n1, n2, r), space.index(n1, n2, c))] = v;
            }
        }
    }
    Operator::new(out, Space::Full(*space))
}

/// Annihilation operator a_j of mode `mode_index` embedded in the full space.
pub fn annihilation(space: &SpaceDescriptor, mode_index: usize) -> Result<Operator, QspaceError> {
    if mode_index != 1 && mode_index != 2 {
        return Err(QspaceError::InvalidModeIndex(mode_index));
    }
    let levels = space.mode_levels()[mode_index - 1];
    embed_mode(space, mode_index, &mode_annihilation_matrix(levels))
}

/// Number operator a_j†a_j embedded in the full space. Built as an exact
/// integer diagonal rather than the product a†·a, so excitation-conservation
/// identities hold to the last bit.
pub fn number_operator(space: &SpaceDescriptor, mode_index: usize) -> Result<Operator, QspaceError> {
    if mode_index != 1 && mode_index != 2 {
        return Err(QspaceError::InvalidModeIndex(mode_index));
    }
    let levels = space.mode_levels()[mode_index - 1];
    let mut m = Array2::zeros((levels, levels));
    for n in 0..levels {
        m[(n, n)] = Complex64::new(n as f64, 0.0);
    }
    embed_mode(space, mode_index, &m)
}

/// Emitter lowering operator σ₋ = |g⟩⟨e| embedded in the full space.
/// Emitter basis: index 0 = |g⟩, index 1 = |e⟩.
pub fn sigma_minus(space: &SpaceDescriptor) -> Result<Operator, QspaceError> {
    let mut m = Array2::zeros((2, 2));
    m[(0, 1)] = Complex64::ONE;
    embed_emitter(space, &m)
}

/// σ₊ = σ₋†.
pub fn sigma_plus(space: &SpaceDescriptor) -> Result<Operator, QspaceError> {
    Ok(sigma_minus(space)?.dagger())
}

/// Excited-state projector σ₊σ₋ = |e⟩⟨e| embedded in the full space.
pub fn excited_projector(space: &SpaceDescriptor) -> Result<Operator, QspaceError> {
    let mut m = Array2::zeros((2, 2));
    m[(1, 1)] = Complex64::ONE;
    embed_emitter(space, &m)
}

/// Validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self, QspaceError> {
        let h = op.hermiticity_defect();
        if h > HERMITICITY_TOL {
            return Err(QspaceError::NotDensityMatrix(format!(
                "hermiticity defect {h:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QspaceError::NotDensityMatrix(format!(
                "trace {tr} is not 1 within {TRACE_TOL:.0e}"
            )));
        }
        let min_eig = hermitian_eigenvalues_ascending(op.entries())?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < PSD_TOL {
            return Err(QspaceError::NotDensityMatrix(format!(
                "minimum eigenvalue {min_eig:.3e} below {PSD_TOL:.0e}"
            )));
        }
        Ok(Self { op })
    }

    /// Pure state |ψ⟩⟨ψ| from an unnormalized amplitude vector.
    pub fn pure(amplitudes: &[Complex64], space: Space) -> Result<Self, QspaceError> {
        let d = space.dim();
        if amplitudes.len() != d {
            return Err(QspaceError::DimensionMismatch {
                got: amplitudes.len(),
                want: d,
            });
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = amplitudes[i] * amplitudes[j].conj() / norm;
            }
        }
        Self::new(Operator::new(m, space)?)
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        self.op.entries()
    }

    pub fn space(&self) -> Space {
        self.op.space()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// ⟨A⟩ = tr(ρA), real part (imaginary part is roundoff for Hermitian A).
    pub fn expectation(&self, a: &Operator) -> Result<f64, QspaceError> {
        if a.space() != self.space() {
            return Err(QspaceError::SpaceMismatch);
        }
        let mut acc = Complex64::ZERO;
        let d = self.dim();
        let rho = self.entries();
        let m = a.entries();
        for i in 0..d {
            for k in 0..d {
                acc += rho[(i, k)] * m[(k, i)];
            }
        }
        Ok(acc.re)
    }
}

/// ρ_ph = Tr_qe(ρ): trace out the emitter, leaving the two-mode state.
pub fn partial_trace_emitter(rho: &DensityMatrix) -> Result<DensityMatrix, QspaceError> {
    let Space::Full(space) = rho.space() else {
        return Err(QspaceError::WrongSpaceKind { expected: "full" });
    };
    let ph = space.photon_space();
    let d = ph.dim();
    let mut out = Array2::zeros((d, d));
    let [l1, l2] = space.mode_levels();
    let r = rho.entries();
    for n1 in 0..l1 {
        for n2 in 0..l2 {
            for m1 in 0..l1 {
                for m2 in 0..l2 {
                    let mut acc = Complex64::ZERO;
                    for s in 0..2 {
                        acc += r[(space.index(n1, n2, s), space.index(m1, m2, s))];
                    }
                    out[(ph.index(n1, n2), ph.index(m1, m2))] = acc;
                }
            }
        }
    }
    DensityMatrix::new(Operator::new(out, Space::Photonic(ph))?)
}

/// Partial transpose in mode 2 of a photonic state. Hermitian and unit trace
/// but in general not positive, so it is returned as a plain operator.
pub fn partial_transpose_mode2(rho: &DensityMatrix) -> Result<Operator, QspaceError> {
    let Space::Photonic(ph) = rho.space() else {
        return Err(QspaceError::WrongSpaceKind {
            expected: "photonic",
        });
    };
    let [l1, l2] = ph.mode_levels();
    let d = ph.dim();
    let r = rho.entries();
    let mut out = Array2::zeros((d, d));
    for n1 in 0..l1 {
        for n2 in 0..l2 {
            for m1 in 0..l1 {
                for m2 in 0..l2 {
                    // (ρ^T₂)[(n₁n₂),(m₁m₂)] = ρ[(n₁m₂),(m₁n₂)]
                    out[(ph.index(n1, n2), ph.index(m1, m2))] =
                        r[(ph.index(n1, m2), ph.index(m1, n2))];
                }
            }
        }
    }
    Operator::new(out, Space::Photonic(ph))
}
