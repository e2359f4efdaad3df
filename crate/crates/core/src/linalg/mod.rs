//! In-house dense numerical kernels.
//!
//! Everything in here is plain `f64`/`Complex64` dense linear algebra sized
//! for this problem: Hilbert-space operators are at most a few tens of rows,
//! Liouvillian superoperators reach a few thousand. The heavy kernels (gemm,
//! LU) work on real row-major buffers because the stationary solver maps the
//! Hermitian-preserving Lindblad flow onto a real representation before
//! factoring; see `steady::hermitian_basis`.

mod eigen;
mod gemm;
mod lu;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues_ascending};
pub use gemm::{gemm, gemm_acc};
pub use lu::{lu_factor, lu_solve, lu_solve_refined, LuFactors};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("singular matrix: pivot magnitude {pivot:.3e} (matrix scale {scale:.3e})")]
    Singular { pivot: f64, scale: f64 },
}
