//! Row-major f64 matrix multiply, parallel over row blocks.
//!
//! The kernel streams one B row across a small chunk of C rows so the C rows
//! stay in L1 while the B row is reused; columns are tiled for wide matrices.
//! With FMA autovectorization this sustains a few Gflop/s per core, which is
//! what the Liouvillian powering and blocked LU need.

use rayon::prelude::*;

/// Rows of C processed per task; keeps `ROWS` C tiles plus one B tile in L1.
const ROW_CHUNK: usize = 4;
/// Column tile width (f64 elements).
const COL_TILE: usize = 1024;
/// Inner-dimension tile.
const K_TILE: usize = 512;

/// C = A·B. `a` is m×k, `b` is k×n, `c` is m×n, all contiguous row-major.
pub fn gemm(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    c.fill(0.0);
    gemm_acc(m, k, n, 1.0, a, b, c);
}

/// C += alpha·A·B with the same layout conventions as [`gemm`].
pub fn gemm_acc(m: usize, k: usize, n: usize, alpha: f64, a: &[f64], b: &[f64], c: &mut [f64]) {
    assert_eq!(a.len(), m * k, "A shape mismatch");
    assert_eq!(b.len(), k * n, "B shape mismatch");
    assert_eq!(c.len(), m * n, "C shape mismatch");
    if m == 0 || n == 0 || k == 0 {
        return;
    }

    let serial = m * n * k < 64 * 64 * 64;
    if serial {
        for (c_chunk, a_chunk) in c.chunks_mut(ROW_CHUNK * n).zip(a.chunks(ROW_CHUNK * k)) {
            chunk_kernel(k, n, alpha, a_chunk, b, c_chunk);
        }
    } else {
        c.par_chunks_mut(ROW_CHUNK * n)
            .zip(a.par_chunks(ROW_CHUNK * k))
            .for_each(|(c_chunk, a_chunk)| chunk_kernel(k, n, alpha, a_chunk, b, c_chunk));
    }
}

/// C_chunk += alpha·A_chunk·B for up to `ROW_CHUNK` rows.
fn chunk_kernel(k: usize, n: usize, alpha: f64, a_chunk: &[f64], b: &[f64], c_chunk: &mut [f64]) {
    let rows = c_chunk.len() / n;
    for jb in (0..n).step_by(COL_TILE) {
        let jw = COL_TILE.min(n - jb);
        for kb in (0..k).step_by(K_TILE) {
            let kw = K_TILE.min(k - kb);
            for kk in kb..kb + kw {
                let b_row = &b[kk * n + jb..kk * n + jb + jw];
                for r in 0..rows {
                    let coef = alpha * a_chunk[r * k + kk];
                    if coef == 0.0 {
                        continue;
                    }
                    let c_row = &mut c_chunk[r * n + jb..r * n + jb + jw];
                    for (cv, bv) in c_row.iter_mut().zip(b_row) {
                        *cv = bv.mul_add(coef, *cv);
                    }
                }
            }
        }
    }
}
