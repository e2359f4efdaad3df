//! Real representation of Hermitian-preserving superoperators.
//!
//! The Lindblad flow maps Hermitian matrices to Hermitian matrices, so on the
//! real vector space spanned by the orthonormal Hermitian basis
//!
//! * D(i)   = |i⟩⟨i|,
//! * S(i,j) = (|i⟩⟨j| + |j⟩⟨i|)/√2          for i < j,
//! * A(i,j) = i(|i⟩⟨j| − |j⟩⟨i|)/√2         for i < j,
//!
//! the d²×d² complex superoperator restricts to a d²×d² *real* matrix. The
//! heavy stationary solves and RK4 powering all run in this representation,
//! which quarters the flop count and keeps iterates exactly Hermitian.
//!
//! Layout: coordinates 0..d are the diagonals D(i); the pair (i,j), i<j, in
//! row-major order occupies slots d+2p (symmetric) and d+2p+1 (antisymmetric).

use ndarray::Array2;
use num_complex::Complex64;

pub struct HermitianBasis {
    d: usize,
    /// (i, j) with i < j for each pair index.
    pairs: Vec<(usize, usize)>,
}

impl HermitianBasis {
    pub fn new(d: usize) -> Self {
        let mut pairs = Vec::with_capacity(d * (d - 1) / 2);
        for i in 0..d {
            for j in i + 1..d {
                pairs.push((i, j));
            }
        }
        Self { d, pairs }
    }

    /// Dimension of the real coordinate space (= d²).
    pub fn len(&self) -> usize {
        self.d * self.d
    }

    fn pair_slot(&self, p: usize) -> (usize, usize) {
        (self.d + 2 * p, self.d + 2 * p + 1)
    }

    /// Real coordinates of a Hermitian matrix.
    pub fn to_real(&self, rho: &Array2<Complex64>) -> Vec<f64> {
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut x = vec![0.0; self.len()];
        for i in 0..self.d {
            x[i] = rho[(i, i)].re;
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let (s, a) = self.pair_slot(p);
            x[s] = sqrt2 * rho[(i, j)].re;
            x[a] = sqrt2 * rho[(i, j)].im;
        }
        x
    }

    /// Hermitian matrix from real coordinates.
    pub fn from_real(&self, x: &[f64]) -> Array2<Complex64> {
        let inv_sqrt2 = 1.0 / std::f64::consts::SQRT_2;
        let mut rho = Array2::zeros((self.d, self.d));
        for i in 0..self.d {
            rho[(i, i)] = Complex64::new(x[i], 0.0);
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let (s, a) = self.pair_slot(p);
            let z = Complex64::new(x[s] * inv_sqrt2, x[a] * inv_sqrt2);
            rho[(i, j)] = z;
            rho[(j, i)] = z.conj();
        }
        rho
    }

    /// Trace of the represented matrix.
    pub fn trace(&self, x: &[f64]) -> f64 {
        x[..self.d].iter().sum()
    }

    /// Real matrix of a Hermitian-preserving superoperator given as a dense
    /// complex matrix over column-major vectorization vec(ρ)[i + d·j] = ρ_ij.
    ///
    /// Columns are assembled by pushing each basis element through the sparse
    /// nonzeros of `lmat`, so the cost is O(nnz · d²) rather than O(d⁶).
    pub fn real_superoperator(&self, lmat: &Array2<Complex64>) -> Vec<f64> {
        let d = self.d;
        let n = self.len();
        let vec_idx = |i: usize, j: usize| i + d * j;

        // Sparse columns of the complex superoperator.
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
        for ((r, c), &v) in lmat.indexed_iter() {
            if v != Complex64::ZERO {
                cols[c].push((r, v));
            }
        }

        // Reverse lookup: vec index -> (i, j).
        let unvec = |v: usize| (v % d, v / d);
        // Pair index for i < j.
        let pair_of = {
            let mut map = vec![usize::MAX; d * d];
            for (p, &(i, j)) in self.pairs.iter().enumerate() {
                map[i * d + j] = p;
            }
            map
        };

        let inv_sqrt2 = 1.0 / std::f64::consts::SQRT_2;
        let mut out = vec![0.0; n * n];
        let mut scratch: Vec<Complex64> = vec![Complex64::ZERO; n];
        let mut touched: Vec<usize> = Vec::new();

        let add_col = |scratch: &mut Vec<Complex64>,
                           touched: &mut Vec<usize>,
                           col: usize,
                           w: Complex64| {
            for &(r, v) in &cols[col] {
                if scratch[r] == Complex64::ZERO {
                    touched.push(r);
                }
                scratch[r] += w * v;
            }
        };

        for a in 0..n {
            touched.clear();
            // Image of basis element a under the superoperator, sparse.
            if a < d {
                // D(i): single vec entry at (i, i).
                add_col(&mut scratch, &mut touched, vec_idx(a, a), Complex64::ONE);
            } else {
                let p = (a - d) / 2;
                let (i, j) = self.pairs[p];
                if (a - d) % 2 == 0 {
                    let w = Complex64::new(inv_sqrt2, 0.0);
                    add_col(&mut scratch, &mut touched, vec_idx(i, j), w);
                    add_col(&mut scratch, &mut touched, vec_idx(j, i), w);
                } else {
                    let w = Complex64::new(0.0, inv_sqrt2);
                    add_col(&mut scratch, &mut touched, vec_idx(i, j), w);
                    add_col(&mut scratch, &mut touched, vec_idx(j, i), -w);
                }
            }
            // Project the image onto the basis rows: r_b = Re tr(E_b·Y).
            // Both triangles contribute half of the pair coordinates, which
            // is exact for any Y and projects out the anti-Hermitian part
            // roundoff may have introduced.
            for &t in touched.iter() {
                let (i, j) = unvec(t);
                let y = scratch[t];
                if i == j {
                    out[i * n + a] += y.re;
                } else {
                    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                    let p = pair_of[lo * d + hi];
                    let (s_row, a_row) = self.pair_slot(p);
                    out[s_row * n + a] += inv_sqrt2 * y.re;
                    out[a_row * n + a] += if i < j {
                        inv_sqrt2 * y.im
                    } else {
                        -inv_sqrt2 * y.im
                    };
                }
            }
            for &t in touched.iter() {
                scratch[t] = Complex64::ZERO;
            }
        }
        out
    }
}
