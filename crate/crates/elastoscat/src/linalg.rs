//! Dense complex linear algebra: LU with partial pivoting, iterative
//! refinement and a one-norm condition estimator.
//!
//! The boundary operators are dense complex matrices of moderate size
//! (a few thousand rows), so an in-crate factorization keeps the solve
//! path deterministic and gives direct access to transpose/adjoint
//! solves for the Hager-Higham estimator.

use num_complex::Complex64;
use rayon::prelude::*;

/// Row-major dense complex matrix.
#[derive(Clone)]
pub struct CMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CMatrix {
            n_rows,
            n_cols,
            data: vec![Complex64::ZERO; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// y = A x
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| {
                let mut acc = Complex64::ZERO;
                for (a, b) in self.row(i).iter().zip(x.iter()) {
                    acc += a * b;
                }
                acc
            })
            .collect()
    }

    /// Maximum column sum of absolute values.
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.n_cols];
        for i in 0..self.n_rows {
            for (s, a) in sums.iter_mut().zip(self.row(i)) {
                *s += a.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn scale_add(&mut self, other: &CMatrix, factor: Complex64) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += factor * b;
        }
    }

    pub fn add_identity(&mut self, factor: Complex64) {
        let n = self.n_rows.min(self.n_cols);
        for i in 0..n {
            self[(i, i)] += factor;
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n_cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n_cols + j]
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("estimated one-norm condition number {cond:.3e} exceeds guard {guard:.3e}")]
    IllConditioned { cond: f64, guard: f64 },
}

/// LU factors of a square matrix, P A = L U, plus a copy of A for
/// residual computation in iterative refinement.
pub struct LuSolver {
    n: usize,
    lu: CMatrix,
    perm: Vec<usize>,
    matrix: CMatrix,
    one_norm_a: f64,
}

impl LuSolver {
    /// Factor `a` (consumed). Rank-1 trailing updates are parallelized
    /// over rows; each row is updated sequentially, so the result does
    /// not depend on the thread count.
    pub fn factor(a: CMatrix) -> Result<Self, LinalgError> {
        assert_eq!(a.n_rows, a.n_cols, "LU needs a square matrix");
        let n = a.n_rows;
        let matrix = a.clone();
        let one_norm_a = a.one_norm();
        let mut lu = a;
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            // Partial pivot: largest magnitude in column k.
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(LinalgError::Singular { pivot: k });
            }
            if p != k {
                perm.swap(k, p);
                let (lo, hi) = lu.data.split_at_mut(p * n);
                lo[k * n..k * n + n].swap_with_slice(&mut hi[..n]);
            }

            let pivot = lu[(k, k)];
            let inv_pivot = pivot.inv();
            // Split into pivot row and trailing rows for the update.
            let (head, tail) = lu.data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            tail.par_chunks_mut(n).for_each(|row| {
                let m = row[k] * inv_pivot;
                row[k] = m;
                if m != Complex64::ZERO {
                    for (r, p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *r -= m * p;
                    }
                }
            });
        }

        Ok(LuSolver {
            n,
            lu,
            perm,
            matrix,
            one_norm_a,
        })
    }

    fn solve_factored(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        // Forward: L y = P b (unit diagonal).
        for i in 1..n {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in 0..i {
                acc -= row[j] * x[j];
            }
            x[i] = acc;
        }
        // Backward: U x = y.
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= row[j] * x[j];
            }
            x[i] = acc / row[i];
        }
        x
    }

    /// Solve A x = b with one step of iterative refinement.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let mut x = self.solve_factored(b);
        // r = b - A x, dx = A^{-1} r
        let ax = self.matrix.matvec(&x);
        let r: Vec<Complex64> = b.iter().zip(ax.iter()).map(|(bi, ai)| bi - ai).collect();
        let dx = self.solve_factored(&r);
        for (xi, di) in x.iter_mut().zip(dx.iter()) {
            *xi += di;
        }
        x
    }

    /// Relative residual |b - A x|_2 / |b|_2.
    pub fn residual_norm(&self, x: &[Complex64], b: &[Complex64]) -> f64 {
        let ax = self.matrix.matvec(x);
        let mut num = 0.0;
        let mut den = 0.0;
        for (ai, bi) in ax.iter().zip(b.iter()) {
            num += (bi - ai).norm_sqr();
            den += bi.norm_sqr();
        }
        (num / den.max(1e-300)).sqrt()
    }

    /// Solve A^H x = b (needed by the condition estimator).
    fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        // A = P^T L U  =>  A^H = U^H L^H P. Solve U^H z = b (forward),
        // L^H w = z (backward), then x = P^T w.
        let mut z = b.to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for j in 0..i {
                acc -= self.lu[(j, i)].conj() * z[j];
            }
            z[i] = acc / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in (i + 1)..n {
                acc -= self.lu[(j, i)].conj() * z[j];
            }
            z[i] = acc;
        }
        let mut x = vec![Complex64::ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }

    /// Hager-Higham estimate of the one-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve_factored(&x);
            let ynorm: f64 = y.iter().map(|v| v.norm()).sum();
            // xi_i = y_i / |y_i| (sign vector)
            let xi: Vec<Complex64> = y
                .iter()
                .map(|v| {
                    if v.norm() > 0.0 {
                        v / v.norm()
                    } else {
                        Complex64::ONE
                    }
                })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, 0.0), |acc, it| if it.1 > acc.1 { it } else { acc });
            if ynorm <= est {
                break;
            }
            est = ynorm;
            let zx: f64 = z.iter().zip(x.iter()).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= zx {
                break;
            }
            x = vec![Complex64::ZERO; n];
            x[jmax] = Complex64::ONE;
        }
        self.one_norm_a * est
    }
}
