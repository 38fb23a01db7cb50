//! Sparse factorizations and shift-invert subspace iteration for the
//! near-null space of large symmetric pencils.

use super::dense::{generalized_eigen, ZeroSplit};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use faer::prelude::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::{Mat, Side};

/// Sparse Cholesky factor of an SPD matrix.
pub struct Cholesky(Llt<usize, f64>);

impl Cholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let llt = a
            .to_faer()
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Singular(format!("sparse Cholesky failed: {e:?}")))?;
        Ok(Cholesky(llt))
    }

    pub fn solve(&self, b: &Mat<f64>) -> Mat<f64> {
        self.0.solve(b)
    }
}

/// Sparse LU factor of a general square matrix.
pub struct SparseLu(Lu<usize, f64>);

impl SparseLu {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let lu = a
            .to_faer()
            .sp_lu()
            .map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
        Ok(SparseLu(lu))
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.0.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }
}

fn mean_diagonal(a: &CsrMatrix) -> f64 {
    let n = a.nrows().max(1);
    (0..a.nrows()).map(|i| a.get(i, i).abs()).sum::<f64>() / n as f64
}

/// Deterministic pseudo-random start block.
fn start_block(n: usize, k: usize) -> Mat<f64> {
    Mat::from_fn(n, k, |i, j| {
        let t = ((i as f64 + 1.0) * 12.9898 + (j as f64 + 1.0) * 78.233).sin() * 43758.5453;
        t - t.floor() - 0.5
    })
}

/// Null space of the symmetric positive semidefinite `a`, measured against
/// the SPD `m`.
///
/// Runs shift-invert subspace iteration on `(a + σ m)⁻¹ m` with a small
/// shift and widens the block until it contains a nonzero Ritz value.
/// Ritz values below `rel · mean(diag a)/mean(diag m)` count as zero.
pub fn sparse_null_space(a: &CsrMatrix, m: &CsrMatrix, rel: f64) -> Result<(Mat<f64>, ZeroSplit)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((
            Mat::zeros(0, 0),
            ZeroSplit {
                zeros: 0,
                gap: f64::INFINITY,
                threshold: 0.0,
            },
        ));
    }
    let scale = mean_diagonal(a) / mean_diagonal(m).max(f64::MIN_POSITIVE);
    let sigma = 1e-6 * scale;
    let chol = Cholesky::new(&a.add_scaled(m, sigma))?;
    let mut k = 4.min(n);
    loop {
        let mut x = start_block(n, k);
        let mut theta = Vec::new();
        for _ in 0..6 {
            let y = chol.solve(&m.mul_dense(&x));
            let ar = super::dense::project(a, &y);
            let mr = super::dense::project(m, &y);
            let (t, w) = generalized_eigen(&ar, &mr, true)?;
            x = &y * w.expect("vectors requested");
            theta = t;
        }
        let split = ZeroSplit::new(&theta, scale, rel);
        if split.zeros < k || k == n {
            let basis = Mat::from_fn(n, split.zeros, |i, j| x[(i, j)]);
            return Ok((basis, split));
        }
        k = (2 * k).min(n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_laplacian_constant() {
        // path-graph Laplacian: null space spanned by the constant vector
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n - 1 {
            t.extend([
                (i, i, 1.0),
                (i + 1, i + 1, 1.0),
                (i, i + 1, -1.0),
                (i + 1, i, -1.0),
            ]);
        }
        let a = CsrMatrix::from_triplets(n, n, t);
        let (z, split) = sparse_null_space(&a, &CsrMatrix::identity(n), 1e-8).unwrap();
        assert_eq!(split.zeros, 1);
        let c = z[(0, 0)];
        assert!((0..n).all(|i| (z[(i, 0)] - c).abs() < 1e-8 * c.abs()));
    }
}
