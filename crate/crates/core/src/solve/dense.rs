//! Dense helpers: null spaces, generalized symmetric eigenproblems and
//! zero-cluster detection.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use faer::linalg::triangular_solve::{
    solve_lower_triangular_in_place, solve_upper_triangular_in_place,
};
use faer::{Mat, Par, Side};

/// Split of ascending nonnegative values into a zero cluster and the rest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroSplit {
    pub zeros: usize,
    /// Ratio between the smallest "nonzero" and the largest "zero" value
    /// (infinite when one of the clusters is empty).
    pub gap: f64,
    pub threshold: f64,
}

impl ZeroSplit {
    /// Values below `rel · scale` are zero.
    pub fn new(values: &[f64], scale: f64, rel: f64) -> Self {
        let threshold = rel * scale;
        let zeros = values.iter().filter(|v| v.abs() < threshold).count();
        let gap = match (zeros, values.get(zeros)) {
            (0, Some(v)) => v.abs() / threshold,
            (z, Some(v)) => v.abs() / values[z - 1].abs().max(f64::MIN_POSITIVE),
            (_, None) => f64::INFINITY,
        };
        ZeroSplit {
            zeros,
            gap,
            threshold,
        }
    }

    /// Whether the split is unambiguous (gap of at least ten).
    pub fn is_clear(&self) -> bool {
        self.gap >= 10.0
    }
}

fn par() -> Par {
    faer::get_global_parallelism()
}

/// Symmetric eigenvalues (ascending).
pub fn sym_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalues: {e:?}")))
}

/// Eigenvalues of `A x = λ B x` for symmetric `A` and SPD `B`, ascending,
/// with `B`-orthonormal eigenvectors when requested.
pub fn generalized_eigen(
    a: &Mat<f64>,
    b: &Mat<f64>,
    vectors: bool,
) -> Result<(Vec<f64>, Option<Mat<f64>>)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| Mat::zeros(0, 0))));
    }
    let llt = b
        .llt(Side::Lower)
        .map_err(|_| Error::Singular("mass matrix is not positive definite".into()))?;
    let l = llt.L();
    let mut c = a.clone();
    solve_lower_triangular_in_place(l, c.as_mut(), par());
    let mut c = c.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), par());
    let c = Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    if !vectors {
        return Ok((sym_eigenvalues(&c)?, None));
    }
    let evd = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("eigen: {e:?}")))?;
    let vals: Vec<f64> = (0..n).map(|i| evd.S()[i]).collect();
    let mut u = evd.U().to_owned();
    solve_upper_triangular_in_place(l.transpose(), u.as_mut(), par());
    Ok((vals, Some(u)))
}

/// Orthonormal basis of the null space of a dense matrix; singular values
/// below `rel · σ_max` count as zero.
pub fn null_space(a: &Mat<f64>, rel: f64) -> Result<(Mat<f64>, ZeroSplit)> {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return Ok((
            Mat::identity(n, n),
            ZeroSplit {
                zeros: n,
                gap: f64::INFINITY,
                threshold: 0.0,
            },
        ));
    }
    let svd = a
        .svd()
        .map_err(|e| Error::LinearAlgebra(format!("svd: {e:?}")))?;
    let k = a.nrows().min(n);
    let s: Vec<f64> = (0..k).map(|i| svd.S()[i]).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&x| x > rel * smax).count();
    let gap = if rank == 0 || rank == k {
        f64::INFINITY
    } else {
        s[rank - 1] / s[rank].max(f64::MIN_POSITIVE)
    };
    let v = svd.V();
    let basis = Mat::from_fn(n, n - rank, |i, j| v[(i, rank + j)]);
    Ok((
        basis,
        ZeroSplit {
            zeros: n - rank,
            gap,
            threshold: rel * smax,
        },
    ))
}

/// Null space of a sparse constraint matrix. Columns that are identically
/// zero contribute unit vectors; the rest goes through a dense SVD.
pub fn constraint_null_space(g: &CsrMatrix, rel: f64) -> Result<(Mat<f64>, ZeroSplit)> {
    let n = g.ncols();
    let mut active = vec![false; n];
    for (_, c, v) in g.triplets() {
        if v != 0.0 {
            active[c] = true;
        }
    }
    let cols: Vec<usize> = (0..n).filter(|&c| active[c]).collect();
    let rows: Vec<usize> = (0..g.nrows()).collect();
    let (sub, split) = null_space(&g.select(&rows, &cols).to_dense(), rel)?;
    let free: Vec<usize> = (0..n).filter(|&c| !active[c]).collect();
    let mut basis = Mat::zeros(n, free.len() + sub.ncols());
    for (j, &c) in free.iter().enumerate() {
        basis[(c, j)] = 1.0;
    }
    for j in 0..sub.ncols() {
        for (i, &c) in cols.iter().enumerate() {
            basis[(c, free.len() + j)] = sub[(i, j)];
        }
    }
    let zeros = basis.ncols();
    Ok((basis, ZeroSplit { zeros, ..split }))
}

/// Orthonormal basis of the column space of `a`.
pub fn range_basis(a: &Mat<f64>, rel: f64) -> Result<Mat<f64>> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return Ok(Mat::zeros(a.nrows(), 0));
    }
    let svd = a
        .thin_svd()
        .map_err(|e| Error::LinearAlgebra(format!("svd: {e:?}")))?;
    let k = a.nrows().min(a.ncols());
    let smax = svd.S()[0];
    let rank = (0..k).filter(|&i| svd.S()[i] > rel * smax).count();
    let u = svd.U();
    Ok(Mat::from_fn(a.nrows(), rank, |i, j| u[(i, j)]))
}

/// `Bᵀ A B` for sparse `A`.
pub fn project(a: &CsrMatrix, b: &Mat<f64>) -> Mat<f64> {
    let ab = a.mul_dense(b);
    let p = b.transpose() * &ab;
    let n = p.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (p[(i, j)] + p[(j, i)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_diagonal() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { [2.0, 6.0, 12.0][i] } else { 0.0 });
        let b = Mat::from_fn(3, 3, |i, j| if i == j { [1.0, 2.0, 3.0][i] } else { 0.0 });
        let (v, x) = generalized_eigen(&a, &b, true).unwrap();
        for (got, want) in v.iter().zip([2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let x = x.unwrap();
        let r = &a * &x - &b * &x * Mat::from_fn(3, 3, |i, j| if i == j { v[i] } else { 0.0 });
        assert!(r.norm_max() < 1e-12);
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = Mat::from_fn(2, 3, |_, j| [1.0, 2.0, 3.0][j]);
        let (z, split) = null_space(&a, 1e-10).unwrap();
        assert_eq!(z.ncols(), 2);
        assert!((&a * &z).norm_max() < 1e-12);
        assert!(split.is_clear());
    }

    #[test]
    fn constraint_null_space_keeps_zero_columns() {
        let g = CsrMatrix::from_triplets(1, 4, [(0, 1, 1.0), (0, 2, -1.0)]);
        let (z, _) = constraint_null_space(&g, 1e-10).unwrap();
        assert_eq!(z.ncols(), 3);
        assert!((g.to_dense() * &z).norm_max() < 1e-14);
    }

    #[test]
    fn zero_split_gap() {
        let s = ZeroSplit::new(&[1e-15, 2e-14, 0.5, 1.0], 1.0, 1e-8);
        assert_eq!(s.zeros, 2);
        assert!(s.is_clear());
    }
}
