//! Compressed sparse row matrices used by assembly and the solvers.

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;

/// Real CSR matrix with sorted, duplicate-free column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        trips: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let t: Vec<(usize, usize, f64)> = trips.into_iter().collect();
        // bucket by row, then sort each row by column
        let mut start = vec![0usize; nrows + 1];
        for &(r, c, _) in &t {
            assert!(
                r < nrows && c < ncols,
                "triplet ({r}, {c}) outside {nrows}x{ncols}"
            );
            start[r + 1] += 1;
        }
        for r in 0..nrows {
            start[r + 1] += start[r];
        }
        let mut fill = start.clone();
        let mut bucket = vec![(0usize, 0.0f64); t.len()];
        for (r, c, v) in t {
            bucket[fill[r]] = (c, v);
            fill[r] += 1;
        }
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(bucket.len());
        let mut data = Vec::with_capacity(bucket.len());
        for r in 0..nrows {
            let row = &mut bucket[start[r]..start[r + 1]];
            row.sort_by_key(|e| e.0);
            let first = indices.len();
            for &(c, v) in row.iter() {
                if indices.len() > first && indices.last() == Some(&c) {
                    *data.last_mut().expect("previous entry") += v;
                } else {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr[r + 1] = indices.len();
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    /// Square pattern (zero values) covering a sum of dense element blocks
    /// `dofs × dofs`.
    pub fn block_pattern(n: usize, elements: &[Vec<usize>]) -> Self {
        let mut touching = vec![Vec::new(); n];
        for (e, dofs) in elements.iter().enumerate() {
            for &d in dofs {
                touching[d].push(e);
            }
        }
        let rows: Vec<Vec<usize>> = touching
            .par_iter()
            .map(|els| {
                let mut cols: Vec<usize> = els
                    .iter()
                    .flat_map(|&e| elements[e].iter().copied())
                    .collect();
                cols.sort_unstable();
                cols.dedup();
                cols
            })
            .collect();
        let mut indptr = vec![0; n + 1];
        for (r, cols) in rows.iter().enumerate() {
            indptr[r + 1] = indptr[r] + cols.len();
        }
        let indices: Vec<usize> = rows.into_iter().flatten().collect();
        let data = vec![0.0; indices.len()];
        Self {
            nrows: n,
            ncols: n,
            indptr,
            indices,
            data,
        }
    }

    /// Adds `value(a, b)` at `(dofs[a], dofs[b])`. Panics if a position is
    /// not part of the pattern.
    pub fn add_block(&mut self, dofs: &[usize], value: impl Fn(usize, usize) -> f64) {
        for (a, &r) in dofs.iter().enumerate() {
            let (s, e) = (self.indptr[r], self.indptr[r + 1]);
            for (b, &c) in dofs.iter().enumerate() {
                let k = self.indices[s..e]
                    .binary_search(&c)
                    .expect("entry outside the pattern");
                self.data[s + k] += value(a, b);
            }
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)))
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, val) = self.row(r);
        idx.binary_search(&c).map_or(0.0, |k| val[k])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (idx, val) = self.row(r);
            idx.iter().zip(val).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                let (idx, val) = self.row(r);
                idx.iter().zip(val).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    /// `A X` for a dense `X`.
    pub fn mul_dense(&self, x: &Mat<f64>) -> Mat<f64> {
        assert_eq!(x.nrows(), self.ncols);
        let cols: Vec<Vec<f64>> = (0..x.ncols())
            .into_par_iter()
            .map(|j| {
                (0..self.nrows)
                    .map(|r| {
                        let (idx, val) = self.row(r);
                        idx.iter().zip(val).map(|(&c, &v)| v * x[(c, j)]).sum()
                    })
                    .collect()
            })
            .collect();
        Mat::from_fn(self.nrows, x.ncols(), |i, j| cols[j][i])
    }

    /// `Aᵀ x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (r, c, v) in self.triplets() {
            y[c] += v * x[r];
        }
        y
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(r, c, v)| (c, r, v)),
        )
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut trips = Vec::new();
        for r in 0..self.nrows {
            let mut cols = Vec::new();
            let (idx, val) = self.row(r);
            for (&k, &a) in idx.iter().zip(val) {
                let (oidx, oval) = other.row(k);
                for (&c, &b) in oidx.iter().zip(oval) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            trips.extend(cols.into_iter().map(|c| (r, c, acc[c])));
        }
        Self::from_triplets(self.nrows, other.ncols, trips)
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets()
                .chain(other.triplets().map(|(r, c, v)| (r, c, s * v))),
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// Submatrix with the given rows and columns, in the given order.
    /// Rows may repeat; columns must be distinct.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_pos = vec![usize::MAX; self.ncols];
        for (j, &c) in cols.iter().enumerate() {
            col_pos[c] = j;
        }
        let trips = rows.iter().enumerate().flat_map(|(i, &r)| {
            let (idx, val) = self.row(r);
            let col_pos = &col_pos;
            idx.iter()
                .zip(val)
                .filter(move |(&c, _)| col_pos[c] != usize::MAX)
                .map(move |(&c, &v)| (i, col_pos[c], v))
        });
        Self::from_triplets(rows.len(), cols.len(), trips.collect::<Vec<_>>())
    }

    /// Drops explicit zeros and entries below `tol` in magnitude.
    pub fn pruned(&self, tol: f64) -> Self {
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets()
                .filter(|t| t.2.abs() > tol)
                .collect::<Vec<_>>(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A − Aᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        self.add_scaled(&self.transpose(), -1.0).max_abs()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn from_dense(m: &Mat<f64>, tol: f64) -> Self {
        let mut trips = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)].abs() > tol {
                    trips.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), trips)
    }

    pub fn to_faer(&self) -> SparseColMat<usize, f64> {
        let trips: Vec<Triplet<usize, usize, f64>> = self
            .triplets()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trips)
            .expect("valid sparse pattern")
    }

    /// Vertical concatenation.
    pub fn vstack(blocks: &[&CsrMatrix]) -> Self {
        let ncols = blocks.first().map_or(0, |b| b.ncols);
        let mut off = 0;
        let mut trips = Vec::new();
        for b in blocks {
            assert_eq!(b.ncols, ncols);
            trips.extend(b.triplets().map(|(r, c, v)| (r + off, c, v)));
            off += b.nrows;
        }
        Self::from_triplets(off, ncols, trips)
    }

    /// Block matrix from a grid of optional blocks with the given sizes.
    pub fn block(rows: &[usize], cols: &[usize], blocks: &[(usize, usize, &CsrMatrix)]) -> Self {
        let ro: Vec<usize> = rows
            .iter()
            .scan(0, |s, &n| {
                let o = *s;
                *s += n;
                Some(o)
            })
            .collect();
        let co: Vec<usize> = cols
            .iter()
            .scan(0, |s, &n| {
                let o = *s;
                *s += n;
                Some(o)
            })
            .collect();
        let mut trips = Vec::new();
        for &(bi, bj, m) in blocks {
            assert_eq!(
                (m.nrows, m.ncols),
                (rows[bi], cols[bj]),
                "block ({bi}, {bj}) has the wrong shape"
            );
            trips.extend(m.triplets().map(|(r, c, v)| (r + ro[bi], c + co[bj], v)));
        }
        Self::from_triplets(rows.iter().sum(), cols.iter().sum(), trips)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, 2, [(0, 1, 1.0), (0, 1, 2.0), (1, 0, -1.0)]);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn product_matches_dense() {
        let a = CsrMatrix::from_triplets(2, 3, [(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]);
        let b =
            CsrMatrix::from_triplets(3, 2, [(0, 1, 1.0), (1, 0, 4.0), (2, 0, 5.0), (2, 1, -1.0)]);
        let c = a.matmul(&b).to_dense();
        let d = a.to_dense() * b.to_dense();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(c[(i, j)], d[(i, j)]);
            }
        }
        assert_eq!(a.select(&[1], &[1, 2]).get(0, 0), 3.0);
        assert_eq!(a.transpose().get(2, 0), 2.0);
    }
}
