//! Maxwell eigenvalue problem on the gauged, constrained space.

use super::dense::{constraint_null_space, generalized_eigen, project, range_basis, ZeroSplit};
use super::kernel::ZERO_TOL;
use super::setup::{gauge_space, mortar_constraint, GaugeMode};
use crate::assembly::{assemble_curlcurl, assemble_mass, MultiplierKind};
use crate::error::{Error, Result};
use crate::gauge::NeighborOrder;
use crate::spaces::{gradient_matrix, SplineComplex};
use crate::sparse::CsrMatrix;
use faer::prelude::Solve;
use faer::{Mat, Side};

/// Pencil `(K, M)` restricted to an admissible subspace.
pub struct EigenProblem<'a> {
    pub stiffness: &'a CsrMatrix,
    pub mass: &'a CsrMatrix,
    /// Constraint `G u = 0`.
    pub constraint: Option<&'a CsrMatrix>,
    /// Kernel basis `Q` (columns); the mass is replaced by its quotient
    /// `M − MQ(QᵀMQ)⁻¹QᵀM` so that kernel components carry no mass.
    pub kernel: Option<&'a Mat<f64>>,
    /// Cotree DoFs; the others are fixed to zero.
    pub cotree: Option<&'a [usize]>,
}

/// Smallest eigenvalues of a pencil with zero-cluster statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Ascending, at most the requested count.
    pub eigenvalues: Vec<f64>,
    /// Zero eigenvalues in the whole spectrum.
    pub zero_count: usize,
    pub split: ZeroSplit,
    /// Dimension of the admissible space.
    pub dim: usize,
    /// Per reported eigenvalue: no match in the reference spectrum.
    pub spurious: Vec<bool>,
}

impl SpectrumReport {
    /// Flags eigenvalues without a partner in `reference` (multiset
    /// matching within relative tolerance `rel`).
    pub fn flag_against(&mut self, reference: &[f64], rel: f64) {
        self.spurious = flag_spurious(&self.eigenvalues, reference, rel);
    }

    pub fn spurious_count(&self) -> usize {
        self.spurious.iter().filter(|&&s| s).count()
    }
}

/// Smallest `count` eigenvalues of `problem`.
pub fn solve_eigen(problem: &EigenProblem, count: usize) -> Result<SpectrumReport> {
    let n = problem.stiffness.nrows();
    let cols: Vec<usize> = match problem.cotree {
        Some(c) => c.to_vec(),
        None => (0..n).collect(),
    };
    let basis = match problem.constraint {
        Some(g) => {
            let rows: Vec<usize> = (0..g.nrows()).collect();
            let (y, _) = constraint_null_space(&g.select(&rows, &cols), ZERO_TOL)?;
            embed(n, &cols, &y)
        }
        None => embed(n, &cols, &Mat::identity(cols.len(), cols.len())),
    };
    let kr = project(problem.stiffness, &basis);
    let mut mr = project(problem.mass, &basis);
    if let Some(q) = problem.kernel {
        let mq = problem.mass.mul_dense(q);
        let qmq = q.transpose() * &mq;
        let bmq = basis.transpose() * &mq;
        let llt = qmq
            .llt(Side::Lower)
            .map_err(|_| Error::Singular("kernel basis has a singular mass block".into()))?;
        let x = llt.solve(bmq.transpose());
        mr -= &bmq * &x;
        let r = mr.nrows();
        mr = Mat::from_fn(r, r, |i, j| 0.5 * (mr[(i, j)] + mr[(j, i)]));
    }
    let (vals, _) = generalized_eigen(&kr, &mr, false).map_err(|e| match e {
        Error::Singular(_) => Error::Singular(
            "mass on the admissible space is singular; the gauge leaves kernel functions in the cotree".into(),
        ),
        other => other,
    })?;
    let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let split = ZeroSplit::new(&vals, scale, ZERO_TOL);
    Ok(SpectrumReport {
        zero_count: split.zeros,
        split,
        dim: vals.len(),
        eigenvalues: vals.into_iter().take(count).collect(),
        spurious: Vec::new(),
    })
}

fn embed(n: usize, rows: &[usize], y: &Mat<f64>) -> Mat<f64> {
    let mut b = Mat::zeros(n, y.ncols());
    for (i, &r) in rows.iter().enumerate() {
        for j in 0..y.ncols() {
            b[(r, j)] = y[(i, j)];
        }
    }
    b
}

/// Cavity eigenvalues of `(0, π)³` up to `max`, ascending with multiplicity:
/// `n² + m² + k²` with at least two nonzero indices, two modes when all
/// three are nonzero.
pub fn analytic_cube_spectrum(max: f64) -> Vec<f64> {
    let top = max.sqrt().ceil() as usize + 1;
    let mut out = Vec::new();
    for a in 0..=top {
        for b in 0..=top {
            for c in 0..=top {
                let nonzero = [a, b, c].iter().filter(|&&i| i > 0).count();
                let lam = (a * a + b * b + c * c) as f64;
                if nonzero >= 2 && lam <= max {
                    let modes = if nonzero == 3 { 2 } else { 1 };
                    out.extend(std::iter::repeat_n(lam, modes));
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Greedy multiset matching: each computed value claims the closest unused
/// reference value within `rel`; unmatched values are flagged.
pub fn flag_spurious(values: &[f64], reference: &[f64], rel: f64) -> Vec<bool> {
    let mut used = vec![false; reference.len()];
    values
        .iter()
        .map(|&v| {
            let best = reference
                .iter()
                .enumerate()
                .filter(|&(i, &r)| !used[i] && (v - r).abs() <= rel * r.abs())
                .min_by(|a, b| (v - a.1).abs().total_cmp(&(v - b.1).abs()));
            match best {
                Some((i, _)) => {
                    used[i] = true;
                    false
                }
                None => true,
            }
        })
        .collect()
}

/// Maxwell eigenproblem (`ν = ε = 1`) on `complex`, mortar-constrained when
/// the domain has interface faces.
///
/// With [`GaugeMode::Tree`] the unknowns are the cotree DoFs and the mass is
/// taken modulo the gradient kernel (gradients satisfying the enriched
/// constraint), so true modes keep their eigenvalues and any remaining
/// kernel function shows up as a zero eigenvalue. With [`GaugeMode::None`]
/// the zero count equals the discrete kernel dimension.
pub fn maxwell_eigen(
    complex: &SplineComplex,
    kind: MultiplierKind,
    gauge: GaugeMode,
    count: usize,
) -> Result<SpectrumReport> {
    maxwell_eigen_with(complex, kind, gauge, count, NeighborOrder::Ascending)
}

/// [`maxwell_eigen`] with an explicit BFS neighbour order.
pub fn maxwell_eigen_with(
    complex: &SplineComplex,
    kind: MultiplierKind,
    gauge: GaugeMode,
    count: usize,
    order: NeighborOrder,
) -> Result<SpectrumReport> {
    let s1 = complex.space(1);
    let k = assemble_curlcurl(complex, &s1, &|_| 1.0)?;
    let m = assemble_mass(complex, &s1, &|_| 1.0)?;
    let g = mortar_constraint(complex, &s1, kind)?;
    if gauge == GaugeMode::None {
        let p = EigenProblem {
            stiffness: &k,
            mass: &m,
            constraint: g.as_ref(),
            kernel: None,
            cotree: None,
        };
        return solve_eigen(&p, count);
    }
    let enriched = match kind {
        MultiplierKind::Enriched => g.clone(),
        MultiplierKind::Standard => mortar_constraint(complex, &s1, MultiplierKind::Enriched)?,
    };
    let s0 = complex.space(0);
    let grad = gradient_matrix(complex.mesh(), &s0, &s1)?;
    let q = match &enriched {
        Some(ge) => {
            let (y, _) = constraint_null_space(&ge.matmul(&grad), ZERO_TOL)?;
            grad.mul_dense(&y)
        }
        None => grad.to_dense(),
    };
    let q = range_basis(&q, 1e-10)?;
    let part = gauge_space(complex, &s1, &k, &m, enriched.as_ref(), order)?;
    let p = EigenProblem {
        stiffness: &k,
        mass: &m,
        constraint: g.as_ref(),
        kernel: Some(&q),
        cotree: Some(&part.cotree),
    };
    solve_eigen(&p, count)
}
