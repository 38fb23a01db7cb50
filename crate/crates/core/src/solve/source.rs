//! Magnetostatic source problem: gauged mortar saddle system, field
//! evaluation and error measures.

use super::iterative::SparseLu;
use super::setup::{gauge_space, mortar_constraint, GaugeMode};
use crate::assembly::{
    assemble_curlcurl, assemble_load, assemble_mass, default_points, element_table, map_elements,
    MultiplierKind, Operator, VectorField,
};
use crate::error::{Error, Result};
use crate::gauge::{gauge_reduce, GaugePartition, NeighborOrder};
use crate::spaces::{evaluate, DiscreteSpace, SplineComplex};
use crate::sparse::CsrMatrix;

/// Manufactured potential `A` on the x-periodic box.
pub fn manufactured_potential(x: [f64; 3]) -> [f64; 3] {
    let (sx, sy, sz) = (x[0].sin(), x[1].sin(), (0.5 * x[2]).sin());
    [sy * sz, sx * sz, sx * sy]
}

/// `B = ∇×A` of [`manufactured_potential`].
pub fn manufactured_field(x: [f64; 3]) -> [f64; 3] {
    let (sx, cx, sy, cy) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
    let (sz, cz) = ((0.5 * x[2]).sin(), (0.5 * x[2]).cos());
    [
        sx * cy - 0.5 * sx * cz,
        -cx * sy + 0.5 * sy * cz,
        cx * sz - cy * sz,
    ]
}

/// `J = ∇×∇×A` of [`manufactured_potential`] (no magnetisation).
pub fn manufactured_current(x: [f64; 3]) -> [f64; 3] {
    let (sx, sy, sz) = (x[0].sin(), x[1].sin(), (0.5 * x[2]).sin());
    [1.25 * sy * sz, 1.25 * sx * sz, 2.0 * sx * sy]
}

/// Gauged block system `[K_CC G_Cᵀ; G_C 0] [a_C; μ] = [j_C; 0]`.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub stiffness: CsrMatrix,
    pub coupling: Option<CsrMatrix>,
    pub rhs: Vec<f64>,
    /// Cotree position → free DoF.
    pub expander: Vec<usize>,
    /// Number of free DoFs.
    pub dim: usize,
    /// Hint for singularity reports.
    pub gauge: GaugeMode,
    pub enrichment: usize,
}

impl SaddleSystem {
    /// Assembled block matrix and right-hand side.
    pub fn block(&self) -> (CsrMatrix, Vec<f64>) {
        let n = self.stiffness.nrows();
        let mut rhs = self.rhs.clone();
        match &self.coupling {
            None => (self.stiffness.clone(), rhs),
            Some(g) => {
                let m = g.nrows();
                let gt = g.transpose();
                let mut t: Vec<(usize, usize, f64)> = self.stiffness.triplets().collect();
                t.extend(g.triplets().map(|(r, c, v)| (n + r, c, v)));
                t.extend(gt.triplets().map(|(r, c, v)| (r, n + c, v)));
                rhs.resize(n + m, 0.0);
                (CsrMatrix::from_triplets(n + m, n + m, t), rhs)
            }
        }
    }
}

/// Solution of the source problem on the free DoFs.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSolution {
    /// Free-DoF coefficients; tree entries are exactly zero.
    pub coefficients: Vec<f64>,
    pub multipliers: Vec<f64>,
    /// `‖r‖∞ / ‖rhs‖∞` of the block system.
    pub residual: f64,
}

/// Solves the gauged block system with a sparse LU factorization.
pub fn solve_magnetostatic(system: &SaddleSystem) -> Result<FieldSolution> {
    let n = system.stiffness.nrows();
    let (a, rhs) = system.block();
    let norm = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm == 0.0 {
        return Ok(FieldSolution {
            coefficients: vec![0.0; system.dim],
            multipliers: vec![0.0; rhs.len() - n],
            residual: 0.0,
        });
    }
    let hint = || {
        match system.gauge {
        GaugeMode::None => "suspected cause: missing gauge".to_string(),
        GaugeMode::Tree => format!(
            "suspected cause: missing cohomology enrichment ({} edges added) or a rank-deficient coupling",
            system.enrichment
        ),
    }
    };
    let lu = SparseLu::new(&a).map_err(|e| Error::Singular(format!("{e}; {}", hint())))?;
    let x = lu.solve(&rhs);
    let ax = a.mul_vec(&x);
    let residual = ax
        .iter()
        .zip(&rhs)
        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
        / norm;
    if !residual.is_finite() || residual > 1e-10 {
        return Err(Error::Singular(format!(
            "block system residual {residual:.3e}; {}",
            hint()
        )));
    }
    let mut coefficients = vec![0.0; system.dim];
    for (i, &d) in system.expander.iter().enumerate() {
        coefficients[d] = x[i];
    }
    Ok(FieldSolution {
        coefficients,
        multipliers: x[n..].to_vec(),
        residual,
    })
}

/// Options of [`source_problem`].
#[derive(Clone, Copy, Debug)]
pub struct SourceOptions {
    pub multiplier: MultiplierKind,
    pub gauge: GaugeMode,
    pub order: NeighborOrder,
}

impl Default for SourceOptions {
    fn default() -> Self {
        SourceOptions {
            multiplier: MultiplierKind::Enriched,
            gauge: GaugeMode::Tree,
            order: NeighborOrder::Ascending,
        }
    }
}

/// Everything produced by [`source_problem`].
#[derive(Clone, Debug)]
pub struct SourceSolution {
    pub space: DiscreteSpace,
    pub solution: FieldSolution,
    /// `None` without gauging.
    pub partition: Option<GaugePartition>,
}

/// Assembles and solves `∇×∇×A = J` (`ν = 1`) with the chosen gauge and
/// multiplier space.
///
/// Without a gauge the stiffness is regularized by `τ M` with
/// `τ = 1e−10·mean(diag K)/mean(diag M)`; `B` is unaffected up to that
/// perturbation.
pub fn source_problem(
    complex: &SplineComplex,
    current: VectorField,
    opts: SourceOptions,
) -> Result<SourceSolution> {
    let s1 = complex.space(1);
    let k = assemble_curlcurl(complex, &s1, &|_| 1.0)?;
    let m = assemble_mass(complex, &s1, &|_| 1.0)?;
    let f = assemble_load(complex, &s1, current, None)?;
    let g = mortar_constraint(complex, &s1, opts.multiplier)?;
    let n = s1.dim();
    let (system, partition) = match opts.gauge {
        GaugeMode::Tree => {
            let enriched = match opts.multiplier {
                MultiplierKind::Enriched => g.clone(),
                MultiplierKind::Standard => {
                    mortar_constraint(complex, &s1, MultiplierKind::Enriched)?
                }
            };
            let part = gauge_space(complex, &s1, &k, &m, enriched.as_ref(), opts.order)?;
            let red = gauge_reduce(&k, &f, &part);
            let coupling = g.map(|g| {
                let rows: Vec<usize> = (0..g.nrows()).collect();
                g.select(&rows, &part.cotree)
            });
            let sys = SaddleSystem {
                stiffness: red.matrix,
                coupling,
                rhs: red.rhs,
                expander: red.expander,
                dim: n,
                gauge: opts.gauge,
                enrichment: part.enrichment.len(),
            };
            (sys, Some(part))
        }
        GaugeMode::None => {
            let tau = 1e-10 * mean_diag(&k) / mean_diag(&m);
            let sys = SaddleSystem {
                stiffness: k.add_scaled(&m, tau),
                coupling: g,
                rhs: f,
                expander: (0..n).collect(),
                dim: n,
                gauge: opts.gauge,
                enrichment: 0,
            };
            (sys, None)
        }
    };
    let solution = solve_magnetostatic(&system)?;
    Ok(SourceSolution {
        space: s1,
        solution,
        partition,
    })
}

fn mean_diag(a: &CsrMatrix) -> f64 {
    (0..a.nrows()).map(|i| a.get(i, i).abs()).sum::<f64>() / a.nrows().max(1) as f64
}

/// `(A, B)` of a free-DoF coefficient vector at a parametric point.
pub fn field_at(
    complex: &SplineComplex,
    space1: &DiscreteSpace,
    coefficients: &[f64],
    patch: usize,
    xi: [f64; 3],
) -> Result<([f64; 3], [f64; 3])> {
    evaluate(complex, 1, &space1.extend(coefficients), patch, xi)
}

/// `sqrt(∫|B_h − B|²) / sqrt(∫|B|²)` with `B_h = ∇×A_h`.
pub fn relative_error(
    complex: &SplineComplex,
    space1: &DiscreteSpace,
    coefficients: &[f64],
    exact: VectorField,
) -> Result<f64> {
    let locals: Vec<_> = (0..complex.domain().num_patches())
        .map(|p| space1.local_dofs(complex.mesh(), p))
        .collect();
    let parts = map_elements(complex, default_points(complex), |el| {
        let (dofs, curls) =
            element_table(complex, space1, &locals[el.patch], el, Operator::Derivative);
        let (mut num, mut den) = (0.0, 0.0);
        for (qi, q) in el.points.iter().enumerate() {
            let mut b = [0.0; 3];
            for (&(d, s), row) in dofs.iter().zip(&curls) {
                let c = s * coefficients[d];
                for (bj, rj) in b.iter_mut().zip(&row[qi]) {
                    *bj += c * rj;
                }
            }
            let e = exact(q.map.x);
            let w = q.weight * q.map.det.abs();
            num += w * (0..3).map(|j| (b[j] - e[j]).powi(2)).sum::<f64>();
            den += w * (0..3).map(|j| e[j] * e[j]).sum::<f64>();
        }
        Ok((num, den))
    })?;
    let (num, den) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    if den == 0.0 {
        return Err(Error::Domain { value: den });
    }
    Ok((num / den).sqrt())
}
