//! Discrete kernel dimension under the mortar constraint.

use super::dense::{constraint_null_space, project, sym_eigenvalues, ZeroSplit};
use crate::assembly::{assemble_coupling, assemble_curlcurl, build_multiplier, MultiplierKind};
use crate::error::Result;
use crate::spaces::SplineComplex;

/// Relative threshold for zero singular values and eigenvalues.
pub const ZERO_TOL: f64 = 1e-8;

/// Measured kernel dimension with the quantities needed to judge it.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelReport {
    /// Vertices carrying no boundary or interface flag.
    pub dim_x0: usize,
    pub kernel: usize,
    /// Interface-internal vertices of the dependent side.
    pub interface_internal: usize,
    /// Free edge DoFs and multiplier rows.
    pub dofs: usize,
    pub multipliers: usize,
    pub constraint_split: ZeroSplit,
    pub kernel_split: ZeroSplit,
}

impl KernelReport {
    /// Both rank decisions had a clear gap.
    pub fn is_clear(&self) -> bool {
        self.constraint_split.is_clear() && self.kernel_split.is_clear()
    }
}

/// Number of vertices with no Dirichlet, Neumann or interface flag.
pub fn interior_vertex_count(complex: &SplineComplex) -> usize {
    let m = complex.mesh();
    (0..m.num(0))
        .filter(|&v| !m.flags(0, v).is_boundary())
        .count()
}

/// `dim {u ∈ X¹ : Gu = 0, (∇×u, ∇×v) = 0 ∀v}` measured as the null-space
/// dimension of `ZᵀKZ` with `Z` spanning the null space of `G`.
pub fn kernel_dimension(complex: &SplineComplex, kind: MultiplierKind) -> Result<KernelReport> {
    let s1 = complex.space(1);
    let k = assemble_curlcurl(complex, &s1, &|_| 1.0)?;
    let mult = build_multiplier(complex, kind)?;
    let g = assemble_coupling(complex, &s1, &mult)?.constraint();
    let (z, constraint_split) = constraint_null_space(&g, ZERO_TOL)?;
    let kz = project(&k, &z);
    let eig = sym_eigenvalues(&kz)?;
    let scale = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let kernel_split = ZeroSplit::new(&eig, scale, ZERO_TOL);
    Ok(KernelReport {
        dim_x0: interior_vertex_count(complex),
        kernel: kernel_split.zeros,
        interface_internal: complex.mesh().interface_internal_vertices().len(),
        dofs: s1.dim(),
        multipliers: mult.dim(),
        constraint_split,
        kernel_split,
    })
}
