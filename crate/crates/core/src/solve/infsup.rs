//! Numerical inf-sup constant of the mortar coupling.

use super::dense::generalized_eigen;
use super::iterative::Cholesky;
use crate::assembly::{
    assemble_coupling, assemble_matrix_on, assemble_multiplier_gram, build_multiplier,
    default_points, MultiplierKind, Operator,
};
use crate::error::{Error, Result};
use crate::geometry::Role;
use crate::spaces::SplineComplex;

/// Inf-sup constant with the sizes that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct InfSupReport {
    pub beta: f64,
    /// Free edge DoFs of the dependent subdomain.
    pub dofs: usize,
    pub multipliers: usize,
}

/// `β = sqrt(λ_min)` of `(G X⁻¹ Gᵀ) q = λ N q` where `X = K + M` is the
/// H(curl) Gram matrix of the dependent subdomain, `G` the dependent
/// coupling block and `N` the L² Gram matrix of the multipliers.
pub fn infsup_constant(complex: &SplineComplex, kind: MultiplierKind) -> Result<InfSupReport> {
    let s1 = complex.space(1);
    let mesh = complex.mesh();
    let dep: Vec<usize> = (0..s1.dim())
        .filter(|&d| mesh.role(1, s1.entity(d)) == Role::Dependent)
        .collect();
    let mult = build_multiplier(complex, kind)?;
    if mult.dim() == 0 {
        return Err(Error::Config(
            "the domain has no interface, so there is no multiplier space".into(),
        ));
    }
    let patches: Vec<usize> = (0..complex.domain().num_patches())
        .filter(|&p| complex.domain().roles[p] == Role::Dependent)
        .collect();
    let npts = default_points(complex);
    let k = assemble_matrix_on(complex, &patches, &s1, Operator::Derivative, &|_| 1.0, npts)?;
    let m = assemble_matrix_on(complex, &patches, &s1, Operator::Value, &|_| 1.0, npts)?;
    let x = k.add_scaled(&m, 1.0).select(&dep, &dep);
    let rows: Vec<usize> = (0..mult.dim()).collect();
    let g = assemble_coupling(complex, &s1, &mult)?
        .dependent
        .select(&rows, &dep);
    let n = assemble_multiplier_gram(complex, &mult)?.to_dense();
    let chol = Cholesky::new(&x)?;
    let xg = chol.solve(&g.transpose().to_dense());
    let s = g.mul_dense(&xg);
    let s = faer::Mat::from_fn(s.nrows(), s.ncols(), |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let (vals, _) = generalized_eigen(&s, &n, false)?;
    let lmin = vals.first().copied().unwrap_or(0.0);
    Ok(InfSupReport {
        beta: lmin.max(0.0).sqrt(),
        dofs: dep.len(),
        multipliers: mult.dim(),
    })
}
