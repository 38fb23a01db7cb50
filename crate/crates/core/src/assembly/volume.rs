//! Element loops over patch volumes: stiffness, mass and load.

use super::quadrature::span_rule;
use crate::error::{Error, Result};
use crate::geometry::MapEval;
use crate::spaces::{push_forward, reference_form, DiscreteSpace, PointBasis1d, SplineComplex};
use crate::sparse::CsrMatrix;
use faer::Mat;
use rayon::prelude::*;

/// Scalar material coefficient.
pub type Coefficient<'a> = &'a (dyn Fn([f64; 3]) -> f64 + Sync);
/// Vector source field.
pub type VectorField<'a> = &'a (dyn Fn([f64; 3]) -> [f64; 3] + Sync);

/// One quadrature point with its mapped geometry.
pub struct QPoint {
    pub xi: [f64; 3],
    pub weight: f64,
    pub map: MapEval,
    pub inv: [[f64; 3]; 3],
    pub basis: [PointBasis1d; 3],
}

/// One knot-span element of a patch.
pub struct Element {
    pub patch: usize,
    /// First active B-spline index per direction (also the first active `D`).
    pub firsts: [usize; 3],
    pub points: Vec<QPoint>,
}

/// Gauss points per direction and span used by default: `p + 1` for
/// polynomial patches, `p + 3` when some patch is rational.
pub fn default_points(complex: &SplineComplex) -> usize {
    let rational = complex.domain().patches.iter().any(|p| p.is_rational());
    complex.degree() + if rational { 3 } else { 1 }
}

/// Elements handed to the rayon pool at a time; bounds the memory held by
/// element results that are still waiting for the sequential sink.
const CHUNK: usize = 256;

/// Applies `f` to every element of every patch (in parallel, chunk by
/// chunk) and feeds the results to `sink` in deterministic patch/element
/// order.
pub fn fold_elements<T: Send>(
    complex: &SplineComplex,
    npts: usize,
    f: impl Fn(&Element) -> Result<T> + Sync,
    sink: impl FnMut(T),
) -> Result<()> {
    let all: Vec<usize> = (0..complex.domain().num_patches()).collect();
    fold_patch_elements(complex, &all, npts, f, sink)
}

/// [`fold_elements`] restricted to the listed patches.
pub fn fold_patch_elements<T: Send>(
    complex: &SplineComplex,
    patches: &[usize],
    npts: usize,
    f: impl Fn(&Element) -> Result<T> + Sync,
    mut sink: impl FnMut(T),
) -> Result<()> {
    for &pi in patches {
        let patch = &complex.domain().patches[pi];
        let basis = complex.basis(pi);
        let rules: Vec<Vec<(Vec<f64>, Vec<f64>)>> = basis
            .knots
            .iter()
            .map(|k| span_rule(&k.breakpoints(), npts))
            .collect();
        let ne = [rules[0].len(), rules[1].len(), rules[2].len()];
        let total = ne[0] * ne[1] * ne[2];
        for start in (0..total).step_by(CHUNK) {
            let results: Vec<Result<T>> = (start..(start + CHUNK).min(total))
                .into_par_iter()
                .map(|e| {
                    let ei = [e % ne[0], (e / ne[0]) % ne[1], e / (ne[0] * ne[1])];
                    let r = [&rules[0][ei[0]], &rules[1][ei[1]], &rules[2][ei[2]]];
                    let mut points = Vec::with_capacity(npts * npts * npts);
                    for (x2, w2) in r[2].0.iter().zip(&r[2].1) {
                        for (x1, w1) in r[1].0.iter().zip(&r[1].1) {
                            for (x0, w0) in r[0].0.iter().zip(&r[0].1) {
                                let xi = [*x0, *x1, *x2];
                                let pb = basis.at(xi);
                                let map = patch.eval_with(&std::array::from_fn(|d| {
                                    (pb[d].b_first, &pb[d].b[..], &pb[d].db[..])
                                }));
                                if map.det <= 0.0 || !map.det.is_finite() {
                                    return Err(Error::SingularJacobian {
                                        patch: pi,
                                        xi,
                                        det: map.det,
                                    });
                                }
                                let inv = map.inverse();
                                points.push(QPoint {
                                    xi,
                                    weight: w0 * w1 * w2,
                                    map,
                                    inv,
                                    basis: pb,
                                });
                            }
                        }
                    }
                    let firsts = std::array::from_fn(|d| points[0].basis[d].b_first);
                    f(&Element {
                        patch: pi,
                        firsts,
                        points,
                    })
                })
                .collect();
            for r in results {
                sink(r?);
            }
        }
    }
    Ok(())
}

/// Collects [`fold_elements`] results in patch/element order.
pub fn map_elements<T: Send>(
    complex: &SplineComplex,
    npts: usize,
    f: impl Fn(&Element) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    fold_elements(complex, npts, f, |t| out.push(t))?;
    Ok(out)
}

/// Free DoFs of the functions active on each element, without quadrature.
fn element_dofs(
    complex: &SplineComplex,
    space: &DiscreteSpace,
    locals: &[Vec<Option<(usize, f64)>>],
    patches: &[usize],
) -> Vec<Vec<usize>> {
    let k = space.form_degree();
    let mesh = complex.mesh();
    let mut out = Vec::new();
    for &pi in patches {
        let local = &locals[pi];
        let basis = complex.basis(pi);
        let bps: Vec<Vec<f64>> = basis.knots.iter().map(|k| k.breakpoints()).collect();
        for m2 in bps[2].windows(2) {
            for m1 in bps[1].windows(2) {
                for m0 in bps[0].windows(2) {
                    let mid = [
                        0.5 * (m0[0] + m0[1]),
                        0.5 * (m1[0] + m1[1]),
                        0.5 * (m2[0] + m2[1]),
                    ];
                    let pb = basis.at(mid);
                    let firsts = std::array::from_fn(|d| pb[d].b_first);
                    let dofs = element_functions(k, complex.degree(), firsts)
                        .into_iter()
                        .filter_map(|(comp, i)| {
                            local[mesh.local_index(k, pi, comp, i)].map(|(d, _)| d)
                        })
                        .collect();
                    out.push(dofs);
                }
            }
        }
    }
    out
}

/// Local `k`-form functions active on an element: `(component, index)`.
pub fn element_functions(k: usize, p: usize, firsts: [usize; 3]) -> Vec<(usize, [usize; 3])> {
    let ncomp = if k == 1 || k == 2 { 3 } else { 1 };
    let mut out = Vec::new();
    for comp in 0..ncomp {
        let len: [usize; 3] = std::array::from_fn(|d| {
            let reduced = match k {
                0 => false,
                1 => d == comp,
                2 => d != comp,
                _ => true,
            };
            if reduced {
                p
            } else {
                p + 1
            }
        });
        for i2 in 0..len[2] {
            for i1 in 0..len[1] {
                for i0 in 0..len[0] {
                    out.push((comp, [firsts[0] + i0, firsts[1] + i1, firsts[2] + i2]));
                }
            }
        }
    }
    out
}

/// Which quantity of a form enters a bilinear form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    /// `(c u, v)`.
    Value,
    /// `(c du, dv)` with `d` the exterior derivative (grad, curl, div).
    Derivative,
}

/// Free DoFs and signs of the active functions of an element, together
/// with the per-point physical values (`op`) of those functions.
pub(crate) fn element_table(
    complex: &SplineComplex,
    space: &DiscreteSpace,
    local: &[Option<(usize, f64)>],
    el: &Element,
    op: Operator,
) -> (Vec<(usize, f64)>, Vec<Vec<[f64; 3]>>) {
    let k = space.form_degree();
    let mesh = complex.mesh();
    let mut dofs = Vec::new();
    let mut vals = Vec::new();
    for (comp, i) in element_functions(k, complex.degree(), el.firsts) {
        let Some(ds) = local[mesh.local_index(k, el.patch, comp, i)] else {
            continue;
        };
        let row: Vec<[f64; 3]> = el
            .points
            .iter()
            .map(|q| match reference_form(k, comp, i, &q.basis) {
                Some((v, dv)) => {
                    let (pv, pd) = push_forward(k, &q.map, &q.inv, v, dv);
                    if op == Operator::Value {
                        pv
                    } else {
                        pd
                    }
                }
                None => [0.0; 3],
            })
            .collect();
        dofs.push(ds);
        vals.push(row);
    }
    (dofs, vals)
}

/// Symmetric bilinear form `∫ c · op(u) · op(v)` on the free DoFs of `space`.
pub fn assemble_matrix(
    complex: &SplineComplex,
    space: &DiscreteSpace,
    op: Operator,
    coef: Coefficient,
    npts: usize,
) -> Result<CsrMatrix> {
    let all: Vec<usize> = (0..complex.domain().num_patches()).collect();
    assemble_matrix_on(complex, &all, space, op, coef, npts)
}

/// [`assemble_matrix`] with the integral restricted to the listed patches.
pub fn assemble_matrix_on(
    complex: &SplineComplex,
    patches: &[usize],
    space: &DiscreteSpace,
    op: Operator,
    coef: Coefficient,
    npts: usize,
) -> Result<CsrMatrix> {
    let k = space.form_degree();
    let locals: Vec<Vec<Option<(usize, f64)>>> = (0..complex.domain().num_patches())
        .map(|p| space.local_dofs(complex.mesh(), p))
        .collect();
    let ncomp =
        if k == 0 && op == Operator::Derivative || k == 1 || (k == 2 && op == Operator::Value) {
            3
        } else {
            1
        };
    let mut mat =
        CsrMatrix::block_pattern(space.dim(), &element_dofs(complex, space, &locals, patches));
    fold_patch_elements(
        complex,
        patches,
        npts,
        |el| {
            let (dofs, vals) = element_table(complex, space, &locals[el.patch], el, op);
            let nq = el.points.len();
            let scale: Vec<f64> = el
                .points
                .iter()
                .map(|q| (q.weight * coef(q.map.x) * q.map.det.abs()).sqrt())
                .collect();
            let y = Mat::from_fn(dofs.len(), nq * ncomp, |a, c| {
                vals[a][c / ncomp][c % ncomp] * scale[c / ncomp]
            });
            Ok((dofs, &y * y.transpose()))
        },
        |(dofs, e)| {
            let idx: Vec<usize> = dofs.iter().map(|d| d.0).collect();
            mat.add_block(&idx, |a, b| dofs[a].1 * dofs[b].1 * e[(a, b)]);
        },
    )?;
    Ok(mat)
}

/// `K[a][b] = ∫ ν (∇×ψ_a)·(∇×ψ_b)` on the free 1-form DoFs.
pub fn assemble_curlcurl(
    complex: &SplineComplex,
    space1: &DiscreteSpace,
    nu: Coefficient,
) -> Result<CsrMatrix> {
    check_degree(space1, 1)?;
    assemble_matrix(
        complex,
        space1,
        Operator::Derivative,
        nu,
        default_points(complex),
    )
}

/// `M[a][b] = ∫ ε ψ_a·ψ_b` on the free 1-form DoFs.
pub fn assemble_mass(
    complex: &SplineComplex,
    space1: &DiscreteSpace,
    eps: Coefficient,
) -> Result<CsrMatrix> {
    check_degree(space1, 1)?;
    assemble_matrix(
        complex,
        space1,
        Operator::Value,
        eps,
        default_points(complex),
    )
}

fn check_degree(space: &DiscreteSpace, k: usize) -> Result<()> {
    if space.form_degree() != k {
        return Err(Error::Config(format!(
            "expected a space of {k}-forms, got {}-forms",
            space.form_degree()
        )));
    }
    Ok(())
}

/// `f[a] = ∫ J·ψ_a + ∫ M·(∇×ψ_a)` on the free 1-form DoFs.
pub fn assemble_load(
    complex: &SplineComplex,
    space1: &DiscreteSpace,
    j_src: VectorField,
    m_mag: Option<VectorField>,
) -> Result<Vec<f64>> {
    check_degree(space1, 1)?;
    let locals: Vec<Vec<Option<(usize, f64)>>> = (0..complex.domain().num_patches())
        .map(|p| space1.local_dofs(complex.mesh(), p))
        .collect();
    let npts = default_points(complex);
    let parts = map_elements(complex, npts, |el| {
        let (dofs, vals) = element_table(complex, space1, &locals[el.patch], el, Operator::Value);
        let src: Vec<[f64; 3]> = el.points.iter().map(|q| j_src(q.map.x)).collect();
        let mut out: Vec<(usize, f64)> = dofs
            .iter()
            .zip(&vals)
            .map(|(&(d, s), row)| {
                let v: f64 = row
                    .iter()
                    .zip(&el.points)
                    .zip(&src)
                    .map(|((u, q), j)| {
                        q.weight * q.map.det.abs() * (u[0] * j[0] + u[1] * j[1] + u[2] * j[2])
                    })
                    .sum();
                (d, s * v)
            })
            .collect();
        if let Some(m) = m_mag {
            let (dofs, curls) =
                element_table(complex, space1, &locals[el.patch], el, Operator::Derivative);
            for (&(d, s), row) in dofs.iter().zip(&curls) {
                let v: f64 = row
                    .iter()
                    .zip(&el.points)
                    .map(|(c, q)| {
                        let mv = m(q.map.x);
                        q.weight * q.map.det.abs() * (c[0] * mv[0] + c[1] * mv[1] + c[2] * mv[2])
                    })
                    .sum();
                out.push((d, s * v));
            }
        }
        Ok(out)
    })?;
    let mut f = vec![0.0; space1.dim()];
    for (d, v) in parts.into_iter().flatten() {
        f[d] += v;
    }
    Ok(f)
}
