//! Mortar multiplier spaces and interface coupling matrices.
//!
//! The standard multiplier space `M_h` is the product over dependent
//! interface faces of the div-conforming spaces `S_{p−1}^{1*}`, with no
//! gluing between faces. The enriched space `M̃_h` appends, for each
//! interface-internal vertex `v`, the surface gradient of the trace of its
//! vertex function on all faces around `v`.
//!
//! Every multiplier function is handled through its physical tangential
//! vector at a quadrature point: for a standard function
//! `μ = Σ_k ∂_kF μ̂_k / J_Γ`, for an enrichment function
//! `μ = Σ_kl ∂_kF g^{kl} ∂_l φ̂`.

use super::quadrature::{gauss_legendre, span_rule};
use crate::error::{Error, Result};
use crate::geometry::{FaceTag, InterfaceRecord, MapEval, Role, Side};
use crate::spaces::{trace_space, DiscreteSpace, SplineComplex, TraceFlavor, TraceSpace};
use crate::sparse::CsrMatrix;
use crate::splines::basis_ders_unchecked;
use rayon::prelude::*;

/// Multiplier flavor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MultiplierKind {
    /// `M_h`.
    Standard,
    /// `M̃_h = M_h ⊕ ∇_Γ γ⁰(span of interface-internal vertex functions)`.
    Enriched,
}

/// One dependent interface face and its multiplier block.
#[derive(Clone, Debug)]
pub struct MultiplierFace {
    pub patch: usize,
    pub side: Side,
    pub trace: TraceSpace,
    pub offset: usize,
    /// Interface-internal vertices at corners of this face:
    /// `(enrichment row, face vertex index along t0, along t1)`.
    pub corners: Vec<(usize, usize, usize)>,
}

/// Multiplier space on the dependent side of the interface.
#[derive(Clone, Debug)]
pub struct MultiplierSpace {
    pub kind: MultiplierKind,
    pub faces: Vec<MultiplierFace>,
    /// Global vertex ids of the enrichment functions (empty for `M_h`).
    pub enrichment: Vec<usize>,
    standard_dim: usize,
}

impl MultiplierSpace {
    pub fn dim(&self) -> usize {
        self.standard_dim + self.enrichment.len()
    }

    pub fn standard_dim(&self) -> usize {
        self.standard_dim
    }
}

/// Builds `M_h` or `M̃_h` on the dependent interface faces of `complex`.
pub fn build_multiplier(complex: &SplineComplex, kind: MultiplierKind) -> Result<MultiplierSpace> {
    let d = complex.domain();
    let mesh = complex.mesh();
    let space1 = complex.space(1);
    let z = mesh.interface_internal_vertices();
    let enrichment = if kind == MultiplierKind::Enriched {
        z
    } else {
        Vec::new()
    };
    let mut faces = Vec::new();
    let mut offset = 0;
    for p in 0..d.num_patches() {
        if d.roles[p] != Role::Dependent {
            continue;
        }
        for side in Side::ALL {
            if !matches!(d.tag(p, side), Some(FaceTag::Interface(_))) {
                continue;
            }
            let trace = trace_space(complex, &space1, p, side, TraceFlavor::Div)?;
            let n = mesh.counts(p);
            let [t0, t1] = side.tangents();
            let mut corners = Vec::new();
            for c in 0..4 {
                let mut v = [0; 3];
                v[side.dir()] = if side.is_max() { n[side.dir()] - 1 } else { 0 };
                let a0 = if c & 1 == 1 { n[t0] - 1 } else { 0 };
                let a1 = if c & 2 == 2 { n[t1] - 1 } else { 0 };
                v[t0] = a0;
                v[t1] = a1;
                let g = mesh.global(0, p, 0, v).0;
                if let Some(row) = enrichment.iter().position(|&x| x == g) {
                    corners.push((row, a0, a1));
                }
            }
            let dim = trace.dim();
            faces.push(MultiplierFace {
                patch: p,
                side,
                trace,
                offset,
                corners,
            });
            offset += dim;
        }
    }
    Ok(MultiplierSpace {
        kind,
        faces,
        enrichment,
        standard_dim: offset,
    })
}

/// Surface frame of a dependent face at a mapped point.
struct Frame {
    a: [[f64; 3]; 2],
    ginv: [[f64; 2]; 2],
    jac: f64,
}

fn frame(m: &MapEval, side: Side) -> Frame {
    let t = side.tangents();
    let a: [[f64; 3]; 2] = std::array::from_fn(|k| std::array::from_fn(|i| m.jac[i][t[k]]));
    let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let g = [
        [dot(a[0], a[0]), dot(a[0], a[1])],
        [dot(a[1], a[0]), dot(a[1], a[1])],
    ];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    Frame {
        a,
        ginv: [
            [g[1][1] / det, -g[0][1] / det],
            [-g[1][0] / det, g[0][0] / det],
        ],
        jac: det.sqrt(),
    }
}

/// Physical multiplier vectors `(row, μ)` at face point `u`.
fn multiplier_vectors(
    complex: &SplineComplex,
    face: &MultiplierFace,
    standard_dim: usize,
    fr: &Frame,
    u: [f64; 2],
) -> Vec<(usize, [f64; 3])> {
    let mut out: Vec<(usize, [f64; 3])> = face
        .trace
        .eval(u)
        .into_iter()
        .map(|(i, mu)| {
            let v = std::array::from_fn(|c| (fr.a[0][c] * mu[0] + fr.a[1][c] * mu[1]) / fr.jac);
            (face.offset + i, v)
        })
        .collect();
    if !face.corners.is_empty() {
        let b = complex.basis(face.patch);
        let t = face.side.tangents();
        let ev: [(usize, Vec<Vec<f64>>); 2] =
            std::array::from_fn(|k| basis_ders_unchecked(&b.knots[t[k]], u[k], 1));
        for &(row, a0, a1) in &face.corners {
            let val = |k: usize, a: usize, der: usize| -> f64 {
                let (f, v) = &ev[k];
                a.checked_sub(*f)
                    .and_then(|o| v[der].get(o).copied())
                    .unwrap_or(0.0)
            };
            let grad = [val(0, a0, 1) * val(1, a1, 0), val(0, a0, 0) * val(1, a1, 1)];
            if grad == [0.0, 0.0] {
                continue;
            }
            let contra = [
                fr.ginv[0][0] * grad[0] + fr.ginv[0][1] * grad[1],
                fr.ginv[1][0] * grad[0] + fr.ginv[1][1] * grad[1],
            ];
            let v = std::array::from_fn(|c| fr.a[0][c] * contra[0] + fr.a[1][c] * contra[1]);
            out.push((standard_dim + row, v));
        }
    }
    out
}

/// Physical 1-form values `(dof, sign·ψ)` of the trace functions of `tr`
/// at face point `v`, given `DF⁻¹` of the owning patch there.
fn trace_vectors(tr: &TraceSpace, inv: &[[f64; 3]; 3], v: [f64; 2]) -> Vec<(usize, [f64; 3])> {
    let t = tr.side.tangents();
    tr.eval(v)
        .into_iter()
        .filter_map(|(i, c)| {
            let (dof, s) = tr.parent[i]?;
            let mut ref3 = [0.0; 3];
            ref3[t[0]] = c[0];
            ref3[t[1]] = c[1];
            let phys: [f64; 3] =
                std::array::from_fn(|a| s * (0..3).map(|b| inv[b][a] * ref3[b]).sum::<f64>());
            Some((dof, phys))
        })
        .collect()
}

fn dot(x: [f64; 3], y: [f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

/// Coupling matrices `∫ γ¹ψ_a · μ_m ds` for dependent and independent
/// DoFs (both `dim M × dim space1`); the mortar constraint reads
/// `(dependent − independent) a = 0`.
#[derive(Clone, Debug)]
pub struct Coupling {
    pub dependent: CsrMatrix,
    pub independent: CsrMatrix,
}

impl Coupling {
    /// `G = G¹ − G²`.
    pub fn constraint(&self) -> CsrMatrix {
        self.dependent.add_scaled(&self.independent, -1.0)
    }
}

/// Assembles the coupling matrices on the merged interface grids.
pub fn assemble_coupling(
    complex: &SplineComplex,
    space1: &DiscreteSpace,
    multiplier: &MultiplierSpace,
) -> Result<Coupling> {
    if space1.form_degree() != 1 {
        return Err(Error::Config("coupling needs the 1-form space".into()));
    }
    let d = complex.domain();
    let p = complex.degree();
    let npts = p + 1 + usize::from(d.patches.iter().any(|q| q.is_rational())) * 2;
    let records: Vec<&InterfaceRecord> = d.interfaces.iter().collect();
    let parts: Vec<Result<(Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>)>> = multiplier
        .faces
        .par_iter()
        .map(|face| {
            let patch = &d.patches[face.patch];
            let dep_trace = trace_space(complex, space1, face.patch, face.side, TraceFlavor::Curl)?;
            let t = face.side.tangents();
            let b = complex.basis(face.patch);
            let bp = [b.knots[t[0]].breakpoints(), b.knots[t[1]].breakpoints()];
            let mut dep = Vec::new();
            let r0 = span_rule(&bp[0], npts);
            let r1 = span_rule(&bp[1], npts);
            for (x1, w1) in &r1 {
                for (x0, w0) in &r0 {
                    for (v, wv) in x1.iter().zip(w1) {
                        for (u, wu) in x0.iter().zip(w0) {
                            let uu = [*u, *v];
                            let m = patch.eval_map(face.side.lift(uu))?;
                            let inv = m.inverse();
                            let fr = frame(&m, face.side);
                            let w = wu * wv * fr.jac;
                            let mus =
                                multiplier_vectors(complex, face, multiplier.standard_dim, &fr, uu);
                            for (dof, psi) in trace_vectors(&dep_trace, &inv, uu) {
                                for &(r, mu) in &mus {
                                    dep.push((r, dof, w * dot(psi, mu)));
                                }
                            }
                        }
                    }
                }
            }
            let mut ind = Vec::new();
            let (gx, gw) = gauss_legendre(npts);
            for rec in records
                .iter()
                .filter(|r| r.dependent == (face.patch, face.side))
            {
                let (ip, iside) = rec.independent;
                let ipatch = &d.patches[ip];
                let itrace = trace_space(complex, space1, ip, iside, TraceFlavor::Curl)?;
                let it = iside.tangents();
                let ib = complex.basis(ip);
                let ibp = [ib.knots[it[0]].breakpoints(), ib.knots[it[1]].breakpoints()];
                let cells = rec.map.merged_breaks([&bp[0], &bp[1]], [&ibp[0], &ibp[1]]);
                let spans = |c: &Vec<f64>| -> Vec<(f64, f64)> {
                    c.windows(2)
                        .filter(|w| w[0].is_finite() && w[1].is_finite())
                        .map(|w| (w[0], w[1]))
                        .collect()
                };
                for (a1, b1) in spans(&cells[1]) {
                    for (a0, b0) in spans(&cells[0]) {
                        for (tv, wv) in gx.iter().zip(&gw) {
                            for (tu, wu) in gx.iter().zip(&gw) {
                                let uu = [a0 + (b0 - a0) * tu, a1 + (b1 - a1) * tv];
                                let wq = wu * wv * (b0 - a0) * (b1 - a1);
                                let m = patch.eval_map(face.side.lift(uu))?;
                                let fr = frame(&m, face.side);
                                let vv = rec.map.apply(uu);
                                let mi = ipatch.eval_map(iside.lift(vv))?;
                                let inv = mi.inverse();
                                let mus = multiplier_vectors(
                                    complex,
                                    face,
                                    multiplier.standard_dim,
                                    &fr,
                                    uu,
                                );
                                for (dof, psi) in trace_vectors(&itrace, &inv, vv) {
                                    for &(r, mu) in &mus {
                                        ind.push((r, dof, wq * fr.jac * dot(psi, mu)));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            Ok((dep, ind))
        })
        .collect();
    let mut dep = Vec::new();
    let mut ind = Vec::new();
    for part in parts {
        let (a, b) = part?;
        dep.extend(a);
        ind.extend(b);
    }
    let n = multiplier.dim();
    Ok(Coupling {
        dependent: CsrMatrix::from_triplets(n, space1.dim(), dep).pruned(0.0),
        independent: CsrMatrix::from_triplets(n, space1.dim(), ind).pruned(0.0),
    })
}

/// Multiplier Gram matrix `N[m][n] = ∫_Γ μ_m·μ_n ds`.
pub fn assemble_multiplier_gram(
    complex: &SplineComplex,
    multiplier: &MultiplierSpace,
) -> Result<CsrMatrix> {
    let d = complex.domain();
    let p = complex.degree();
    let npts = p + 1 + usize::from(d.patches.iter().any(|q| q.is_rational())) * 2;
    let parts: Vec<Result<Vec<(usize, usize, f64)>>> = multiplier
        .faces
        .par_iter()
        .map(|face| {
            let patch = &d.patches[face.patch];
            let t = face.side.tangents();
            let b = complex.basis(face.patch);
            let r0 = span_rule(&b.knots[t[0]].breakpoints(), npts);
            let r1 = span_rule(&b.knots[t[1]].breakpoints(), npts);
            let mut out = Vec::new();
            for (x1, w1) in &r1 {
                for (x0, w0) in &r0 {
                    for (v, wv) in x1.iter().zip(w1) {
                        for (u, wu) in x0.iter().zip(w0) {
                            let uu = [*u, *v];
                            let m = patch.eval_map(face.side.lift(uu))?;
                            let fr = frame(&m, face.side);
                            let w = wu * wv * fr.jac;
                            let mus =
                                multiplier_vectors(complex, face, multiplier.standard_dim, &fr, uu);
                            for &(r, mu) in &mus {
                                for &(s, nu) in &mus {
                                    out.push((r, s, w * dot(mu, nu)));
                                }
                            }
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut trips = Vec::new();
    for part in parts {
        trips.extend(part?);
    }
    Ok(CsrMatrix::from_triplets(multiplier.dim(), multiplier.dim(), trips).pruned(0.0))
}
