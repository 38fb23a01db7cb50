//! Spline De Rham spaces on multi-patch domains.
//!
//! A [`SplineComplex`] owns a discretized domain (every patch represented in
//! the analysis spline space) and its identified control mesh. The space of
//! `k`-forms has one basis function per `k`-entity of the control mesh:
//!
//! | k | component `c` (per direction) | push-forward            |
//! |---|-------------------------------|-------------------------|
//! | 0 | `B ⊗ B ⊗ B`                   | `φ̂ ∘ F⁻¹`               |
//! | 1 | `D` in `c`, `B` elsewhere     | `DF⁻ᵀ û`                |
//! | 2 | `B` in `c`, `D` elsewhere     | `DF û / det DF`         |
//! | 3 | `D ⊗ D ⊗ D`                   | `û / det DF`            |
//!
//! `B` are the degree-`p` B-splines of the patch knots, `D` the
//! Curry–Schoenberg splines of the reduced knots. With the edge `j → j+1`
//! attached to `D_j`, the derivative identity `B'_i = D_{i−1} − D_i` makes the
//! exterior derivatives the signed incidence matrices of the control mesh.

use crate::error::{Error, Result};
use crate::geometry::{
    builtin_geometry, extract_control_mesh, ControlMesh, Discretization, FaceTag, Flags, MapEval,
    MultiPatchDomain, Side,
};
use crate::sparse::CsrMatrix;
use crate::splines::{
    basis_ders_unchecked, curry_schoenberg_unchecked, Factor, KnotVector, ReducedKnotVector,
};

/// Per-direction univariate bases of one patch.
#[derive(Clone, Debug)]
pub struct PatchBasis {
    pub knots: [KnotVector; 3],
    pub reduced: [ReducedKnotVector; 3],
}

/// Univariate `B`, `B'` and `D` values at one parameter.
#[derive(Clone, Debug, Default)]
pub struct PointBasis1d {
    pub b_first: usize,
    pub b: Vec<f64>,
    pub db: Vec<f64>,
    pub d_first: usize,
    pub d: Vec<f64>,
}

impl PointBasis1d {
    pub fn new(knots: &KnotVector, reduced: &ReducedKnotVector, x: f64) -> Self {
        let (b_first, mut v) = basis_ders_unchecked(knots, x, 1);
        let db = v.pop().expect("derivative row");
        let b = v.pop().expect("value row");
        let (d_first, d) = curry_schoenberg_unchecked(reduced, x);
        Self {
            b_first,
            b,
            db,
            d_first,
            d,
        }
    }
}

impl PatchBasis {
    pub fn new(knots: [KnotVector; 3]) -> Result<Self> {
        let [r0, r1, r2] = [knots[0].reduced(), knots[1].reduced(), knots[2].reduced()];
        Ok(Self {
            reduced: [r0?, r1?, r2?],
            knots,
        })
    }

    pub fn at(&self, xi: [f64; 3]) -> [PointBasis1d; 3] {
        std::array::from_fn(|d| PointBasis1d::new(&self.knots[d], &self.reduced[d], xi[d]))
    }
}

/// Discretized domain together with its control mesh.
#[derive(Clone, Debug)]
pub struct SplineComplex {
    domain: MultiPatchDomain,
    mesh: ControlMesh,
    bases: Vec<PatchBasis>,
    degree: usize,
}

impl SplineComplex {
    /// Uses the patch knot vectors as the analysis spaces; all patches must
    /// share one degree `p ≥ 1` in every direction.
    pub fn new(domain: MultiPatchDomain) -> Result<Self> {
        let degree = domain
            .patches
            .first()
            .map(|p| p.knots()[0].degree())
            .ok_or_else(|| Error::Geometry("empty domain".into()))?;
        if degree < 1
            || domain
                .patches
                .iter()
                .any(|p| p.knots().iter().any(|k| k.degree() != degree))
        {
            return Err(Error::Unsupported(
                "patches must share one degree p ≥ 1 in all directions".into(),
            ));
        }
        domain.validate()?;
        let mesh = extract_control_mesh(&domain)?;
        let bases = domain
            .patches
            .iter()
            .map(|p| PatchBasis::new(p.knots().clone()))
            .collect::<Result<_>>()?;
        Ok(Self {
            domain,
            mesh,
            bases,
            degree,
        })
    }

    /// Refines `domain` to `disc` and builds the complex.
    pub fn discretize(domain: &MultiPatchDomain, disc: &Discretization) -> Result<Self> {
        Self::new(domain.refine(disc)?)
    }

    /// Builtin geometry by name, discretized.
    pub fn builtin(name: &str, disc: &Discretization) -> Result<Self> {
        Self::discretize(&builtin_geometry(name)?, disc)
    }

    pub fn domain(&self) -> &MultiPatchDomain {
        &self.domain
    }

    pub fn mesh(&self) -> &ControlMesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self, patch: usize) -> &PatchBasis {
        &self.bases[patch]
    }

    /// Largest parametric knot span over all patches and directions.
    pub fn mesh_size(&self) -> f64 {
        self.bases
            .iter()
            .flat_map(|b| b.knots.iter().map(KnotVector::mesh_size))
            .fold(0.0, f64::max)
    }

    /// Space of `k`-forms with Dirichlet entities removed.
    pub fn space(&self, k: usize) -> DiscreteSpace {
        build_space(self, k)
    }
}

/// Subset of the `k`-entities of a control mesh used as degrees of freedom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteSpace {
    k: usize,
    dof_of_entity: Vec<Option<usize>>,
    entity_of_dof: Vec<usize>,
}

impl DiscreteSpace {
    /// All `k`-entities except those selected by `constrained`.
    pub fn with_constraint(
        mesh: &ControlMesh,
        k: usize,
        constrained: impl Fn(usize, Flags) -> bool,
    ) -> Self {
        let mut dof_of_entity = vec![None; mesh.num(k)];
        let mut entity_of_dof = Vec::new();
        for (g, slot) in dof_of_entity.iter_mut().enumerate() {
            if !constrained(g, mesh.flags(k, g)) {
                *slot = Some(entity_of_dof.len());
                entity_of_dof.push(g);
            }
        }
        Self {
            k,
            dof_of_entity,
            entity_of_dof,
        }
    }

    pub fn form_degree(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.entity_of_dof.len()
    }

    pub fn num_entities(&self) -> usize {
        self.dof_of_entity.len()
    }

    pub fn dof(&self, entity: usize) -> Option<usize> {
        self.dof_of_entity[entity]
    }

    pub fn entity(&self, dof: usize) -> usize {
        self.entity_of_dof[dof]
    }

    pub fn entities(&self) -> &[usize] {
        &self.entity_of_dof
    }

    /// Free-DoF vector expanded to all entities, constrained ones zero.
    pub fn extend(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_entities()];
        for (i, &g) in self.entity_of_dof.iter().enumerate() {
            out[g] = x[i];
        }
        out
    }

    /// Entity vector restricted to the free DoFs.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.entity_of_dof.iter().map(|&g| full[g]).collect()
    }

    /// Per patch-local entity: `(dof, sign)` or `None` when constrained.
    pub fn local_dofs(&self, mesh: &ControlMesh, patch: usize) -> Vec<Option<(usize, f64)>> {
        mesh.patch_map(self.k, patch)
            .iter()
            .map(|&(g, s)| self.dof_of_entity[g].map(|d| (d, f64::from(s))))
            .collect()
    }
}

/// Space of `k`-forms on `complex` with Dirichlet-flagged entities removed.
pub fn build_space(complex: &SplineComplex, k: usize) -> DiscreteSpace {
    DiscreteSpace::with_constraint(&complex.mesh, k, |_, f| f.dirichlet)
}

/// Entities of `space`'s form degree constrained by Dirichlet tags.
pub fn restrict_dirichlet(space: &DiscreteSpace, mesh: &ControlMesh) -> Vec<usize> {
    (0..mesh.num(space.form_degree()))
        .filter(|&g| mesh.flags(space.form_degree(), g).dirichlet)
        .collect()
}

/// Exterior derivative `d: Λᵏ → Λᵏ⁺¹` on all entities (signed incidence).
pub fn derivative_full(mesh: &ControlMesh, k: usize) -> CsrMatrix {
    CsrMatrix::from_triplets(mesh.num(k + 1), mesh.num(k), mesh.incidence(k))
}

/// Exterior derivative restricted to the free DoFs of both spaces.
pub fn derivative_matrix(
    mesh: &ControlMesh,
    from: &DiscreteSpace,
    to: &DiscreteSpace,
) -> Result<CsrMatrix> {
    if to.form_degree() != from.form_degree() + 1
        || from.num_entities() != mesh.num(from.form_degree())
    {
        return Err(Error::Config(
            "derivative needs consecutive spaces on the same mesh".into(),
        ));
    }
    Ok(derivative_full(mesh, from.form_degree()).select(to.entities(), from.entities()))
}

pub fn gradient_matrix(
    mesh: &ControlMesh,
    s0: &DiscreteSpace,
    s1: &DiscreteSpace,
) -> Result<CsrMatrix> {
    derivative_matrix(mesh, s0, s1)
}

pub fn curl_matrix(
    mesh: &ControlMesh,
    s1: &DiscreteSpace,
    s2: &DiscreteSpace,
) -> Result<CsrMatrix> {
    derivative_matrix(mesh, s1, s2)
}

pub fn div_matrix(mesh: &ControlMesh, s2: &DiscreteSpace, s3: &DiscreteSpace) -> Result<CsrMatrix> {
    derivative_matrix(mesh, s2, s3)
}

/// Levi-Civita symbol on `{0,1,2}`.
pub(crate) fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    if i == j || j == k || i == k {
        0.0
    } else if (j + 3 - i) % 3 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Reference values of one local `k`-form basis function and of its
/// exterior derivative (gradient, curl, divergence).
pub(crate) fn reference_form(
    k: usize,
    comp: usize,
    i: [usize; 3],
    pb: &[PointBasis1d; 3],
) -> Option<([f64; 3], [f64; 3])> {
    // per direction: (value, derivative or 0 for D factors)
    let mut val = [0.0; 3];
    let mut der = [0.0; 3];
    for d in 0..3 {
        let use_d = match k {
            0 => false,
            1 => d == comp,
            2 => d != comp,
            _ => true,
        };
        let p = &pb[d];
        if use_d {
            let o = i[d].checked_sub(p.d_first)?;
            val[d] = *p.d.get(o)?;
        } else {
            let o = i[d].checked_sub(p.b_first)?;
            val[d] = *p.b.get(o)?;
            der[d] = p.db[o];
        }
    }
    let prod = val[0] * val[1] * val[2];
    let partial = |d: usize| der[d] * val[(d + 1) % 3] * val[(d + 2) % 3];
    Some(match k {
        0 => ([prod, 0.0, 0.0], [partial(0), partial(1), partial(2)]),
        1 => {
            let mut v = [0.0; 3];
            v[comp] = prod;
            let mut c = [0.0; 3];
            for (a, ca) in c.iter_mut().enumerate() {
                for b in 0..3 {
                    if b != comp {
                        *ca += levi_civita(a, b, comp) * partial(b);
                    }
                }
            }
            (v, c)
        }
        2 => {
            let mut v = [0.0; 3];
            v[comp] = prod;
            (v, [partial(comp), 0.0, 0.0])
        }
        _ => ([prod, 0.0, 0.0], [0.0; 3]),
    })
}

/// Physical value and derivative of a reference `k`-form at a mapped point.
pub(crate) fn push_forward(
    k: usize,
    m: &MapEval,
    inv: &[[f64; 3]; 3],
    v: [f64; 3],
    dv: [f64; 3],
) -> ([f64; 3], [f64; 3]) {
    let jv = |u: [f64; 3]| -> [f64; 3] {
        std::array::from_fn(|a| (0..3).map(|b| m.jac[a][b] * u[b] / m.det).sum())
    };
    let covariant = |u: [f64; 3]| -> [f64; 3] {
        std::array::from_fn(|a| (0..3).map(|b| inv[b][a] * u[b]).sum())
    };
    match k {
        0 => (v, covariant(dv)),
        1 => (covariant(v), jv(dv)),
        2 => (jv(v), [dv[0] / m.det, 0.0, 0.0]),
        _ => ([v[0] / m.det, 0.0, 0.0], [0.0; 3]),
    }
}

/// Field of entity coefficients `coeffs` (form degree `k`) evaluated at `xi`
/// in `patch`: physical value and physical derivative (gradient for k=0,
/// curl for k=1, divergence in the first slot for k=2).
pub fn evaluate(
    complex: &SplineComplex,
    k: usize,
    coeffs: &[f64],
    patch: usize,
    xi: [f64; 3],
) -> Result<([f64; 3], [f64; 3])> {
    let mesh = complex.mesh();
    if coeffs.len() != mesh.num(k) {
        return Err(Error::Config(format!(
            "{} coefficients for {} entities",
            coeffs.len(),
            mesh.num(k)
        )));
    }
    let m = complex.domain().patches[patch].eval_map(xi)?;
    let inv = m.inverse();
    let pb = complex.basis(patch).at(xi);
    let map = mesh.patch_map(k, patch);
    let p = complex.degree();
    let mut rv = [0.0; 3];
    let mut rd = [0.0; 3];
    let ncomp = if k == 1 || k == 2 { 3 } else { 1 };
    for comp in 0..ncomp {
        // local index ranges per direction
        let ranges: [std::ops::Range<usize>; 3] = std::array::from_fn(|d| {
            let use_d = match k {
                0 => false,
                1 => d == comp,
                2 => d != comp,
                _ => true,
            };
            if use_d {
                pb[d].d_first..pb[d].d_first + p
            } else {
                pb[d].b_first..pb[d].b_first + p + 1
            }
        });
        for i2 in ranges[2].clone() {
            for i1 in ranges[1].clone() {
                for i0 in ranges[0].clone() {
                    let i = [i0, i1, i2];
                    let Some((v, dv)) = reference_form(k, comp, i, &pb) else {
                        continue;
                    };
                    let (g, s) = map[mesh.local_index(k, patch, comp, i)];
                    let c = coeffs[g] * f64::from(s);
                    for a in 0..3 {
                        rv[a] += c * v[a];
                        rd[a] += c * dv[a];
                    }
                }
            }
        }
    }
    Ok(push_forward(k, &m, &inv, rv, rd))
}

/// Trace-space flavor on a boundary face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFlavor {
    /// `S_p¹(Γ)`: component along `t_j` is `D` in `t_j`, `B` across.
    Curl,
    /// `S_{p−1}^{1*}(Γ)`: component along `t_j` is `B(Ξ')` in `t_j`,
    /// `D(Ξ'')` across.
    Div,
}

/// Tangential spline space on one patch face.
#[derive(Clone, Debug)]
pub struct TraceSpace {
    pub patch: usize,
    pub side: Side,
    pub flavor: TraceFlavor,
    /// `factors[j] = [factor along t0, factor along t1]` for component `j`.
    pub factors: [[Factor; 2]; 2],
    /// Curl flavor: parent `(dof, sign)` per trace function, `None` when
    /// constrained. Empty for the div flavor.
    pub parent: Vec<Option<(usize, f64)>>,
}

impl TraceSpace {
    pub fn component_counts(&self, j: usize) -> [usize; 2] {
        [
            self.factors[j][0].num_basis(),
            self.factors[j][1].num_basis(),
        ]
    }

    /// Total number of trace functions (including constrained ones).
    pub fn dim(&self) -> usize {
        (0..2)
            .map(|j| self.component_counts(j).iter().product::<usize>())
            .sum()
    }

    /// Number of trace functions whose parent DoF is free (curl flavor) or
    /// that vanish nowhere on the face boundary tangentially (div flavor).
    pub fn free_dim(&self) -> usize {
        match self.flavor {
            TraceFlavor::Curl => self.parent.iter().flatten().count(),
            TraceFlavor::Div => self.dim(),
        }
    }

    /// Nonzero functions at face point `u`: `(index, reference tangential
    /// components)` with index = component offset + `a0 + n0·a1`.
    pub fn eval(&self, u: [f64; 2]) -> Vec<(usize, [f64; 2])> {
        let mut out = Vec::new();
        let mut off = 0;
        for j in 0..2 {
            let n = self.component_counts(j);
            let (f0, v0) = self.factors[j][0].eval(u[0]);
            let (f1, v1) = self.factors[j][1].eval(u[1]);
            for (b, &y) in v1.iter().enumerate() {
                for (a, &x) in v0.iter().enumerate() {
                    let mut val = [0.0; 2];
                    val[j] = x * y;
                    out.push((off + (f0 + a) + n[0] * (f1 + b), val));
                }
            }
            off += n[0] * n[1];
        }
        out
    }
}

/// Trace space of the 1-forms of `complex` on face `(patch, side)`.
///
/// The face must be a boundary face (tagged, not glued or periodic).
pub fn trace_space(
    complex: &SplineComplex,
    space1: &DiscreteSpace,
    patch: usize,
    side: Side,
    flavor: TraceFlavor,
) -> Result<TraceSpace> {
    let d = complex.domain();
    match d.tag(patch, side) {
        Some(FaceTag::Periodic(_)) | None => {
            return Err(Error::Geometry(format!(
                "patch {patch} face {} is not a boundary face",
                side.name()
            )))
        }
        _ => {}
    }
    let b = complex.basis(patch);
    let t = side.tangents();
    let factors: [[Factor; 2]; 2] = match flavor {
        TraceFlavor::Curl => std::array::from_fn(|j| {
            std::array::from_fn(|a| {
                if a == j {
                    Factor::Reduced(b.reduced[t[a]].clone())
                } else {
                    Factor::Full(b.knots[t[a]].clone())
                }
            })
        }),
        TraceFlavor::Div => {
            let once: [KnotVector; 2] = [0, 1].map(|a| b.reduced[t[a]].as_knot_vector().clone());
            let twice: Vec<ReducedKnotVector> = once
                .iter()
                .map(KnotVector::reduced)
                .collect::<Result<_>>()?;
            std::array::from_fn(|j| {
                std::array::from_fn(|a| {
                    if a == j {
                        Factor::Full(once[a].clone())
                    } else {
                        Factor::Reduced(twice[a].clone())
                    }
                })
            })
        }
    };
    let mut ts = TraceSpace {
        patch,
        side,
        flavor,
        factors,
        parent: Vec::new(),
    };
    if flavor == TraceFlavor::Curl {
        let mesh = complex.mesh();
        let n = mesh.counts(patch);
        let local = space1.local_dofs(mesh, patch);
        for j in 0..2 {
            let cnt = ts.component_counts(j);
            for a1 in 0..cnt[1] {
                for a0 in 0..cnt[0] {
                    let mut i = [0; 3];
                    i[t[0]] = a0;
                    i[t[1]] = a1;
                    i[side.dir()] = if side.is_max() { n[side.dir()] - 1 } else { 0 };
                    ts.parent.push(local[mesh.local_index(1, patch, t[j], i)]);
                }
            }
        }
    }
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Discretization;

    #[test]
    fn levi_civita_values() {
        assert_eq!(levi_civita(0, 1, 2), 1.0);
        assert_eq!(levi_civita(1, 2, 0), 1.0);
        assert_eq!(levi_civita(1, 0, 2), -1.0);
        assert_eq!(levi_civita(0, 0, 2), 0.0);
    }

    #[test]
    fn single_cube_dimensions() {
        let c = SplineComplex::builtin("cube", &Discretization::new(2, 2)).unwrap();
        assert_eq!(c.mesh().num(0), 64);
        assert_eq!(c.mesh().num(1), 144);
        assert_eq!(c.space(0).dim(), 8);
        let free = DiscreteSpace::with_constraint(c.mesh(), 1, |_, _| false);
        assert_eq!(free.dim(), 3 * 3 * 4 * 4);
    }

    #[test]
    fn trace_dimensions() {
        let c = SplineComplex::builtin("cube", &Discretization::new(2, 2)).unwrap();
        let s1 = c.space(1);
        let tc = trace_space(&c, &s1, 0, Side::ZMax, TraceFlavor::Curl).unwrap();
        assert_eq!(tc.dim(), 24);
        let td = trace_space(&c, &s1, 0, Side::ZMax, TraceFlavor::Div).unwrap();
        // equals the trace of the Dirichlet-constrained interior: 2·(n−1)(n−2)
        assert_eq!(td.dim(), 2 * 3 * 2);
    }
}
