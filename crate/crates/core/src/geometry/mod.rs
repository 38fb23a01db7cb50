//! Patch parametrizations, multi-patch topology and control meshes.
//!
//! A [`Patch`] is a trivariate NURBS map stored with homogeneous control
//! points `(w·x, w·y, w·z, w)`. A [`MultiPatchDomain`] adds boundary tags,
//! conforming glue between patches of one subdomain, periodic face pairs and
//! mortar interface records between the dependent and independent
//! subdomains.

mod builtin;
mod json;
mod mesh;

pub use builtin::{builtin_geometry, Builtin};
pub use json::{load_domain, parse_domain, to_json};
pub use mesh::{extract_control_mesh, ControlMesh, EntityRef, Flags};

use crate::error::{Error, Result};
use crate::splines::{basis_ders_unchecked, KnotVector};
use faer::prelude::Solve;
use faer::Mat;

/// One of the six sides of the parametric cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Side {
    pub const ALL: [Side; 6] = [
        Side::XMin,
        Side::XMax,
        Side::YMin,
        Side::YMax,
        Side::ZMin,
        Side::ZMax,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Side {
        Self::ALL[i]
    }

    /// Normal parametric direction.
    pub fn dir(self) -> usize {
        self.index() / 2
    }

    pub fn is_max(self) -> bool {
        self.index() % 2 == 1
    }

    /// Tangential directions in increasing order.
    pub fn tangents(self) -> [usize; 2] {
        match self.dir() {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }

    pub fn name(self) -> &'static str {
        ["xmin", "xmax", "ymin", "ymax", "zmin", "zmax"][self.index()]
    }

    pub fn parse(s: &str) -> Result<Side> {
        Side::ALL
            .iter()
            .copied()
            .find(|side| side.name() == s)
            .ok_or_else(|| Error::Geometry(format!("unknown side `{s}`")))
    }

    /// Parametric point on this side for face coordinates `u`.
    pub fn lift(self, u: [f64; 2]) -> [f64; 3] {
        let mut xi = [0.0; 3];
        let [t0, t1] = self.tangents();
        xi[t0] = u[0];
        xi[t1] = u[1];
        xi[self.dir()] = if self.is_max() { 1.0 } else { 0.0 };
        xi
    }
}

/// Boundary condition tag of a patch face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceTag {
    Dirichlet,
    Neumann,
    Interface(u32),
    Periodic(u32),
}

impl FaceTag {
    pub fn parse(s: &str) -> Result<FaceTag> {
        let bad = || Error::Geometry(format!("unknown face tag `{s}`"));
        match s {
            "dirichlet" => Ok(FaceTag::Dirichlet),
            "neumann" => Ok(FaceTag::Neumann),
            _ => {
                let (kind, id) = s.split_once(':').ok_or_else(bad)?;
                let id: u32 = id.parse().map_err(|_| bad())?;
                match kind {
                    "interface" => Ok(FaceTag::Interface(id)),
                    "periodic" => Ok(FaceTag::Periodic(id)),
                    _ => Err(bad()),
                }
            }
        }
    }

    pub fn label(self) -> String {
        match self {
            FaceTag::Dirichlet => "dirichlet".into(),
            FaceTag::Neumann => "neumann".into(),
            FaceTag::Interface(id) => format!("interface:{id}"),
            FaceTag::Periodic(id) => format!("periodic:{id}"),
        }
    }
}

/// Mortar role of the subdomain a patch belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Role {
    /// `Ω₁`, carries the multiplier.
    #[default]
    Dependent,
    /// `Ω₂`, its interface is treated like a Neumann side.
    Independent,
}

/// Result of evaluating a patch map.
#[derive(Clone, Copy, Debug)]
pub struct MapEval {
    pub x: [f64; 3],
    /// `jac[i][j] = ∂x_i / ∂ξ_j`.
    pub jac: [[f64; 3]; 3],
    pub det: f64,
}

impl MapEval {
    /// `DF⁻¹` (rows indexed by parameter direction).
    pub fn inverse(&self) -> [[f64; 3]; 3] {
        let a = &self.jac;
        let d = self.det;
        let mut inv = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
                let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
                inv[i][j] = (a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]) / d;
            }
        }
        inv
    }
}

/// Trivariate NURBS patch with homogeneous control points.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    knots: [KnotVector; 3],
    points: Vec<[f64; 4]>,
}

impl Patch {
    /// `points` are homogeneous `(w·x, w·y, w·z, w)`, first direction fastest.
    pub fn new(knots: [KnotVector; 3], points: Vec<[f64; 4]>) -> Result<Self> {
        let n: usize = knots.iter().map(KnotVector::num_basis).product();
        if points.len() != n {
            return Err(Error::Geometry(format!(
                "{} control points for {n} basis functions",
                points.len()
            )));
        }
        if points.iter().any(|p| p[3] <= 0.0 || !p[3].is_finite()) {
            return Err(Error::Geometry("weights must be positive".into()));
        }
        Ok(Self { knots, points })
    }

    /// Polynomial patch from Cartesian control points.
    pub fn from_cartesian(knots: [KnotVector; 3], points: Vec<[f64; 3]>) -> Result<Self> {
        Self::new(
            knots,
            points
                .into_iter()
                .map(|p| [p[0], p[1], p[2], 1.0])
                .collect(),
        )
    }

    pub fn knots(&self) -> &[KnotVector; 3] {
        &self.knots
    }

    pub fn counts(&self) -> [usize; 3] {
        [
            self.knots[0].num_basis(),
            self.knots[1].num_basis(),
            self.knots[2].num_basis(),
        ]
    }

    pub fn homogeneous_points(&self) -> &[[f64; 4]] {
        &self.points
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        let n = self.counts();
        i[0] + n[0] * (i[1] + n[1] * i[2])
    }

    /// Cartesian control point.
    pub fn point(&self, i: [usize; 3]) -> [f64; 3] {
        let p = self.points[self.index(i)];
        [p[0] / p[3], p[1] / p[3], p[2] / p[3]]
    }

    pub fn is_rational(&self) -> bool {
        let w0 = self.points[0][3];
        self.points.iter().any(|p| p[3] != w0)
    }

    /// `F(ξ)`, `DF(ξ)` and `det DF(ξ)`.
    pub fn eval_map(&self, xi: [f64; 3]) -> Result<MapEval> {
        if let Some(&v) = xi.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain { value: v });
        }
        let b: [(usize, Vec<Vec<f64>>); 3] =
            std::array::from_fn(|d| basis_ders_unchecked(&self.knots[d], xi[d], 1));
        Ok(self.eval_with(&std::array::from_fn(|d| {
            (b[d].0, &b[d].1[0][..], &b[d].1[1][..])
        })))
    }

    /// Evaluation from precomputed per-direction `(first, values, derivatives)`.
    pub(crate) fn eval_with(&self, b: &[(usize, &[f64], &[f64]); 3]) -> MapEval {
        let n = self.counts();
        let mut a = [0.0; 4];
        let mut da = [[0.0; 4]; 3];
        for (k, (&v2, &d2)) in b[2].1.iter().zip(b[2].2).enumerate() {
            for (j, (&v1, &d1)) in b[1].1.iter().zip(b[1].2).enumerate() {
                let row = (b[1].0 + j) * n[0] + (b[2].0 + k) * n[0] * n[1];
                for (i, (&v0, &d0)) in b[0].1.iter().zip(b[0].2).enumerate() {
                    let p = &self.points[row + b[0].0 + i];
                    let w = [v0 * v1 * v2, d0 * v1 * v2, v0 * d1 * v2, v0 * v1 * d2];
                    for c in 0..4 {
                        a[c] += w[0] * p[c];
                        da[0][c] += w[1] * p[c];
                        da[1][c] += w[2] * p[c];
                        da[2][c] += w[3] * p[c];
                    }
                }
            }
        }
        let x = [a[0] / a[3], a[1] / a[3], a[2] / a[3]];
        let mut jac = [[0.0; 3]; 3];
        for (i, row) in jac.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (da[j][i] - x[i] * da[j][3]) / a[3];
            }
        }
        let det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
            - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
            + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
        MapEval { x, jac, det }
    }

    /// Homogeneous (non-divided) map, used for exact refinement.
    fn eval_homogeneous(&self, xi: [f64; 3]) -> [f64; 4] {
        let n = self.counts();
        let b: [(usize, Vec<f64>); 3] = std::array::from_fn(|d| {
            let (f, mut v) = basis_ders_unchecked(&self.knots[d], xi[d], 0);
            (f, v.swap_remove(0))
        });
        let mut a = [0.0; 4];
        for (k, &v2) in b[2].1.iter().enumerate() {
            for (j, &v1) in b[1].1.iter().enumerate() {
                for (i, &v0) in b[0].1.iter().enumerate() {
                    let p =
                        &self.points[(b[0].0 + i) + n[0] * ((b[1].0 + j) + n[1] * (b[2].0 + k))];
                    let w = v0 * v1 * v2;
                    for c in 0..4 {
                        a[c] += w * p[c];
                    }
                }
            }
        }
        a
    }

    /// Exact representation of this map in a finer spline space.
    ///
    /// The homogeneous map is interpolated at the Greville points of the new
    /// knot vectors; when the new space contains the old one (higher degree,
    /// refined knots, no smoothness increase) the result is the same map.
    pub fn refine(&self, knots: [KnotVector; 3]) -> Result<Patch> {
        let g: Vec<Vec<f64>> = knots.iter().map(KnotVector::greville).collect();
        let n = [g[0].len(), g[1].len(), g[2].len()];
        let mut data = vec![[0.0; 4]; n[0] * n[1] * n[2]];
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    data[i + n[0] * (j + n[1] * k)] =
                        self.eval_homogeneous([g[0][i], g[1][j], g[2][k]]);
                }
            }
        }
        for d in 0..3 {
            // collocation matrix A[r][c] = B_c(γ_r)
            let mut a = Mat::<f64>::zeros(n[d], n[d]);
            for (r, &x) in g[d].iter().enumerate() {
                let (f, v) = basis_ders_unchecked(&knots[d], x, 0);
                for (o, &val) in v[0].iter().enumerate() {
                    a[(r, f + o)] = val;
                }
            }
            let lu = a.partial_piv_lu();
            let stride: usize = n[..d].iter().product();
            let lines = data.len() / n[d];
            let mut rhs = Mat::<f64>::zeros(n[d], 4 * lines);
            let line_base = |l: usize| (l % stride) + (l / stride) * stride * n[d];
            for l in 0..lines {
                let base = line_base(l);
                for r in 0..n[d] {
                    for c in 0..4 {
                        rhs[(r, 4 * l + c)] = data[base + r * stride][c];
                    }
                }
            }
            let sol = lu.solve(&rhs);
            for l in 0..lines {
                let base = line_base(l);
                for r in 0..n[d] {
                    for c in 0..4 {
                        data[base + r * stride][c] = sol[(r, 4 * l + c)];
                    }
                }
            }
        }
        let refined = Patch::new(knots, data)?;
        // containment check on a sample grid
        let s = [0.0, 0.137, 0.5, 0.731, 1.0];
        let mut dev: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for &a in &s {
            for &b in &s {
                for &c in &s {
                    let p = self.eval_homogeneous([a, b, c]);
                    let q = refined.eval_homogeneous([a, b, c]);
                    for t in 0..4 {
                        dev = dev.max((p[t] - q[t]).abs());
                        scale = scale.max(p[t].abs());
                    }
                }
            }
        }
        if dev > 1e-10 * scale {
            return Err(Error::Geometry(format!(
                "refined space does not contain the geometry (deviation {dev:e})"
            )));
        }
        Ok(refined)
    }

    /// Sampled positivity test of `det DF`: `5³` Gauss points per element.
    pub fn check_jacobian(&self, patch_index: usize) -> Result<()> {
        let (gp, _) = crate::assembly::gauss_legendre(5);
        let bps: Vec<Vec<f64>> = self.knots.iter().map(KnotVector::breakpoints).collect();
        let pts = |d: usize| -> Vec<f64> {
            bps[d]
                .windows(2)
                .flat_map(|w| {
                    gp.iter()
                        .map(move |&t| w[0] + (w[1] - w[0]) * t)
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        let (p0, p1, p2) = (pts(0), pts(1), pts(2));
        let mut sign = 0.0;
        for &c in &p2 {
            for &b in &p1 {
                for &a in &p0 {
                    let m = self.eval_map([a, b, c])?;
                    if m.det == 0.0 || (sign != 0.0 && m.det.signum() != sign) {
                        return Err(Error::SingularJacobian {
                            patch: patch_index,
                            xi: [a, b, c],
                            det: m.det,
                        });
                    }
                    sign = m.det.signum();
                }
            }
        }
        if sign < 0.0 {
            return Err(Error::Geometry(format!(
                "patch {patch_index} is left-handed (det DF < 0)"
            )));
        }
        Ok(())
    }
}

/// Orientation map between two patch faces: flips act in the first face's
/// tangential coordinates, then `swap` exchanges them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct FaceMap {
    pub swap: bool,
    pub flip: [bool; 2],
}

impl FaceMap {
    pub fn apply(&self, u: [f64; 2]) -> [f64; 2] {
        let v = [
            if self.flip[0] { 1.0 - u[0] } else { u[0] },
            if self.flip[1] { 1.0 - u[1] } else { u[1] },
        ];
        if self.swap {
            [v[1], v[0]]
        } else {
            v
        }
    }

    /// Maps a discrete face index with per-axis extents `ext` (first face).
    pub fn apply_index(&self, a: [usize; 2], ext: [usize; 2]) -> [usize; 2] {
        let v = [
            if self.flip[0] {
                ext[0] - 1 - a[0]
            } else {
                a[0]
            },
            if self.flip[1] {
                ext[1] - 1 - a[1]
            } else {
                a[1]
            },
        ];
        if self.swap {
            [v[1], v[0]]
        } else {
            v
        }
    }

    fn all() -> impl Iterator<Item = FaceMap> {
        (0..8).map(|m| FaceMap {
            swap: m & 4 != 0,
            flip: [m & 1 != 0, m & 2 != 0],
        })
    }
}

/// Conforming identification of two faces inside one subdomain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Glue {
    pub a: (usize, Side),
    pub b: (usize, Side),
    pub map: FaceMap,
}

/// Two faces identified by periodicity; `translation` maps `a` onto `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicPair {
    pub id: u32,
    pub a: (usize, Side),
    pub b: (usize, Side),
    pub map: FaceMap,
    pub translation: [f64; 3],
}

/// Affine map from dependent face coordinates `u` to independent ones:
/// `v_i = scale_i · (flip_i ? 1 − u_i : u_i) + offset_i`, reduced mod 1 when
/// `wrap_i`, then optionally swapped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceMap {
    pub offset: [f64; 2],
    pub flip: [bool; 2],
    pub wrap: [bool; 2],
    pub scale: [f64; 2],
    pub swap: bool,
    /// Physical offset: `F_indep(v) = F_dep(u) + translation` (mod `period`).
    pub translation: [f64; 3],
    /// Period vector for wrapped maps (zero when unused).
    pub period: [f64; 3],
}

impl Default for InterfaceMap {
    fn default() -> Self {
        Self {
            offset: [0.0; 2],
            flip: [false; 2],
            wrap: [false; 2],
            scale: [1.0; 2],
            swap: false,
            translation: [0.0; 3],
            period: [0.0; 3],
        }
    }
}

impl InterfaceMap {
    /// Unwrapped affine image in dependent axis order.
    fn affine(&self, u: [f64; 2]) -> [f64; 2] {
        std::array::from_fn(|i| {
            let t = if self.flip[i] { 1.0 - u[i] } else { u[i] };
            self.scale[i] * t + self.offset[i]
        })
    }

    /// Independent face coordinates of dependent point `u`.
    pub fn apply(&self, u: [f64; 2]) -> [f64; 2] {
        let mut v = self.affine(u);
        for i in 0..2 {
            if self.wrap[i] {
                v[i] = v[i].rem_euclid(1.0);
            }
        }
        if self.swap {
            [v[1], v[0]]
        } else {
            v
        }
    }

    /// Per dependent axis, the sorted break points in `[0, 1]` of the merged
    /// grid: dependent break points, pulled-back independent break points and
    /// wrap seams, clipped to the overlap.
    pub fn merged_breaks(&self, dep: [&[f64]; 2], indep: [&[f64]; 2]) -> [Vec<f64>; 2] {
        std::array::from_fn(|i| {
            let other = if self.swap { indep[1 - i] } else { indep[i] };
            let mut pts: Vec<f64> = dep[i].to_vec();
            let shifts: Vec<f64> = if self.wrap[i] {
                (-2..=2).map(f64::from).collect()
            } else {
                vec![0.0]
            };
            for &b in other {
                for &k in &shifts {
                    // solve scale·t + offset = b + k
                    let t = (b + k - self.offset[i]) / self.scale[i];
                    let u = if self.flip[i] { 1.0 - t } else { t };
                    if (0.0..=1.0).contains(&u) {
                        pts.push(u);
                    }
                }
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
            // keep cells whose midpoint maps inside [0, 1]
            let mut keep: Vec<f64> = Vec::new();
            for w in pts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let t = if self.flip[i] { 1.0 - mid } else { mid };
                let v = self.scale[i] * t + self.offset[i];
                if self.wrap[i] || (0.0..=1.0).contains(&v) {
                    if keep.last() != Some(&w[0]) {
                        if !keep.is_empty() {
                            // disjoint pieces are not expected for affine maps
                            keep.push(f64::NAN);
                        }
                        keep.push(w[0]);
                    }
                    keep.push(w[1]);
                }
            }
            keep
        })
    }
}

/// Mortar coupling between one dependent and one independent face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceRecord {
    pub id: u32,
    pub dependent: (usize, Side),
    pub independent: (usize, Side),
    pub map: InterfaceMap,
}

/// Uniform analysis discretization applied to every patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Discretization {
    pub degree: usize,
    /// Elements per base knot span and direction.
    pub elements: usize,
    /// Interior smoothness; `None` means `C^{p−1}`.
    pub regularity: Option<usize>,
}

impl Discretization {
    pub fn new(degree: usize, elements: usize) -> Self {
        Self {
            degree,
            elements,
            regularity: None,
        }
    }

    pub fn with_regularity(mut self, r: usize) -> Self {
        self.regularity = Some(r);
        self
    }

    pub fn regularity(&self) -> usize {
        self.regularity.unwrap_or(self.degree.saturating_sub(1))
    }
}

/// Multi-patch domain with boundary tags and coupling records.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPatchDomain {
    pub patches: Vec<Patch>,
    pub roles: Vec<Role>,
    pub tags: Vec<[Option<FaceTag>; 6]>,
    pub glue: Vec<Glue>,
    pub interfaces: Vec<InterfaceRecord>,
}

impl MultiPatchDomain {
    pub fn new(patches: Vec<Patch>, roles: Vec<Role>) -> Result<Self> {
        if roles.len() != patches.len() {
            return Err(Error::Geometry("one role per patch required".into()));
        }
        let tags = vec![[None; 6]; patches.len()];
        Ok(Self {
            patches,
            roles,
            tags,
            glue: Vec::new(),
            interfaces: Vec::new(),
        })
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn tag(&self, patch: usize, side: Side) -> Option<FaceTag> {
        self.tags[patch][side.index()]
    }

    pub fn set_tag(&mut self, patch: usize, side: Side, tag: FaceTag) {
        self.tags[patch][side.index()] = Some(tag);
    }

    pub fn is_glued(&self, patch: usize, side: Side) -> bool {
        self.glue
            .iter()
            .any(|g| g.a == (patch, side) || g.b == (patch, side))
    }

    pub fn has_interface(&self) -> bool {
        self.tags
            .iter()
            .flatten()
            .any(|t| matches!(t, Some(FaceTag::Interface(_))))
    }

    pub fn has_role(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }

    /// Face corners (4 points) in face-index order `(0,0), (1,0), (0,1), (1,1)`.
    pub fn face_corners(&self, patch: usize, side: Side) -> Result<[[f64; 3]; 4]> {
        let p = &self.patches[patch];
        let mut out = [[0.0; 3]; 4];
        for (c, o) in out.iter_mut().enumerate() {
            *o = p.eval_map(side.lift([(c & 1) as f64, (c >> 1) as f64]))?.x;
        }
        Ok(out)
    }

    /// Face centroid (image of the face midpoint).
    pub fn face_center(&self, patch: usize, side: Side) -> Result<[f64; 3]> {
        Ok(self.patches[patch].eval_map(side.lift([0.5, 0.5]))?.x)
    }

    /// Orientation map taking face `a` onto face `b` (shifted by `t`), found
    /// by matching sample points.
    pub fn find_face_map(
        &self,
        a: (usize, Side),
        b: (usize, Side),
        t: [f64; 3],
    ) -> Result<Option<FaceMap>> {
        let samples = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.3, 0.7], [0.5, 0.5]];
        let pa = &self.patches[a.0];
        let pb = &self.patches[b.0];
        let scale = self.length_scale();
        for m in FaceMap::all() {
            let mut ok = true;
            for &u in &samples {
                let xa = pa.eval_map(a.1.lift(u))?.x;
                let xb = pb.eval_map(b.1.lift(m.apply(u)))?.x;
                if (0..3).any(|i| (xa[i] + t[i] - xb[i]).abs() > 1e-9 * scale) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    fn length_scale(&self) -> f64 {
        self.patches
            .iter()
            .flat_map(|p| p.homogeneous_points().iter())
            .map(|p| {
                (p[0] / p[3])
                    .abs()
                    .max((p[1] / p[3]).abs())
                    .max((p[2] / p[3]).abs())
            })
            .fold(1.0, f64::max)
    }

    /// Glues every pair of untagged faces of the same role whose images
    /// coincide.
    pub fn glue_coincident_faces(&mut self) -> Result<()> {
        let n = self.num_patches();
        for a in 0..n {
            for sa in Side::ALL {
                if self.tag(a, sa).is_some() || self.is_glued(a, sa) {
                    continue;
                }
                'search: for b in a..n {
                    if self.roles[a] != self.roles[b] {
                        continue;
                    }
                    for sb in Side::ALL {
                        if (b == a && sb <= sa) || self.tag(b, sb).is_some() || self.is_glued(b, sb)
                        {
                            continue;
                        }
                        if let Some(map) = self.find_face_map((a, sa), (b, sb), [0.0; 3])? {
                            self.glue.push(Glue {
                                a: (a, sa),
                                b: (b, sb),
                                map,
                            });
                            break 'search;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Pairs faces sharing a periodic id and infers translation and
    /// orientation from the geometry.
    pub fn periodic_pairs(&self) -> Result<Vec<PeriodicPair>> {
        let mut by_id: std::collections::BTreeMap<u32, Vec<(usize, Side)>> = Default::default();
        for (p, tags) in self.tags.iter().enumerate() {
            for (s, t) in tags.iter().enumerate() {
                if let Some(FaceTag::Periodic(id)) = t {
                    by_id.entry(*id).or_default().push((p, Side::from_index(s)));
                }
            }
        }
        let mut out = Vec::new();
        for (id, faces) in by_id {
            if faces.len() != 2 {
                return Err(Error::Geometry(format!(
                    "periodic id {id} tags {} faces, expected 2",
                    faces.len()
                )));
            }
            let (a, b) = (faces[0], faces[1]);
            let ca = self.face_center(a.0, a.1)?;
            let cb = self.face_center(b.0, b.1)?;
            let t = [cb[0] - ca[0], cb[1] - ca[1], cb[2] - ca[2]];
            let map = self
                .find_face_map(a, b, t)?
                .ok_or_else(|| Error::Topology {
                    a: a.0,
                    b: b.0,
                    reason: format!(
                        "periodic faces {} / {} are not translates",
                        a.1.name(),
                        b.1.name()
                    ),
                })?;
            out.push(PeriodicPair {
                id,
                a,
                b,
                map,
                translation: t,
            });
        }
        Ok(out)
    }
    /// Same domain with every conforming interface replaced by strong glue
    /// and all patches dependent.
    pub fn strongly_glued(&self) -> Result<Self> {
        let mut out = self.clone();
        out.interfaces.clear();
        out.roles = vec![Role::Dependent; self.patches.len()];
        for r in &self.interfaces {
            let map = self
                .find_face_map(r.dependent, r.independent, [0.0; 3])?
                .ok_or_else(|| {
                    Error::Unsupported(format!(
                        "interface {} is not conforming and cannot be glued",
                        r.id
                    ))
                })?;
            for (p, s) in [r.dependent, r.independent] {
                out.tags[p][s.index()] = None;
            }
            out.glue.push(Glue {
                a: r.dependent,
                b: r.independent,
                map,
            });
        }
        out.validate()?;
        Ok(out)
    }

    /// Structural checks: every face is tagged or glued exactly once, roles
    /// match interface records, Jacobians are positive.
    pub fn validate(&self) -> Result<()> {
        for p in 0..self.num_patches() {
            for s in Side::ALL {
                let glued = self
                    .glue
                    .iter()
                    .filter(|g| g.a == (p, s) || g.b == (p, s))
                    .count();
                match (self.tag(p, s), glued) {
                    (None, 0) => {
                        return Err(Error::Geometry(format!(
                            "patch {p} face {} is neither tagged nor glued",
                            s.name()
                        )))
                    }
                    (Some(_), 1..) | (None, 2..) => {
                        return Err(Error::Geometry(format!(
                            "patch {p} face {} tagged or glued twice",
                            s.name()
                        )))
                    }
                    _ => {}
                }
            }
        }
        for g in &self.glue {
            if self.roles[g.a.0] != self.roles[g.b.0] {
                return Err(Error::Topology {
                    a: g.a.0,
                    b: g.b.0,
                    reason: "glue across subdomains".into(),
                });
            }
        }
        for r in &self.interfaces {
            if self.roles[r.dependent.0] != Role::Dependent
                || self.roles[r.independent.0] != Role::Independent
            {
                return Err(Error::Geometry(format!(
                    "interface {} must run from a dependent to an independent patch",
                    r.id
                )));
            }
            for f in [r.dependent, r.independent] {
                if !matches!(self.tag(f.0, f.1), Some(FaceTag::Interface(_))) {
                    return Err(Error::Geometry(format!(
                        "patch {} face {} is not an interface face",
                        f.0,
                        f.1.name()
                    )));
                }
            }
        }
        self.periodic_pairs()?;
        for (i, p) in self.patches.iter().enumerate() {
            p.check_jacobian(i)?;
        }
        Ok(())
    }

    /// Every patch represented in the uniform analysis space of `disc`.
    pub fn refine(&self, disc: &Discretization) -> Result<MultiPatchDomain> {
        if disc.degree < 1 || disc.elements < 1 {
            return Err(Error::Config("degree and elements must be positive".into()));
        }
        let patches = self
            .patches
            .iter()
            .map(|p| {
                let knots = [0, 1, 2]
                    .map(|d| p.knots[d].subdivided(disc.degree, disc.elements, disc.regularity()));
                let [k0, k1, k2] = knots;
                p.refine([k0?, k1?, k2?])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiPatchDomain {
            patches,
            ..self.clone()
        })
    }
}

/// Deviations measured by [`validate_interfaces`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InterfaceReport {
    pub glue_deviation: f64,
    pub periodic_deviation: f64,
    pub interface_deviation: f64,
    /// Covered area fraction per dependent interface face with records.
    pub coverage: Vec<((usize, Side), f64)>,
}

/// Checks conforming glue exactness (knots and geometry), periodic
/// translations and the geometric consistency of interface maps.
pub fn validate_interfaces(domain: &MultiPatchDomain) -> Result<InterfaceReport> {
    const GLUE_TOL: f64 = 1e-10;
    const IFACE_TOL: f64 = 1e-8;
    let mut report = InterfaceReport::default();
    let grid: Vec<f64> = (0..=6).map(|i| i as f64 / 6.0).collect();
    let scale = domain.length_scale();
    let face_dev = |a: (usize, Side), b: (usize, Side), m: FaceMap, t: [f64; 3]| -> Result<f64> {
        let mut dev: f64 = 0.0;
        for &u0 in &grid {
            for &u1 in &grid {
                let xa = domain.patches[a.0].eval_map(a.1.lift([u0, u1]))?.x;
                let xb = domain.patches[b.0].eval_map(b.1.lift(m.apply([u0, u1])))?.x;
                for i in 0..3 {
                    dev = dev.max((xa[i] + t[i] - xb[i]).abs());
                }
            }
        }
        Ok(dev)
    };
    for g in &domain.glue {
        let ta = g.a.1.tangents();
        let tb = g.b.1.tangents();
        let pa = &domain.patches[g.a.0];
        let pb = &domain.patches[g.b.0];
        for i in 0..2 {
            let j = if g.map.swap { 1 - i } else { i };
            let ka = pa.knots()[ta[i]].knots();
            let kb = pb.knots()[tb[j]].knots();
            let mirrored: Vec<f64> = ka.iter().rev().map(|k| 1.0 - k).collect();
            let same = if g.map.flip[i] {
                mirrored.as_slice() == kb
            } else {
                ka == kb
            };
            if !same {
                return Err(Error::Topology {
                    a: g.a.0,
                    b: g.b.0,
                    reason: "glued faces have different knots".into(),
                });
            }
        }
        let dev = face_dev(g.a, g.b, g.map, [0.0; 3])?;
        report.glue_deviation = report.glue_deviation.max(dev);
        if dev > GLUE_TOL * scale {
            return Err(Error::Topology {
                a: g.a.0,
                b: g.b.0,
                reason: format!("glued faces deviate by {dev:e}"),
            });
        }
    }
    for pp in domain.periodic_pairs()? {
        let dev = face_dev(pp.a, pp.b, pp.map, pp.translation)?;
        report.periodic_deviation = report.periodic_deviation.max(dev);
    }
    let mut area: std::collections::BTreeMap<(usize, Side), f64> = Default::default();
    for r in &domain.interfaces {
        let dp = &domain.patches[r.dependent.0];
        let ip = &domain.patches[r.independent.0];
        let dt = r.dependent.1.tangents();
        let it = r.independent.1.tangents();
        let db = [
            dp.knots()[dt[0]].breakpoints(),
            dp.knots()[dt[1]].breakpoints(),
        ];
        let ib = [
            ip.knots()[it[0]].breakpoints(),
            ip.knots()[it[1]].breakpoints(),
        ];
        let cells = r.map.merged_breaks([&db[0], &db[1]], [&ib[0], &ib[1]]);
        let mut covered = 1.0;
        for c in &cells {
            covered *= c
                .windows(2)
                .filter(|w| w[0].is_finite() && w[1].is_finite())
                .map(|w| w[1] - w[0])
                .sum::<f64>();
        }
        *area.entry(r.dependent).or_default() += covered;
        for w0 in cells[0]
            .windows(2)
            .filter(|w| w[0].is_finite() && w[1].is_finite())
        {
            for w1 in cells[1]
                .windows(2)
                .filter(|w| w[0].is_finite() && w[1].is_finite())
            {
                for (a, b) in [(0.25, 0.25), (0.75, 0.5), (0.5, 0.9)] {
                    let u = [w0[0] + a * (w0[1] - w0[0]), w1[0] + b * (w1[1] - w1[0])];
                    let xd = dp.eval_map(r.dependent.1.lift(u))?.x;
                    let xi = ip.eval_map(r.independent.1.lift(r.map.apply(u)))?.x;
                    let mut best = f64::INFINITY;
                    for k in [-1.0, 0.0, 1.0] {
                        let d = (0..3)
                            .map(|i| {
                                (xd[i] + r.map.translation[i] + k * r.map.period[i] - xi[i]).abs()
                            })
                            .fold(0.0, f64::max);
                        best = best.min(d);
                    }
                    report.interface_deviation = report.interface_deviation.max(best);
                }
            }
        }
    }
    report.coverage = area.into_iter().collect();
    if report.interface_deviation > IFACE_TOL * scale {
        return Err(Error::Interface {
            deviation: report.interface_deviation,
            reason: "interface map does not match geometry".into(),
        });
    }
    if report.periodic_deviation > GLUE_TOL * scale {
        return Err(Error::Interface {
            deviation: report.periodic_deviation,
            reason: "periodic faces are not translates".into(),
        });
    }
    if let Some((f, a)) = report
        .coverage
        .iter()
        .find(|(_, a)| (a - 1.0).abs() > 1e-10)
    {
        return Err(Error::Interface {
            deviation: (a - 1.0).abs(),
            reason: format!(
                "dependent face {} of patch {} covered {a} times",
                f.1.name(),
                f.0
            ),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_patch() -> Patch {
        let k = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let pts = (0..8)
            .map(|c| [(c & 1) as f64, ((c >> 1) & 1) as f64, (c >> 2) as f64])
            .collect();
        Patch::from_cartesian([k.clone(), k.clone(), k], pts).unwrap()
    }

    #[test]
    fn identity_cube_map() {
        let p = unit_patch();
        let m = p.eval_map([0.2, 0.5, 0.9]).unwrap();
        for i in 0..3 {
            assert!((m.x[i] - [0.2, 0.5, 0.9][i]).abs() < 1e-15);
            for j in 0..3 {
                assert!((m.jac[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        assert!((m.det - 1.0).abs() < 1e-15);
    }

    #[test]
    fn refinement_preserves_map() {
        let p = unit_patch();
        let k = KnotVector::uniform(3, 3, 1).unwrap();
        let r = p.refine([k.clone(), k.clone(), k]).unwrap();
        let m = r.eval_map([0.31, 0.77, 0.05]).unwrap();
        for (a, b) in m.x.iter().zip([0.31, 0.77, 0.05]) {
            assert!((a - b).abs() < 1e-14);
        }
        // linear map: control points sit at Greville points
        let g = r.knots()[0].greville();
        assert!((r.point([1, 0, 0])[0] - g[1]).abs() < 1e-14);
    }

    #[test]
    fn inverse_jacobian() {
        let m = MapEval {
            x: [0.0; 3],
            jac: [[2.0, 1.0, 0.0], [0.0, 3.0, 0.0], [1.0, 0.0, 1.0]],
            det: 6.0,
        };
        let inv = m.inverse();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| m.jac[i][k] * inv[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn side_lift_and_tangents() {
        assert_eq!(Side::YMax.lift([0.2, 0.3]), [0.2, 1.0, 0.3]);
        assert_eq!(Side::XMin.tangents(), [1, 2]);
        assert_eq!(Side::parse("zmax").unwrap(), Side::ZMax);
        assert_eq!(FaceTag::parse("periodic:3").unwrap(), FaceTag::Periodic(3));
    }

    #[test]
    fn merged_breaks_shifted() {
        let m = InterfaceMap {
            offset: [-0.25, 0.0],
            ..Default::default()
        };
        let dep = [0.0, 0.5, 1.0];
        let ind = [0.0, 0.5, 1.0];
        let b = m.merged_breaks([&dep, &dep], [&ind, &ind]);
        assert_eq!(b[0], vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(b[1], vec![0.0, 0.5, 1.0]);
    }
}
