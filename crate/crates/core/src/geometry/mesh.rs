//! Structured control meshes with cross-patch identification.
//!
//! Entities of dimension `k` (vertices, edges, faces, cells) are numbered per
//! patch and component, then merged across glued and periodic faces with a
//! signed union-find. Each global entity keeps one representative instance
//! (first in patch order) and every instance stores its orientation sign
//! relative to it.

use super::{FaceMap, MultiPatchDomain, Role, Side};
use crate::error::{Error, Result};

/// One patch-local entity: component (direction for edges, normal for faces)
/// and lower-corner multi-index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityRef {
    pub patch: usize,
    pub comp: usize,
    pub index: [usize; 3],
}

/// Boundary flags accumulated from tagged faces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub dirichlet: bool,
    pub neumann: bool,
    pub interface: bool,
}

impl Flags {
    pub fn is_boundary(self) -> bool {
        self.dirichlet || self.neumann || self.interface
    }
}

/// Per-component extents of the `k`-entities of a patch with `n` control
/// points per direction.
pub fn extents(k: usize, n: [usize; 3]) -> Vec<[usize; 3]> {
    match k {
        0 => vec![n],
        1 => (0..3)
            .map(|c| std::array::from_fn(|d| if d == c { n[d] - 1 } else { n[d] }))
            .collect(),
        2 => (0..3)
            .map(|c| std::array::from_fn(|d| if d == c { n[d] } else { n[d] - 1 }))
            .collect(),
        3 => vec![[n[0] - 1, n[1] - 1, n[2] - 1]],
        _ => unreachable!("form degree above 3"),
    }
}

#[derive(Clone, Debug)]
struct Layout {
    /// Per component `(offset, extents)`.
    comps: Vec<(usize, [usize; 3])>,
    len: usize,
}

impl Layout {
    fn new(k: usize, n: [usize; 3]) -> Self {
        let mut off = 0;
        let comps = extents(k, n)
            .into_iter()
            .map(|m| {
                let o = off;
                off += m[0] * m[1] * m[2];
                (o, m)
            })
            .collect();
        Self { comps, len: off }
    }

    fn linear(&self, comp: usize, i: [usize; 3]) -> usize {
        let (o, m) = self.comps[comp];
        o + i[0] + m[0] * (i[1] + m[1] * i[2])
    }

    fn multi(&self, local: usize) -> (usize, [usize; 3]) {
        let c = self
            .comps
            .iter()
            .rposition(|&(o, _)| o <= local)
            .unwrap_or(0);
        let (o, m) = self.comps[c];
        let r = local - o;
        (c, [r % m[0], (r / m[0]) % m[1], r / (m[0] * m[1])])
    }
}

/// Signed union-find: `parity[x]` is the sign of `x` relative to its parent.
struct SignedUnionFind {
    parent: Vec<usize>,
    parity: Vec<i8>,
}

impl SignedUnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            parity: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> (usize, i8) {
        let mut path = Vec::new();
        let mut r = x;
        while self.parent[r] != r {
            path.push(r);
            r = self.parent[r];
        }
        // compress, accumulating signs from the top
        for &y in path.iter().rev() {
            let p = self.parent[y];
            if p != r {
                self.parity[y] *= self.parity[p];
            }
            self.parent[y] = r;
        }
        (r, if x == r { 1 } else { self.parity[x] })
    }

    /// Records `value(x) = s · value(y)`; false on an orientation conflict.
    fn union(&mut self, x: usize, y: usize, s: i8) -> bool {
        let (rx, sx) = self.find(x);
        let (ry, sy) = self.find(y);
        if rx == ry {
            return sx == s * sy;
        }
        let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
        self.parent[hi] = lo;
        self.parity[hi] = sx * s * sy;
        true
    }
}

/// Global control mesh of a multi-patch domain.
#[derive(Clone, Debug)]
pub struct ControlMesh {
    counts: Vec<[usize; 3]>,
    roles: Vec<Role>,
    layouts: [Vec<Layout>; 4],
    offsets: [Vec<usize>; 4],
    /// Per kind, flattened instance → (global id, sign).
    to_global: [Vec<(usize, i8)>; 4],
    reps: [Vec<EntityRef>; 4],
    flags: [Vec<Flags>; 4],
    /// Dependent-side vertices that are corners of interface faces.
    interface_corner: Vec<bool>,
    positions: Vec<Vec<[f64; 3]>>,
}

/// Patch-local vertex of face `a` mapped onto face `b`.
fn map_vertex(
    na: [usize; 3],
    sa: Side,
    nb: [usize; 3],
    sb: Side,
    m: FaceMap,
    v: [usize; 3],
) -> [usize; 3] {
    let ta = sa.tangents();
    let tb = sb.tangents();
    let w = m.apply_index([v[ta[0]], v[ta[1]]], [na[ta[0]], na[ta[1]]]);
    let mut out = [0; 3];
    out[tb[0]] = w[0];
    out[tb[1]] = w[1];
    out[sb.dir()] = if sb.is_max() { nb[sb.dir()] - 1 } else { 0 };
    out
}

fn unit(c: usize) -> [usize; 3] {
    std::array::from_fn(|d| usize::from(d == c))
}

fn add(a: [usize; 3], b: [usize; 3]) -> [usize; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Vertex cycle of a face entity with normal `c`, in the cyclic tangent order.
fn face_cycle(c: usize, i: [usize; 3]) -> [[usize; 3]; 4] {
    let (e, f) = ((c + 1) % 3, (c + 2) % 3);
    [
        i,
        add(i, unit(e)),
        add(add(i, unit(e)), unit(f)),
        add(i, unit(f)),
    ]
}

/// Entities of dimension `k` lying in side `s` of a patch with counts `n`.
fn face_entities(k: usize, n: [usize; 3], s: Side) -> Vec<(usize, [usize; 3])> {
    let d = s.dir();
    let fixed = if s.is_max() { n[d] - 1 } else { 0 };
    let mut out = Vec::new();
    let comps: Vec<usize> = match k {
        0 => vec![0],
        1 => s.tangents().to_vec(),
        2 => vec![d],
        _ => vec![],
    };
    for c in comps {
        let m = extents(k, n)[if k == 0 { 0 } else { c }];
        for i2 in 0..m[2] {
            for i1 in 0..m[1] {
                for i0 in 0..m[0] {
                    let i = [i0, i1, i2];
                    if i[d] == fixed {
                        out.push((c, i));
                    }
                }
            }
        }
    }
    out
}

impl ControlMesh {
    pub fn num_patches(&self) -> usize {
        self.counts.len()
    }

    /// Control point counts of patch `p`.
    pub fn counts(&self, p: usize) -> [usize; 3] {
        self.counts[p]
    }

    /// Number of global entities of dimension `k`.
    pub fn num(&self, k: usize) -> usize {
        self.reps[k].len()
    }

    /// Number of patch-local entities of dimension `k`.
    pub fn num_local(&self, k: usize, patch: usize) -> usize {
        self.layouts[k][patch].len
    }

    pub fn local_index(&self, k: usize, patch: usize, comp: usize, i: [usize; 3]) -> usize {
        self.layouts[k][patch].linear(comp, i)
    }

    pub fn local_multi(&self, k: usize, patch: usize, local: usize) -> (usize, [usize; 3]) {
        self.layouts[k][patch].multi(local)
    }

    /// Global id and orientation sign of a patch-local entity.
    pub fn global(&self, k: usize, patch: usize, comp: usize, i: [usize; 3]) -> (usize, i8) {
        self.to_global[k][self.offsets[k][patch] + self.layouts[k][patch].linear(comp, i)]
    }

    /// Global ids and signs of all local entities of a patch, in local order.
    pub fn patch_map(&self, k: usize, patch: usize) -> &[(usize, i8)] {
        let o = self.offsets[k][patch];
        &self.to_global[k][o..o + self.layouts[k][patch].len]
    }

    pub fn representative(&self, k: usize, g: usize) -> EntityRef {
        self.reps[k][g]
    }

    pub fn flags(&self, k: usize, g: usize) -> Flags {
        self.flags[k][g]
    }

    pub fn role(&self, k: usize, g: usize) -> Role {
        self.roles[self.reps[k][g].patch]
    }

    /// Dependent-side interface vertices that lie on no other tagged face and
    /// are corners of some interface face (the set `Z_Γint`).
    pub fn interface_internal_vertices(&self) -> Vec<usize> {
        (0..self.num(0))
            .filter(|&v| {
                let f = self.flags[0][v];
                self.interface_corner[v] && f.interface && !f.dirichlet && !f.neumann
            })
            .collect()
    }

    /// Cartesian control point of a vertex.
    pub fn position(&self, g: usize) -> [f64; 3] {
        let r = self.reps[0][g];
        let n = self.counts[r.patch];
        self.positions[r.patch][r.index[0] + n[0] * (r.index[1] + n[1] * r.index[2])]
    }

    /// Endpoints `(tail, head)` of a global edge.
    pub fn edge_vertices(&self, e: usize) -> (usize, usize) {
        let r = self.reps[1][e];
        let t = self.global(0, r.patch, 0, r.index).0;
        let h = self.global(0, r.patch, 0, add(r.index, unit(r.comp))).0;
        (t, h)
    }

    /// Signed incidence from `k`-entities to `(k+1)`-entities as triplets
    /// `(row, col, value)` with rows indexed by `(k+1)`-entities.
    pub fn incidence(&self, k: usize) -> Vec<(usize, usize, f64)> {
        assert!(k < 3, "no incidence above cells");
        let mut out = Vec::new();
        for (g, r) in self.reps[k + 1].iter().enumerate() {
            let p = r.patch;
            let mut push = |comp: usize, i: [usize; 3], s: f64| {
                let (h, sh) = self.global(k, p, comp, i);
                out.push((g, h, s * f64::from(sh)));
            };
            match k {
                0 => {
                    push(0, add(r.index, unit(r.comp)), 1.0);
                    push(0, r.index, -1.0);
                }
                1 => {
                    let c = r.comp;
                    let (e, f) = ((c + 1) % 3, (c + 2) % 3);
                    push(e, r.index, 1.0);
                    push(f, add(r.index, unit(e)), 1.0);
                    push(e, add(r.index, unit(f)), -1.0);
                    push(f, r.index, -1.0);
                }
                _ => {
                    for c in 0..3 {
                        push(c, add(r.index, unit(c)), 1.0);
                        push(c, r.index, -1.0);
                    }
                }
            }
        }
        // merge duplicates (possible when a cell wraps onto itself)
        out.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(out.len());
        for t in out {
            match merged.last_mut() {
                Some(last) if last.0 == t.0 && last.1 == t.1 => last.2 += t.2,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.2 != 0.0);
        merged
    }
}

/// Builds the identified control mesh of `domain`.
pub fn extract_control_mesh(domain: &MultiPatchDomain) -> Result<ControlMesh> {
    let counts: Vec<[usize; 3]> = domain.patches.iter().map(|p| p.counts()).collect();
    if counts.iter().flatten().any(|&n| n < 2) {
        return Err(Error::Geometry(
            "every direction needs at least two control points".into(),
        ));
    }
    let positions: Vec<Vec<[f64; 3]>> = domain
        .patches
        .iter()
        .map(|p| {
            p.homogeneous_points()
                .iter()
                .map(|q| [q[0] / q[3], q[1] / q[3], q[2] / q[3]])
                .collect()
        })
        .collect();
    let scale = positions
        .iter()
        .flatten()
        .flatten()
        .fold(1.0_f64, |a, &b| a.max(b.abs()));
    let periodic = domain.periodic_pairs()?;
    let mut pairs: Vec<((usize, Side), (usize, Side), FaceMap, [f64; 3])> = domain
        .glue
        .iter()
        .map(|g| (g.a, g.b, g.map, [0.0; 3]))
        .collect();
    pairs.extend(periodic.iter().map(|p| (p.a, p.b, p.map, p.translation)));

    let layouts: [Vec<Layout>; 4] =
        std::array::from_fn(|k| counts.iter().map(|&n| Layout::new(k, n)).collect());
    let offsets: [Vec<usize>; 4] = std::array::from_fn(|k| {
        let mut o = 0;
        layouts[k]
            .iter()
            .map(|l| {
                let r = o;
                o += l.len;
                r
            })
            .collect()
    });
    let totals: [usize; 4] = std::array::from_fn(|k| layouts[k].iter().map(|l| l.len).sum());
    let mut uf: [SignedUnionFind; 4] = std::array::from_fn(|k| SignedUnionFind::new(totals[k]));
    let flat =
        |k: usize, p: usize, c: usize, i: [usize; 3]| offsets[k][p] + layouts[k][p].linear(c, i);

    for &((pa, sa), (pb, sb), m, t) in &pairs {
        let (na, nb) = (counts[pa], counts[pb]);
        let ta = sa.tangents();
        let tb = sb.tangents();
        let swapped = if m.swap {
            [na[ta[1]], na[ta[0]]]
        } else {
            [na[ta[0]], na[ta[1]]]
        };
        if swapped != [nb[tb[0]], nb[tb[1]]] {
            return Err(Error::Topology {
                a: pa,
                b: pb,
                reason: "matched faces have different control grids".into(),
            });
        }
        let mv = |v: [usize; 3]| map_vertex(na, sa, nb, sb, m, v);
        for (_, v) in face_entities(0, na, sa) {
            let w = mv(v);
            let xa = positions[pa][v[0] + na[0] * (v[1] + na[1] * v[2])];
            let xb = positions[pb][w[0] + nb[0] * (w[1] + nb[1] * w[2])];
            let dev = (0..3)
                .map(|i| (xa[i] + t[i] - xb[i]).abs())
                .fold(0.0, f64::max);
            if dev > 1e-10 * scale {
                return Err(Error::Topology {
                    a: pa,
                    b: pb,
                    reason: format!(
                        "control points differ by {dev:e} across {} / {}",
                        sa.name(),
                        sb.name()
                    ),
                });
            }
            if !uf[0].union(flat(0, pa, 0, v), flat(0, pb, 0, w), 1) {
                return Err(Error::Topology {
                    a: pa,
                    b: pb,
                    reason: "inconsistent vertex identification".into(),
                });
            }
        }
        for (c, i) in face_entities(1, na, sa) {
            let tail = mv(i);
            let head = mv(add(i, unit(c)));
            let dir = (0..3)
                .find(|&d| tail[d] != head[d])
                .expect("distinct endpoints");
            let (lo, s) = if head[dir] > tail[dir] {
                (tail, 1)
            } else {
                (head, -1)
            };
            if !uf[1].union(flat(1, pa, c, i), flat(1, pb, dir, lo), s) {
                return Err(Error::Topology {
                    a: pa,
                    b: pb,
                    reason: "inconsistent edge orientation".into(),
                });
            }
        }
        let db = sb.dir();
        for (c, i) in face_entities(2, na, sa) {
            let cyc: Vec<[usize; 3]> = face_cycle(c, i).iter().map(|&v| mv(v)).collect();
            let lo: [usize; 3] = std::array::from_fn(|d| cyc.iter().map(|v| v[d]).min().unwrap());
            let canon = face_cycle(db, lo);
            let pos = canon
                .iter()
                .position(|v| *v == cyc[0])
                .expect("mapped corner");
            let s = if canon[(pos + 1) % 4] == cyc[1] {
                1
            } else {
                -1
            };
            if !uf[2].union(flat(2, pa, c, i), flat(2, pb, db, lo), s) {
                return Err(Error::Topology {
                    a: pa,
                    b: pb,
                    reason: "inconsistent face orientation".into(),
                });
            }
        }
    }

    let mut to_global: [Vec<(usize, i8)>; 4] = Default::default();
    let mut reps: [Vec<EntityRef>; 4] = Default::default();
    for k in 0..4 {
        let mut root_id = vec![usize::MAX; totals[k]];
        let mut root_rep_sign = vec![1i8; totals[k]];
        let mut map = Vec::with_capacity(totals[k]);
        for p in 0..counts.len() {
            for l in 0..layouts[k][p].len {
                let x = offsets[k][p] + l;
                let (r, s) = uf[k].find(x);
                if root_id[r] == usize::MAX {
                    root_id[r] = reps[k].len();
                    root_rep_sign[r] = s;
                    let (comp, index) = layouts[k][p].multi(l);
                    reps[k].push(EntityRef {
                        patch: p,
                        comp,
                        index,
                    });
                }
                map.push((root_id[r], s * root_rep_sign[r]));
            }
        }
        to_global[k] = map;
    }

    let mut flags: [Vec<Flags>; 4] = std::array::from_fn(|k| vec![Flags::default(); reps[k].len()]);
    let mut interface_corner = vec![false; reps[0].len()];
    for (p, tags) in domain.tags.iter().enumerate() {
        for (si, tag) in tags.iter().enumerate() {
            let side = Side::from_index(si);
            let Some(tag) = tag else { continue };
            for k in 0..3 {
                for (c, i) in face_entities(k, counts[p], side) {
                    let g = to_global[k][flat(k, p, c, i)].0;
                    let f = &mut flags[k][g];
                    match tag {
                        super::FaceTag::Dirichlet => f.dirichlet = true,
                        super::FaceTag::Neumann => f.neumann = true,
                        super::FaceTag::Interface(_) => f.interface = true,
                        super::FaceTag::Periodic(_) => {}
                    }
                }
            }
            if matches!(tag, super::FaceTag::Interface(_)) && domain.roles[p] == Role::Dependent {
                let n = counts[p];
                let [t0, t1] = side.tangents();
                for c in 0..4 {
                    let mut v = [0; 3];
                    v[side.dir()] = if side.is_max() { n[side.dir()] - 1 } else { 0 };
                    v[t0] = if c & 1 == 1 { n[t0] - 1 } else { 0 };
                    v[t1] = if c & 2 == 2 { n[t1] - 1 } else { 0 };
                    interface_corner[to_global[0][flat(0, p, 0, v)].0] = true;
                }
            }
        }
    }

    Ok(ControlMesh {
        counts,
        roles: domain.roles.clone(),
        layouts,
        offsets,
        to_global,
        reps,
        flags,
        interface_corner,
        positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_roundtrip() {
        let l = Layout::new(1, [3, 4, 5]);
        for local in 0..l.len {
            let (c, i) = l.multi(local);
            assert_eq!(l.linear(c, i), local);
        }
        assert_eq!(l.len, 2 * 4 * 5 + 3 * 3 * 5 + 3 * 4 * 4);
    }

    #[test]
    fn signed_union_find_parity() {
        let mut uf = SignedUnionFind::new(4);
        assert!(uf.union(0, 1, -1));
        assert!(uf.union(1, 2, -1));
        assert_eq!(uf.find(2).1 * uf.find(0).1, 1);
        assert!(!uf.union(0, 2, -1));
        assert!(uf.union(3, 0, 1));
    }
}
