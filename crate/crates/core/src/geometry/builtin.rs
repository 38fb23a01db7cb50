//! Built-in domains: unit-cube patch layouts, mortared π-cubes, periodic
//! boxes and ring segments.

use super::{FaceTag, InterfaceMap, InterfaceRecord, MultiPatchDomain, Patch, Role, Side};
use crate::error::{Error, Result};
use crate::splines::KnotVector;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

/// Named built-in geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    /// Single-patch π-cube, Dirichlet on every face.
    Cube,
    /// Unit cube split into 2, 4 or 5 patches, Dirichlet everywhere except
    /// the top face, which is a one-sided interface.
    Layout(usize),
    /// π-cube split at `z = π/2` into a dependent top and an independent
    /// bottom half, each made of 1, 4 or 5 patches with matching interfaces.
    MortarConforming(usize),
    /// Box `[0,2π]×[0,π]×[0,2π]`, periodic in x, halves split at `z = π`
    /// with 2×2 patches each; the independent half is shifted by `shift`.
    MortarPeriodic { shift: f64 },
    /// Unit cube periodic in x; remaining faces Dirichlet or Neumann.
    PeriodicCube { dirichlet: bool },
    /// Quarter of the ring `1/2 ≤ r ≤ 1`, extruded, Dirichlet everywhere.
    QuarterRing,
    /// Full ring from four quarter patches, Neumann everywhere.
    Ring,
}

impl Builtin {
    pub const NAMES: [&'static str; 14] = [
        "cube",
        "cube-2",
        "cube-4",
        "cube-5",
        "cube-mortar-conforming:1",
        "cube-mortar-conforming:4",
        "cube-mortar-conforming:5",
        "cube-mortar-periodic",
        "cube-mortar-shifted:1",
        "cube-periodic",
        "cube-periodic-dirichlet",
        "quarter-ring",
        "ring",
        "cube-mortar-shifted",
    ];

    /// Number of patches per subdomain in the xy-layout, if any.
    pub fn layout_patches(&self) -> Option<usize> {
        match *self {
            Builtin::Layout(n) | Builtin::MortarConforming(n) => Some(n),
            Builtin::MortarPeriodic { .. } => Some(4),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<MultiPatchDomain> {
        match *self {
            Builtin::Cube => single_cube(PI, |_| Some(FaceTag::Dirichlet)),
            Builtin::Layout(n) => unit_layout(n),
            Builtin::MortarConforming(n) => mortar_cube(n),
            Builtin::MortarPeriodic { shift } => mortar_periodic(shift),
            Builtin::PeriodicCube { dirichlet } => single_cube(1.0, |s| match s {
                Side::XMin | Side::XMax => Some(FaceTag::Periodic(0)),
                _ if dirichlet => Some(FaceTag::Dirichlet),
                _ => Some(FaceTag::Neumann),
            }),
            Builtin::QuarterRing => {
                let mut d = MultiPatchDomain::new(vec![ring_segment(0)?], vec![Role::Dependent])?;
                for s in Side::ALL {
                    d.set_tag(0, s, FaceTag::Dirichlet);
                }
                Ok(d)
            }
            Builtin::Ring => {
                let patches = (0..4).map(ring_segment).collect::<Result<Vec<_>>>()?;
                let mut d = MultiPatchDomain::new(patches, vec![Role::Dependent; 4])?;
                d.glue_coincident_faces()?;
                tag_remaining(&mut d, |_, _, _| Some(FaceTag::Neumann))?;
                Ok(d)
            }
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        let norm = name.trim().replace('(', ":").replace(')', "");
        let (base, arg) = match norm.split_once(':') {
            Some((b, a)) => (b.to_string(), Some(a.to_string())),
            None => (norm.clone(), None),
        };
        let unknown = || Error::UnknownGeometry(name.to_string());
        let count = |a: Option<String>| -> Result<usize> {
            let n: usize = a.ok_or_else(unknown)?.parse().map_err(|_| unknown())?;
            if [1, 4, 5].contains(&n) {
                Ok(n)
            } else {
                Err(unknown())
            }
        };
        Ok(match (base.as_str(), arg) {
            ("cube", None) => Builtin::Cube,
            ("cube-2", None) => Builtin::Layout(2),
            ("cube-4", None) => Builtin::Layout(4),
            ("cube-5", None) => Builtin::Layout(5),
            ("cube-mortar-conforming", a) => Builtin::MortarConforming(count(a)?),
            ("cube-mortar-4", None) => Builtin::MortarConforming(4),
            ("cube-mortar-5", None) => Builtin::MortarConforming(5),
            ("cube-mortar-periodic", None) => Builtin::MortarPeriodic { shift: 0.0 },
            ("cube-mortar-shifted", a) => {
                let shift = match a {
                    Some(a) => a.parse().map_err(|_| unknown())?,
                    None => 1.0,
                };
                if !(0.0..PI).contains(&shift) {
                    return Err(Error::Config(format!("shift {shift} outside [0, π)")));
                }
                Builtin::MortarPeriodic { shift }
            }
            ("cube-periodic", None) => Builtin::PeriodicCube { dirichlet: false },
            ("cube-periodic-dirichlet", None) => Builtin::PeriodicCube { dirichlet: true },
            ("quarter-ring", None) => Builtin::QuarterRing,
            ("ring", None) => Builtin::Ring,
            _ => return Err(unknown()),
        })
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Cube => write!(f, "cube"),
            Builtin::Layout(n) => write!(f, "cube-{n}"),
            Builtin::MortarConforming(n) => write!(f, "cube-mortar-conforming:{n}"),
            Builtin::MortarPeriodic { shift } if *shift == 0.0 => write!(f, "cube-mortar-periodic"),
            Builtin::MortarPeriodic { shift } => write!(f, "cube-mortar-shifted:{shift}"),
            Builtin::PeriodicCube { dirichlet: false } => write!(f, "cube-periodic"),
            Builtin::PeriodicCube { dirichlet: true } => write!(f, "cube-periodic-dirichlet"),
            Builtin::QuarterRing => write!(f, "quarter-ring"),
            Builtin::Ring => write!(f, "ring"),
        }
    }
}

/// Builds a named built-in domain (see [`Builtin`] for the accepted names).
pub fn builtin_geometry(name: &str) -> Result<MultiPatchDomain> {
    name.parse::<Builtin>()?.build()
}

fn linear() -> KnotVector {
    KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).expect("linear knot vector")
}

/// Trilinear patch from corners indexed `i + 2j + 4k`.
fn hexahedron(c: [[f64; 3]; 8]) -> Result<Patch> {
    Patch::from_cartesian([linear(), linear(), linear()], c.to_vec())
}

/// Quadrilateral `(00, 10, 01, 11)` in the xy-plane extruded over `[z0, z1]`.
fn prism(q: [[f64; 2]; 4], z0: f64, z1: f64) -> Result<Patch> {
    hexahedron(std::array::from_fn(|c| {
        let p = q[c % 4];
        [p[0], p[1], if c < 4 { z0 } else { z1 }]
    }))
}

/// Quadrilateral layouts of the unit square.
fn square_layout(n: usize) -> Result<Vec<[[f64; 2]; 4]>> {
    let rect = |x0: f64, x1: f64, y0: f64, y1: f64| [[x0, y0], [x1, y0], [x0, y1], [x1, y1]];
    let (a, b) = (1.0 / 3.0, 2.0 / 3.0);
    match n {
        1 => Ok(vec![rect(0.0, 1.0, 0.0, 1.0)]),
        2 => Ok(vec![rect(0.0, 0.5, 0.0, 1.0), rect(0.5, 1.0, 0.0, 1.0)]),
        4 => Ok(vec![
            rect(0.0, 0.5, 0.0, 0.5),
            rect(0.5, 1.0, 0.0, 0.5),
            rect(0.0, 0.5, 0.5, 1.0),
            rect(0.5, 1.0, 0.5, 1.0),
        ]),
        5 => Ok(vec![
            rect(a, b, a, b),
            [[0.0, 0.0], [1.0, 0.0], [a, a], [b, a]],
            [[0.0, 0.0], [a, a], [0.0, 1.0], [a, b]],
            [[b, a], [1.0, 0.0], [b, b], [1.0, 1.0]],
            [[a, b], [b, b], [0.0, 1.0], [1.0, 1.0]],
        ]),
        _ => Err(Error::UnknownGeometry(format!("layout with {n} patches"))),
    }
}

fn scaled(q: [[f64; 2]; 4], sx: f64, sy: f64, dx: f64) -> [[f64; 2]; 4] {
    q.map(|p| [sx * p[0] + dx, sy * p[1]])
}

/// Tags every face that is neither tagged nor glued.
fn tag_remaining(
    d: &mut MultiPatchDomain,
    tag: impl Fn(usize, Side, [f64; 3]) -> Option<FaceTag>,
) -> Result<()> {
    for p in 0..d.num_patches() {
        for s in Side::ALL {
            if d.tag(p, s).is_some() || d.is_glued(p, s) {
                continue;
            }
            let c = d.face_center(p, s)?;
            let t = tag(p, s, c).ok_or_else(|| {
                Error::Geometry(format!(
                    "builtin leaves patch {p} face {} untagged",
                    s.name()
                ))
            })?;
            d.set_tag(p, s, t);
        }
    }
    Ok(())
}

fn single_cube(l: f64, tag: impl Fn(Side) -> Option<FaceTag>) -> Result<MultiPatchDomain> {
    let p = prism([[0.0, 0.0], [l, 0.0], [0.0, l], [l, l]], 0.0, l)?;
    let mut d = MultiPatchDomain::new(vec![p], vec![Role::Dependent])?;
    tag_remaining(&mut d, |_, s, _| tag(s))?;
    Ok(d)
}

fn unit_layout(n: usize) -> Result<MultiPatchDomain> {
    let patches = square_layout(n)?
        .into_iter()
        .map(|q| prism(q, 0.0, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let mut d = MultiPatchDomain::new(patches, vec![Role::Dependent; n])?;
    d.glue_coincident_faces()?;
    tag_remaining(&mut d, |_, _, c| {
        Some(if (c[2] - 1.0).abs() < 1e-12 {
            FaceTag::Interface(0)
        } else {
            FaceTag::Dirichlet
        })
    })?;
    Ok(d)
}

fn mortar_cube(n: usize) -> Result<MultiPatchDomain> {
    let layout = square_layout(n)?;
    let mut patches = Vec::new();
    let mut roles = Vec::new();
    for (role, z0, z1) in [
        (Role::Dependent, 0.5 * PI, PI),
        (Role::Independent, 0.0, 0.5 * PI),
    ] {
        for q in &layout {
            patches.push(prism(scaled(*q, PI, PI, 0.0), z0, z1)?);
            roles.push(role);
        }
    }
    let mut d = MultiPatchDomain::new(patches, roles)?;
    d.glue_coincident_faces()?;
    tag_remaining(&mut d, |_, _, c| {
        Some(if (c[2] - 0.5 * PI).abs() < 1e-12 {
            FaceTag::Interface(0)
        } else {
            FaceTag::Dirichlet
        })
    })?;
    for a in 0..n {
        for b in n..2 * n {
            if let Some(m) = d.find_face_map((a, Side::ZMin), (b, Side::ZMax), [0.0; 3])? {
                d.interfaces.push(InterfaceRecord {
                    id: 0,
                    dependent: (a, Side::ZMin),
                    independent: (b, Side::ZMax),
                    map: InterfaceMap {
                        flip: m.flip,
                        swap: m.swap,
                        ..Default::default()
                    },
                });
            }
        }
    }
    Ok(d)
}

fn mortar_periodic(shift: f64) -> Result<MultiPatchDomain> {
    let tau = 2.0 * PI;
    let mut patches = Vec::new();
    let mut roles = Vec::new();
    let mut xmin = Vec::new();
    for (role, z0, z1, dx) in [
        (Role::Dependent, PI, tau, 0.0),
        (Role::Independent, 0.0, PI, shift),
    ] {
        for row in 0..2 {
            for col in 0..2 {
                let (x0, y0) = (col as f64 * 0.5, row as f64 * 0.5);
                let q = [
                    [x0, y0],
                    [x0 + 0.5, y0],
                    [x0, y0 + 0.5],
                    [x0 + 0.5, y0 + 0.5],
                ];
                patches.push(prism(scaled(q, tau, PI, dx), z0, z1)?);
                roles.push(role);
                xmin.push(col as f64 * PI + dx);
            }
        }
    }
    let mut d = MultiPatchDomain::new(patches, roles)?;
    d.glue_coincident_faces()?;
    // periodic pairs: left column xmin with right column xmax, per row and half
    for (id, (left, right)) in [(0, 1), (2, 3), (4, 5), (6, 7)].into_iter().enumerate() {
        d.set_tag(left, Side::XMin, FaceTag::Periodic(id as u32));
        d.set_tag(right, Side::XMax, FaceTag::Periodic(id as u32));
    }
    let roles = d.roles.clone();
    tag_remaining(&mut d, |p, s, _| {
        Some(match (roles[p], s) {
            (Role::Dependent, Side::ZMin) | (Role::Independent, Side::ZMax) => {
                FaceTag::Interface(0)
            }
            _ => FaceTag::Dirichlet,
        })
    })?;
    for a in 0..4 {
        for b in 4..8 {
            if a / 2 != (b - 4) / 2 {
                continue;
            }
            for k in [-1.0, 0.0, 1.0] {
                let lo = xmin[a].max(xmin[b] + k * tau);
                let hi = (xmin[a] + PI).min(xmin[b] + k * tau + PI);
                if hi - lo > 1e-12 {
                    d.interfaces.push(InterfaceRecord {
                        id: 0,
                        dependent: (a, Side::ZMin),
                        independent: (b, Side::ZMax),
                        map: InterfaceMap {
                            offset: [(xmin[a] - xmin[b] - k * tau) / PI, 0.0],
                            translation: [-k * tau, 0.0, 0.0],
                            ..Default::default()
                        },
                    });
                }
            }
        }
    }
    Ok(d)
}

/// Quarter `k` of the ring `1/2 ≤ r ≤ 1`, `0 ≤ z ≤ 1`: radial, angular
/// (rational quadratic arc) and axial directions.
fn ring_segment(k: usize) -> Result<Patch> {
    let quad = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0])?;
    let th = k as f64 * 0.5 * PI;
    let rot = |x: f64, y: f64| [x * th.cos() - y * th.sin(), x * th.sin() + y * th.cos()];
    let w = [1.0, FRAC_1_SQRT_2, 1.0];
    let arc = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut pts = Vec::with_capacity(12);
    for z in [0.0, 1.0] {
        for (j, a) in arc.iter().enumerate() {
            for r in [0.5, 1.0] {
                let p = rot(r * a[0], r * a[1]);
                pts.push([w[j] * p[0], w[j] * p[1], w[j] * z, w[j]]);
            }
        }
    }
    Patch::new([linear(), quad, linear()], pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        for n in Builtin::NAMES {
            let b: Builtin = n.parse().unwrap();
            b.build().unwrap().validate().unwrap();
        }
        assert!("cube-7".parse::<Builtin>().is_err());
        assert_eq!(
            "cube-mortar-conforming(5)".parse::<Builtin>().unwrap(),
            Builtin::MortarConforming(5)
        );
        assert_eq!(
            "cube-mortar-shifted(1)".parse::<Builtin>().unwrap(),
            Builtin::MortarPeriodic { shift: 1.0 }
        );
    }

    #[test]
    fn quarter_ring_midpoint() {
        let d = builtin_geometry("quarter-ring").unwrap();
        let m = d.patches[0].eval_map([0.5, 0.5, 0.0]).unwrap();
        let r = m.x[0].hypot(m.x[1]);
        assert!((r - 0.75).abs() < 1e-14);
        assert!((m.x[1].atan2(m.x[0]) - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn glue_counts() {
        assert_eq!(builtin_geometry("cube-2").unwrap().glue.len(), 1);
        assert_eq!(builtin_geometry("cube-4").unwrap().glue.len(), 4);
        assert_eq!(builtin_geometry("cube-5").unwrap().glue.len(), 8);
        assert_eq!(builtin_geometry("ring").unwrap().glue.len(), 4);
        let m = builtin_geometry("cube-mortar-conforming:5").unwrap();
        assert_eq!(m.glue.len(), 16);
        assert_eq!(m.interfaces.len(), 5);
        let s = builtin_geometry("cube-mortar-shifted:1").unwrap();
        assert_eq!(s.interfaces.len(), 8);
        assert_eq!(
            builtin_geometry("cube-mortar-periodic")
                .unwrap()
                .interfaces
                .len(),
            4
        );
    }
}
