//! JSON geometry files.
//!
//! ```json
//! { "patches": [ { "degree": [1,1,1], "knots": [[0,0,1,1], [0,0,1,1], [0,0,1,1]],
//!                  "points": [[0,0,0,1], ...], "subdomain": "dependent" } ],
//!   "faces": [ { "patch": 0, "side": "xmin", "tag": "dirichlet" } ],
//!   "interfaces": [ { "id": 0, "dependent": [0, "zmin"], "independent": [1, "zmax"],
//!                     "map": { "offset": [0,0], "flip": [false,false], "wrap": [false,false] } } ],
//!   "glue": [ { "a": [0, "xmax"], "b": [1, "xmin"] } ] }
//! ```
//!
//! Points are homogeneous: coordinates already multiplied by the weight.
//! Glue orientation is inferred from the geometry when `swap`/`flip` are
//! omitted; an absent `glue` list glues all coincident untagged faces.
//! Subdomain roles default to the side each patch takes in the interface
//! records, propagated through glue.

use super::{
    FaceMap, FaceTag, Glue, InterfaceMap, InterfaceRecord, MultiPatchDomain, Patch, Role, Side,
};
use crate::error::{Error, Result};
use crate::splines::KnotVector;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct DomainFile {
    patches: Vec<PatchJson>,
    #[serde(default)]
    faces: Vec<FaceJson>,
    #[serde(default)]
    interfaces: Vec<InterfaceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    glue: Option<Vec<GlueJson>>,
}

#[derive(Serialize, Deserialize)]
struct PatchJson {
    degree: [usize; 3],
    knots: [Vec<f64>; 3],
    points: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subdomain: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct FaceJson {
    patch: usize,
    side: String,
    tag: String,
}

#[derive(Serialize, Deserialize)]
struct InterfaceJson {
    id: u32,
    dependent: (usize, String),
    independent: (usize, String),
    map: MapJson,
}

fn one() -> [f64; 2] {
    [1.0; 2]
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    #[serde(default)]
    offset: [f64; 2],
    #[serde(default)]
    flip: [bool; 2],
    #[serde(default)]
    wrap: [bool; 2],
    #[serde(default = "one")]
    scale: [f64; 2],
    #[serde(default)]
    swap: bool,
    #[serde(default)]
    translation: [f64; 3],
    #[serde(default)]
    period: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct GlueJson {
    a: (usize, String),
    b: (usize, String),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    swap: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flip: Option<[bool; 2]>,
}

fn face(patches: usize, f: &(usize, String)) -> Result<(usize, Side)> {
    if f.0 >= patches {
        return Err(Error::Geometry(format!("patch index {} out of range", f.0)));
    }
    Ok((f.0, Side::parse(&f.1)?))
}

/// Parses a JSON geometry document.
pub fn parse_domain(text: &str) -> Result<MultiPatchDomain> {
    let file: DomainFile = serde_json::from_str(text)?;
    let n = file.patches.len();
    let mut patches = Vec::with_capacity(n);
    let mut explicit = vec![None; n];
    for (i, p) in file.patches.into_iter().enumerate() {
        let [k0, k1, k2] = p.knots;
        let knots = [
            KnotVector::new(p.degree[0], k0)?,
            KnotVector::new(p.degree[1], k1)?,
            KnotVector::new(p.degree[2], k2)?,
        ];
        patches.push(Patch::new(knots, p.points)?);
        explicit[i] = match p.subdomain.as_deref() {
            None => None,
            Some("dependent") => Some(Role::Dependent),
            Some("independent") => Some(Role::Independent),
            Some(s) => return Err(Error::Geometry(format!("unknown subdomain `{s}`"))),
        };
    }
    let mut d = MultiPatchDomain::new(patches, vec![Role::Dependent; n])?;
    for f in &file.faces {
        let (p, s) = face(n, &(f.patch, f.side.clone()))?;
        d.set_tag(p, s, FaceTag::parse(&f.tag)?);
    }
    for r in &file.interfaces {
        let m = &r.map;
        d.interfaces.push(InterfaceRecord {
            id: r.id,
            dependent: face(n, &r.dependent)?,
            independent: face(n, &r.independent)?,
            map: InterfaceMap {
                offset: m.offset,
                flip: m.flip,
                wrap: m.wrap,
                scale: m.scale,
                swap: m.swap,
                translation: m.translation,
                period: m.period,
            },
        });
    }
    match &file.glue {
        None => d.glue_coincident_faces()?,
        Some(list) => {
            for g in list {
                let a = face(n, &g.a)?;
                let b = face(n, &g.b)?;
                let map = match (g.swap, g.flip) {
                    (None, None) => {
                        d.find_face_map(a, b, [0.0; 3])?
                            .ok_or_else(|| Error::Topology {
                                a: a.0,
                                b: b.0,
                                reason: "glued faces do not coincide".into(),
                            })?
                    }
                    (s, f) => FaceMap {
                        swap: s.unwrap_or(false),
                        flip: f.unwrap_or([false; 2]),
                    },
                };
                d.glue.push(Glue { a, b, map });
            }
        }
    }
    // roles: explicit, else inferred from interface sides through glue
    let mut roles: Vec<Option<Role>> = explicit;
    for r in &d.interfaces {
        roles[r.dependent.0].get_or_insert(Role::Dependent);
        roles[r.independent.0].get_or_insert(Role::Independent);
    }
    loop {
        let mut changed = false;
        for g in &d.glue {
            for (x, y) in [(g.a.0, g.b.0), (g.b.0, g.a.0)] {
                if roles[x].is_none() && roles[y].is_some() {
                    roles[x] = roles[y];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    d.roles = roles.into_iter().map(Option::unwrap_or_default).collect();
    Ok(d)
}

/// Reads a JSON geometry file.
pub fn load_domain(path: impl AsRef<Path>) -> Result<MultiPatchDomain> {
    parse_domain(&std::fs::read_to_string(path)?)
}

/// Serializes a domain to the JSON format read by [`parse_domain`].
pub fn to_json(d: &MultiPatchDomain) -> Result<String> {
    let patches = d
        .patches
        .iter()
        .zip(&d.roles)
        .map(|(p, r)| PatchJson {
            degree: p.knots().clone().map(|k| k.degree()),
            knots: p.knots().clone().map(|k| k.knots().to_vec()),
            points: p.homogeneous_points().to_vec(),
            subdomain: Some(match r {
                Role::Dependent => "dependent".into(),
                Role::Independent => "independent".into(),
            }),
        })
        .collect();
    let mut faces = Vec::new();
    for (p, tags) in d.tags.iter().enumerate() {
        for (s, t) in tags.iter().enumerate() {
            if let Some(t) = t {
                faces.push(FaceJson {
                    patch: p,
                    side: Side::from_index(s).name().into(),
                    tag: t.label(),
                });
            }
        }
    }
    let named = |f: (usize, Side)| (f.0, f.1.name().to_string());
    let interfaces = d
        .interfaces
        .iter()
        .map(|r| InterfaceJson {
            id: r.id,
            dependent: named(r.dependent),
            independent: named(r.independent),
            map: MapJson {
                offset: r.map.offset,
                flip: r.map.flip,
                wrap: r.map.wrap,
                scale: r.map.scale,
                swap: r.map.swap,
                translation: r.map.translation,
                period: r.map.period,
            },
        })
        .collect();
    let glue = d
        .glue
        .iter()
        .map(|g| GlueJson {
            a: named(g.a),
            b: named(g.b),
            swap: Some(g.map.swap),
            flip: Some(g.map.flip),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&DomainFile {
        patches,
        faces,
        interfaces,
        glue: Some(glue),
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin_geometry;

    #[test]
    fn roundtrip_builtins() {
        for name in ["cube-5", "cube-mortar-shifted:1", "ring"] {
            let d = builtin_geometry(name).unwrap();
            let back = parse_domain(&to_json(&d).unwrap()).unwrap();
            assert_eq!(back, d, "{name}");
        }
    }

    #[test]
    fn glue_inferred_when_missing() {
        let d = builtin_geometry("cube-2").unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&to_json(&d).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("glue");
        let back = parse_domain(&v.to_string()).unwrap();
        assert_eq!(back.glue, d.glue);
    }

    #[test]
    fn rejects_bad_side() {
        let text = r#"{"patches": [], "faces": [{"patch": 0, "side": "top", "tag": "dirichlet"}]}"#;
        assert!(parse_domain(text).is_err());
    }
}
