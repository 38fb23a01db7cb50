//! Volume operators, load vectors and mortar coupling.

use igagauge::assembly::{
    assemble_coupling, assemble_curlcurl, assemble_load, assemble_mass, build_multiplier,
    gauss_legendre, MultiplierKind,
};
use igagauge::geometry::{builtin_geometry, Discretization, FaceTag, Side};
use igagauge::solve::{manufactured_current, manufactured_field, sym_eigenvalues};
use igagauge::spaces::{derivative_full, evaluate, gradient_matrix, SplineComplex};
use std::f64::consts::PI;

fn one(_: [f64; 3]) -> f64 {
    1.0
}

#[test]
fn stiffness_is_symmetric_and_kills_gradients() {
    for name in ["cube", "quarter-ring", "cube-mortar-shifted:1"] {
        let c = SplineComplex::builtin(name, &Discretization::new(2, 2)).unwrap();
        let (s0, s1) = (c.space(0), c.space(1));
        let k = assemble_curlcurl(&c, &s1, &one).unwrap();
        assert_eq!(k.asymmetry(), 0.0, "{name}");
        let g = gradient_matrix(c.mesh(), &s0, &s1).unwrap();
        assert!(k.matmul(&g).max_abs() < 1e-10 * k.max_abs(), "{name}");
    }
}

#[test]
fn mass_is_spd() {
    let c = SplineComplex::builtin("cube", &Discretization::new(2, 2)).unwrap();
    let m = assemble_mass(&c, &c.space(1), &one).unwrap();
    assert_eq!(m.asymmetry(), 0.0);
    let eig = sym_eigenvalues(&m.to_dense()).unwrap();
    assert!(eig[0] > 0.0, "{}", eig[0]);
}

#[test]
fn constant_field_mass_is_volume() {
    let mut d = builtin_geometry("cube").unwrap();
    for s in 0..6 {
        d.set_tag(0, Side::from_index(s), FaceTag::Neumann);
    }
    let c = SplineComplex::discretize(&d, &Discretization::new(2, 2)).unwrap();
    let s1 = c.space(1);
    assert_eq!(s1.dim(), c.mesh().num(1));
    // the map is linear, so x interpolates exactly by its Greville values
    let x: Vec<f64> = (0..c.mesh().num(0))
        .map(|v| c.mesh().position(v)[0])
        .collect();
    let u = s1.restrict(&derivative_full(c.mesh(), 0).mul_vec(&x));
    let m = assemble_mass(&c, &s1, &one).unwrap();
    let mu = m.mul_vec(&u);
    let energy: f64 = u.iter().zip(&mu).map(|(a, b)| a * b).sum();
    assert!((energy - PI.powi(3)).abs() < 1e-10 * PI.powi(3), "{energy}");
}

#[test]
fn stiffness_entry_matches_pointwise_quadrature() {
    let c = SplineComplex::builtin("cube", &Discretization::new(2, 2)).unwrap();
    let s1 = c.space(1);
    let k = assemble_curlcurl(&c, &s1, &one).unwrap();
    let (gx, gw) = gauss_legendre(4);
    let unit = |d: usize| {
        let mut e = vec![0.0; s1.dim()];
        e[d] = 1.0;
        s1.extend(&e)
    };
    for (a, b) in [(0, 0), (0, 1), (3, 7), (10, 12)] {
        let (ua, ub) = (unit(a), unit(b));
        let mut sum = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                for l in 0..8 {
                    let q = [i, j, l];
                    let xi: [f64; 3] =
                        std::array::from_fn(|t| 0.5 * (q[t] / 4) as f64 + 0.5 * gx[q[t] % 4]);
                    let w: f64 = q.iter().map(|&t| 0.5 * gw[t % 4]).product();
                    let ca = evaluate(&c, 1, &ua, 0, xi).unwrap().1;
                    let cb = evaluate(&c, 1, &ub, 0, xi).unwrap().1;
                    sum += w * PI.powi(3) * (0..3).map(|t| ca[t] * cb[t]).sum::<f64>();
                }
            }
        }
        assert!(
            (sum - k.get(a, b)).abs() < 1e-12 * (1.0 + sum.abs()),
            "({a}, {b}): {sum} vs {}",
            k.get(a, b)
        );
    }
}

#[test]
fn manufactured_current_is_curl_curl_of_potential() {
    // closed form at (π/2, π/2, π)
    let j = manufactured_current([PI / 2.0, PI / 2.0, PI]);
    assert!(
        (j[0] - 1.25).abs() < 1e-15 && (j[1] - 1.25).abs() < 1e-15 && (j[2] - 2.0).abs() < 1e-15
    );
    // curl of B by central differences
    let h = 1e-5;
    for x in [[0.3, 1.1, 2.0], [2.5, 0.7, 4.1], [1.0, 2.0, 3.0]] {
        let db = |i: usize, k: usize| {
            let (mut p, mut m) = (x, x);
            p[k] += h;
            m[k] -= h;
            (manufactured_field(p)[i] - manufactured_field(m)[i]) / (2.0 * h)
        };
        let curl = [
            db(2, 1) - db(1, 2),
            db(0, 2) - db(2, 0),
            db(1, 0) - db(0, 1),
        ];
        let want = manufactured_current(x);
        for i in 0..3 {
            assert!(
                (curl[i] - want[i]).abs() < 1e-8,
                "{x:?}: {curl:?} vs {want:?}"
            );
        }
    }
}

#[test]
fn zero_sources_give_zero_load() {
    let c = SplineComplex::builtin("cube-mortar-periodic", &Discretization::new(2, 2)).unwrap();
    let s1 = c.space(1);
    let zero = |_: [f64; 3]| [0.0; 3];
    let f = assemble_load(&c, &s1, &zero, Some(&zero)).unwrap();
    assert!(f.iter().all(|&v| v == 0.0));
    let f = assemble_load(&c, &s1, &manufactured_current, None).unwrap();
    assert!(f.iter().any(|&v| v != 0.0));
}

#[test]
fn enrichment_counts() {
    let disc = Discretization::new(2, 2);
    for (name, n) in [("cube-2", 0), ("cube-4", 1), ("cube-5", 4)] {
        let c = SplineComplex::builtin(name, &disc).unwrap();
        assert_eq!(
            build_multiplier(&c, MultiplierKind::Enriched)
                .unwrap()
                .enrichment
                .len(),
            n,
            "{name}"
        );
        assert!(build_multiplier(&c, MultiplierKind::Standard)
            .unwrap()
            .enrichment
            .is_empty());
    }
}

#[test]
fn mortar_reproduces_constant_tangential_fields() {
    for name in [
        "cube-mortar-conforming:4",
        "cube-mortar-conforming:5",
        "cube-mortar-shifted:1",
    ] {
        let c = SplineComplex::builtin(name, &Discretization::new(2, 3)).unwrap();
        let s1 = c.space(1);
        // ∇y: tangential to the midplane and zero on every Dirichlet-constrained edge
        let y: Vec<f64> = (0..c.mesh().num(0))
            .map(|v| c.mesh().position(v)[1])
            .collect();
        let u = s1.restrict(&derivative_full(c.mesh(), 0).mul_vec(&y));
        for kind in [MultiplierKind::Standard, MultiplierKind::Enriched] {
            let mult = build_multiplier(&c, kind).unwrap();
            let coupling = assemble_coupling(&c, &s1, &mult).unwrap();
            let g1 = coupling.dependent.mul_vec(&u);
            let r = coupling.constraint().mul_vec(&u);
            let scale = g1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(scale > 0.0);
            assert!(r.iter().all(|v| v.abs() < 1e-12 * scale), "{name} {kind}");
        }
    }
}
