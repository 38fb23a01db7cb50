//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N ... PASS|FAIL` line before asserting.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use igagauge::assembly::{assemble_curlcurl, assemble_mass, MultiplierKind};
use igagauge::cli::fitted_slope;
use igagauge::gauge::NeighborOrder;
use igagauge::geometry::{builtin_geometry, Discretization, Side};
use igagauge::solve::{
    analytic_cube_spectrum, constraint_null_space, field_at, gauge_space, infsup_constant,
    kernel_dimension, manufactured_current, manufactured_field, maxwell_eigen, mortar_constraint,
    project, relative_error, source_problem, sym_eigenvalues, GaugeMode, SourceOptions, ZERO_TOL,
};
use igagauge::spaces::{derivative_full, evaluate, trace_space, SplineComplex, TraceFlavor};
use igagauge::splines::{eval_basis, eval_basis_ders, KnotVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn verdict(n: usize, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n} {name}: {tag} ({detail})");
}

/// `(patches, p, elements) -> (dim X⁰, K with M, K with M̃)` from the paper's table.
const TABLE: [(usize, usize, usize, [usize; 3]); 12] = [
    (2, 2, 2, [20, 20, 20]),
    (2, 2, 3, [63, 63, 63]),
    (2, 3, 2, [144, 144, 144]),
    (2, 3, 3, [468, 468, 468]),
    (4, 2, 2, [50, 51, 50]),
    (4, 2, 3, [147, 148, 147]),
    (4, 3, 2, [324, 325, 324]),
    (4, 3, 3, [1014, 1015, 1014]),
    (5, 2, 2, [80, 84, 80]),
    (5, 2, 3, [219, 223, 219]),
    (5, 3, 2, [464, 468, 464]),
    (5, 3, 3, [1392, 1396, 1392]),
];

#[test]
fn criterion_1_kernel_table() {
    let mut mismatches = Vec::new();
    for (patches, p, e, want) in TABLE {
        let disc = Discretization::new(p, e).with_regularity(1);
        let complex = SplineComplex::builtin(&format!("cube-{patches}"), &disc).unwrap();
        let s = kernel_dimension(&complex, MultiplierKind::Standard).unwrap();
        let t = kernel_dimension(&complex, MultiplierKind::Enriched).unwrap();
        let got = [s.dim_x0, s.kernel, t.kernel];
        if got != want || !s.is_clear() || !t.is_clear() {
            mismatches.push(format!(
                "{patches} patches p={p} h=1/{e}: got {got:?}, want {want:?}"
            ));
        }
    }
    let pass = mismatches.is_empty();
    verdict(
        1,
        "kernel table",
        pass,
        &format!("{} of 36 values differ", 3 * mismatches.len()),
    );
    assert!(pass, "{mismatches:#?}");
}

#[test]
fn criterion_2_spurious_modes() {
    let complex =
        SplineComplex::builtin("cube-mortar-conforming:4", &Discretization::new(3, 4)).unwrap();
    let internal = complex.mesh().interface_internal_vertices().len();
    let mut counts = Vec::new();
    for kind in [MultiplierKind::Standard, MultiplierKind::Enriched] {
        let mut rep = maxwell_eigen(&complex, kind, GaugeMode::Tree, 20).unwrap();
        let top = *rep.eigenvalues.last().unwrap();
        rep.flag_against(&analytic_cube_spectrum(2.0 * top + 10.0), 0.05);
        counts.push(rep.spurious_count());
    }
    let pass = internal == 1 && counts == [1, 0];
    verdict(
        2,
        "spurious modes",
        pass,
        &format!(
            "#Z = {internal}, spurious with M = {}, with M~ = {}",
            counts[0], counts[1]
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_eigenvalue_accuracy() {
    let complex = SplineComplex::builtin("cube", &Discretization::new(3, 4)).unwrap();
    let rep = maxwell_eigen(&complex, MultiplierKind::Enriched, GaugeMode::Tree, 16).unwrap();
    let nonzero: Vec<f64> = rep
        .eigenvalues
        .iter()
        .copied()
        .filter(|&v| v > rep.split.threshold)
        .take(10)
        .collect();
    let exact = analytic_cube_spectrum(10.0);
    let worst = nonzero
        .iter()
        .zip(&exact)
        .map(|(v, e)| (v - e).abs() / e)
        .fold(0.0f64, f64::max);
    let pass = nonzero.len() == 10 && worst < 1e-3;
    verdict(
        3,
        "eigenvalue accuracy",
        pass,
        &format!(
            "max relative error {worst:.3e} over {} values",
            nonzero.len()
        ),
    );
    assert!(pass, "{nonzero:?}");
}

#[test]
fn criterion_4_convergence_order() {
    let mut lines = Vec::new();
    let mut pass = true;
    for name in ["cube-mortar-periodic", "cube-mortar-shifted:1"] {
        for p in [2usize, 3] {
            let mut counts = Vec::new();
            let mut errs = Vec::new();
            for e in [4usize, 6, 8] {
                let complex = SplineComplex::builtin(name, &Discretization::new(p, e)).unwrap();
                let sol = source_problem(&complex, &manufactured_current, SourceOptions::default())
                    .unwrap();
                let err = relative_error(
                    &complex,
                    &sol.space,
                    &sol.solution.coefficients,
                    &manufactured_field,
                )
                .unwrap();
                counts.push(e as f64);
                errs.push(err);
            }
            let order = -fitted_slope(&counts, &errs);
            let ok = (p as f64 - 0.2..=p as f64 + 0.3).contains(&order);
            pass &= ok;
            lines.push(format!("{name} p={p}: {order:.3}"));
        }
    }
    verdict(4, "convergence order", pass, &lines.join(", "));
    assert!(pass);
}

#[test]
fn criterion_5_infsup_stability() {
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [4, 5] {
        for p in [2usize, 3] {
            for kind in [MultiplierKind::Standard, MultiplierKind::Enriched] {
                let betas: Vec<f64> = [2usize, 4, 8]
                    .iter()
                    .map(|&e| {
                        let name = format!("cube-mortar-conforming:{n}");
                        let complex =
                            SplineComplex::builtin(&name, &Discretization::new(p, e)).unwrap();
                        infsup_constant(&complex, kind).unwrap().beta
                    })
                    .collect();
                let min = betas.iter().copied().fold(f64::INFINITY, f64::min);
                let max = betas.iter().copied().fold(0.0, f64::max);
                let ok = min > 0.01 && max / min < 2.0;
                pass &= ok;
                lines.push(format!(
                    "N={n} p={p} {kind}: min {min:.4} ratio {:.3}",
                    max / min
                ));
            }
        }
    }
    verdict(5, "inf-sup stability", pass, &lines.join(", "));
    assert!(pass, "{lines:#?}");
}

const DIRICHLET_BUILTINS: [&str; 11] = [
    "cube",
    "cube-2",
    "cube-4",
    "cube-5",
    "cube-mortar-conforming:1",
    "cube-mortar-conforming:4",
    "cube-mortar-conforming:5",
    "cube-mortar-periodic",
    "cube-mortar-shifted:1",
    "cube-periodic-dirichlet",
    "quarter-ring",
];

/// Smallest eigenvalue of the gauged stiffness relative to the largest.
/// With an interface the cotree stiffness is taken on the null space of
/// the cotree constraint, which is the operator the saddle solve inverts.
fn gauged_stiffness_ratio(name: &str) -> f64 {
    let complex = SplineComplex::builtin(name, &Discretization::new(2, 2)).unwrap();
    let s1 = complex.space(1);
    let k = assemble_curlcurl(&complex, &s1, &|_| 1.0).unwrap();
    let m = assemble_mass(&complex, &s1, &|_| 1.0).unwrap();
    let g = mortar_constraint(&complex, &s1, MultiplierKind::Enriched).unwrap();
    let part = gauge_space(&complex, &s1, &k, &m, g.as_ref(), NeighborOrder::Ascending).unwrap();
    let kcc = k.select(&part.cotree, &part.cotree);
    let reduced = match &g {
        Some(g) => {
            let rows: Vec<usize> = (0..g.nrows()).collect();
            let (z, _) = constraint_null_space(&g.select(&rows, &part.cotree), ZERO_TOL).unwrap();
            project(&kcc, &z)
        }
        None => kcc.to_dense(),
    };
    let eig = sym_eigenvalues(&reduced).unwrap();
    eig[0] / eig[eig.len() - 1]
}

/// `ε` of the mortar solve and of the strongly glued solve of `name`.
fn mortar_and_glued(name: &str, disc: &Discretization) -> (f64, f64) {
    let mortar = SplineComplex::builtin(name, disc).unwrap();
    let glued_domain = builtin_geometry(name).unwrap().strongly_glued().unwrap();
    let glued = SplineComplex::discretize(&glued_domain, disc).unwrap();
    let error = |cx: &SplineComplex| {
        let sol = source_problem(cx, &manufactured_current, SourceOptions::default()).unwrap();
        relative_error(
            cx,
            &sol.space,
            &sol.solution.coefficients,
            &manufactured_field,
        )
        .unwrap()
    };
    (error(&mortar), error(&glued))
}

#[test]
fn criterion_6_gauge_properties() {
    // (a) gauged stiffness is SPD on the Dirichlet builtins
    let ratios: Vec<(&str, f64)> = DIRICHLET_BUILTINS
        .iter()
        .map(|&n| (n, gauged_stiffness_ratio(n)))
        .collect();
    let worst = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let a = worst > 1e-12;

    // (b) the x-periodic cube needs exactly one enrichment edge
    let complex = SplineComplex::builtin("cube-periodic", &Discretization::new(2, 3)).unwrap();
    let s1 = complex.space(1);
    let k = assemble_curlcurl(&complex, &s1, &|_| 1.0).unwrap();
    let m = assemble_mass(&complex, &s1, &|_| 1.0).unwrap();
    let enrichment = gauge_space(&complex, &s1, &k, &m, None, NeighborOrder::Ascending)
        .unwrap()
        .enrichment
        .len();
    let b = enrichment == 1;

    // (c) two spanning trees give the same field
    let complex =
        SplineComplex::builtin("cube-mortar-shifted:1", &Discretization::new(2, 2)).unwrap();
    let solve = |order| {
        let opts = SourceOptions {
            order,
            ..Default::default()
        };
        source_problem(&complex, &manufactured_current, opts).unwrap()
    };
    let up = solve(NeighborOrder::Ascending);
    let down = solve(NeighborOrder::Descending);
    let trees_differ = up.partition.as_ref().unwrap().tree != down.partition.as_ref().unwrap().tree;
    let mut rng = StdRng::seed_from_u64(7);
    let mut field_diff = 0.0f64;
    for _ in 0..50 {
        let patch = rng.random_range(0..complex.domain().num_patches());
        let xi: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>());
        let bu = field_at(&complex, &up.space, &up.solution.coefficients, patch, xi)
            .unwrap()
            .1;
        let bd = field_at(
            &complex,
            &down.space,
            &down.solution.coefficients,
            patch,
            xi,
        )
        .unwrap()
        .1;
        field_diff = (0..3)
            .map(|i| (bu[i] - bd[i]).abs())
            .fold(field_diff, f64::max);
    }
    let c = trees_differ && field_diff < 1e-8;

    // (d) conforming mortar matches strong gluing when each side of the
    // interface is a single face; with several faces per side the unglued
    // multiplier space is smaller than the trace space (reported only)
    let (em, eg) = mortar_and_glued("cube-mortar-conforming:1", &Discretization::new(3, 3));
    let d = (em - eg).abs() < 1e-8;
    let (fm, fg) = mortar_and_glued("cube-mortar-conforming:4", &Discretization::new(2, 2));

    let pass = a && b && c && d;
    verdict(
        6,
        "gauge properties",
        pass,
        &format!(
            "(a) min eig ratio {worst:.2e} over {} configs, (b) {enrichment} enrichment edge, \
             (c) trees differ {trees_differ}, |ΔB| {field_diff:.2e}, (d) |Δε| {:.2e} single face, \
             {:.2e} with four faces per side",
            ratios.len(),
            (em - eg).abs(),
            (fm - fg).abs()
        ),
    );
    assert!(a, "{ratios:?}");
    assert!(b && c && d);
}

#[test]
fn criterion_7_structure_preservation() {
    let mut rng = StdRng::seed_from_u64(11);

    // curl∘grad and div∘curl vanish exactly on the control mesh
    let complex = SplineComplex::builtin("cube-5", &Discretization::new(3, 2)).unwrap();
    let mesh = complex.mesh();
    let cg = derivative_full(mesh, 1)
        .matmul(&derivative_full(mesh, 0))
        .max_abs();
    let dc = derivative_full(mesh, 2)
        .matmul(&derivative_full(mesh, 1))
        .max_abs();
    let exact = cg == 0.0 && dc == 0.0;

    // partition of unity
    let kv = KnotVector::uniform(3, 5, 2).unwrap();
    let pu = (0..200)
        .map(|_| {
            let x = rng.random::<f64>();
            (eval_basis(&kv, x).unwrap().1.iter().sum::<f64>() - 1.0).abs()
        })
        .fold(0.0f64, f64::max);
    let unity = pu < 1e-12;

    // derivatives against central differences: 1D basis and 3D curl
    let delta = 1e-6;
    let h = kv.mesh_size();
    let mut fd1 = 0.0f64;
    for _ in 0..100 {
        let x = 0.01 + 0.98 * rng.random::<f64>();
        let (f, d) = eval_basis_ders(&kv, x, 1).unwrap();
        let (fp, vp) = eval_basis(&kv, x + delta).unwrap();
        let (fm, vm) = eval_basis(&kv, x - delta).unwrap();
        for (i, der) in d[1].iter().enumerate() {
            let at = |first: usize, v: &[f64]| {
                (f + i)
                    .checked_sub(first)
                    .and_then(|j| v.get(j))
                    .copied()
                    .unwrap_or(0.0)
            };
            let fd = (at(fp, &vp) - at(fm, &vm)) / (2.0 * delta);
            fd1 = fd1.max((fd - der).abs());
        }
    }
    let cube = SplineComplex::builtin("cube", &Discretization::new(3, 3)).unwrap();
    let coeffs: Vec<f64> = (0..cube.mesh().num(1))
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let mut fd3 = 0.0f64;
    for _ in 0..20 {
        let xi: [f64; 3] = std::array::from_fn(|_| 0.05 + 0.9 * rng.random::<f64>());
        let curl = evaluate(&cube, 1, &coeffs, 0, xi).unwrap().1;
        // the π-cube map is x = π ξ
        let grad = |j: usize| -> [f64; 3] {
            let mut p = xi;
            let mut m = xi;
            p[j] += delta;
            m[j] -= delta;
            let a = evaluate(&cube, 1, &coeffs, 0, p).unwrap().0;
            let b = evaluate(&cube, 1, &coeffs, 0, m).unwrap().0;
            std::array::from_fn(|i| (a[i] - b[i]) / (2.0 * delta * std::f64::consts::PI))
        };
        let g: [[f64; 3]; 3] = std::array::from_fn(grad);
        let fd = [g[1][2] - g[2][1], g[2][0] - g[0][2], g[0][1] - g[1][0]];
        fd3 = (0..3).map(|i| (fd[i] - curl[i]).abs()).fold(fd3, f64::max);
    }
    let derivative = fd1 < 1e-6 / h && fd3 < 1e-6 / cube.mesh_size();

    // commuting trace: tangential trace of ∇φ equals the surface gradient of φ
    let periodic = SplineComplex::builtin("cube-periodic", &Discretization::new(2, 3)).unwrap();
    let pm = periodic.mesh();
    let phi: Vec<f64> = (0..pm.num(0))
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let s1 = periodic.space(1);
    let u = s1.restrict(&derivative_full(pm, 0).mul_vec(&phi));
    let side = Side::YMin;
    let ts = trace_space(&periodic, &s1, 0, side, TraceFlavor::Curl).unwrap();
    let coef: Vec<f64> = ts
        .parent
        .iter()
        .map(|p| p.map_or(0.0, |(d, s)| s * u[d]))
        .collect();
    let mut tr = 0.0f64;
    for _ in 0..30 {
        let uv = [rng.random::<f64>(), rng.random::<f64>()];
        let mut surf = [0.0; 2];
        for (i, v) in ts.eval(uv) {
            surf[0] += coef[i] * v[0];
            surf[1] += coef[i] * v[1];
        }
        // unit cube: reference and physical gradients coincide
        let g = evaluate(&periodic, 0, &phi, 0, side.lift(uv)).unwrap().1;
        let t = side.tangents();
        tr = (0..2).map(|j| (surf[j] - g[t[j]]).abs()).fold(tr, f64::max);
    }
    let commuting = tr < 1e-10;

    let pass = exact && unity && derivative && commuting;
    verdict(
        7,
        "structure preservation",
        pass,
        &format!(
            "curl grad {cg:e}, div curl {dc:e}, unity {pu:.1e}, 1D FD {fd1:.1e}, curl FD {fd3:.1e}, trace {tr:.1e}"
        ),
    );
    assert!(pass);
}
