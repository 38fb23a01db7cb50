//! Tree-cotree gauging and the magnetostatic saddle solve.

use igagauge::assembly::{assemble_curlcurl, assemble_mass, MultiplierKind};
use igagauge::gauge::{build_graph, gauge_partition, gauge_reduce, spanning_tree, NeighborOrder};
use igagauge::geometry::Discretization;
use igagauge::solve::{
    field_at, gauge_space, manufactured_current, manufactured_field, mortar_constraint,
    relative_error, source_problem, sym_eigenvalues, GaugeMode, SourceOptions,
};
use igagauge::spaces::SplineComplex;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn one(_: [f64; 3]) -> f64 {
    1.0
}

/// Largest pointwise difference of `B` between two free-DoF vectors.
fn field_gap(c: &SplineComplex, a: &[f64], b: &[f64], seed: u64) -> f64 {
    let s1 = c.space(1);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut gap = 0.0f64;
    for _ in 0..50 {
        let patch = rng.random_range(0..c.domain().num_patches());
        let xi: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>());
        let ba = field_at(c, &s1, a, patch, xi).unwrap().1;
        let bb = field_at(c, &s1, b, patch, xi).unwrap().1;
        gap = (0..3).map(|i| (ba[i] - bb[i]).abs()).fold(gap, f64::max);
    }
    gap
}

#[test]
fn spanning_tree_spans_the_graph() {
    for name in ["cube", "ring", "cube-periodic"] {
        let c = SplineComplex::builtin(name, &Discretization::new(2, 2)).unwrap();
        let g = build_graph(&c, &c.space(1));
        let part = spanning_tree(&g, NeighborOrder::Ascending);
        assert_eq!(part.report.roots, 1, "{name}");
        assert_eq!(part.tree_edges.len(), g.num_vertices() - 1, "{name}");
    }
}

#[test]
fn partition_covers_free_dofs_and_keeps_interface_edges() {
    let c = SplineComplex::builtin("cube-mortar-conforming:4", &Discretization::new(2, 2)).unwrap();
    let s1 = c.space(1);
    let g = build_graph(&c, &s1);
    let part = gauge_partition(&g, NeighborOrder::Ascending);
    let mut all: Vec<usize> = part.tree.iter().chain(&part.cotree).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..s1.dim()).collect::<Vec<_>>());
    for e in 0..g.num_edges() {
        if let (true, igagauge::geometry::Role::Dependent, Some(d)) =
            (g.edge_flags[e].interface, g.edge_role[e], g.edge_dof[e])
        {
            assert!(
                part.cotree.binary_search(&d).is_ok(),
                "interface DoF {d} gauged"
            );
        }
    }
    assert!(part.report.interface_tree_edges > 0);
    // same graph and order: bit-identical partition
    assert_eq!(gauge_partition(&g, NeighborOrder::Ascending), part);
}

#[test]
fn gauged_stiffness_is_spd_on_dirichlet_cube() {
    let c = SplineComplex::builtin("cube", &Discretization::new(2, 2)).unwrap();
    let s1 = c.space(1);
    let k = assemble_curlcurl(&c, &s1, &one).unwrap();
    let m = assemble_mass(&c, &s1, &one).unwrap();
    let part = gauge_space(&c, &s1, &k, &m, None, NeighborOrder::Ascending).unwrap();
    assert!(part.enrichment.is_empty());
    let eig = sym_eigenvalues(&k.select(&part.cotree, &part.cotree).to_dense()).unwrap();
    assert!(eig[0] > 1e-8 * eig[eig.len() - 1], "{}", eig[0]);
}

#[test]
fn enrichment_matches_relative_cohomology() {
    for (name, want) in [
        ("cube", 0),
        ("cube-periodic", 1),
        ("cube-periodic-dirichlet", 0),
        ("ring", 1),
    ] {
        let c = SplineComplex::builtin(name, &Discretization::new(2, 2)).unwrap();
        let s1 = c.space(1);
        let k = assemble_curlcurl(&c, &s1, &one).unwrap();
        let m = assemble_mass(&c, &s1, &one).unwrap();
        let g = mortar_constraint(&c, &s1, MultiplierKind::Enriched).unwrap();
        let part = gauge_space(&c, &s1, &k, &m, g.as_ref(), NeighborOrder::Ascending).unwrap();
        assert_eq!(part.enrichment.len(), want, "{name}");
    }
}

#[test]
fn field_is_independent_of_the_tree() {
    for name in [
        "cube-mortar-shifted:1",
        "cube-mortar-conforming:4",
        "quarter-ring",
    ] {
        let c = SplineComplex::builtin(name, &Discretization::new(2, 2)).unwrap();
        let solve = |order| {
            let opts = SourceOptions {
                order,
                ..SourceOptions::default()
            };
            source_problem(&c, &manufactured_current, opts).unwrap()
        };
        let (a, b) = (
            solve(NeighborOrder::Ascending),
            solve(NeighborOrder::Descending),
        );
        assert_ne!(
            a.partition.as_ref().unwrap().tree,
            b.partition.as_ref().unwrap().tree,
            "{name}"
        );
        let gap = field_gap(&c, &a.solution.coefficients, &b.solution.coefficients, 5);
        assert!(gap < 1e-8, "{name}: {gap:e}");
    }
}

#[test]
fn gauged_field_matches_regularized_solve() {
    let c = SplineComplex::builtin("cube-mortar-conforming:1", &Discretization::new(2, 2)).unwrap();
    let tree = source_problem(&c, &manufactured_current, SourceOptions::default()).unwrap();
    let opts = SourceOptions {
        gauge: GaugeMode::None,
        ..SourceOptions::default()
    };
    let free = source_problem(&c, &manufactured_current, opts).unwrap();
    assert!(tree.solution.residual < 1e-10);
    let gap = field_gap(
        &c,
        &tree.solution.coefficients,
        &free.solution.coefficients,
        9,
    );
    assert!(gap < 1e-8, "{gap:e}");
}

#[test]
fn zero_sources_and_trivial_errors() {
    let c = SplineComplex::builtin("cube-mortar-periodic", &Discretization::new(2, 2)).unwrap();
    let sol = source_problem(&c, &|_| [0.0; 3], SourceOptions::default()).unwrap();
    assert!(sol.solution.coefficients.iter().all(|&v| v == 0.0));
    let err = relative_error(
        &c,
        &sol.space,
        &sol.solution.coefficients,
        &manufactured_field,
    )
    .unwrap();
    assert!((err - 1.0).abs() < 1e-14);
}

#[test]
fn error_decreases_under_refinement() {
    let errs: Vec<f64> = [2, 4]
        .iter()
        .map(|&e| {
            let c =
                SplineComplex::builtin("cube-mortar-periodic", &Discretization::new(2, e)).unwrap();
            let sol = source_problem(&c, &manufactured_current, SourceOptions::default()).unwrap();
            relative_error(
                &c,
                &sol.space,
                &sol.solution.coefficients,
                &manufactured_field,
            )
            .unwrap()
        })
        .collect();
    // second order: roughly a factor four per halving
    let ratio = errs[0] / errs[1];
    assert!((2.5..6.0).contains(&ratio), "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn expander_inverts_reduction(seed in any::<u64>()) {
        let c = SplineComplex::builtin("cube-4", &Discretization::new(2, 2)).unwrap();
        let s1 = c.space(1);
        let part = gauge_partition(&build_graph(&c, &s1), NeighborOrder::Descending);
        let k = igagauge::sparse::CsrMatrix::identity(s1.dim());
        let mut rng = StdRng::seed_from_u64(seed);
        let rhs: Vec<f64> = (0..s1.dim()).map(|_| rng.random()).collect();
        let red = gauge_reduce(&k, &rhs, &part);
        let x: Vec<f64> = (0..red.expander.len()).map(|_| rng.random()).collect();
        let full = red.expand(&x);
        prop_assert_eq!(red.reduce(&full), x);
        prop_assert!(part.tree.iter().all(|&d| full[d] == 0.0));
        prop_assert_eq!(red.reduce(&rhs), red.rhs.clone());
    }
}
