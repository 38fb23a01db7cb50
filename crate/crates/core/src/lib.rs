//! Curl-conforming multi-patch B-spline discretizations with tree-cotree
//! gauging and mortar coupling.
//!
//! The crate builds the spline de Rham complex on a multi-patch domain,
//! identifies its control mesh across patches, gauges the magnetic vector
//! potential with a spanning tree of that mesh, and couples non-matching
//! subdomains with (optionally enriched) Lagrange multipliers.
//!
//! | module | contents |
//! |---|---|
//! | [`splines`] | knot vectors, B-spline and Curry–Schoenberg bases |
//! | [`geometry`] | NURBS patches, topology, builtins, JSON, control mesh |
//! | [`spaces`] | discrete spaces, derivative matrices, traces |
//! | [`gauge`] | spanning trees, cotree, cohomology enrichment |
//! | [`assembly`] | quadrature, stiffness, mass, load, mortar coupling |
//! | [`solve`] | kernel dimension, eigenvalues, inf-sup, source problem |
//! | [`cli`] | experiment drivers behind the `igagauge` binary |
//!
//! ```no_run
//! use igagauge::assembly::MultiplierKind;
//! use igagauge::geometry::Discretization;
//! use igagauge::solve::kernel_dimension;
//! use igagauge::spaces::SplineComplex;
//!
//! let complex = SplineComplex::builtin("cube-4", &Discretization::new(2, 2).with_regularity(1))?;
//! let report = kernel_dimension(&complex, MultiplierKind::Enriched)?;
//! assert_eq!(report.kernel, report.dim_x0);
//! # Ok::<(), igagauge::Error>(())
//! ```
//!
//! Runnable examples live in `examples/`, one per capability.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod gauge;
pub mod geometry;
pub mod solve;
pub mod spaces;
pub mod sparse;
pub mod splines;

pub use error::{Error, Result};
