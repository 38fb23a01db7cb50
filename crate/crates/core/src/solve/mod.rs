//! Linear algebra on top of the assembled operators.
//!
//! * [`kernel_dimension`]: null space of `ZᵀKZ` with `Z` spanning the
//!   mortar-constraint null space.
//! * [`maxwell_eigen`] / [`solve_eigen`]: dense generalized eigenproblems on
//!   the gauged, constrained space.
//! * [`infsup_constant`]: smallest eigenvalue of the multiplier Schur
//!   complement against the multiplier Gram matrix.
//! * [`source_problem`] / [`solve_magnetostatic`]: gauged saddle-point solve
//!   by sparse LU, with [`relative_error`] for the flux density.
//!
//! Zero decisions use a relative threshold of `1e−8` and report the gap to
//! the first nonzero value.

mod dense;
mod eigen;
mod infsup;
mod iterative;
mod kernel;
mod setup;
mod source;

pub use dense::{
    constraint_null_space, generalized_eigen, null_space, project, range_basis, sym_eigenvalues,
    ZeroSplit,
};
pub use eigen::{
    analytic_cube_spectrum, flag_spurious, maxwell_eigen, maxwell_eigen_with, solve_eigen,
    EigenProblem, SpectrumReport,
};
pub use infsup::{infsup_constant, InfSupReport};
pub use iterative::{sparse_null_space, Cholesky, SparseLu};
pub use kernel::{interior_vertex_count, kernel_dimension, KernelReport, ZERO_TOL};
pub use setup::{gauge_space, mortar_constraint, GaugeMode};
pub use source::{
    field_at, manufactured_current, manufactured_field, manufactured_potential, relative_error,
    solve_magnetostatic, source_problem, FieldSolution, SaddleSystem, SourceOptions,
    SourceSolution,
};
