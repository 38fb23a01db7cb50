//! Manufactured magnetostatic problem on the x-periodic mortar box,
//! conforming and with the lower half shifted by one.
//!
//! Run with `cargo run --release --example convergence`.

use igagauge::cli::fitted_slope;
use igagauge::geometry::Discretization;
use igagauge::solve::{
    manufactured_current, manufactured_field, relative_error, source_problem, SourceOptions,
};
use igagauge::spaces::SplineComplex;

fn main() -> igagauge::Result<()> {
    let p = 2;
    for name in ["cube-mortar-periodic", "cube-mortar-shifted:1"] {
        let mut counts = Vec::new();
        let mut errs = Vec::new();
        for elements in [1, 2, 4] {
            let complex = SplineComplex::builtin(name, &Discretization::new(p, elements))?;
            let sol = source_problem(&complex, &manufactured_current, SourceOptions::default())?;
            let err = relative_error(
                &complex,
                &sol.space,
                &sol.solution.coefficients,
                &manufactured_field,
            )?;
            println!(
                "{name:22} p={p} h=1/{elements}  dofs {:6}  error {err:.4e}",
                sol.space.dim()
            );
            counts.push(elements as f64);
            errs.push(err);
        }
        println!(
            "{name:22} fitted order {:.2}",
            -fitted_slope(&counts, &errs)
        );
    }
    Ok(())
}
