//! Discrete kernel dimensions for the one-sided mortar cubes.
//!
//! Prints `dim X⁰_{h,0}` and the kernel dimension with the standard and the
//! enriched multiplier space on `C¹` knots.
//! Run with `cargo run --release --example kernel_table`.

use igagauge::assembly::MultiplierKind;
use igagauge::geometry::Discretization;
use igagauge::solve::kernel_dimension;
use igagauge::spaces::SplineComplex;

fn main() -> igagauge::Result<()> {
    println!("patches p  h    dimX0 K[M] K[M~] #Z");
    for (name, patches) in [("cube-2", 2), ("cube-4", 4), ("cube-5", 5)] {
        let disc = Discretization::new(2, 2).with_regularity(1);
        let complex = SplineComplex::builtin(name, &disc)?;
        let s = kernel_dimension(&complex, MultiplierKind::Standard)?;
        let e = kernel_dimension(&complex, MultiplierKind::Enriched)?;
        println!(
            "{patches:7} {}  1/2  {:5} {:4} {:5} {}",
            disc.degree, s.dim_x0, s.kernel, e.kernel, s.interface_internal
        );
    }
    Ok(())
}
