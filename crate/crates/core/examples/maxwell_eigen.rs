//! Maxwell eigenvalues on the π-cube: single patch, then the mortared
//! four-patch cube with both multiplier spaces.
//!
//! Run with `cargo run --release --example maxwell_eigen`.

use igagauge::assembly::MultiplierKind;
use igagauge::geometry::Discretization;
use igagauge::solve::{analytic_cube_spectrum, maxwell_eigen, GaugeMode};
use igagauge::spaces::SplineComplex;

fn main() -> igagauge::Result<()> {
    let exact = analytic_cube_spectrum(12.0);

    let cube = SplineComplex::builtin("cube", &Discretization::new(3, 4))?;
    let rep = maxwell_eigen(&cube, MultiplierKind::Enriched, GaugeMode::Tree, 10)?;
    println!("single patch, gauged: {} zero eigenvalues", rep.zero_count);
    for (l, e) in rep.eigenvalues.iter().zip(&exact) {
        println!("  {l:10.6}  exact {e}");
    }

    let mortar = SplineComplex::builtin("cube-mortar-conforming:4", &Discretization::new(2, 2))?;
    for kind in [MultiplierKind::Standard, MultiplierKind::Enriched] {
        let mut rep = maxwell_eigen(&mortar, kind, GaugeMode::Tree, 12)?;
        rep.flag_against(&exact, 0.05);
        println!(
            "mortar cube, {kind}: {:.3?} spurious {}",
            rep.eigenvalues,
            rep.spurious_count()
        );
    }
    Ok(())
}
