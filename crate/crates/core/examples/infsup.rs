//! Numerical inf-sup constant of the mortar coupling under refinement.
//!
//! Run with `cargo run --release --example infsup`.

use igagauge::assembly::MultiplierKind;
use igagauge::geometry::Discretization;
use igagauge::solve::infsup_constant;
use igagauge::spaces::SplineComplex;

fn main() -> igagauge::Result<()> {
    for name in ["cube-mortar-conforming:4", "cube-mortar-conforming:5"] {
        for kind in [MultiplierKind::Standard, MultiplierKind::Enriched] {
            let betas: Vec<f64> = [2, 4]
                .iter()
                .map(|&e| {
                    let c = SplineComplex::builtin(name, &Discretization::new(2, e))?;
                    Ok(infsup_constant(&c, kind)?.beta)
                })
                .collect::<igagauge::Result<_>>()?;
            println!("{name:26} {kind:9} beta {betas:.4?}");
        }
    }
    Ok(())
}
