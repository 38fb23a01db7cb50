//! Knot vectors, B-spline values and the Curry–Schoenberg derivative basis.
//!
//! Run with `cargo run --example spline_basics`.

use igagauge::splines::{eval_basis, eval_basis_ders, eval_curry_schoenberg, KnotVector};

fn main() -> igagauge::Result<()> {
    let kv = KnotVector::uniform(3, 4, 2)?;
    println!("knots {:?}", kv.knots());
    println!(
        "{} basis functions, mesh size {}",
        kv.num_basis(),
        kv.mesh_size()
    );

    let x = 0.3;
    let (first, vals) = eval_basis(&kv, x)?;
    println!("B_{first}..B_{} at {x}: {vals:.4?}", first + vals.len() - 1);
    println!("partition of unity: {:.15}", vals.iter().sum::<f64>());

    // B'_i = D_{i-1} - D_i with D the reduced (Curry–Schoenberg) basis
    let red = kv.reduced()?;
    let (_, ders) = eval_basis_ders(&kv, x, 1)?;
    let (dfirst, d) = eval_curry_schoenberg(&red, x)?;
    println!("D_{dfirst}..: {d:.4?}");
    println!("derivatives: {:.4?}", ders[1]);

    println!("greville {:.3?}", kv.greville());
    Ok(())
}
