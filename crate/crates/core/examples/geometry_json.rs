//! Builtin geometries, JSON round trip and interface validation.
//!
//! Run with `cargo run --example geometry_json [path.json]`.

use igagauge::geometry::{builtin_geometry, load_domain, to_json, validate_interfaces, Builtin};

fn main() -> igagauge::Result<()> {
    let domain = match std::env::args().nth(1) {
        Some(path) => load_domain(path)?,
        None => builtin_geometry("cube-mortar-shifted:1")?,
    };
    domain.validate()?;
    let report = validate_interfaces(&domain)?;
    println!(
        "{} patches, {} glued face pairs, {} interface records",
        domain.num_patches(),
        domain.glue.len(),
        domain.interfaces.len()
    );
    println!("interface deviation {:.2e}", report.interface_deviation);
    for ((patch, side), c) in &report.coverage {
        println!("  patch {patch} {} covered {c:.12}", side.name());
    }

    let text = to_json(&domain)?;
    println!(
        "JSON: {} bytes, first line {}",
        text.len(),
        text.lines().next().unwrap_or("")
    );

    println!("builtins: {}", Builtin::NAMES.join(", "));
    Ok(())
}
