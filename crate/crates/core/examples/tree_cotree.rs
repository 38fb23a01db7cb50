//! Spanning trees, cotree and cohomology enrichment on the control mesh.
//!
//! The x-periodic cube needs one extra tree edge; the Dirichlet cube none.
//! Run with `cargo run --release --example tree_cotree`.

use igagauge::assembly::{assemble_curlcurl, assemble_mass};
use igagauge::gauge::{build_graph, gauge_partition, write_tree_csv, NeighborOrder};
use igagauge::geometry::Discretization;
use igagauge::solve::gauge_space;
use igagauge::spaces::SplineComplex;

fn main() -> igagauge::Result<()> {
    for name in ["cube", "cube-periodic", "ring"] {
        let complex = SplineComplex::builtin(name, &Discretization::new(2, 2))?;
        let s1 = complex.space(1);
        let graph = build_graph(&complex, &s1);
        let tree = gauge_partition(&graph, NeighborOrder::Ascending);
        let k = assemble_curlcurl(&complex, &s1, &|_| 1.0)?;
        let m = assemble_mass(&complex, &s1, &|_| 1.0)?;
        let part = gauge_space(&complex, &s1, &k, &m, None, NeighborOrder::Ascending)?;
        println!(
            "{name:14} vertices {:4}  free edges {:4}  tree {:4}  cotree {:4}  enrichment {}",
            graph.num_vertices(),
            s1.dim(),
            tree.tree.len(),
            part.cotree.len(),
            part.enrichment.len()
        );
        if name == "cube-periodic" {
            let mut buf = Vec::new();
            write_tree_csv(&mut buf, complex.mesh(), &graph, &part)?;
            let text = String::from_utf8_lossy(&buf);
            println!(
                "tree dump: {} rows, header {}",
                text.lines().count() - 1,
                text.lines().next().unwrap_or("")
            );
        }
    }
    Ok(())
}
