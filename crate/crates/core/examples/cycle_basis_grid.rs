//! Minimum cycle basis of a flat torus grid and its two generators.

use torusforge::cycles::{classify_cycles, cycle_space_dimension, minimum_cycle_basis};
use torusforge::grid::flat_torus_graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (n, m) in [(3, 3), (6, 4), (12, 10)] {
        let graph = flat_torus_graph(n, m);
        let basis = minimum_cycle_basis(&graph)?;
        let classified = classify_cycles(&basis)?;
        println!(
            "{n}x{m}: dim {} weight {} generators {} + {} hops",
            cycle_space_dimension(&graph)?,
            basis.total_weight(),
            classified.toroidal.hop_count(),
            classified.poloidal.hop_count(),
        );
    }
    Ok(())
}
