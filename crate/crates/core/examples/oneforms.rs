//! Harmonic one-forms on a flat grid: periods and residuals.

use torusforge::grid::{flat_torus_basis, flat_torus_graph};
use torusforge::oneform::{assemble_system, solve_oneforms, EdgeWeights, WeightMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, m) = (8, 6);
    let graph = flat_torus_graph(n, m);
    let basis = flat_torus_basis(&graph, n, m);
    let system = assemble_system(&graph, &basis, &EdgeWeights::from_mode(&graph, WeightMode::Uniform));
    let forms = solve_oneforms(&system)?;
    println!("{}", serde_json::to_string_pretty(&forms.residuals)?);
    // One step in j moves v by 1/m, one step in i moves u by 1/n.
    println!("edge 0 -> 1: {:?}", forms.along(&graph, 0, 1));
    println!("edge 0 -> {m}: {:?}", forms.along(&graph, 0, m as usize));
    Ok(())
}
