//! Invariants of a triangle list: closed torus, then one face removed.
//!
//! `cargo run --example validate_mesh -- mesh.csv` checks a file instead.

use std::path::Path;

use torusforge::grid::{flat_torus_basis, flat_torus_graph};
use torusforge::mesher::{merge_patches, MeshConfig, SeedSchedule};
use torusforge::oneform::{assemble_system, solve_oneforms, EdgeWeights, WeightMode};
use torusforge::pipeline::validate_files;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(path) = std::env::args().nth(1) {
        println!("{}", serde_json::to_string_pretty(&validate_files(Path::new(&path), None)?)?);
        return Ok(());
    }
    let (n, m) = (16, 12);
    let graph = flat_torus_graph(n, m);
    let basis = flat_torus_basis(&graph, n, m);
    let forms = solve_oneforms(&assemble_system(&graph, &basis, &EdgeWeights::from_mode(&graph, WeightMode::Uniform)))?;
    let out = merge_patches(&graph, &forms, [n as f64, m as f64], &SeedSchedule::Random(0), &MeshConfig::default())?;
    println!("closed: {:?}", out.mesh.validate());
    println!("minus one face: {:?}", out.mesh.without_face(0).validate());
    Ok(())
}
