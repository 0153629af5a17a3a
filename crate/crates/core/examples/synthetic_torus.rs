//! Torus of revolution in 3D: sample, mesh, validate.

use torusforge::pipeline::{mesh_cloud, PipelineConfig};
use torusforge::samplers::sample_torus_revolution;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cloud = sample_torus_revolution(2.0, 0.5, 2000, 7)?;
    let outcome = mesh_cloud(&cloud, &PipelineConfig::default(), None)?;
    let v = &outcome.validation;
    println!("V = {}, E = {}, F = {}, chi = {}", v.vertices, v.edges, v.faces, v.euler_characteristic);
    println!("generators: toroidal {:.3}, poloidal {:.3}", outcome.basis.toroidal.weight(), outcome.basis.poloidal.weight());
    println!("rounds: {}, torus: {}", outcome.merge.rounds_used, v.is_torus());
    Ok(())
}
