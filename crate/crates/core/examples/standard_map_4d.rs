//! Orbit of two uncoupled standard maps, embedded in 4D and meshed.

use torusforge::pipeline::{mesh_cloud, PipelineConfig};
use torusforge::samplers::{sample_standard_map_torus, StandardMapConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: f64 = std::env::args().nth(1).map_or(Ok(0.3), |s| s.parse())?;
    let cfg = StandardMapConfig { k1: k, k2: k, ..Default::default() };
    let cloud = sample_standard_map_torus(&cfg)?;
    println!("{} points in R^{}", cloud.len(), cloud.dim());

    let outcome = mesh_cloud(&cloud, &PipelineConfig::default(), None)?;
    let r = &outcome.forms.residuals;
    println!("period matrix {:?}", r.period_matrix);
    println!(
        "faces {}, chi {}, torus {}",
        outcome.validation.faces,
        outcome.validation.euler_characteristic,
        outcome.validation.is_torus()
    );
    Ok(())
}
