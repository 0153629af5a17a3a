//! Linear center-manifold torus around L2, in the 6D phase space.

use torusforge::cr3bp::{libration_point, LibrationLabel, MassParameter};
use torusforge::pipeline::{mesh_cloud, PipelineConfig};
use torusforge::samplers::{sample_center_manifold_torus, CenterManifoldTorus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = MassParameter::new(0.01215)?;
    let l2 = libration_point(mu, LibrationLabel::L2)?;
    let torus = CenterManifoldTorus::new(mu, l2, 5e-3, 5e-3)?;
    let (cp, cv) = torus.circumferences();
    println!("mode circumferences: planar {cp:.5}, vertical {cv:.5}");

    let cloud = sample_center_manifold_torus(mu, &l2, 5e-3, 5e-3, 6000)?;
    let outcome = mesh_cloud(&cloud, &PipelineConfig::default(), None)?;
    let v = &outcome.validation;
    println!("V = {}, F = {}, chi = {}, torus = {}", v.vertices, v.faces, v.euler_characteristic, v.is_torus());
    println!("patch disagreement {:.2e}", outcome.merge.max_patch_disagreement);
    Ok(())
}
