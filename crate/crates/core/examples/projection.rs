//! Projections of a 6D cloud to 3D and how much variance each keeps.

use torusforge::cr3bp::{libration_point, LibrationLabel, MassParameter};
use torusforge::projection::{captured_variance, Projection};
use torusforge::samplers::sample_center_manifold_torus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = MassParameter::new(0.01215)?;
    let l2 = libration_point(mu, LibrationLabel::L2)?;
    let cloud = sample_center_manifold_torus(mu, &l2, 5e-3, 5e-3, 2000)?;
    let choices =
        [Projection::CoordinateSelect { axes: [0, 1, 2] }, Projection::CoordinateSelect { axes: [0, 1, 3] }, Projection::Pca];
    for p in &choices {
        let map = p.resolve(&cloud)?;
        println!("{p:?}: {:.4}", captured_variance(&cloud, &map));
    }
    Ok(())
}
