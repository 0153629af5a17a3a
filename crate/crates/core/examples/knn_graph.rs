//! Exact k-nearest-neighbour graph, checked against brute force.

use torusforge::knn::{build_knn_graph, build_knn_graph_brute_force};
use torusforge::samplers::sample_torus_revolution;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cloud = sample_torus_revolution(2.0, 0.5, 2000, 1)?;
    for k in [2, 4, 8] {
        match build_knn_graph(&cloud, k) {
            Ok(g) => {
                let same = g.edges() == build_knn_graph_brute_force(&cloud, k)?.edges();
                println!("k = {k}: {} edges, matches brute force: {same}", g.edge_count());
            }
            Err(e) => println!("k = {k}: {e}"),
        }
    }
    Ok(())
}
