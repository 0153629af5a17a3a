//! Orientation propagation: a torus grid orients, a Moebius strip does not.

use torusforge::mesh::SurfaceMesh;
use torusforge::orientation::orient_mesh;

fn torus(n: u32, m: u32) -> SurfaceMesh {
    let id = |i: u32, j: u32| (i % n) * m + j % m;
    let mut tris = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([a, b, c]);
            // Every other quad is wound backwards.
            tris.push(if (i + j) % 2 == 0 { [a, c, d] } else { [a, d, c] });
        }
    }
    SurfaceMesh::new((n * m) as usize, tris).unwrap()
}

fn main() {
    let mesh = torus(6, 5);
    let before = mesh.validate();
    let oriented = orient_mesh(&mesh, 0).expect("a torus is orientable");
    let after = oriented.mesh.validate();
    println!(
        "torus: misoriented {} -> {}, flipped {}",
        before.misoriented_edges,
        after.misoriented_edges,
        oriented.flipped.iter().filter(|&&f| f).count()
    );

    let moebius = SurfaceMesh::new(5, (0..5).map(|i| [i, (i + 1) % 5, (i + 2) % 5]).collect()).unwrap();
    match orient_mesh(&moebius, 0) {
        Ok(_) => println!("moebius: unexpectedly oriented"),
        Err(e) => println!("moebius: {e}"),
    }
}
