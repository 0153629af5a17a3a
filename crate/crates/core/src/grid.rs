//! Flat-torus grid fixtures with a known cycle basis.
//!
//! Vertex `(i, j)` has index `i * m + j`; `i` runs along the toroidal
//! direction. The grid is embedded as a Clifford torus with unit spacing.

use std::f64::consts::TAU;

use crate::cloud::{PointCloud, Provenance};
use crate::cycles::{ClassifiedBasis, Cycle};
use crate::knn::{Edge, NeighborGraph};

pub fn grid_index(n: u32, m: u32, i: u32, j: u32) -> u32 {
    (i % n) * m + (j % m)
}

/// `n x m` grid on a Clifford torus with circumferences `n` and `m`.
pub fn flat_torus_cloud(n: u32, m: u32) -> PointCloud {
    let (rn, rm) = (n as f64 / TAU, m as f64 / TAU);
    let points = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (a, b) = (TAU * i as f64 / n as f64, TAU * j as f64 / m as f64);
            vec![rn * a.cos(), rn * a.sin(), rm * b.cos(), rm * b.sin()]
        })
        .collect();
    PointCloud::new(4, points, Provenance::Synthetic).expect("finite coordinates")
}

/// The grid's four-neighbor graph with unit edge lengths. Needs `n, m >= 3`.
pub fn flat_torus_graph(n: u32, m: u32) -> NeighborGraph {
    assert!(n >= 3 && m >= 3, "grid must be at least 3 x 3");
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let v = grid_index(n, m, i, j);
            for w in [grid_index(n, m, i + 1, j), grid_index(n, m, i, j + 1)] {
                edges.push(Edge { a: v.min(w), b: v.max(w), length: 1.0 });
            }
        }
    }
    NeighborGraph::from_edges((n * m) as usize, edges, 4).expect("simple grid graph")
}

/// All unit squares but the last, the `j = 0` row loop as toroidal and the
/// `i = 0` column loop as poloidal.
pub fn flat_torus_basis(graph: &NeighborGraph, n: u32, m: u32) -> ClassifiedBasis {
    let id = |i: u32, j: u32| grid_index(n, m, i, j);
    let mut trivial = Vec::new();
    for i in 0..n {
        for j in 0..m {
            if (i, j) == (n - 1, m - 1) {
                continue;
            }
            let walk = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            trivial.push(Cycle::from_vertices(graph, &walk).expect("grid square"));
        }
    }
    let row: Vec<u32> = (0..n).map(|i| id(i, 0)).collect();
    let column: Vec<u32> = (0..m).map(|j| id(0, j)).collect();
    ClassifiedBasis {
        trivial,
        toroidal: Cycle::from_vertices(graph, &row).expect("row loop"),
        poloidal: Cycle::from_vertices(graph, &column).expect("column loop"),
    }
}
