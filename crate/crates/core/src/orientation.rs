//! Combinatorial orientation propagation.
//!
//! Starting from a seed triangle whose vertex order is kept, every neighbor
//! across a shared edge is wound so that the edge is traversed in the opposite
//! direction. Coordinates are never consulted.

use std::collections::VecDeque;

use thiserror::Error;

use crate::mesh::SurfaceMesh;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrientationError {
    #[error("mesh has no triangles")]
    Empty,
    #[error("seed triangle {seed} out of range ({faces} faces)")]
    SeedOutOfRange { seed: usize, faces: usize },
    #[error("edge ({0}, {1}) has more than two incident triangles")]
    NonManifoldEdge(u32, u32),
    #[error("orientation conflict around triangles {cycle:?}")]
    Conflict { cycle: Vec<u32> },
}

/// Visiting order of the propagation. Both give the same result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Traversal {
    #[default]
    BreadthFirst,
    DepthFirst,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedMesh {
    pub mesh: SurfaceMesh,
    pub seed_triangle: usize,
    /// `true` where the input winding was reversed.
    pub flipped: Vec<bool>,
    /// Connected components of the triangle adjacency graph.
    pub components: usize,
}

pub fn orient_mesh(mesh: &SurfaceMesh, seed_triangle: usize) -> Result<OrientedMesh, OrientationError> {
    orient_mesh_with(mesh, seed_triangle, Traversal::BreadthFirst)
}

pub fn orient_mesh_with(
    mesh: &SurfaceMesh,
    seed_triangle: usize,
    traversal: Traversal,
) -> Result<OrientedMesh, OrientationError> {
    let tris = mesh.triangles();
    if tris.is_empty() {
        return Err(OrientationError::Empty);
    }
    if seed_triangle >= tris.len() {
        return Err(OrientationError::SeedOutOfRange { seed: seed_triangle, faces: tris.len() });
    }
    let edge_faces = mesh.edge_faces();
    if let Some((&(a, b), _)) = edge_faces.iter().find(|(_, f)| f.len() > 2) {
        return Err(OrientationError::NonManifoldEdge(a, b));
    }
    let neighbor = |f: usize, a: u32, b: u32| -> Option<usize> {
        let key = if a < b { (a, b) } else { (b, a) };
        edge_faces[&key].iter().map(|&g| g as usize).find(|&g| g != f)
    };
    let has_directed = |t: &[u32; 3], a: u32, b: u32| (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b);

    let mut flip: Vec<Option<bool>> = vec![None; tris.len()];
    let mut parent: Vec<u32> = vec![u32::MAX; tris.len()];
    let mut components = 0;
    let seeds = std::iter::once(seed_triangle).chain(0..tris.len());
    for seed in seeds {
        if flip[seed].is_some() {
            continue;
        }
        components += 1;
        flip[seed] = Some(false);
        let mut pending = VecDeque::from([seed]);
        while let Some(f) = match traversal {
            Traversal::BreadthFirst => pending.pop_front(),
            Traversal::DepthFirst => pending.pop_back(),
        } {
            let t = oriented(tris[f], flip[f].expect("visited"));
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let Some(g) = neighbor(f, a, b) else { continue };
                // The neighbor must run b -> a; it needs a flip if it runs a -> b.
                let need = has_directed(&tris[g], a, b);
                match flip[g] {
                    None => {
                        flip[g] = Some(need);
                        parent[g] = f as u32;
                        pending.push_back(g);
                    }
                    Some(have) if have != need => {
                        return Err(OrientationError::Conflict { cycle: conflict_cycle(&parent, f, g) });
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let flipped: Vec<bool> = flip.into_iter().map(|f| f.expect("all visited")).collect();
    let triangles = tris.iter().zip(&flipped).map(|(&t, &fl)| oriented(t, fl)).collect();
    let mesh = SurfaceMesh::new(mesh.vertex_count(), triangles).expect("same triangles");
    Ok(OrientedMesh { mesh, seed_triangle, flipped, components })
}

fn oriented(t: [u32; 3], flip: bool) -> [u32; 3] {
    if flip {
        [t[0], t[2], t[1]]
    } else {
        t
    }
}

/// Triangles on the two propagation paths that meet at the conflicting edge.
fn conflict_cycle(parent: &[u32], f: usize, g: usize) -> Vec<u32> {
    let path = |mut x: usize| {
        let mut p = vec![x as u32];
        while parent[x] != u32::MAX {
            x = parent[x] as usize;
            p.push(x as u32);
        }
        p
    };
    let (pf, pg) = (path(f), path(g));
    let common = pf.iter().rev().zip(pg.iter().rev()).take_while(|(a, b)| a == b).count();
    let mut cycle: Vec<u32> = pf[..pf.len() - common + 1].to_vec();
    cycle.extend(pg[..pg.len() - common].iter().rev());
    cycle
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fixtures::{moebius, torus_grid};

    fn canonical(m: &SurfaceMesh) -> Vec<[u32; 3]> {
        m.triangles()
            .iter()
            .map(|t| {
                let mut t = *t;
                let k = (0..3).min_by_key(|&k| t[k]).unwrap();
                t.rotate_left(k);
                t
            })
            .collect()
    }

    #[test]
    fn two_triangles() {
        let m = SurfaceMesh::new(4, vec![[0, 1, 2], [1, 2, 3]]).unwrap();
        let o = orient_mesh(&m, 0).unwrap();
        assert_eq!(o.mesh.triangles(), &[[0, 1, 2], [1, 3, 2]]);
        assert_eq!(o.flipped, vec![false, true]);
    }

    #[test]
    fn scrambled_torus_is_repaired() {
        let m = torus_grid(5, 6);
        let scrambled: Vec<[u32; 3]> =
            m.triangles().iter().enumerate().map(|(i, t)| if i % 3 == 1 { [t[1], t[0], t[2]] } else { *t }).collect();
        let s = SurfaceMesh::new(m.vertex_count(), scrambled).unwrap();
        let o = orient_mesh(&s, 0).unwrap();
        assert_eq!(canonical(&o.mesh), canonical(&m));
        assert_eq!(o.mesh.validate().misoriented_edges, 0);
    }

    #[test]
    fn seed_flip_flips_everything() {
        let m = torus_grid(4, 4);
        let a = orient_mesh(&m, 0).unwrap();
        let mut tris = m.triangles().to_vec();
        tris[0] = [tris[0][1], tris[0][0], tris[0][2]];
        let b = orient_mesh(&SurfaceMesh::new(16, tris).unwrap(), 0).unwrap();
        assert_eq!(canonical(&b.mesh), canonical(&a.mesh.flipped()));
    }

    #[test]
    fn traversal_order_is_irrelevant() {
        let m = torus_grid(6, 5);
        let a = orient_mesh_with(&m, 3, Traversal::BreadthFirst).unwrap();
        let b = orient_mesh_with(&m, 3, Traversal::DepthFirst).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn moebius_conflict_names_a_cycle() {
        match orient_mesh(&moebius(), 0) {
            Err(OrientationError::Conflict { cycle }) => assert!(cycle.len() >= 3, "{cycle:?}"),
            other => panic!("{other:?}"),
        }
    }
}
