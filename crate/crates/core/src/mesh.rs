//! Triangle meshes over a point cloud and their topological checks.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("triangle {index} references vertex {vertex}, mesh has {vertex_count}")]
    VertexOutOfRange { index: usize, vertex: u32, vertex_count: usize },
    #[error("triangle {0} repeats a vertex")]
    Degenerate(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Triangles indexed into a cloud of `vertex_count` points. Winding is the
/// order of each triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceMesh {
    vertex_count: usize,
    triangles: Vec<[u32; 3]>,
}

fn edge_key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SurfaceMesh {
    pub fn new(vertex_count: usize, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        for (index, t) in triangles.iter().enumerate() {
            if let Some(&vertex) = t.iter().find(|&&v| v as usize >= vertex_count) {
                return Err(MeshError::VertexOutOfRange { index, vertex, vertex_count });
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::Degenerate(index));
            }
        }
        Ok(Self { vertex_count, triangles })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    /// Undirected edge -> incident triangle indices, ordered by edge.
    pub fn edge_faces(&self) -> BTreeMap<(u32, u32), Vec<u32>> {
        let mut map: BTreeMap<(u32, u32), Vec<u32>> = BTreeMap::new();
        for (f, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                map.entry(edge_key(t[k], t[(k + 1) % 3])).or_default().push(f as u32);
            }
        }
        map
    }

    /// Removes one face; used to build defective fixtures.
    pub fn without_face(&self, face: usize) -> Self {
        let mut triangles = self.triangles.clone();
        triangles.remove(face);
        Self { vertex_count: self.vertex_count, triangles }
    }

    /// Same connectivity with every face's winding reversed.
    pub fn flipped(&self) -> Self {
        let triangles = self.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect();
        Self { vertex_count: self.vertex_count, triangles }
    }

    /// Vertices whose one-ring is not a single closed fan, or who belong to
    /// no face.
    pub fn singular_vertices(&self) -> Vec<u32> {
        let mut ring: Vec<Vec<(u32, u32)>> = vec![Vec::new(); self.vertex_count];
        for t in &self.triangles {
            for k in 0..3 {
                ring[t[k] as usize].push((t[(k + 1) % 3], t[(k + 2) % 3]));
            }
        }
        let mut bad = Vec::new();
        for (v, links) in ring.iter().enumerate() {
            if links.is_empty() || !is_single_cycle(links) {
                bad.push(v as u32);
            }
        }
        bad
    }

    /// Recomputes every invariant.
    pub fn validate(&self) -> ValidationReport {
        let edges = self.edge_faces();
        let boundary_edges = edges.values().filter(|f| f.len() == 1).count();
        let nonmanifold_edges = edges.values().filter(|f| f.len() > 2).count();
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *directed.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        // A manifold edge is consistently oriented when its two faces use it
        // in opposite directions.
        let misoriented_edges = edges
            .iter()
            .filter(|(_, f)| f.len() == 2)
            .filter(|((a, b), _)| directed.get(&(*a, *b)).copied().unwrap_or(0) != 1)
            .count();
        let v = self.vertex_count as i64;
        let e = edges.len() as i64;
        let f = self.triangles.len() as i64;
        ValidationReport {
            vertices: self.vertex_count,
            edges: edges.len(),
            faces: self.triangles.len(),
            euler_characteristic: v - e + f,
            nonmanifold_edges,
            boundary_edges,
            rounds_used: None,
            singular_vertices: self.singular_vertices().len(),
            misoriented_edges,
            orientable: crate::orientation::orient_mesh(self, 0).is_ok(),
        }
    }

    /// Native mesh artifact: CSV rows `i,j,k` under a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# vertices={}", self.vertex_count)?;
        writeln!(out, "i,j,k")?;
        for t in &self.triangles {
            writeln!(out, "{},{},{}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), MeshError> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f)?;
        Ok(())
    }

    /// Reads the triangle CSV. `vertex_count` overrides the header when given.
    pub fn read_csv<R: BufRead>(input: R, vertex_count: Option<usize>) -> Result<Self, MeshError> {
        let mut declared = None;
        let mut triangles = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line == "i,j,k" {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(n) = rest.trim().strip_prefix("vertices=") {
                    declared =
                        Some(n.trim().parse::<usize>().map_err(|e| MeshError::Parse { line: i + 1, message: e.to_string() })?);
                }
                continue;
            }
            let ids: Vec<u32> = line
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|e| MeshError::Parse { line: i + 1, message: e.to_string() })?;
            if ids.len() != 3 {
                return Err(MeshError::Parse { line: i + 1, message: format!("expected 3 indices, got {}", ids.len()) });
            }
            triangles.push([ids[0], ids[1], ids[2]]);
        }
        let n =
            vertex_count.or(declared).unwrap_or_else(|| triangles.iter().flatten().map(|&v| v as usize + 1).max().unwrap_or(0));
        Self::new(n, triangles)
    }

    pub fn load_csv(path: &Path, vertex_count: Option<usize>) -> Result<Self, MeshError> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_csv(f, vertex_count)
    }
}

/// Link of a vertex as pairs `(next, prev)` from its incident triangles; a
/// closed manifold vertex chains them into exactly one cycle.
fn is_single_cycle(links: &[(u32, u32)]) -> bool {
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(a, b) in links {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    if adj.len() != links.len() || adj.values().any(|n| n.len() != 2) {
        return false;
    }
    let start = links[0].0;
    let (mut prev, mut cur) = (start, adj[&start][0]);
    let mut steps = 1;
    while cur != start {
        let n = &adj[&cur];
        let following = if n[0] == prev { n[1] } else { n[0] };
        prev = cur;
        cur = following;
        steps += 1;
    }
    steps == links.len()
}

/// Topology report. The first seven fields form the stable JSON contract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub nonmanifold_edges: usize,
    pub boundary_edges: usize,
    pub rounds_used: Option<usize>,
    pub singular_vertices: usize,
    pub misoriented_edges: usize,
    pub orientable: bool,
}

impl ValidationReport {
    /// Closed, orientable, genus one.
    pub fn is_torus(&self) -> bool {
        self.is_closed_manifold() && self.euler_characteristic == 0 && self.orientable
    }

    pub fn is_closed_manifold(&self) -> bool {
        self.nonmanifold_edges == 0 && self.boundary_edges == 0 && self.singular_vertices == 0
    }

    pub fn write_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(out, self)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::SurfaceMesh;

    /// `n x m` grid on the flat torus, two triangles per cell, consistently wound.
    pub fn torus_grid(n: u32, m: u32) -> SurfaceMesh {
        let id = |i: u32, j: u32| (i % n) * m + (j % m);
        let mut tris = Vec::new();
        for i in 0..n {
            for j in 0..m {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
        }
        SurfaceMesh::new((n * m) as usize, tris).unwrap()
    }

    /// Five-triangle Moebius strip.
    pub fn moebius() -> SurfaceMesh {
        let tris = (0..5u32).map(|i| [i, (i + 1) % 5, (i + 2) % 5]).collect();
        SurfaceMesh::new(5, tris).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn grid_torus_is_valid() {
        let r = torus_grid(4, 5).validate();
        assert_eq!((r.vertices, r.edges, r.faces, r.euler_characteristic), (20, 60, 40, 0));
        assert!(r.is_torus(), "{r:?}");
    }

    #[test]
    fn deleting_a_face_opens_three_boundary_edges() {
        let m = torus_grid(4, 5);
        let r = m.without_face(7).validate();
        assert_eq!(r.boundary_edges, 3);
        assert_eq!(r.euler_characteristic, -1);
        assert!(!r.is_torus());
    }

    #[test]
    fn moebius_is_not_orientable() {
        let r = moebius().validate();
        assert!(!r.orientable);
    }

    #[test]
    fn bowtie_vertex_is_singular() {
        let m = SurfaceMesh::new(5, vec![[0, 1, 2], [0, 3, 4]]).unwrap();
        assert_eq!(m.singular_vertices(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn csv_roundtrip() {
        let m = torus_grid(3, 4);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(SurfaceMesh::read_csv(&buf[..], None).unwrap(), m);
    }

    #[test]
    fn rejects_bad_triangles() {
        assert!(matches!(SurfaceMesh::new(3, vec![[0, 1, 3]]), Err(MeshError::VertexOutOfRange { .. })));
        assert!(matches!(SurfaceMesh::new(3, vec![[0, 1, 1]]), Err(MeshError::Degenerate(0))));
    }
}
