//! Linear maps from D-dimensional meshes down to 3D for viewing.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::PointCloud;
use crate::mesh::SurfaceMesh;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("projection matrix must be 3 x {dim}, got {rows} x {cols}")]
    Shape { rows: usize, cols: usize, dim: usize },
    #[error("projection matrix rows are linearly dependent (singular values {singular:?})")]
    RankDeficient { singular: [f64; 3] },
    #[error("mesh has {mesh} vertices but the cloud has {cloud}")]
    VertexCount { mesh: usize, cloud: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Projection {
    CoordinateSelect {
        axes: [usize; 3],
    },
    /// Top three principal axes of the centered cloud.
    Pca,
    /// Rows of a 3 x D matrix; used as given, not orthonormalized.
    CustomMatrix {
        rows: Vec<Vec<f64>>,
    },
}

impl Default for Projection {
    fn default() -> Self {
        Projection::CoordinateSelect { axes: [0, 1, 2] }
    }
}

/// A resolved projection: `y = M (x - offset)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    pub matrix: [Vec<f64>; 3],
    pub offset: Vec<f64>,
}

impl LinearMap {
    pub fn apply(&self, x: &[f64]) -> [f64; 3] {
        self.matrix.each_ref().map(|row| row.iter().zip(x).zip(&self.offset).map(|((m, x), o)| m * (x - o)).sum())
    }
}

/// Per-axis variances of the cloud, total first.
fn covariance(cloud: &PointCloud) -> (Vec<f64>, DMatrix<f64>) {
    let (n, d) = (cloud.len(), cloud.dim());
    let mut mean = vec![0.0; d];
    for p in cloud.points() {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for p in cloud.points() {
        for i in 0..d {
            let di = p[i] - mean[i];
            for j in i..d {
                cov[(i, j)] += di * (p[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[(i, j)] /= n as f64;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    (mean, cov)
}

impl Projection {
    /// Checks the projection against the embedding dimension and resolves it.
    pub fn resolve(&self, cloud: &PointCloud) -> Result<LinearMap, ProjectionError> {
        let dim = cloud.dim();
        match self {
            Projection::CoordinateSelect { axes } => {
                if let Some(&index) = axes.iter().find(|&&a| a >= dim) {
                    return Err(ProjectionError::IndexOutOfRange { index, dim });
                }
                let matrix = axes.map(|a| {
                    let mut row = vec![0.0; dim];
                    row[a] = 1.0;
                    row
                });
                Ok(LinearMap { matrix, offset: vec![0.0; dim] })
            }
            Projection::CustomMatrix { rows } => {
                if rows.len() != 3 || rows.iter().any(|r| r.len() != dim) {
                    let cols = rows.first().map_or(0, Vec::len);
                    return Err(ProjectionError::Shape { rows: rows.len(), cols, dim });
                }
                let m = DMatrix::from_fn(3, dim, |i, j| rows[i][j]);
                let sv = m.singular_values();
                let mut s = [sv[0], sv[1], sv[2]];
                s.sort_by(|a, b| b.total_cmp(a));
                if !(s[2] > 1e-12 * s[0]) {
                    return Err(ProjectionError::RankDeficient { singular: s });
                }
                Ok(LinearMap { matrix: [rows[0].clone(), rows[1].clone(), rows[2].clone()], offset: vec![0.0; dim] })
            }
            Projection::Pca => {
                let (mean, cov) = covariance(cloud);
                let eig = SymmetricEigen::new(cov);
                let mut order: Vec<usize> = (0..dim).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
                let axis = |k: usize| -> Vec<f64> {
                    let col = eig.eigenvectors.column(order[k]);
                    let mut v: Vec<f64> = col.iter().copied().collect();
                    // Largest-magnitude component positive; first index wins ties.
                    let lead = (0..dim).fold(0, |best, i| if v[i].abs() > v[best].abs() { i } else { best });
                    if v[lead] < 0.0 {
                        v.iter_mut().for_each(|x| *x = -*x);
                    }
                    v
                };
                Ok(LinearMap { matrix: [axis(0), axis(1), axis(2)], offset: mean })
            }
        }
    }
}

/// Fraction of the cloud's total variance along the (not necessarily
/// orthonormal) rows of `map`, counting each row's direction once.
pub fn captured_variance(cloud: &PointCloud, map: &LinearMap) -> f64 {
    let (_, cov) = covariance(cloud);
    let total = cov.trace();
    if total <= 0.0 {
        return 0.0;
    }
    let captured: f64 = map
        .matrix
        .iter()
        .map(|row| {
            let norm2: f64 = row.iter().map(|x| x * x).sum();
            let r = nalgebra::DVector::from_column_slice(row);
            (r.transpose() * &cov * &r)[(0, 0)] / norm2
        })
        .sum();
    captured / total
}

/// A mesh with explicit 3D vertex positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh3 {
    pub positions: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh3 {
    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    /// Connectivity as a [`SurfaceMesh`].
    pub fn surface(&self) -> SurfaceMesh {
        SurfaceMesh::new(self.positions.len(), self.triangles.clone()).expect("indices checked on construction")
    }
}

/// Projects every cloud point; connectivity and winding are copied.
pub fn project(mesh: &SurfaceMesh, cloud: &PointCloud, projection: &Projection) -> Result<(Mesh3, LinearMap), ProjectionError> {
    if mesh.vertex_count() != cloud.len() {
        return Err(ProjectionError::VertexCount { mesh: mesh.vertex_count(), cloud: cloud.len() });
    }
    let map = projection.resolve(cloud)?;
    let positions = cloud.points().map(|p| map.apply(p)).collect();
    Ok((Mesh3 { positions, triangles: mesh.triangles().to_vec() }, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Provenance;

    fn cloud(points: Vec<Vec<f64>>) -> PointCloud {
        let d = points[0].len();
        PointCloud::new(d, points, Provenance::Synthetic).unwrap()
    }

    fn blob(d: usize) -> PointCloud {
        // Deterministic, anisotropic, full rank.
        cloud(
            (0..50)
                .map(|i| (0..d).map(|j| ((i * (j + 3) * 7919 % 101) as f64 / 101.0 - 0.5) * (d - j) as f64).collect())
                .collect(),
        )
    }

    #[test]
    fn identity_selection_on_3d() {
        let c = blob(3);
        let m = Projection::default().resolve(&c).unwrap();
        for p in c.points() {
            assert_eq!(m.apply(p).to_vec(), p.to_vec());
        }
    }

    #[test]
    fn bad_index_and_rank() {
        let c = blob(4);
        let bad = Projection::CoordinateSelect { axes: [0, 1, 4] };
        assert_eq!(bad.resolve(&c), Err(ProjectionError::IndexOutOfRange { index: 4, dim: 4 }));
        let rows = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0, 0.0]];
        assert!(matches!(Projection::CustomMatrix { rows }.resolve(&c), Err(ProjectionError::RankDeficient { .. })));
        let short = vec![vec![1.0; 3]; 3];
        assert!(matches!(Projection::CustomMatrix { rows: short }.resolve(&c), Err(ProjectionError::Shape { .. })));
    }

    #[test]
    fn pca_axes_are_orthonormal_and_signed() {
        let c = blob(6);
        let m = Projection::Pca.resolve(&c).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = m.matrix[i].iter().zip(&m.matrix[j]).map(|(a, b)| a * b).sum();
                assert!((d - f64::from(i == j)).abs() < 1e-10);
            }
            let lead = m.matrix[i].iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap();
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn pca_beats_every_coordinate_triple() {
        let c = blob(6);
        let best = captured_variance(&c, &Projection::Pca.resolve(&c).unwrap());
        for a in 0..6 {
            for b in a + 1..6 {
                for d in b + 1..6 {
                    let m = Projection::CoordinateSelect { axes: [a, b, d] }.resolve(&c).unwrap();
                    assert!(captured_variance(&c, &m) <= best + 1e-12);
                }
            }
        }
    }
}
