use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torusforge::delaunay::triangulate;
use torusforge::export::{face_sides, SidednessRule};
use torusforge::mesher::{grow_patch, merge_patches, triangulate_patch, MeshConfig, SeedSchedule};
use torusforge::pipeline::{mesh_cloud, MeshOutcome, PipelineConfig};
use torusforge::projection::{captured_variance, project, Projection};
use torusforge::samplers::{sample_standard_map_torus, sample_torus_revolution, StandardMapConfig};
use torusforge::PointCloud;

mod common;
use common::assert_empty_circumcircles;

fn torus() -> &'static (PointCloud, MeshOutcome) {
    static CELL: OnceLock<(PointCloud, MeshOutcome)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cloud = sample_torus_revolution(2.0, 0.5, 2000, 7).unwrap();
        let outcome = mesh_cloud(&cloud, &PipelineConfig::default(), None).unwrap();
        (cloud, outcome)
    })
}

fn hull_area(points: &[[f64; 2]]) -> f64 {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    (0..hull.len()).map(|i| cross([0.0; 2], hull[i], hull[(i + 1) % hull.len()])).sum::<f64>() / 2.0
}

fn area(points: &[[f64; 2]], t: &[u32; 3]) -> f64 {
    let [a, b, c] = t.map(|i| points[i as usize]);
    ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) / 2.0
}

#[test]
fn random_patches_are_delaunay() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<[f64; 2]> = (0..200).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let ids: Vec<u64> = (0..200).collect();
        let tris = triangulate(&points, &ids, 0.0);
        assert_empty_circumcircles(&points, &tris);
        let covered: f64 = tris.iter().map(|t| area(&points, t)).sum();
        assert!((covered - hull_area(&points)).abs() < 1e-12, "seed {seed}");
    }
}

#[test]
fn cocircular_grid_is_still_delaunay() {
    let points: Vec<[f64; 2]> = (0..15).flat_map(|i| (0..14).map(move |j| [i as f64, j as f64])).collect();
    let ids: Vec<u64> = (0..points.len() as u64).rev().collect();
    let tris = triangulate(&points, &ids, 0.0);
    assert_eq!(tris.len(), 2 * 14 * 13);
    assert_empty_circumcircles(&points, &tris);
}

#[test]
fn torus_patches_are_delaunay_in_scaled_parameters() {
    let (_, out) = torus();
    let scale = [out.basis.toroidal.weight(), out.basis.poloidal.weight()];
    for seed in [0, 517, 1999] {
        let patch = grow_patch(&out.graph, &out.forms, seed, 5).unwrap();
        let points: Vec<[f64; 2]> = patch.uv.iter().map(|p| [scale[0] * p[0], scale[1] * p[1]]).collect();
        let local = patch.local_index();
        let tris: Vec<[u32; 3]> =
            triangulate_patch(&patch, scale, 1e-12).unwrap().iter().map(|t| t.vertices.map(|v| local[&v] as u32)).collect();
        assert!(!tris.is_empty());
        assert_empty_circumcircles(&points, &tris);
    }
}

/// Outward-normal sign and the orientation in the sampler's own angles.
fn face_signs(cloud: &PointCloud, t: &[u32; 3]) -> (bool, bool) {
    let p: Vec<&[f64]> = t.iter().map(|&i| cloud.point(i as usize)).collect();
    let e1 = [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]];
    let e2 = [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]];
    let n = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
    let c: Vec<f64> = (0..3).map(|k| (p[0][k] + p[1][k] + p[2][k]) / 3.0).collect();
    // Nearest point of the core circle of radius 2.
    let rho = c[0].hypot(c[1]);
    let ring = [2.0 * c[0] / rho, 2.0 * c[1] / rho, 0.0];
    let outward = n.iter().zip(c.iter().zip(ring)).map(|(n, (c, r))| n * (c - r)).sum::<f64>() > 0.0;

    let angles: Vec<(f64, f64)> = p.iter().map(|q| (q[1].atan2(q[0]), q[2].atan2(q[0].hypot(q[1]) - 2.0))).collect();
    let wrap = |x: f64| (x + 3.0 * PI).rem_euclid(TAU) - PI;
    let (u1, v1) = (wrap(angles[1].0 - angles[0].0), wrap(angles[1].1 - angles[0].1));
    let (u2, v2) = (wrap(angles[2].0 - angles[0].0), wrap(angles[2].1 - angles[0].1));
    (outward, u1 * v2 - v1 * u2 > 0.0)
}

#[test]
fn oriented_torus_normals_follow_the_surface_orientation() {
    let (cloud, out) = torus();
    let signs: Vec<(bool, bool)> = out.mesh.triangles().iter().map(|t| face_signs(cloud, t)).collect();
    // On every face, outward-or-not is the same function of the intrinsic orientation.
    let flip = signs[0].0 != signs[0].1;
    assert!(signs.iter().all(|&(n, a)| (n != a) == flip));
    // Faces that point the other way are parameterization folds, and rare.
    let majority = signs.iter().filter(|s| s.0).count() * 2 >= signs.len();
    let folded = signs.iter().filter(|s| s.0 != majority).count();
    assert!(folded * 1000 <= signs.len(), "{folded} folded faces");
}

#[test]
fn winding_sidedness_is_uniform_on_the_torus() {
    let (cloud, out) = torus();
    let (m3, _) = project(&out.mesh, cloud, &Projection::default()).unwrap();
    let sides = face_sides(&m3, SidednessRule::WindingNumber);
    assert!(sides.iter().all(|&s| s == sides[0]));
    // The centroid rule gets the inner equator wrong on a torus of revolution.
    let naive = face_sides(&m3, SidednessRule::CentroidOutward);
    let disagree = naive.iter().zip(&sides).filter(|(a, b)| a != b).count();
    assert!(disagree > 0 && disagree < naive.len() / 2, "{disagree}");
}

#[test]
fn seed_schedules_give_the_same_topology() {
    let (_, out) = torus();
    let scale = [out.basis.toroidal.weight(), out.basis.poloidal.weight()];
    let mut reports = Vec::new();
    for schedule in [SeedSchedule::Random(1), SeedSchedule::Random(99), SeedSchedule::Explicit(vec![1234, 5, 800])] {
        let merged = merge_patches(&out.graph, &out.forms, scale, &schedule, &MeshConfig::default()).unwrap();
        let v = merged.mesh.validate();
        reports.push((v.euler_characteristic, v.is_closed_manifold(), v.faces));
    }
    assert!(reports.iter().all(|r| *r == (0, true, 4000)), "{reports:?}");
}

#[test]
fn integrable_standard_map_vertices_lie_on_both_circles() {
    let cfg = StandardMapConfig { k1: 0.0, k2: 0.0, ..Default::default() };
    let cloud = sample_standard_map_torus(&cfg).unwrap();
    let out = mesh_cloud(&cloud, &PipelineConfig::default(), None).unwrap();
    assert!(out.validation.is_torus());
    for p in cloud.points() {
        assert!((p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-12);
        assert!((p[2] * p[2] + p[3] * p[3] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn pca_captures_at_least_any_coordinate_triple_in_6d() {
    let config = PipelineConfig { sampler: torusforge::pipeline::SamplerSpec::center_manifold(), ..Default::default() };
    let cloud = config.sampler.sample(config.derived_seeds().sampler).unwrap();
    let best = captured_variance(&cloud, &Projection::Pca.resolve(&cloud).unwrap());
    let mut triples = 0;
    for a in 0..6 {
        for b in a + 1..6 {
            for c in b + 1..6 {
                let map = Projection::CoordinateSelect { axes: [a, b, c] }.resolve(&cloud).unwrap();
                assert!(captured_variance(&cloud, &map) <= best + 1e-12);
                triples += 1;
            }
        }
    }
    assert_eq!(triples, 20);
}
