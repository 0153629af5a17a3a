use proptest::prelude::*;
use torusforge::export::{read_obj, read_ply, write_obj, write_ply, ObjLayers};
use torusforge::grid::{flat_torus_basis, flat_torus_graph};
use torusforge::mesh::SurfaceMesh;
use torusforge::oneform::{assemble_system, solve_oneforms, EdgeWeights};
use torusforge::orientation::orient_mesh;
use torusforge::projection::{Mesh3, Projection};
use torusforge::{PointCloud, Provenance};

fn torus_triangles(n: u32, m: u32) -> Vec<[u32; 3]> {
    let id = |i: u32, j: u32| (i % n) * m + j % m;
    (0..n)
        .flat_map(|i| {
            (0..m).flat_map(move |j| [[id(i, j), id(i + 1, j), id(i + 1, j + 1)], [id(i, j), id(i + 1, j + 1), id(i, j + 1)]])
        })
        .collect()
}

fn canonical(t: [u32; 3]) -> [u32; 3] {
    let mut t = t;
    let k = (0..3).min_by_key(|&k| t[k]).unwrap();
    t.rotate_left(k);
    t
}

fn scrambled_torus() -> impl Strategy<Value = (u32, u32, Vec<bool>, Vec<usize>)> {
    (3u32..9, 3u32..9).prop_flat_map(|(n, m)| {
        let f = (2 * n * m) as usize;
        (Just(n), Just(m), proptest::collection::vec(any::<bool>(), f), Just((0..f).collect::<Vec<usize>>()).prop_shuffle())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn seed_flip_flips_every_face((n, m, flips, order) in scrambled_torus(), seed in 0usize..1000) {
        let base = torus_triangles(n, m);
        let tris: Vec<[u32; 3]> = order
            .iter()
            .map(|&f| if flips[f] { [base[f][0], base[f][2], base[f][1]] } else { base[f] })
            .collect();
        let mesh = SurfaceMesh::new((n * m) as usize, tris.clone()).unwrap();
        let seed = seed % tris.len();
        let a = orient_mesh(&mesh, seed).unwrap();
        let mut reversed = tris.clone();
        reversed[seed] = [tris[seed][0], tris[seed][2], tris[seed][1]];
        let b = orient_mesh(&SurfaceMesh::new(mesh.vertex_count(), reversed).unwrap(), seed).unwrap();
        prop_assert_eq!(a.mesh.validate().misoriented_edges, 0);
        for (x, y) in a.mesh.triangles().iter().zip(b.mesh.triangles()) {
            prop_assert_eq!(canonical(*x), canonical([y[0], y[2], y[1]]));
        }
    }

    #[test]
    fn projection_is_affine(
        rows in proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 5), 3),
        x in proptest::collection::vec(-10.0f64..10.0, 5),
        y in proptest::collection::vec(-10.0f64..10.0, 5),
        s in -3.0f64..3.0,
    ) {
        let cloud = PointCloud::new(5, (0..8).map(|i| (0..5).map(|j| ((i * 7 + j * 3) % 11) as f64).collect()).collect(), Provenance::Synthetic).unwrap();
        for p in [Projection::CustomMatrix { rows: rows.clone() }, Projection::Pca, Projection::CoordinateSelect { axes: [4, 0, 2] }] {
            let Ok(map) = p.resolve(&cloud) else { continue };
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| s * a + (1.0 - s) * b).collect();
            let (px, py, pz) = (map.apply(&x), map.apply(&y), map.apply(&z));
            for k in 0..3 {
                let expect = s * px[k] + (1.0 - s) * py[k];
                prop_assert!((pz[k] - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn obj_and_ply_round_trip(
        positions in proptest::collection::vec(proptest::array::uniform3(-1e6f64..1e6), 3..40),
        raw in proptest::collection::vec(proptest::array::uniform3(any::<u32>()), 1..60),
        colors in proptest::collection::vec(proptest::array::uniform3(any::<u8>()), 60),
    ) {
        let nv = positions.len() as u32;
        let triangles: Vec<[u32; 3]> = raw.into_iter().map(|t| t.map(|i| i % nv)).collect();
        let mesh = Mesh3 { positions, triangles };
        let mut obj = Vec::new();
        write_obj(&mesh, &ObjLayers::default(), &mut obj).unwrap();
        prop_assert_eq!(&read_obj(&obj[..]).unwrap(), &mesh);
        let colors = &colors[..mesh.triangles.len()];
        let mut ply = Vec::new();
        write_ply(&mesh, Some(colors), &mut ply).unwrap();
        let (back, c) = read_ply(&ply[..]).unwrap();
        prop_assert_eq!(&back, &mesh);
        prop_assert_eq!(c.as_deref(), Some(colors));
    }

    #[test]
    fn uniform_weight_scaling_leaves_forms_unchanged(scale in 1e-3f64..1e3, n in 4u32..8, m in 4u32..8) {
        let g = flat_torus_graph(n, m);
        let basis = flat_torus_basis(&g, n, m);
        let w: Vec<f64> = (0..g.edge_count()).map(|e| 1.0 + (e % 5) as f64 * 0.25).collect();
        let a = solve_oneforms(&assemble_system(&g, &basis, &EdgeWeights::new(&g, w.clone()).unwrap())).unwrap();
        let scaled = w.iter().map(|x| x * scale).collect();
        let b = solve_oneforms(&assemble_system(&g, &basis, &EdgeWeights::new(&g, scaled).unwrap())).unwrap();
        for (x, y) in a.du.iter().chain(&a.dv).zip(b.du.iter().chain(&b.dv)) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }
}
