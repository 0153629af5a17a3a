//! Oracles shared by the integration targets.
#![allow(dead_code)]

/// Minimum-weight basis of the cycle space by exhaustive enumeration:
/// every even-degree edge subset, greedily kept when independent.
pub fn brute_force_mcb(n_vertices: usize, edges: &[(u32, u32, f64)]) -> Vec<(u32, f64)> {
    assert!(edges.len() <= 24);
    let mut elements = Vec::new();
    for mask in 1u32..(1 << edges.len()) {
        let mut deg = vec![0u8; n_vertices];
        let mut w = 0.0;
        for (e, &(a, b, len)) in edges.iter().enumerate() {
            if mask >> e & 1 == 1 {
                deg[a as usize] ^= 1;
                deg[b as usize] ^= 1;
                w += len;
            }
        }
        if deg.iter().all(|&d| d == 0) {
            elements.push((mask, w));
        }
    }
    elements.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut echelon: Vec<u32> = Vec::new();
    let mut basis = Vec::new();
    for (mask, w) in elements {
        let mut r = mask;
        for &row in &echelon {
            r = r.min(r ^ row);
        }
        if r != 0 {
            echelon.push(r);
            echelon.sort_unstable_by(|a, b| b.cmp(a));
            basis.push((mask, w));
        }
    }
    basis
}

/// Triangles that are clockwise or have another point strictly inside
/// their circumcircle, up to rounding in the circumcentre itself.
pub fn circumcircle_violations(points: &[[f64; 2]], tris: &[[u32; 3]]) -> Vec<[u32; 3]> {
    let mut bad = Vec::new();
    for t in tris {
        let [a, b, c] = t.map(|i| points[i as usize]);
        let (bx, by, cx, cy) = (b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1]);
        let d = 2.0 * (bx * cy - by * cx);
        let (b2, c2) = (bx * bx + by * by, cx * cx + cy * cy);
        let (ux, uy) = ((cy * b2 - by * c2) / d, (bx * c2 - cx * b2) / d);
        let r2 = ux * ux + uy * uy;
        let intruder = points.iter().enumerate().any(|(i, p)| {
            !t.contains(&(i as u32)) && (p[0] - a[0] - ux).powi(2) + (p[1] - a[1] - uy).powi(2) < r2 * (1.0 - 1e-9)
        });
        if d <= 0.0 || d.is_nan() || intruder {
            bad.push(*t);
        }
    }
    bad
}

pub fn assert_empty_circumcircles(points: &[[f64; 2]], tris: &[[u32; 3]]) {
    let bad = circumcircle_violations(points, tris);
    assert!(bad.is_empty(), "not Delaunay: {bad:?}");
}
