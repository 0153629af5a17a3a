//! Planar Delaunay triangulation by Bowyer-Watson insertion.
//!
//! Orientation and in-circle signs come from exact adaptive predicates.
//! Cocircular configurations are resolved by symbolically lifting each point
//! by an infinitesimal that grows with its id, which makes the triangulation
//! unique and independent of insertion order.

use std::collections::HashMap;

use robust::{incircle, orient2d, Coord};

fn coord(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

pub fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    orient2d(coord(a), coord(b), coord(c))
}

/// True when `d` lies inside the circumcircle of the counter-clockwise
/// triangle `(a, b, c)`, after symbolic perturbation by the ids.
pub fn in_circumcircle(p: [[f64; 2]; 4], id: [u64; 4]) -> bool {
    let [a, b, c, d] = p;
    let det = incircle(coord(a), coord(b), coord(c), coord(d));
    if det != 0.0 {
        return det > 0.0;
    }
    // First-order terms of the lifted determinant, one per raised point.
    let coeffs = [orient(d, b, c), -orient(d, a, c), orient(d, a, b), -orient(a, b, c)];
    let mut order = [0usize, 1, 2, 3];
    order.sort_by_key(|&i| std::cmp::Reverse(id[i]));
    for i in order {
        if coeffs[i] != 0.0 {
            return coeffs[i] > 0.0;
        }
    }
    false
}

/// Vertex at infinity closing each hull edge `a -> b` (interior on the
/// right) into the triangle `[a, b, GHOST]`.
const GHOST: u32 = u32::MAX;

/// Does inserting `p` destroy the ghost triangle on hull edge `a -> b`?
/// Yes when `p` is outside that edge, or on its open segment.
fn ghost_conflict(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    let o = orient(a, b, p);
    if o != 0.0 {
        return o > 0.0;
    }
    let t = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
    let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
    t > 0.0 && t < len2
}

/// Delaunay triangles of `points`, counter-clockwise with the smallest index
/// first, sorted, as indices into `points`. `ids` are the symbolic-perturbation
/// ranks (distinct). Repeated coordinates are inserted once; triangles with
/// area below `min_area` are dropped. All-collinear input gives no triangles.
pub fn triangulate(points: &[[f64; 2]], ids: &[u64], min_area: f64) -> Vec<[u32; 3]> {
    assert_eq!(points.len(), ids.len());
    let n = points.len();
    let mut seen: HashMap<(u64, u64), u32> = HashMap::with_capacity(n);
    let distinct: Vec<u32> = (0..n as u32)
        .filter(|&i| seen.insert((points[i as usize][0].to_bits(), points[i as usize][1].to_bits()), i).is_none())
        .collect();
    let Some(&first) = distinct.first() else {
        return Vec::new();
    };
    let Some(&second) = distinct.get(1) else {
        return Vec::new();
    };
    let Some(&third) =
        distinct.iter().find(|&&i| orient(points[first as usize], points[second as usize], points[i as usize]) != 0.0)
    else {
        return Vec::new();
    };
    let [a, b, c] = if orient(points[first as usize], points[second as usize], points[third as usize]) > 0.0 {
        [first, second, third]
    } else {
        [first, third, second]
    };
    let mut tris: Vec<[u32; 3]> = vec![[a, b, c], [b, a, GHOST], [c, b, GHOST], [a, c, GHOST]];

    for &i in &distinct {
        if i == a || i == b || i == c {
            continue;
        }
        let p = points[i as usize];
        let mut boundary: HashMap<(u32, u32), u32> = HashMap::new();
        tris.retain(|t| {
            let conflict = if t[2] == GHOST {
                ghost_conflict(points[t[0] as usize], points[t[1] as usize], p)
            } else {
                let q = [points[t[0] as usize], points[t[1] as usize], points[t[2] as usize], p];
                in_circumcircle(q, [ids[t[0] as usize], ids[t[1] as usize], ids[t[2] as usize], ids[i as usize]])
            };
            if conflict {
                for k in 0..3 {
                    let (u, v) = (t[k], t[(k + 1) % 3]);
                    // An edge shared by two cavity triangles appears in both directions.
                    if boundary.remove(&(v, u)).is_none() {
                        boundary.insert((u, v), 1);
                    }
                }
            }
            !conflict
        });
        let mut edges: Vec<(u32, u32)> = boundary.into_keys().collect();
        edges.sort_unstable();
        for (u, v) in edges {
            // Keep the ghost vertex last.
            tris.push(match (u, v) {
                (GHOST, v) => [v, i, GHOST],
                (u, GHOST) => [i, u, GHOST],
                (u, v) => [u, v, i],
            });
        }
    }

    let mut out: Vec<[u32; 3]> = tris
        .into_iter()
        .filter(|t| t[2] != GHOST)
        .filter(|t| 0.5 * orient(points[t[0] as usize], points[t[1] as usize], points[t[2] as usize]) >= min_area)
        .map(|mut t| {
            let m = (0..3).min_by_key(|&k| t[k]).expect("three vertices");
            t.rotate_left(m);
            t
        })
        .collect();
    out.sort_unstable();
    out
}
