//! OBJ and binary PLY writers (and readers for round trips), with per-face
//! sidedness colors.

use std::f64::consts::PI;
use std::io::{BufRead, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::projection::Mesh3;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("mesh has no faces")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("face {face} references vertex {vertex} of {count}")]
    BadIndex { face: usize, vertex: i64, count: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFormat {
    #[default]
    Obj,
    Ply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorMode {
    #[default]
    Sidedness,
    None,
}

/// How a face's side is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SidednessRule {
    /// Sign of the winding number of the rest of the mesh at the face
    /// centroid: positive where the normal points out of the enclosed volume.
    #[default]
    WindingNumber,
    /// Sign of the normal against the direction from the mesh centroid.
    CentroidOutward,
}

pub type FaceColors = Vec<[u8; 3]>;

pub const FRONT: [u8; 3] = [200, 30, 30];
pub const BACK: [u8; 3] = [30, 60, 200];

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Signed solid angle of triangle `(a, b, c)` seen from `p`, by the
/// Van Oosterom-Strackee formula.
pub fn solid_angle(p: [f64; 3], a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let (a, b, c) = (sub(a, p), sub(b, p), sub(c, p));
    let (la, lb, lc) = (norm(a), norm(b), norm(c));
    let num = dot(a, cross(b, c));
    let den = la * lb * lc + dot(a, b) * lc + dot(a, c) * lb + dot(b, c) * la;
    2.0 * num.atan2(den)
}

/// Generalized winding number of the faces (except `skip`) at `p`.
pub fn winding_number(mesh: &Mesh3, p: [f64; 3], skip: Option<usize>) -> f64 {
    let pos = &mesh.positions;
    let total: f64 = mesh
        .triangles
        .iter()
        .enumerate()
        .filter(|(f, _)| Some(*f) != skip)
        .map(|(_, t)| solid_angle(p, pos[t[0] as usize], pos[t[1] as usize], pos[t[2] as usize]))
        .sum();
    total / (4.0 * PI)
}

fn centroid(mesh: &Mesh3, t: [u32; 3]) -> [f64; 3] {
    let p = t.map(|i| mesh.positions[i as usize]);
    [0, 1, 2].map(|k| (p[0][k] + p[1][k] + p[2][k]) / 3.0)
}

/// `true` for faces whose winding points out of the volume they bound.
pub fn face_sides(mesh: &Mesh3, rule: SidednessRule) -> Vec<bool> {
    match rule {
        SidednessRule::WindingNumber => (0..mesh.triangles.len())
            .into_par_iter()
            .map(|f| winding_number(mesh, centroid(mesh, mesh.triangles[f]), Some(f)) > 0.0)
            .collect(),
        SidednessRule::CentroidOutward => {
            let n = mesh.positions.len().max(1) as f64;
            let mut c = [0.0; 3];
            for p in &mesh.positions {
                for k in 0..3 {
                    c[k] += p[k] / n;
                }
            }
            mesh.triangles
                .iter()
                .map(|&t| {
                    let p = t.map(|i| mesh.positions[i as usize]);
                    let normal = cross(sub(p[1], p[0]), sub(p[2], p[0]));
                    dot(normal, sub(centroid(mesh, t), c)) > 0.0
                })
                .collect()
        }
    }
}

pub fn face_colors(mesh: &Mesh3, mode: ColorMode, rule: SidednessRule) -> Option<Vec<[u8; 3]>> {
    match mode {
        ColorMode::None => None,
        ColorMode::Sidedness => Some(face_sides(mesh, rule).into_iter().map(|s| if s { FRONT } else { BACK }).collect()),
    }
}

/// Optional extra OBJ groups.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObjLayers {
    /// Polylines emitted as `l` records in group `edges`.
    pub polylines: Vec<Vec<u32>>,
    /// Emit every vertex as a `p` record in group `points`.
    pub points: bool,
}

/// OBJ with 1-based indices; coordinates use the shortest decimal that
/// round-trips.
pub fn write_obj<W: Write>(mesh: &Mesh3, layers: &ObjLayers, mut out: W) -> Result<(), ExportError> {
    if mesh.triangles.is_empty() {
        return Err(ExportError::Empty);
    }
    writeln!(out, "# vertices {} faces {}", mesh.positions.len(), mesh.triangles.len())?;
    for p in &mesh.positions {
        writeln!(out, "v {:?} {:?} {:?}", p[0], p[1], p[2])?;
    }
    writeln!(out, "g surface")?;
    for t in &mesh.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    if !layers.polylines.is_empty() {
        writeln!(out, "g edges")?;
        for line in &layers.polylines {
            let ids: Vec<String> = line.iter().map(|v| (v + 1).to_string()).collect();
            writeln!(out, "l {}", ids.join(" "))?;
        }
    }
    if layers.points {
        writeln!(out, "g points")?;
        for i in 0..mesh.positions.len() {
            writeln!(out, "p {}", i + 1)?;
        }
    }
    Ok(())
}

/// Reads `v` and triangular `f` records; other records are skipped. Face
/// entries may carry `/vt/vn` suffixes and negative (relative) indices.
pub fn read_obj<R: BufRead>(input: R) -> Result<Mesh3, ExportError> {
    let mut positions = Vec::new();
    let mut raw: Vec<(usize, [i64; 3])> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let mut parts = line.split_whitespace();
        let parse_err = |message: String| ExportError::Parse { line: i + 1, message };
        match parts.next() {
            Some("v") => {
                let xyz: Vec<f64> =
                    parts.take(3).map(str::parse).collect::<Result<_, _>>().map_err(|e| parse_err(format!("{e}")))?;
                if xyz.len() != 3 {
                    return Err(parse_err("vertex needs 3 coordinates".into()));
                }
                positions.push([xyz[0], xyz[1], xyz[2]]);
            }
            Some("f") => {
                let ids: Vec<i64> = parts
                    .map(|s| s.split('/').next().unwrap_or("").parse::<i64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| parse_err(format!("{e}")))?;
                if ids.len() != 3 {
                    return Err(parse_err(format!("only triangles are supported, got {} vertices", ids.len())));
                }
                let count = positions.len() as i64;
                let fix = |v: i64| if v < 0 { count + v + 1 } else { v };
                raw.push((i + 1, [fix(ids[0]), fix(ids[1]), fix(ids[2])]));
            }
            _ => {}
        }
    }
    let count = positions.len();
    let mut triangles = Vec::with_capacity(raw.len());
    for (face, (_, ids)) in raw.into_iter().enumerate() {
        if let Some(&vertex) = ids.iter().find(|&&v| v < 1 || v as usize > count) {
            return Err(ExportError::BadIndex { face, vertex, count });
        }
        triangles.push(ids.map(|v| (v - 1) as u32));
    }
    Ok(Mesh3 { positions, triangles })
}

/// Binary little-endian PLY: double vertices, int face lists, and per-face
/// uchar RGB when `colors` is given.
pub fn write_ply<W: Write>(mesh: &Mesh3, colors: Option<&[[u8; 3]]>, mut out: W) -> Result<(), ExportError> {
    if mesh.triangles.is_empty() {
        return Err(ExportError::Empty);
    }
    writeln!(out, "ply")?;
    writeln!(out, "format binary_little_endian 1.0")?;
    writeln!(out, "element vertex {}", mesh.positions.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(out, "property double {axis}")?;
    }
    writeln!(out, "element face {}", mesh.triangles.len())?;
    writeln!(out, "property list uchar int vertex_indices")?;
    if colors.is_some() {
        for c in ["red", "green", "blue"] {
            writeln!(out, "property uchar {c}")?;
        }
    }
    writeln!(out, "end_header")?;
    for p in &mesh.positions {
        for x in p {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    for (f, t) in mesh.triangles.iter().enumerate() {
        out.write_all(&[3u8])?;
        for v in t {
            out.write_all(&(*v as i32).to_le_bytes())?;
        }
        if let Some(c) = colors {
            out.write_all(&c[f])?;
        }
    }
    Ok(())
}

/// Reads the layout [`write_ply`] produces.
pub fn read_ply<R: Read>(mut input: R) -> Result<(Mesh3, Option<FaceColors>), ExportError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let marker = b"end_header\n";
    let end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| ExportError::Parse { line: 0, message: "missing end_header".into() })?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|e| ExportError::Parse { line: 0, message: e.to_string() })?;
    let (mut nv, mut nf, mut colored) = (0usize, 0usize, false);
    for (i, line) in header.lines().enumerate() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = |m: &str| ExportError::Parse { line: i + 1, message: m.to_string() };
        match parts.as_slice() {
            ["format", f, _] if *f != "binary_little_endian" => return Err(bad("only binary_little_endian is supported")),
            ["element", "vertex", n] => nv = n.parse().map_err(|_| bad("vertex count"))?,
            ["element", "face", n] => nf = n.parse().map_err(|_| bad("face count"))?,
            ["property", "uchar", "red"] => colored = true,
            _ => {}
        }
    }
    let mut body = &bytes[end + marker.len()..];
    let mut take = |k: usize| -> Result<&[u8], ExportError> {
        if body.len() < k {
            return Err(ExportError::Parse { line: 0, message: "truncated body".into() });
        }
        let (head, rest) = body.split_at(k);
        body = rest;
        Ok(head)
    };
    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut p = [0.0; 3];
        for x in &mut p {
            *x = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        }
        positions.push(p);
    }
    let mut triangles = Vec::with_capacity(nf);
    let mut colors = colored.then(Vec::new);
    for face in 0..nf {
        if take(1)?[0] != 3 {
            return Err(ExportError::Parse { line: 0, message: format!("face {face} is not a triangle") });
        }
        let mut t = [0u32; 3];
        for v in &mut t {
            let raw = i32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
            if raw < 0 || raw as usize >= nv {
                return Err(ExportError::BadIndex { face, vertex: raw as i64, count: nv });
            }
            *v = raw as u32;
        }
        triangles.push(t);
        if let Some(c) = colors.as_mut() {
            let rgb = take(3)?;
            c.push([rgb[0], rgb[1], rgb[2]]);
        }
    }
    Ok((Mesh3 { positions, triangles }, colors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> Mesh3 {
        // Outward winding.
        Mesh3 {
            positions: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            triangles: vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        }
    }

    #[test]
    fn single_triangle_obj() {
        let m = Mesh3 { positions: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], triangles: vec![[0, 1, 2]] };
        let mut buf = Vec::new();
        write_obj(&m, &ObjLayers::default(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 3);
        let faces: Vec<&str> = text.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(faces, vec!["f 1 2 3"]);
    }

    #[test]
    fn obj_round_trip_is_exact() {
        let mut m = tetra();
        m.positions[1] = [0.1 + 0.2, -1e-300, std::f64::consts::PI];
        let mut buf = Vec::new();
        let layers = ObjLayers { polylines: vec![vec![0, 1, 2, 0]], points: true };
        write_obj(&m, &layers, &mut buf).unwrap();
        assert_eq!(read_obj(&buf[..]).unwrap(), m);
    }

    #[test]
    fn ply_round_trip_and_color_neutral_geometry() {
        let m = tetra();
        let colors = face_colors(&m, ColorMode::Sidedness, SidednessRule::WindingNumber).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_ply(&m, Some(&colors), &mut a).unwrap();
        write_ply(&m, None, &mut b).unwrap();
        let (ma, ca) = read_ply(&a[..]).unwrap();
        let (mb, cb) = read_ply(&b[..]).unwrap();
        assert_eq!(ma, m);
        assert_eq!(mb, m);
        assert_eq!(ca.unwrap(), colors);
        assert!(cb.is_none());
        // Vertex blocks are byte-identical.
        let body = |v: &[u8]| {
            let e = v.windows(11).position(|w| w == b"end_header\n").unwrap() + 11;
            v[e..e + 4 * 24].to_vec()
        };
        assert_eq!(body(&a), body(&b));
    }

    #[test]
    fn winding_number_of_closed_surface() {
        let m = tetra();
        assert!((winding_number(&m, [0.1, 0.1, 0.1], None) - 1.0).abs() < 1e-12);
        assert!(winding_number(&m, [2.0, 2.0, 2.0], None).abs() < 1e-12);
        assert!(face_sides(&m, SidednessRule::WindingNumber).iter().all(|&s| s));
        let flipped =
            Mesh3 { positions: m.positions.clone(), triangles: m.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect() };
        assert!(face_sides(&flipped, SidednessRule::WindingNumber).iter().all(|&s| !s));
    }

    #[test]
    fn empty_mesh_rejected() {
        let m = Mesh3 { positions: vec![[0.0; 3]], triangles: vec![] };
        assert!(matches!(write_obj(&m, &ObjLayers::default(), Vec::new()), Err(ExportError::Empty)));
        assert!(matches!(write_ply(&m, None, Vec::new()), Err(ExportError::Empty)));
    }
}
