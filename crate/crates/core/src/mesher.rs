//! Patch-wise meshing in one-form coordinates.
//!
//! Each patch is a BFS ball around a seed. Integrating the one-forms along the
//! BFS tree gives every patch vertex a local `(u, v)`; the ball is small enough
//! that no generator loop fits inside, so these coordinates are single valued.
//! The patch is Delaunay triangulated in `(u, v)` and only triangles made of
//! core vertices are kept, the outer rings acting as a buffer against hull
//! artifacts. Patches are merged by preferring, for every triangle, the patch
//! in which it sits deepest inside.

use std::collections::{HashMap, HashSet, VecDeque};

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delaunay;
use crate::knn::NeighborGraph;
use crate::mesh::{SurfaceMesh, ValidationReport};
use crate::oneform::OneFormPair;

/// Smallest rim depth a patch may shrink to before giving up.
pub const MIN_RIM_DEPTH: usize = 2;

#[derive(Debug, Error)]
pub enum MesherError {
    #[error("patch at seed {seed} still wraps around at rim depth {rim_depth}: edge ({a}, {b}) mismatch {mismatch:.3}")]
    PatchCollapse { seed: u32, rim_depth: usize, a: u32, b: u32, mismatch: f64 },
    #[error("patch at seed {seed} has {core} core vertices, need at least 3")]
    TooFewCoreVertices { seed: u32, core: usize },
    #[error("invalid mesher config: {0}")]
    Config(String),
    #[error("mesh failed validation after {rounds} rounds: {report:?}")]
    Validation { rounds: usize, report: Box<ValidationReport>, mesh: Box<SurfaceMesh>, diagnostics: Box<Diagnostics> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshConfig {
    pub rim_depth: usize,
    pub core_depth: usize,
    /// Patch budget; `None` means ten times the estimated patch count.
    pub max_rounds: Option<usize>,
    /// Triangles with smaller area in `(u, v)` are dropped.
    pub min_uv_area: f64,
    /// Close hole loops of up to [`MAX_HOLE_LOOP`] edges once reseeding is
    /// exhausted. Off by default.
    pub fill_holes: bool,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { rim_depth: 5, core_depth: 3, max_rounds: None, min_uv_area: 1e-12, fill_holes: false }
    }
}

impl MeshConfig {
    pub fn validate(&self) -> Result<(), MesherError> {
        if self.core_depth == 0 || self.core_depth >= self.rim_depth {
            return Err(MesherError::Config(format!(
                "need 0 < core_depth < rim_depth, got {} and {}",
                self.core_depth, self.rim_depth
            )));
        }
        if !(self.min_uv_area >= 0.0) {
            return Err(MesherError::Config(format!("min_uv_area = {}", self.min_uv_area)));
        }
        Ok(())
    }
}

/// A BFS ball with tree-integrated coordinates. Vertices are in BFS order,
/// the seed first.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub seed: u32,
    pub vertices: Vec<u32>,
    pub depth: Vec<u32>,
    pub uv: Vec<[f64; 2]>,
    pub core_depth: usize,
    pub rim_depth: usize,
}

impl Patch {
    pub fn core_len(&self) -> usize {
        self.depth.iter().filter(|&&d| d as usize <= self.core_depth).count()
    }

    pub fn local_index(&self) -> HashMap<u32, usize> {
        self.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect()
    }
}

/// BFS to `depth` from `seed`, integrating `x_child = x_parent - dx(parent -> child)`
/// along tree edges. No wraparound check.
pub fn integrate_patch(graph: &NeighborGraph, forms: &OneFormPair, seed: u32, depth: usize, core_depth: usize) -> Patch {
    let mut index: HashMap<u32, usize> = HashMap::from([(seed, 0)]);
    let mut vertices = vec![seed];
    let mut depths = vec![0u32];
    let mut uv = vec![[0.0, 0.0]];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if depths[i] as usize == depth {
            continue;
        }
        let v = vertices[i];
        for &(w, e) in graph.neighbors(v as usize) {
            if index.contains_key(&w) {
                continue;
            }
            let s = if v < w { 1.0 } else { -1.0 };
            let (du, dv) = (s * forms.du[e as usize], s * forms.dv[e as usize]);
            index.insert(w, vertices.len());
            vertices.push(w);
            depths.push(depths[i] + 1);
            uv.push([uv[i][0] - du, uv[i][1] - dv]);
            queue.push_back(vertices.len() - 1);
        }
    }
    Patch { seed, vertices, depth: depths, uv, core_depth, rim_depth: depth }
}

/// Worst intra-patch edge whose coordinates disagree with the forms by half a
/// period or more, as `(a, b, mismatch)`.
pub fn find_wraparound(graph: &NeighborGraph, forms: &OneFormPair, patch: &Patch) -> Option<(u32, u32, f64)> {
    let index = patch.local_index();
    let mut worst: Option<(u32, u32, f64)> = None;
    for (i, &a) in patch.vertices.iter().enumerate() {
        for &(b, e) in graph.neighbors(a as usize) {
            if b < a {
                continue;
            }
            let Some(&j) = index.get(&b) else { continue };
            let mu = (patch.uv[j][0] - (patch.uv[i][0] - forms.du[e as usize])).abs();
            let mv = (patch.uv[j][1] - (patch.uv[i][1] - forms.dv[e as usize])).abs();
            let m = mu.max(mv);
            if m >= 0.5 && worst.is_none_or(|w| m > w.2) {
                worst = Some((a, b, m));
            }
        }
    }
    worst
}

/// Grows a patch, shrinking the rim until no wraparound remains. The core
/// stays `rim_depth - core_margin` deep.
pub fn grow_patch_with_margin(
    graph: &NeighborGraph,
    forms: &OneFormPair,
    seed: u32,
    rim_depth: usize,
    core_margin: usize,
) -> Result<Patch, MesherError> {
    let floor = MIN_RIM_DEPTH.min(rim_depth);
    let mut last = None;
    for rim in (floor..=rim_depth).rev() {
        let patch = integrate_patch(graph, forms, seed, rim, rim.saturating_sub(core_margin));
        match find_wraparound(graph, forms, &patch) {
            None => return Ok(patch),
            Some(w) => {
                debug!("seed {seed}: wraparound at rim depth {rim} on edge ({}, {})", w.0, w.1);
                last = Some((rim, w));
            }
        }
    }
    let (rim_depth, (a, b, mismatch)) = last.expect("at least one depth tried");
    Err(MesherError::PatchCollapse { seed, rim_depth, a, b, mismatch })
}

/// [`grow_patch_with_margin`] with a two-ring rim.
pub fn grow_patch(graph: &NeighborGraph, forms: &OneFormPair, seed: u32, rim_depth: usize) -> Result<Patch, MesherError> {
    grow_patch_with_margin(graph, forms, seed, rim_depth, 2)
}

/// A triangle kept from a patch, wound counter-clockwise in `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchTriangle {
    pub vertices: [u32; 3],
    pub max_depth: u32,
    pub depth_sum: u32,
    /// The circumcircle stays inside the ring of outermost patch vertices,
    /// so no point outside the patch can invalidate the triangle.
    pub certified: bool,
    /// Largest `|du|` or `|dv|` along the triangle's edges.
    pub max_coordinate_step: f64,
}

/// Delaunay triangulation of the patch in `(scale[0] * u, scale[1] * v)`,
/// restricted to triangles whose vertices are all in the core.
pub fn triangulate_patch(patch: &Patch, scale: [f64; 2], min_uv_area: f64) -> Result<Vec<PatchTriangle>, MesherError> {
    let core = patch.core_len();
    if core < 3 {
        return Err(MesherError::TooFewCoreVertices { seed: patch.seed, core });
    }
    let points: Vec<[f64; 2]> = patch.uv.iter().map(|p| [scale[0] * p[0], scale[1] * p[1]]).collect();
    let ids: Vec<u64> = patch.vertices.iter().map(|&v| v as u64).collect();
    let tris = delaunay::triangulate(&points, &ids, min_uv_area * scale[0] * scale[1]);
    let core_depth = patch.core_depth as u32;
    let fence: Vec<[f64; 2]> =
        (0..patch.vertices.len()).filter(|&i| patch.depth[i] as usize == patch.rim_depth).map(|i| points[i]).collect();
    Ok(tris
        .into_iter()
        .filter(|t| t.iter().all(|&i| patch.depth[i as usize] <= core_depth))
        .map(|t| {
            let d = t.map(|i| patch.depth[i as usize]);
            let mut step: f64 = 0.0;
            for k in 0..3 {
                let (p, q) = (patch.uv[t[k] as usize], patch.uv[t[(k + 1) % 3] as usize]);
                step = step.max((p[0] - q[0]).abs()).max((p[1] - q[1]).abs());
            }
            let (centre, radius2) = circumcircle(t.map(|i| points[i as usize]));
            let certified = fence.iter().all(|f| (f[0] - centre[0]).powi(2) + (f[1] - centre[1]).powi(2) > radius2);
            PatchTriangle {
                vertices: t.map(|i| patch.vertices[i as usize]),
                certified,
                max_depth: d.into_iter().max().expect("three"),
                depth_sum: d.iter().sum(),
                max_coordinate_step: step,
            }
        })
        .collect())
}

fn circumcircle(p: [[f64; 2]; 3]) -> ([f64; 2], f64) {
    let (bx, by) = (p[1][0] - p[0][0], p[1][1] - p[0][1]);
    let (cx, cy) = (p[2][0] - p[0][0], p[2][1] - p[0][1]);
    let d = 2.0 * (bx * cy - by * cx);
    let (b2, c2) = (bx * bx + by * by, cx * cx + cy * cy);
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    ([p[0][0] + ux, p[0][1] + uy], ux * ux + uy * uy)
}

/// Offending simplices of a failed merge.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub boundary_edges: Vec<(u32, u32)>,
    pub nonmanifold_edges: Vec<(u32, u32)>,
    pub singular_vertices: Vec<u32>,
}

impl Diagnostics {
    pub fn of(mesh: &SurfaceMesh) -> Self {
        let mut d = Self::default();
        for (e, faces) in mesh.edge_faces() {
            match faces.len() {
                1 => d.boundary_edges.push(e),
                2 => {}
                _ => d.nonmanifold_edges.push(e),
            }
        }
        d.singular_vertices = mesh.singular_vertices();
        d
    }
}

/// Where seeds come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedSchedule {
    /// First seed drawn from a generator with this seed.
    Random(u64),
    /// These seeds first, in order.
    Explicit(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeReport {
    pub rounds_used: usize,
    pub seeds: Vec<u32>,
    pub collapsed_patches: usize,
    /// Holes closed combinatorially after assembly.
    pub filled_holes: usize,
    pub candidates: usize,
    /// Largest disagreement of `(u_i - u_j, v_i - v_j)` between patches that
    /// both hold edge `(i, j)` in their core.
    pub max_patch_disagreement: f64,
    /// Largest coordinate step along an edge of an accepted triangle.
    pub max_edge_step: f64,
}

#[derive(Debug, Clone)]
pub struct MergeOutput {
    pub mesh: SurfaceMesh,
    pub report: MergeReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Score {
    uncertified: bool,
    max_depth: u32,
    depth_sum: u32,
    patch: u32,
}

struct Candidate {
    score: Score,
    vertices: [u32; 3],
    step: f64,
}

/// Greedy assembly: best-scored triangle first, rejected if it would reuse a
/// directed edge. All patch triangles share one orientation, so a reused
/// directed edge means two triangles overlap on the same side.
fn assemble(vertex_count: usize, candidates: &HashMap<[u32; 3], Candidate>) -> (SurfaceMesh, f64) {
    let mut order: Vec<(&[u32; 3], &Candidate)> = candidates.iter().collect();
    order.sort_by(|a, b| a.1.score.cmp(&b.1.score).then_with(|| a.0.cmp(b.0)));
    let mut used: HashSet<(u32, u32)> = HashSet::new();
    let mut tris = Vec::new();
    let mut step: f64 = 0.0;
    for (_, c) in order {
        let t = c.vertices;
        let directed = [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])];
        if directed.iter().any(|d| used.contains(d)) {
            continue;
        }
        used.extend(directed);
        tris.push(t);
        step = step.max(c.step);
    }
    tris.sort_unstable();
    (SurfaceMesh::new(vertex_count, tris).expect("indices from the graph"), step)
}

/// Hole loops of a mesh: boundary edges reversed, so each loop runs the way
/// a face filling it would. Loops through a vertex twice are skipped.
pub fn hole_loops(mesh: &SurfaceMesh) -> Vec<Vec<u32>> {
    let tris = mesh.triangles();
    let mut next: HashMap<u32, Option<u32>> = HashMap::new();
    for ((a, b), faces) in mesh.edge_faces() {
        if faces.len() != 1 {
            continue;
        }
        let t = tris[faces[0] as usize];
        let forward = (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b);
        let (from, to) = if forward { (b, a) } else { (a, b) };
        next.entry(from).and_modify(|n| *n = None).or_insert(Some(to));
    }
    let mut starts: Vec<u32> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut seen: HashSet<u32> = HashSet::new();
    let mut loops = Vec::new();
    'outer: for s in starts {
        if seen.contains(&s) {
            continue;
        }
        let mut lp = vec![s];
        let mut cur = s;
        seen.insert(s);
        loop {
            let Some(Some(n)) = next.get(&cur).copied() else { continue 'outer };
            if n == s {
                break;
            }
            if !seen.insert(n) {
                continue 'outer;
            }
            lp.push(n);
            cur = n;
        }
        loops.push(lp);
    }
    loops
}

/// Triangulates a hole loop minimising total diagonal length, never creating
/// an edge the mesh already has. Triangles follow the loop's winding.
pub fn fill_loop(mesh_edges: &HashSet<(u32, u32)>, lp: &[u32], length: impl Fn(u32, u32) -> f64) -> Option<Vec<[u32; 3]>> {
    let m = lp.len();
    if m < 3 {
        return None;
    }
    let key = |a: u32, b: u32| if a < b { (a, b) } else { (b, a) };
    let diag = |i: usize, j: usize| -> Option<f64> {
        if j == i + 1 || (i == 0 && j == m - 1) {
            Some(0.0)
        } else if mesh_edges.contains(&key(lp[i], lp[j])) {
            None
        } else {
            Some(length(lp[i], lp[j]))
        }
    };
    let mut cost = vec![vec![f64::INFINITY; m]; m];
    let mut split = vec![vec![usize::MAX; m]; m];
    for i in 0..m - 1 {
        cost[i][i + 1] = 0.0;
    }
    for gap in 2..m {
        for i in 0..m - gap {
            let j = i + gap;
            let Some(dij) = diag(i, j) else { continue };
            for k in i + 1..j {
                let c = cost[i][k] + cost[k][j] + dij;
                if c < cost[i][j] {
                    cost[i][j] = c;
                    split[i][j] = k;
                }
            }
        }
    }
    if !cost[0][m - 1].is_finite() {
        return None;
    }
    let mut out = Vec::new();
    let mut stack = vec![(0, m - 1)];
    while let Some((i, j)) = stack.pop() {
        if j <= i + 1 {
            continue;
        }
        let k = split[i][j];
        out.push([lp[i], lp[k], lp[j]]);
        stack.push((i, k));
        stack.push((k, j));
    }
    Some(out)
}

/// Closes small holes in place; lengths are measured in a patch around the
/// loop when it fits in one. Returns the number of holes closed.
fn fill_holes(graph: &NeighborGraph, forms: &OneFormPair, scale: [f64; 2], config: &MeshConfig, mesh: &mut SurfaceMesh) -> usize {
    let loops = hole_loops(mesh);
    if loops.is_empty() || !config.fill_holes {
        return 0;
    }
    debug!("hole loops: {:?}", loops.iter().map(|l| l.len()).collect::<Vec<_>>());
    let mut edges: HashSet<(u32, u32)> = mesh.edge_faces().into_keys().collect();
    let mut tris = mesh.triangles().to_vec();
    let mut filled = 0;
    for lp in loops.into_iter().filter(|l| l.len() <= MAX_HOLE_LOOP) {
        let patch = integrate_patch(graph, forms, lp[0], config.rim_depth, config.core_depth);
        let index = patch.local_index();
        let uv: Option<Vec<[f64; 2]>> = lp.iter().map(|v| index.get(v).map(|&i| patch.uv[i])).collect();
        let pos: HashMap<u32, [f64; 2]> = match uv {
            Some(uv) => lp.iter().copied().zip(uv).collect(),
            None => HashMap::new(),
        };
        let length = |a: u32, b: u32| match (pos.get(&a), pos.get(&b)) {
            (Some(p), Some(q)) => (scale[0] * (p[0] - q[0])).hypot(scale[1] * (p[1] - q[1])),
            _ => 1.0,
        };
        if let Some(new) = fill_loop(&edges, &lp, length) {
            for t in &new {
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    edges.insert(if a < b { (a, b) } else { (b, a) });
                }
            }
            tris.extend(new);
            filled += 1;
        }
    }
    tris.sort_unstable();
    *mesh = SurfaceMesh::new(mesh.vertex_count(), tris).expect("loop vertices are mesh vertices");
    filled
}

/// Longest hole loop [`merge_patches`] closes combinatorially.
pub const MAX_HOLE_LOOP: usize = 12;

/// Uncovered vertex farthest (in hops) from every covered one; ties go to the
/// smallest index.
fn farthest_uncovered(graph: &NeighborGraph, covered: &[bool]) -> Option<u32> {
    let n = graph.vertex_count();
    let mut dist = vec![u32::MAX; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| covered[v]).collect();
    for &v in &queue {
        dist[v] = 0;
    }
    while let Some(v) = queue.pop_front() {
        for &(w, _) in graph.neighbors(v) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[v] + 1;
                queue.push_back(w as usize);
            }
        }
    }
    (0..n).filter(|&v| !covered[v]).max_by_key(|&v| (dist[v], std::cmp::Reverse(v))).map(|v| v as u32)
}

/// Grows, triangulates and merges patches until the mesh is a closed manifold
/// or the round budget runs out.
pub fn merge_patches(
    graph: &NeighborGraph,
    forms: &OneFormPair,
    scale: [f64; 2],
    seeds: &SeedSchedule,
    config: &MeshConfig,
) -> Result<MergeOutput, MesherError> {
    config.validate()?;
    let n = graph.vertex_count();
    let margin = config.rim_depth - config.core_depth;
    let mut explicit: VecDeque<u32> = match seeds {
        SeedSchedule::Explicit(s) => s.iter().copied().filter(|&v| (v as usize) < n).collect(),
        SeedSchedule::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            VecDeque::from([rng.gen_range(0..n as u32)])
        }
    };

    let mut covered = vec![false; n];
    let mut used_seeds: HashSet<u32> = HashSet::new();
    let mut seed_log = Vec::new();
    let mut candidates: HashMap<[u32; 3], Candidate> = HashMap::new();
    let mut agreement: HashMap<u32, [f64; 2]> = HashMap::new();
    let mut disagreement: f64 = 0.0;
    let mut collapsed = 0;
    let mut budget = config.max_rounds;
    let mut rounds = 0;
    let mut last: Option<(SurfaceMesh, f64)> = None;
    let mut assembled_rounds = usize::MAX;

    loop {
        let all_covered = covered.iter().all(|&c| c);
        let next = if let Some(s) = explicit.pop_front() {
            Some(s)
        } else if !all_covered {
            farthest_uncovered(graph, &covered)
        } else {
            let (mesh, step) = assemble(n, &candidates);
            let singular = mesh.singular_vertices();
            let report = mesh.validate();
            last = Some((mesh, step));
            assembled_rounds = rounds;
            if singular.is_empty() && report.is_closed_manifold() {
                break;
            }
            debug!("round {rounds}: {} defective vertices", singular.len());
            singular.into_iter().find(|v| !used_seeds.contains(v))
        };
        let Some(seed) = next else { break };
        if budget.is_some_and(|b| rounds >= b) {
            break;
        }
        rounds += 1;
        used_seeds.insert(seed);
        seed_log.push(seed);
        covered[seed as usize] = true;

        let patch = match grow_patch_with_margin(graph, forms, seed, config.rim_depth, margin) {
            Ok(p) => p,
            Err(e) => {
                debug!("{e}");
                collapsed += 1;
                continue;
            }
        };
        if budget.is_none() {
            let core = patch.core_len().max(1);
            budget = Some(10 * n.div_ceil(core));
        }
        let core_depth = patch.core_depth as u32;
        for (i, &v) in patch.vertices.iter().enumerate() {
            if patch.depth[i] <= core_depth {
                covered[v as usize] = true;
            }
        }
        // Patch agreement on core edges.
        let index = patch.local_index();
        for (i, &a) in patch.vertices.iter().enumerate() {
            if patch.depth[i] > core_depth {
                continue;
            }
            for &(b, e) in graph.neighbors(a as usize) {
                let Some(&j) = index.get(&b) else { continue };
                if b < a || patch.depth[j] > core_depth {
                    continue;
                }
                let d = [patch.uv[i][0] - patch.uv[j][0], patch.uv[i][1] - patch.uv[j][1]];
                match agreement.get(&e) {
                    Some(prev) => disagreement = disagreement.max((prev[0] - d[0]).abs()).max((prev[1] - d[1]).abs()),
                    None => {
                        agreement.insert(e, d);
                    }
                }
            }
        }
        let tris = match triangulate_patch(&patch, scale, config.min_uv_area) {
            Ok(t) => t,
            Err(e) => {
                debug!("{e}");
                continue;
            }
        };
        let patch_id = seed_log.len() as u32 - 1;
        for t in tris {
            let score = Score { uncertified: !t.certified, max_depth: t.max_depth, depth_sum: t.depth_sum, patch: patch_id };
            let mut key = t.vertices;
            key.sort_unstable();
            let better = candidates.get(&key).is_none_or(|c| score < c.score);
            if better {
                candidates.insert(key, Candidate { score, vertices: t.vertices, step: t.max_coordinate_step });
            }
        }
    }

    // Patches may have been added after the last assembly.
    let (mut mesh, step) = match last {
        Some(l) if assembled_rounds == rounds => l,
        _ => assemble(n, &candidates),
    };
    let filled = fill_holes(graph, forms, scale, config, &mut mesh);
    let mut report = mesh.validate();
    report.rounds_used = Some(rounds);
    info!(
        "merged {} patches into {} faces (chi = {}, {} boundary edges)",
        rounds, report.faces, report.euler_characteristic, report.boundary_edges
    );
    if !(report.is_closed_manifold() && report.euler_characteristic == 0 && report.orientable) {
        return Err(MesherError::Validation {
            rounds,
            diagnostics: Box::new(Diagnostics::of(&mesh)),
            report: Box::new(report),
            mesh: Box::new(mesh),
        });
    }
    Ok(MergeOutput {
        mesh,
        report: MergeReport {
            rounds_used: rounds,
            seeds: seed_log,
            collapsed_patches: collapsed,
            filled_holes: filled,
            candidates: candidates.len(),
            max_patch_disagreement: disagreement,
            max_edge_step: step,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{flat_torus_basis, flat_torus_graph, grid_index};
    use crate::oneform::{assemble_system, solve_oneforms, EdgeWeights, WeightMode};

    fn grid_forms(n: u32, m: u32) -> (NeighborGraph, OneFormPair) {
        let g = flat_torus_graph(n, m);
        let basis = flat_torus_basis(&g, n, m);
        let sys = assemble_system(&g, &basis, &EdgeWeights::from_mode(&g, WeightMode::Uniform));
        (g, solve_oneforms(&sys).unwrap())
    }

    #[test]
    fn thirds_on_the_three_by_three_grid() {
        let (g, forms) = grid_forms(3, 3);
        let p = integrate_patch(&g, &forms, 4, 1, 0);
        assert_eq!(p.vertices.len(), 5);
        let third = 1.0 / 3.0;
        for want in [[-third, 0.0], [0.0, -third], [0.0, third], [third, 0.0]] {
            let hit = p.uv[1..].iter().any(|g| (g[0] - want[0]).abs() < 1e-9 && (g[1] - want[1]).abs() < 1e-9);
            assert!(hit, "{want:?} missing from {:?}", p.uv);
        }
    }

    #[test]
    fn generator_loop_inside_patch_collapses() {
        // On a 3 x 3 grid the neighbors of a vertex close a generator loop.
        let (g, forms) = grid_forms(3, 3);
        match grow_patch(&g, &forms, 0, 3) {
            Err(MesherError::PatchCollapse { rim_depth, mismatch, .. }) => {
                assert_eq!(rim_depth, MIN_RIM_DEPTH);
                assert!((mismatch - 1.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rim_shrinks_until_single_valued() {
        let (g, forms) = grid_forms(8, 8);
        let p = grow_patch(&g, &forms, 0, 6).unwrap();
        assert!(p.rim_depth < 6 && p.rim_depth >= MIN_RIM_DEPTH, "rim {}", p.rim_depth);
        assert!(find_wraparound(&g, &forms, &p).is_none());
    }

    #[test]
    fn too_few_core_vertices() {
        let p = Patch {
            seed: 0,
            vertices: vec![0, 1, 2, 3],
            depth: vec![0, 1, 1, 1],
            uv: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            core_depth: 0,
            rim_depth: 1,
        };
        assert!(matches!(triangulate_patch(&p, [1.0, 1.0], 1e-12), Err(MesherError::TooFewCoreVertices { core: 1, .. })));
    }

    #[test]
    fn three_core_points_make_one_triangle() {
        let p = Patch {
            seed: 5,
            vertices: vec![5, 9, 7],
            depth: vec![0, 1, 1],
            uv: vec![[0.0, 0.0], [1.0, 0.2], [0.3, 1.0]],
            core_depth: 1,
            rim_depth: 2,
        };
        let t = triangulate_patch(&p, [1.0, 1.0], 1e-12).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].vertices, [5, 9, 7]);
    }

    #[test]
    fn grid_torus_meshes_cleanly() {
        let (n, m) = (12, 10);
        let (g, forms) = grid_forms(n, m);
        let out = merge_patches(&g, &forms, [n as f64, m as f64], &SeedSchedule::Random(3), &MeshConfig::default()).unwrap();
        let r = out.mesh.validate();
        assert!(r.is_torus(), "{r:?}");
        assert_eq!(r.faces, 2 * (n * m) as usize);
        assert!(out.report.max_patch_disagreement < 1e-9);
        assert!(out.report.max_edge_step < 0.5);
        // Every accepted edge is a grid edge or a cell diagonal.
        for t in out.mesh.triangles() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let (ia, ja, ib, jb) = (a / m, a % m, b / m, b % m);
                let di = (ia + n - ib) % n;
                let dj = (ja + m - jb) % m;
                assert!([0, 1, n - 1].contains(&di) && [0, 1, m - 1].contains(&dj), "{a} {b}");
            }
        }
        let _ = grid_index(n, m, 0, 0);
    }

    #[test]
    fn undersampled_grid_fails_validation() {
        // Rims wider than the grid shrink the cores to one ring.
        let (g, forms) = grid_forms(8, 9);
        let r = merge_patches(&g, &forms, [8.0, 9.0], &SeedSchedule::Random(0), &MeshConfig::default());
        match r {
            Err(MesherError::Validation { report, diagnostics, .. }) => {
                assert!(report.boundary_edges > 0);
                assert_eq!(diagnostics.boundary_edges.len(), report.boundary_edges);
            }
            other => panic!("{:?}", other.map(|o| o.report)),
        }
    }

    #[test]
    fn seed_schedules_agree_on_topology() {
        let (g, forms) = grid_forms(12, 14);
        let a = merge_patches(&g, &forms, [12.0, 14.0], &SeedSchedule::Random(1), &MeshConfig::default()).unwrap();
        let b = merge_patches(&g, &forms, [12.0, 14.0], &SeedSchedule::Explicit(vec![50, 3]), &MeshConfig::default()).unwrap();
        let (ra, rb) = (a.mesh.validate(), b.mesh.validate());
        assert_eq!((ra.euler_characteristic, ra.boundary_edges), (rb.euler_characteristic, rb.boundary_edges));
        assert_eq!(b.report.seeds[..2], [50, 3]);
    }

    #[test]
    fn hole_loop_is_filled_consistently() {
        let full = crate::mesh::SurfaceMesh::new(4, vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]]).unwrap();
        let open = full.without_face(3);
        let loops = hole_loops(&open);
        assert_eq!(loops.len(), 1);
        let edges: HashSet<(u32, u32)> = open.edge_faces().into_keys().collect();
        let fill = fill_loop(&edges, &loops[0], |_, _| 1.0).unwrap();
        let mut tris = open.triangles().to_vec();
        tris.extend(fill);
        let closed = SurfaceMesh::new(4, tris).unwrap().validate();
        assert!(closed.is_closed_manifold() && closed.orientable && closed.misoriented_edges == 0, "{closed:?}");
    }

    #[test]
    fn bad_config_rejected() {
        let c = MeshConfig { core_depth: 5, rim_depth: 5, ..Default::default() };
        assert!(matches!(c.validate(), Err(MesherError::Config(_))));
    }
}
