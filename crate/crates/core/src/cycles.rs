//! Minimum cycle basis and homology generator identification.
//!
//! Cycles are handled as GF(2) vectors over the non-tree edges of a fixed BFS
//! spanning tree, which is an isomorphism onto the cycle space. The basis is
//! grown in two phases:
//!
//! 1. Horton candidates `P(v,x) + (x,y) + P(y,v)` are generated in weight
//!    windows of geometrically increasing size and added greedily when
//!    independent. Radius-bounded Dijkstra keeps every window local.
//! 2. Once windows stop contributing, de Pina's algorithm completes the basis
//!    with shortest odd cycles found in the parity double cover.
//!
//! The greedy prefix of phase 1 is a prefix of some minimum basis, and de Pina
//! extends any such prefix to a minimum basis, so the result is exact.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::io::Write;

use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gf2::SparseEchelon;
use crate::knn::NeighborGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CycleError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("edge set is not a simple cycle")]
    NotSimple,
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(u32, u32),
    #[error("basis has {found} cycles, cycle space has dimension {expected}")]
    BasisSizeMismatch { found: usize, expected: usize },
    #[error("cycles are linearly dependent over GF(2)")]
    Dependent,
    #[error("classification needs at least two cycles, basis has {0}")]
    TooFewCycles(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleClass {
    Trivial,
    Toroidal,
    Poloidal,
}

/// A simple cycle. `vertices` is the closed walk (first vertex not repeated)
/// and `edges[i]` joins `vertices[i]` to `vertices[i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    vertices: Vec<u32>,
    edges: Vec<u32>,
    key: Vec<u32>,
    weight: f64,
}

impl Cycle {
    /// Builds the cycle from an unordered edge set. The walk starts at the
    /// smallest vertex and leaves through its smaller neighbor.
    pub fn from_edge_set(graph: &NeighborGraph, edge_set: &[u32]) -> Result<Self, CycleError> {
        let mut key = edge_set.to_vec();
        key.sort_unstable();
        key.dedup();
        if key.len() < 3 || key.len() != edge_set.len() {
            return Err(CycleError::NotSimple);
        }
        let mut incident: HashMap<u32, Vec<(u32, u32)>> = HashMap::with_capacity(key.len());
        for &e in &key {
            let edge = graph.edge(e as usize);
            incident.entry(edge.a).or_default().push((edge.b, e));
            incident.entry(edge.b).or_default().push((edge.a, e));
        }
        if incident.values().any(|l| l.len() != 2) {
            return Err(CycleError::NotSimple);
        }
        let start = *incident.keys().min().expect("non-empty");
        let first = incident[&start].iter().min().copied().expect("degree 2");
        let mut vertices = vec![start];
        let mut edges = vec![first.1];
        let mut current = first.0;
        let mut via = first.1;
        while current != start {
            vertices.push(current);
            let next = incident[&current].iter().find(|(_, e)| *e != via).copied().expect("degree 2");
            edges.push(next.1);
            via = next.1;
            current = next.0;
        }
        if edges.len() != key.len() {
            return Err(CycleError::NotSimple);
        }
        let weight = key.iter().map(|&e| graph.edge(e as usize).length).sum();
        Ok(Self { vertices, edges, key, weight })
    }

    /// Builds the cycle through consecutive vertices (closing back to the first).
    pub fn from_vertices(graph: &NeighborGraph, walk: &[u32]) -> Result<Self, CycleError> {
        let mut edges = Vec::with_capacity(walk.len());
        for i in 0..walk.len() {
            let (a, b) = (walk[i], walk[(i + 1) % walk.len()]);
            let e = graph.find_edge(a as usize, b as usize).ok_or(CycleError::NotAdjacent(a, b))?;
            edges.push(e as u32);
        }
        Self::from_edge_set(graph, &edges)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn edges(&self) -> &[u32] {
        &self.edges
    }

    /// Edge indices in increasing order.
    pub fn edge_set(&self) -> &[u32] {
        &self.key
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn hop_count(&self) -> usize {
        self.edges.len()
    }

    /// `(edge, sign)` along the walk; the sign is +1 when the walk runs from
    /// the edge's smaller endpoint to its larger one.
    pub fn signed_edges<'a>(&'a self, graph: &'a NeighborGraph) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.edges.iter().enumerate().map(move |(i, &e)| {
            let from = self.vertices[i];
            let sign = if graph.edge(e as usize).a == from { 1.0 } else { -1.0 };
            (e as usize, sign)
        })
    }

    /// Circulation of an edge-indexed one-form around the cycle.
    pub fn circulation(&self, graph: &NeighborGraph, form: &[f64]) -> f64 {
        self.signed_edges(graph).map(|(e, s)| s * form[e]).sum()
    }

    fn order_key(&self, other: &Self) -> Ordering {
        self.weight.total_cmp(&other.weight).then_with(|| self.key.cmp(&other.key))
    }
}

/// Cycle basis sorted by `(weight, edge set)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleBasis {
    cycles: Vec<Cycle>,
}

impl CycleBasis {
    /// Wraps a caller-supplied basis after checking size and independence.
    pub fn from_cycles(graph: &NeighborGraph, mut cycles: Vec<Cycle>) -> Result<Self, CycleError> {
        let expected = cycle_space_dimension(graph)?;
        if cycles.len() != expected {
            return Err(CycleError::BasisSizeMismatch { found: cycles.len(), expected });
        }
        let coords = TreeCoordinates::new(graph)?;
        let mut echelon = SparseEchelon::new(coords.columns);
        for c in &cycles {
            if !echelon.insert(coords.of_edges(c.edge_set())) {
                return Err(CycleError::Dependent);
            }
        }
        cycles.sort_by(Cycle::order_key);
        Ok(Self { cycles })
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.cycles.iter().map(Cycle::weight).sum()
    }

    /// Index of the toroidal generator: the heaviest cycle.
    pub fn toroidal_index(&self) -> Option<usize> {
        self.cycles.len().checked_sub(1)
    }

    /// Index of the poloidal generator: the second heaviest cycle.
    pub fn poloidal_index(&self) -> Option<usize> {
        self.cycles.len().checked_sub(2)
    }
}

/// Dimension `E - V + 1` of the cycle space of a connected graph.
pub fn cycle_space_dimension(graph: &NeighborGraph) -> Result<usize, CycleError> {
    if graph.component_sizes().len() != 1 {
        return Err(CycleError::Disconnected);
    }
    Ok(graph.edge_count() + 1 - graph.vertex_count())
}

/// Maps edge sets to coordinates over the non-tree edges of a BFS tree.
struct TreeCoordinates {
    column: Vec<u32>,
    columns: usize,
}

const TREE_EDGE: u32 = u32::MAX;

impl TreeCoordinates {
    fn new(graph: &NeighborGraph) -> Result<Self, CycleError> {
        let n = graph.vertex_count();
        let mut order = vec![u32::MAX; n];
        let mut in_tree = vec![false; graph.edge_count()];
        let mut queue = VecDeque::from([0usize]);
        order[0] = 0;
        let mut next = 1;
        while let Some(v) = queue.pop_front() {
            for &(w, e) in graph.neighbors(v) {
                if order[w as usize] == u32::MAX {
                    order[w as usize] = next;
                    next += 1;
                    in_tree[e as usize] = true;
                    queue.push_back(w as usize);
                }
            }
        }
        if next as usize != n {
            return Err(CycleError::Disconnected);
        }
        // Columns follow the BFS front so that local cycles have nearby columns.
        let mut non_tree: Vec<(u32, u32, u32)> = graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(e, _)| !in_tree[*e])
            .map(|(e, edge)| {
                let (oa, ob) = (order[edge.a as usize], order[edge.b as usize]);
                (oa.max(ob), oa.min(ob), e as u32)
            })
            .collect();
        non_tree.sort_unstable();
        let mut column = vec![TREE_EDGE; graph.edge_count()];
        for (c, &(_, _, e)) in non_tree.iter().enumerate() {
            column[e as usize] = c as u32;
        }
        Ok(Self { column, columns: non_tree.len() })
    }

    fn of_edges(&self, edges: &[u32]) -> Vec<u32> {
        let mut v: Vec<u32> = edges.iter().map(|&e| self.column[e as usize]).filter(|&c| c != TREE_EDGE).collect();
        v.sort_unstable();
        v
    }
}

/// Tuning for the windowed Horton phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McbOptions {
    /// First window bound as a multiple of the median edge length.
    pub initial_window: f64,
    pub growth: f64,
    /// Consecutive windows without a new basis cycle before switching to de Pina.
    pub patience: usize,
    /// Switch to de Pina as soon as at most this many cycles are missing.
    pub handoff: usize,
}

impl Default for McbOptions {
    fn default() -> Self {
        Self { initial_window: 3.0, growth: 1.5, patience: 2, handoff: 16 }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Ball {
    dist: HashMap<u32, (f64, u32, u32, u32)>,
}

impl Ball {
    // (distance, parent vertex, parent edge, hop depth)
    fn grow(graph: &NeighborGraph, source: u32, radius: f64) -> Self {
        let mut dist: HashMap<u32, (f64, u32, u32, u32)> = HashMap::new();
        let mut settled: HashSet<u32> = HashSet::new();
        let mut heap = BinaryHeap::new();
        dist.insert(source, (0.0, u32::MAX, u32::MAX, 0));
        heap.push(Reverse((Dist(0.0), source)));
        while let Some(Reverse((Dist(d), v))) = heap.pop() {
            if !settled.insert(v) {
                continue;
            }
            let depth = dist[&v].3;
            for &(w, e) in graph.neighbors(v as usize) {
                let nd = d + graph.edge(e as usize).length;
                if nd > radius || settled.contains(&w) {
                    continue;
                }
                let better = match dist.get(&w) {
                    None => true,
                    Some(&(old, ..)) => nd < old,
                };
                if better {
                    dist.insert(w, (nd, v, e, depth + 1));
                    heap.push(Reverse((Dist(nd), w)));
                }
            }
        }
        Self { dist }
    }

    /// Edge set of tree paths `x -> lca` and `y -> lca` plus `(x, y)`.
    fn fundamental_cycle(&self, x: u32, y: u32, e: u32) -> Vec<u32> {
        let mut out = vec![e];
        let (mut a, mut b) = (x, y);
        let (mut da, mut db) = (self.dist[&a].3, self.dist[&b].3);
        while a != b {
            if da >= db {
                let (_, p, pe, _) = self.dist[&a];
                out.push(pe);
                a = p;
                da -= 1;
            } else {
                let (_, p, pe, _) = self.dist[&b];
                out.push(pe);
                b = p;
                db -= 1;
            }
        }
        out.sort_unstable();
        out
    }
}

fn edge_set_weight(graph: &NeighborGraph, edges: &[u32]) -> f64 {
    edges.iter().map(|&e| graph.edge(e as usize).length).sum()
}

/// Horton candidates with weight in `(lo, hi]`, deduplicated and ordered.
fn horton_window(graph: &NeighborGraph, lo: f64, hi: f64) -> Vec<(f64, Vec<u32>)> {
    let per_source: Vec<Vec<(f64, Vec<u32>)>> = (0..graph.vertex_count() as u32)
        .into_par_iter()
        .map(|v| {
            let ball = Ball::grow(graph, v, hi);
            let mut local: HashSet<Vec<u32>> = HashSet::new();
            let mut found = Vec::new();
            for (&x, &(dx, _, px, _)) in &ball.dist {
                for &(y, e) in graph.neighbors(x as usize) {
                    if y < x {
                        continue;
                    }
                    let Some(&(dy, _, py, _)) = ball.dist.get(&y) else { continue };
                    if px == e || py == e {
                        continue;
                    }
                    let bound = dx + dy + graph.edge(e as usize).length;
                    if bound <= lo || bound > hi {
                        continue;
                    }
                    let cycle = ball.fundamental_cycle(x, y, e);
                    let w = edge_set_weight(graph, &cycle);
                    if w > lo && w <= hi && local.insert(cycle.clone()) {
                        found.push((w, cycle));
                    }
                }
            }
            found
        })
        .collect();
    let mut all: Vec<(f64, Vec<u32>)> = per_source.into_iter().flatten().collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    all.dedup_by(|a, b| a.1 == b.1);
    all
}

/// Shortest cycle whose GF(2) product with `witness` is 1, via Dijkstra on the
/// parity double cover from one endpoint of every witness edge.
fn shortest_odd_cycle(graph: &NeighborGraph, odd_edge: &[bool]) -> Option<(f64, Vec<u32>)> {
    let n = graph.vertex_count();
    let mut starts: Vec<u32> = odd_edge.iter().enumerate().filter(|(_, &o)| o).map(|(e, _)| graph.edge(e).a).collect();
    starts.sort_unstable();
    starts.dedup();

    let mut best: Option<(f64, Vec<u32>)> = None;
    let mut dist = vec![f64::INFINITY; 2 * n];
    let mut parent = vec![(u32::MAX, u32::MAX); 2 * n];
    let mut touched = Vec::new();
    for s in starts {
        for &i in &touched {
            dist[i] = f64::INFINITY;
            parent[i] = (u32::MAX, u32::MAX);
        }
        touched.clear();
        let bound = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        let src = 2 * s as usize;
        let target = src + 1;
        dist[src] = 0.0;
        touched.push(src);
        let mut heap = BinaryHeap::from([Reverse((Dist(0.0), src as u32))]);
        while let Some(Reverse((Dist(d), node))) = heap.pop() {
            let node = node as usize;
            if d > dist[node] {
                continue;
            }
            if node == target || d > bound {
                break;
            }
            let (v, parity) = (node / 2, node % 2);
            for &(w, e) in graph.neighbors(v) {
                let flip = odd_edge[e as usize] as usize;
                let next = 2 * w as usize + (parity ^ flip);
                let nd = d + graph.edge(e as usize).length;
                if nd > bound {
                    continue;
                }
                if nd < dist[next] {
                    if dist[next].is_infinite() {
                        touched.push(next);
                    }
                    dist[next] = nd;
                    parent[next] = (node as u32, e);
                    heap.push(Reverse((Dist(nd), next as u32)));
                }
            }
        }
        if dist[target].is_infinite() {
            continue;
        }
        // Walk back and cancel edges used twice; what remains is an odd
        // element of the cycle space no heavier than the walk.
        let mut counts: HashMap<u32, u32> = HashMap::new();
        let mut node = target;
        while node != src {
            let (p, e) = parent[node];
            *counts.entry(e).or_insert(0) += 1;
            node = p as usize;
        }
        let mut set: Vec<u32> = counts.into_iter().filter(|(_, c)| c % 2 == 1).map(|(e, _)| e).collect();
        set.sort_unstable();
        let cycle = odd_component(graph, &set, odd_edge);
        let w = edge_set_weight(graph, &cycle);
        let better = match &best {
            None => true,
            Some((bw, bset)) => w < *bw || (w == *bw && cycle < *bset),
        };
        if better {
            best = Some((w, cycle));
        }
    }
    best
}

/// Splits an even-degree edge set into simple cycles and returns the lightest
/// one with odd parity.
fn odd_component(graph: &NeighborGraph, set: &[u32], odd_edge: &[bool]) -> Vec<u32> {
    let mut incident: HashMap<u32, Vec<u32>> = HashMap::new();
    for &e in set {
        let edge = graph.edge(e as usize);
        incident.entry(edge.a).or_default().push(e);
        incident.entry(edge.b).or_default().push(e);
    }
    if incident.values().all(|l| l.len() == 2) && connected(graph, set) {
        return set.to_vec();
    }
    let mut used: HashSet<u32> = HashSet::new();
    let mut pieces: Vec<Vec<u32>> = Vec::new();
    for &start_edge in set {
        if used.contains(&start_edge) {
            continue;
        }
        // Follow unused edges until a vertex repeats, then cut out that loop.
        let mut walk_vertices = vec![graph.edge(start_edge as usize).a];
        let mut walk_edges: Vec<u32> = Vec::new();
        let mut current = graph.edge(start_edge as usize).a;
        let mut next_edge = start_edge;
        loop {
            used.insert(next_edge);
            let edge = graph.edge(next_edge as usize);
            let other = if edge.a == current { edge.b } else { edge.a };
            walk_edges.push(next_edge);
            if let Some(pos) = walk_vertices.iter().position(|&v| v == other) {
                let mut piece: Vec<u32> = walk_edges.split_off(pos);
                piece.sort_unstable();
                pieces.push(piece);
                walk_vertices.truncate(pos + 1);
                if walk_edges.is_empty() {
                    break;
                }
                current = other;
            } else {
                walk_vertices.push(other);
                current = other;
            }
            match incident[&current].iter().find(|e| !used.contains(e)) {
                Some(&e) => next_edge = e,
                None => break,
            }
        }
    }
    pieces
        .into_iter()
        .filter(|p| p.iter().filter(|&&e| odd_edge[e as usize]).count() % 2 == 1)
        .min_by(|a, b| edge_set_weight(graph, a).total_cmp(&edge_set_weight(graph, b)).then_with(|| a.cmp(b)))
        .expect("an odd closed walk contains an odd cycle")
}

fn connected(graph: &NeighborGraph, set: &[u32]) -> bool {
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for &e in set {
        let edge = graph.edge(e as usize);
        adj.entry(edge.a).or_default().push(edge.b);
        adj.entry(edge.b).or_default().push(edge.a);
    }
    let Some(&start) = adj.keys().next() else { return true };
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adj[&v] {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == adj.len()
}

/// Minimum-weight cycle basis with default options.
pub fn minimum_cycle_basis(graph: &NeighborGraph) -> Result<CycleBasis, CycleError> {
    minimum_cycle_basis_with(graph, &McbOptions::default())
}

pub fn minimum_cycle_basis_with(graph: &NeighborGraph, opts: &McbOptions) -> Result<CycleBasis, CycleError> {
    let dimension = cycle_space_dimension(graph)?;
    let coords = TreeCoordinates::new(graph)?;
    let mut echelon = SparseEchelon::new(coords.columns);
    let mut chosen: Vec<Vec<u32>> = Vec::with_capacity(dimension);

    let mut lengths: Vec<f64> = graph.edges().iter().map(|e| e.length).collect();
    lengths.sort_by(f64::total_cmp);
    let total: f64 = lengths.iter().sum();
    let median = lengths.get(lengths.len() / 2).copied().unwrap_or(1.0);

    let mut lo = 0.0;
    let mut hi = opts.initial_window * median;
    let mut idle = 0;
    while dimension - chosen.len() > opts.handoff && idle < opts.patience && lo < total {
        let candidates = horton_window(graph, lo, hi);
        let before = chosen.len();
        for (_, edges) in candidates {
            if echelon.insert(coords.of_edges(&edges)) {
                chosen.push(edges);
                if chosen.len() == dimension {
                    break;
                }
            }
        }
        debug!("horton window ({lo:.4}, {hi:.4}]: rank {} of {dimension}", chosen.len());
        idle = if chosen.len() == before { idle + 1 } else { 0 };
        lo = hi;
        hi *= opts.growth;
    }

    let remaining = dimension - chosen.len();
    if remaining > 0 {
        info!("completing {remaining} basis cycles with de Pina");
        let mut witnesses = echelon.complement_basis();
        debug_assert_eq!(witnesses.len(), remaining);
        let mut column_edge = vec![0u32; coords.columns];
        for (e, &c) in coords.column.iter().enumerate() {
            if c != TREE_EDGE {
                column_edge[c as usize] = e as u32;
            }
        }
        for i in 0..witnesses.len() {
            let mut odd_edge = vec![false; graph.edge_count()];
            for c in witnesses[i].ones() {
                odd_edge[column_edge[c] as usize] = true;
            }
            let (_, cycle) = shortest_odd_cycle(graph, &odd_edge).ok_or(CycleError::Dependent)?;
            let coord = coords.of_edges(&cycle);
            let (head, tail) = witnesses.split_at_mut(i + 1);
            for s in tail.iter_mut() {
                if s.dot_sparse(&coord) {
                    s.xor_assign(&head[i]);
                }
            }
            chosen.push(cycle);
        }
    }

    if chosen.len() != dimension {
        return Err(CycleError::BasisSizeMismatch { found: chosen.len(), expected: dimension });
    }
    let mut cycles = chosen.iter().map(|edges| Cycle::from_edge_set(graph, edges)).collect::<Result<Vec<_>, _>>()?;
    cycles.sort_by(Cycle::order_key);
    Ok(CycleBasis { cycles })
}

/// Ordering used to pick the generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CycleOrdering {
    /// Total Euclidean length.
    #[default]
    Length,
    /// Number of edges, ties broken by length. Debug aid.
    HopCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedBasis {
    pub trivial: Vec<Cycle>,
    pub toroidal: Cycle,
    pub poloidal: Cycle,
}

impl ClassifiedBasis {
    pub fn cycle_count(&self) -> usize {
        self.trivial.len() + 2
    }

    /// Every cycle with its class: trivial ones first, then toroidal, poloidal.
    pub fn iter(&self) -> impl Iterator<Item = (&Cycle, CycleClass)> {
        self.trivial
            .iter()
            .map(|c| (c, CycleClass::Trivial))
            .chain([(&self.toroidal, CycleClass::Toroidal), (&self.poloidal, CycleClass::Poloidal)])
    }

    /// JSON cycle dump.
    pub fn write_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        #[derive(Serialize)]
        struct Entry<'a> {
            class: CycleClass,
            weight: f64,
            hop_count: usize,
            vertices: &'a [u32],
            edges: &'a [u32],
        }
        let entries: Vec<Entry> = self
            .iter()
            .map(|(c, class)| Entry {
                class,
                weight: c.weight(),
                hop_count: c.hop_count(),
                vertices: c.vertices(),
                edges: c.edges(),
            })
            .collect();
        serde_json::to_writer_pretty(out, &entries)
    }
}

/// The two largest cycles are the generators; the longer one is toroidal.
pub fn classify_cycles(basis: &CycleBasis) -> Result<ClassifiedBasis, CycleError> {
    classify_cycles_by(basis, CycleOrdering::Length)
}

pub fn classify_cycles_by(basis: &CycleBasis, ordering: CycleOrdering) -> Result<ClassifiedBasis, CycleError> {
    if basis.len() < 2 {
        return Err(CycleError::TooFewCycles(basis.len()));
    }
    let mut cycles = basis.cycles.clone();
    if ordering == CycleOrdering::HopCount {
        cycles.sort_by(|a, b| a.hop_count().cmp(&b.hop_count()).then_with(|| a.order_key(b)));
    }
    let toroidal = cycles.pop().expect("len >= 2");
    let poloidal = cycles.pop().expect("len >= 2");
    Ok(ClassifiedBasis { trivial: cycles, toroidal, poloidal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knn::Edge;

    fn graph(n: usize, pairs: &[(u32, u32, f64)]) -> NeighborGraph {
        let edges = pairs.iter().map(|&(a, b, length)| Edge { a, b, length }).collect();
        NeighborGraph::from_edges(n, edges, 0).unwrap()
    }

    #[test]
    fn single_square() {
        let g = graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]);
        let b = minimum_cycle_basis(&g).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.cycles()[0].vertices(), &[0, 1, 2, 3]);
        assert_eq!(b.cycles()[0].weight(), 4.0);
    }

    #[test]
    fn square_with_diagonal_prefers_triangles() {
        let d = 2f64.sqrt();
        let g = graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0), (0, 2, d)]);
        let b = minimum_cycle_basis(&g).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.cycles().iter().all(|c| c.hop_count() == 3));
    }

    #[test]
    fn de_pina_completion_matches_full_horton() {
        // Ring of 12 with two chords; patience 0 skips the Horton phase.
        let mut pairs: Vec<(u32, u32, f64)> = (0..12).map(|i| (i, (i + 1) % 12, 1.0 + 0.01 * i as f64)).collect();
        pairs.push((0, 6, 2.5));
        pairs.push((3, 9, 2.7));
        let g = graph(12, &pairs);
        let horton = McbOptions { handoff: 0, ..Default::default() };
        let a = minimum_cycle_basis_with(&g, &horton).unwrap();
        let opts = McbOptions { patience: 0, ..Default::default() };
        let b = minimum_cycle_basis_with(&g, &opts).unwrap();
        assert_eq!(a.len(), 3);
        assert!((a.total_weight() - b.total_weight()).abs() < 1e-12);
    }

    #[test]
    fn walk_and_signs() {
        let g = graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]);
        let c = Cycle::from_vertices(&g, &[2, 1, 0, 3]).unwrap();
        assert_eq!(c.vertices(), &[0, 1, 2, 3]);
        let form = [1.0, 1.0, 1.0, 1.0];
        // 0->1, 1->2, 2->3 run forward; 3->0 runs against edge (0, 3).
        assert_eq!(c.circulation(&g, &form), 2.0);
    }

    #[test]
    fn rejects_non_simple_sets() {
        let g = graph(5, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (2, 4, 1.0)]);
        assert_eq!(Cycle::from_edge_set(&g, &[0, 1, 2, 3, 4, 5]), Err(CycleError::NotSimple));
        assert_eq!(Cycle::from_edge_set(&g, &[0, 1]), Err(CycleError::NotSimple));
    }

    #[test]
    fn classification_partition_sizes() {
        let d = 2f64.sqrt();
        let g = graph(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0), (0, 2, d), (3, 4, 1.0), (2, 4, 1.0)]);
        let b = minimum_cycle_basis(&g).unwrap();
        let c = classify_cycles(&b).unwrap();
        assert_eq!((c.trivial.len(), c.cycle_count()), (b.len() - 2, b.len()));
        assert!(c.toroidal.weight() >= c.poloidal.weight());
    }
}
