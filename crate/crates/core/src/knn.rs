//! Exact k-nearest-neighbor graph with union symmetrization.
//!
//! Neighbors are ranked by `(squared distance, index)`, so ties resolve to the
//! lower index and the kd-tree search matches a brute-force scan exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::cloud::{sq_dist, PointCloud};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KnnError {
    #[error("k = {k} invalid for {n} points (need 2 <= k < n)")]
    InvalidK { k: usize, n: usize },
    #[error("graph is disconnected: {} components with sizes {sizes:?}", sizes.len())]
    Disconnected { sizes: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub length: f64,
}

/// Undirected simple graph. Edges are sorted by `(a, b)` with `a < b`;
/// `adjacency[v]` lists `(neighbor, edge index)` sorted by neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(u32, u32)>>,
    k: usize,
}

impl NeighborGraph {
    /// Builds a graph from an explicit edge list. Pairs are normalized to
    /// `a < b`; self-loops, duplicates and non-positive lengths are rejected.
    pub fn from_edges(vertex_count: usize, mut edges: Vec<Edge>, k: usize) -> Result<Self, String> {
        for e in edges.iter_mut() {
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
            if e.a == e.b {
                return Err(format!("self-loop at {}", e.a));
            }
            if e.b as usize >= vertex_count {
                return Err(format!("vertex {} out of range", e.b));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(format!("edge ({}, {}) has length {}", e.a, e.b, e.length));
            }
        }
        edges.sort_by_key(|e| (e.a, e.b));
        if edges.windows(2).any(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b)) {
            return Err("parallel edges".into());
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.a as usize].push((e.b, i as u32));
            adjacency[e.b as usize].push((e.a, i as u32));
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        Ok(Self { vertex_count, edges, adjacency, k })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self, v: usize) -> &[(u32, u32)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Index of the edge joining `a` and `b`, if any.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        let list = &self.adjacency[a];
        list.binary_search_by(|(n, _)| n.cmp(&(b as u32))).ok().map(|i| list[i].1 as usize)
    }

    /// Sizes of the connected components, largest first.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut seen = vec![false; self.vertex_count];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.vertex_count {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for &(w, _) in &self.adjacency[v] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w as usize);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Edge list CSV `i,j,length`.
    pub fn write_edge_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,length")?;
        for e in &self.edges {
            writeln!(out, "{},{},{:.16e}", e.a, e.b, e.length)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    index: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const LEAF_SIZE: usize = 12;

enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Static kd-tree over the cloud, splitting on the widest axis at the median.
pub struct KdTree<'a> {
    cloud: &'a PointCloud,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn new(cloud: &'a PointCloud) -> Self {
        let mut tree = Self { cloud, order: (0..cloud.len() as u32).collect(), nodes: Vec::new() };
        tree.build(0, cloud.len());
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dim = self.cloud.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.order[start..end] {
            for (a, &c) in self.cloud.point(i as usize).iter().enumerate() {
                lo[a] = lo[a].min(c);
                hi[a] = hi[a].max(c);
            }
        }
        let axis = (0..dim).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap_or(0);
        let mid = (start + end) / 2;
        let cloud = self.cloud;
        self.order[start..end].select_nth_unstable_by(mid - start, |&x, &y| {
            cloud.point(x as usize)[axis].total_cmp(&cloud.point(y as usize)[axis])
        });
        let value = cloud.point(self.order[mid] as usize)[axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    /// The `k` nearest points to stored point `query`, excluding itself,
    /// ordered by `(distance, index)`.
    pub fn nearest(&self, query: usize, k: usize) -> Vec<(u32, f64)> {
        let q = self.cloud.point(query);
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        self.search(0, q, query as u32, k, &mut heap);
        let mut found = heap.into_vec();
        found.sort();
        found.into_iter().map(|c| (c.index, c.d2)).collect()
    }

    fn search(&self, node: usize, q: &[f64], skip: u32, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if i == skip {
                        continue;
                    }
                    let c = Candidate { d2: sq_dist(q, self.cloud.point(i as usize)), index: i };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("non-empty") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, skip, k, heap);
                // Points on the far side are at least |diff| away along this axis.
                if heap.len() < k || diff * diff <= heap.peek().expect("non-empty").d2 {
                    self.search(far, q, skip, k, heap);
                }
            }
        }
    }
}

/// Brute-force neighbor ranking; the reference the kd-tree must reproduce.
pub fn brute_force_neighbors(cloud: &PointCloud, query: usize, k: usize) -> Vec<(u32, f64)> {
    let q = cloud.point(query);
    let mut all: Vec<Candidate> =
        (0..cloud.len()).filter(|&i| i != query).map(|i| Candidate { d2: sq_dist(q, cloud.point(i)), index: i as u32 }).collect();
    all.sort();
    all.truncate(k);
    all.into_iter().map(|c| (c.index, c.d2)).collect()
}

fn graph_from_neighbor_lists(cloud: &PointCloud, k: usize, lists: Vec<Vec<(u32, f64)>>) -> Result<NeighborGraph, KnnError> {
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(cloud.len() * k);
    for (i, list) in lists.iter().enumerate() {
        for &(j, _) in list {
            let (a, b) = if (i as u32) < j { (i as u32, j) } else { (j, i as u32) };
            pairs.push((a, b));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let edges = pairs.into_iter().map(|(a, b)| Edge { a, b, length: cloud.dist2(a as usize, b as usize).sqrt() }).collect();
    let graph = NeighborGraph::from_edges(cloud.len(), edges, k).expect("distinct points give a simple graph");
    let sizes = graph.component_sizes();
    if sizes.len() > 1 {
        return Err(KnnError::Disconnected { sizes });
    }
    Ok(graph)
}

/// Union-symmetrized kNN graph: `(i, j)` is an edge when either endpoint is
/// among the other's `k` nearest. Fails if the result is disconnected.
pub fn build_knn_graph(cloud: &PointCloud, k: usize) -> Result<NeighborGraph, KnnError> {
    let n = cloud.len();
    if k < 2 || k >= n {
        return Err(KnnError::InvalidK { k, n });
    }
    let tree = KdTree::new(cloud);
    let lists: Vec<Vec<(u32, f64)>> = (0..n).into_par_iter().map(|i| tree.nearest(i, k)).collect();
    graph_from_neighbor_lists(cloud, k, lists)
}

/// Same contract as [`build_knn_graph`] via an O(N^2) scan.
pub fn build_knn_graph_brute_force(cloud: &PointCloud, k: usize) -> Result<NeighborGraph, KnnError> {
    let n = cloud.len();
    if k >= n || k == 0 {
        return Err(KnnError::InvalidK { k, n });
    }
    let lists = (0..n).map(|i| brute_force_neighbors(cloud, i, k)).collect();
    graph_from_neighbor_lists(cloud, k, lists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Provenance;

    fn line_cloud(xs: &[f64]) -> PointCloud {
        let pts = xs.iter().map(|&x| vec![x, 0.0, 0.0]).collect();
        PointCloud::new(3, pts, Provenance::Synthetic).unwrap()
    }

    #[test]
    fn union_symmetrization_on_a_line() {
        // Four points so the cloud is valid; the fourth sits far away.
        let cloud = line_cloud(&[0.0, 1.0, 3.0, 10.0]);
        let lists = (0..4).map(|i| brute_force_neighbors(&cloud, i, 1)).collect();
        let g = graph_from_neighbor_lists(&cloud, 1, lists).unwrap();
        let pairs: Vec<(u32, u32)> = g.edges().iter().map(|e| (e.a, e.b)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(g.edge(1).length, 2.0);
    }

    #[test]
    fn saturated_k_gives_complete_graph() {
        let cloud = line_cloud(&[0.0, 1.0, 3.0, 7.0, 8.5]);
        let g = build_knn_graph(&cloud, 4).unwrap();
        assert_eq!(g.edge_count(), 10);
    }

    #[test]
    fn invalid_k() {
        let cloud = line_cloud(&[0.0, 1.0, 3.0, 7.0]);
        assert_eq!(build_knn_graph(&cloud, 1), Err(KnnError::InvalidK { k: 1, n: 4 }));
        assert_eq!(build_knn_graph(&cloud, 4), Err(KnnError::InvalidK { k: 4, n: 4 }));
    }

    #[test]
    fn disconnected_reports_component_sizes() {
        let cloud = line_cloud(&[0.0, 0.1, 0.2, 100.0, 100.1, 100.2, 100.3]);
        match build_knn_graph(&cloud, 2) {
            Err(KnnError::Disconnected { sizes }) => assert_eq!(sizes, vec![4, 3]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ties_resolve_to_lower_index() {
        let cloud = line_cloud(&[0.0, 1.0, -1.0, 2.0, -2.0]);
        let tree = KdTree::new(&cloud);
        let near = tree.nearest(0, 2);
        assert_eq!(near.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn find_edge_and_adjacency_are_symmetric() {
        let cloud = line_cloud(&[0.0, 1.0, 3.0, 7.0, 8.5]);
        let g = build_knn_graph(&cloud, 2).unwrap();
        for (i, e) in g.edges().iter().enumerate() {
            assert_eq!(g.find_edge(e.a as usize, e.b as usize), Some(i));
            assert_eq!(g.find_edge(e.b as usize, e.a as usize), Some(i));
        }
    }
}
