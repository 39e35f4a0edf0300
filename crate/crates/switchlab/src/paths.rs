//! Dijkstra shortest paths on decoding graphs, tracking the observable-flip
//! parity of the tree path alongside the distance. Ties relax strictly, so
//! the tree (and therefore every reported path) is deterministic for a fixed
//! adjacency order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::code::DecodingGraph;

/// Single-source shortest-path tree.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    /// Observable-flip parity of the tree path from the source.
    pub flip: Vec<bool>,
    /// Edge used to reach each node in the tree (`usize::MAX` at the source
    /// and for unreachable nodes).
    pub pred_edge: Vec<usize>,
}

impl ShortestPaths {
    /// Edge ids of the tree path from the source to `node`.
    pub fn path_edges(&self, graph: &DecodingGraph, node: usize) -> Vec<usize> {
        let mut edges = Vec::new();
        let mut cur = node;
        while cur != self.source {
            let ei = self.pred_edge[cur];
            assert!(ei != usize::MAX, "node {cur} unreachable from {}", self.source);
            edges.push(ei);
            let e = &graph.edges()[ei];
            cur = if e.u == cur { e.v } else { e.u };
        }
        edges
    }
}

struct HeapEntry {
    dist: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap; node index breaks distance ties.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Dijkstra from `source` using `weights[edge]` (callers pass the graph's own
/// weights or an override, e.g. quotient or reweighted edges).
pub fn dijkstra(graph: &DecodingGraph, source: usize, weights: &[f64]) -> ShortestPaths {
    let n = graph.n_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut flip = vec![false; n];
    let mut pred_edge = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: source });
    while let Some(HeapEntry { dist: du, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(ei, v) in graph.adjacency(u) {
            let w = weights[ei];
            debug_assert!(w >= 0.0);
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                flip[v] = flip[u] ^ graph.edges()[ei].flips_observable;
                pred_edge[v] = ei;
                heap.push(HeapEntry { dist: nd, node: v });
            }
        }
    }
    ShortestPaths { source, dist, flip, pred_edge }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{Basis, DecodingGraph};

    // Path graph B0 - 0 - 1 - B1 with the middle edge flipping the observable.
    fn line_graph(w: [f64; 3]) -> DecodingGraph {
        let mut b = DecodingGraph::builder(Basis::X, 2);
        b.mechanism_edge(2, 0, weight_to_prob(w[0]), false, 0, None);
        b.mechanism_edge(0, 1, weight_to_prob(w[1]), true, 1, None);
        b.mechanism_edge(1, 3, weight_to_prob(w[2]), false, 2, None);
        b.build().unwrap()
    }

    fn weight_to_prob(w: f64) -> f64 {
        1.0 / (1.0 + w.exp())
    }

    #[test]
    fn distances_and_flips_on_a_line() {
        let g = line_graph([1.0, 2.0, 3.0]);
        let sp = dijkstra(&g, g.boundary_0(), &g.edge_weights());
        assert!((sp.dist[0] - 1.0).abs() < 1e-12);
        assert!((sp.dist[1] - 3.0).abs() < 1e-12);
        assert!((sp.dist[g.boundary_1()] - 6.0).abs() < 1e-12);
        assert!(!sp.flip[0]);
        assert!(sp.flip[1]);
        assert!(sp.flip[g.boundary_1()]);
        assert_eq!(sp.path_edges(&g, g.boundary_1()).len(), 3);
        // The flip parities agree with the side labels assigned at build time.
        for v in 0..g.n_nodes() {
            assert_eq!(sp.flip[v], g.side(v));
        }
    }

    #[test]
    fn weight_overrides_reroute() {
        let g = line_graph([1.0, 2.0, 3.0]);
        let mut w = g.edge_weights();
        // Zero out the middle edge (0-1), e.g. a cluster quotient.
        let middle = g.edges().iter().position(|e| (e.u, e.v) == (0, 1)).unwrap();
        w[middle] = 0.0;
        let sp = dijkstra(&g, g.boundary_0(), &w);
        assert!((sp.dist[g.boundary_1()] - 4.0).abs() < 1e-12);
    }
}
