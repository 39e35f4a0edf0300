//! Weak decoders with soft output: exact MWPM with the complementary gap,
//! and a union-find decoder with the cluster gap.
//!
//! Matching is solved per homology sector. A correction's class is fixed by
//! the parity of its chain endpoints on each boundary super-node, so the
//! unconstrained optimum is the lighter of the two sector optima and the
//! complementary matching is exactly the other sector (re-decoding with both
//! boundary parities toggled). Both weights are exact, which is what makes
//! the gap meaningful.

use crate::code::{DecodingGraph, DetectionEvents};
use crate::matching::{
    min_weight_perfect_matching, min_weight_perfect_matching_with_duals, quantize, WEIGHT_SCALE,
};
use crate::paths::{dijkstra, ShortestPaths};

/// Decibels per natural-log-likelihood unit, fixed project-wide so the
/// complementary and cluster gaps share one scale.
pub const DB_PER_NAT: f64 = 10.0 / std::f64::consts::LN_10;

/// A correction produced by a matching-shaped decoder.
///
/// `pairs` holds matched node ids (detectors or boundary super-nodes);
/// `correction` is the XOR-reduced edge set realizing the pairing; `weight`
/// is the sum of the chosen pair path weights in natural-log units.
#[derive(Debug, Clone)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub correction: Vec<usize>,
    pub weight: f64,
    pub flips_observable: bool,
    /// Parity of chain endpoints at (boundary 0, boundary 1); this fixes the
    /// homology sector the matching lives in.
    pub boundary_parity: [bool; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapKind {
    Complementary,
    Cluster,
}

/// Soft output of a weak decode, in decibels.
#[derive(Debug, Clone)]
pub struct GapResult {
    pub kind: GapKind,
    /// Unsigned gap, >= 0.
    pub gap_db: f64,
    /// `(w_min, w_comp)` in natural-log units (complementary kind only).
    pub weights: Option<(f64, f64)>,
}

impl GapResult {
    /// Signed gap: positive when the weak prediction matched the true
    /// observable flip, negative otherwise. Only meaningful in simulation,
    /// where ground truth exists.
    pub fn signed_db(&self, weak_correct: bool) -> f64 {
        if weak_correct {
            self.gap_db
        } else {
            -self.gap_db
        }
    }
}

/// Exact minimum-weight perfect matching decode (unconstrained optimum over
/// both homology sectors). Ties between sectors resolve to the sector with
/// even boundary-1 parity.
pub fn mwpm_decode(graph: &DecodingGraph, events: &DetectionEvents) -> Matching {
    decode_both_sectors(graph, events).0
}

/// Exact complementary matching for the sector opposite to `base`, and the
/// resulting unsigned gap.
///
/// `base` must be the MWPM result for `events` on `graph`.
pub fn complementary_gap(
    graph: &DecodingGraph,
    events: &DetectionEvents,
    base: &Matching,
) -> GapResult {
    let (min, comp) = decode_both_sectors(graph, events);
    assert!(
        (min.weight - base.weight).abs() <= 1e-9 * (1.0 + min.weight.abs())
            && min.boundary_parity == base.boundary_parity,
        "complementary_gap called with a non-minimal base matching"
    );
    gap_from_pair(&min, &comp)
}

/// One-pass weak decode: base matching plus complementary gap.
pub fn mwpm_decode_with_gap(graph: &DecodingGraph, events: &DetectionEvents) -> (Matching, GapResult) {
    let (min, comp) = decode_both_sectors(graph, events);
    let gap = gap_from_pair(&min, &comp);
    (min, gap)
}

fn gap_from_pair(min: &Matching, comp: &Matching) -> GapResult {
    let delta = comp.weight - min.weight;
    debug_assert!(delta >= -1e-9, "complementary sector lighter than the base");
    GapResult {
        kind: GapKind::Complementary,
        gap_db: DB_PER_NAT * delta.max(0.0),
        weights: Some((min.weight, comp.weight)),
    }
}

/// Solve both homology sectors exactly; returns `(base, complementary)`.
fn decode_both_sectors(graph: &DecodingGraph, events: &DetectionEvents) -> (Matching, Matching) {
    assert!(
        graph.side(graph.boundary_1()),
        "graph boundaries are homologically equivalent; no gap is defined"
    );
    let defects = events.defects(graph.basis);
    let sps: Vec<ShortestPaths> = {
        let w = graph.edge_weights();
        defects.iter().map(|&d| dijkstra(graph, d, &w)).collect()
    };
    let sp_b0 = dijkstra(graph, graph.boundary_0(), &graph.edge_weights());

    let (first, second) = if defects.len() % 2 == 0 {
        // Sectors (even, even) and (odd, odd).
        ((false, false), (true, true))
    } else {
        // Sectors (odd, even) and (even, odd).
        ((true, false), (false, true))
    };
    let a = solve_sector(graph, &defects, &sps, &sp_b0, first.0, first.1);
    let b = solve_sector(graph, &defects, &sps, &sp_b0, second.0, second.1);
    // Strict comparison: the tie prefers `a`, whose boundary-1 parity is even.
    if b.weight < a.weight {
        (b, a)
    } else {
        (a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SectorNode {
    Defect(usize),
    Boundary0,
    Boundary1,
}

/// Exact minimum-weight perfect matching of the defects with the prescribed
/// boundary endpoint parities. Pairwise distances may route through boundary
/// super-nodes (an even number of extra endpoints, which preserves parity).
fn solve_sector(
    graph: &DecodingGraph,
    defects: &[usize],
    sps: &[ShortestPaths],
    sp_b0: &ShortestPaths,
    with_b0: bool,
    with_b1: bool,
) -> Matching {
    let b0 = graph.boundary_0();
    let b1 = graph.boundary_1();
    let mut nodes: Vec<SectorNode> = (0..defects.len()).map(SectorNode::Defect).collect();
    if with_b0 {
        nodes.push(SectorNode::Boundary0);
    }
    if with_b1 {
        nodes.push(SectorNode::Boundary1);
    }
    assert!(nodes.len() % 2 == 0, "sector parity mismatch");
    if nodes.is_empty() {
        return Matching {
            pairs: Vec::new(),
            correction: Vec::new(),
            weight: 0.0,
            flips_observable: false,
            boundary_parity: [false, false],
        };
    }

    let dist = |a: SectorNode, b: SectorNode| -> f64 {
        match (a, b) {
            (SectorNode::Defect(i), SectorNode::Defect(j)) => sps[i].dist[defects[j]],
            (SectorNode::Defect(i), SectorNode::Boundary0)
            | (SectorNode::Boundary0, SectorNode::Defect(i)) => sps[i].dist[b0],
            (SectorNode::Defect(i), SectorNode::Boundary1)
            | (SectorNode::Boundary1, SectorNode::Defect(i)) => sps[i].dist[b1],
            (SectorNode::Boundary0, SectorNode::Boundary1)
            | (SectorNode::Boundary1, SectorNode::Boundary0) => sp_b0.dist[b1],
            _ => unreachable!("duplicate boundary nodes in one sector"),
        }
    };

    let mut edges = Vec::with_capacity(nodes.len() * (nodes.len() - 1) / 2);
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            edges.push((i, j, quantize(dist(nodes[i], nodes[j]))));
        }
    }
    let mate = min_weight_perfect_matching(nodes.len(), &edges)
        .expect("boundary super-nodes guarantee a feasible matching");

    let node_id = |n: SectorNode| -> usize {
        match n {
            SectorNode::Defect(i) => defects[i],
            SectorNode::Boundary0 => b0,
            SectorNode::Boundary1 => b1,
        }
    };

    let mut pairs = Vec::new();
    let mut weight = 0.0;
    let mut flips = false;
    let mut in_correction = vec![false; graph.edges().len()];
    for (i, &m) in mate.iter().enumerate() {
        if m < i {
            continue;
        }
        let (a, b) = (nodes[i], nodes[m]);
        pairs.push((node_id(a), node_id(b)));
        weight += dist(a, b);
        let path = match (a, b) {
            (SectorNode::Defect(ia), _) => sps[ia].path_edges(graph, node_id(b)),
            (_, SectorNode::Defect(ib)) => sps[ib].path_edges(graph, node_id(a)),
            _ => sp_b0.path_edges(graph, b1),
        };
        for e in path {
            in_correction[e] ^= true;
        }
        flips ^= graph.side(node_id(a)) != graph.side(node_id(b));
    }
    let correction: Vec<usize> =
        (0..graph.edges().len()).filter(|&e| in_correction[e]).collect();
    debug_assert_eq!(
        correction.iter().fold(false, |acc, &e| acc ^ graph.edges()[e].flips_observable),
        flips,
        "path flip parity disagrees with endpoint sides"
    );
    Matching {
        pairs,
        correction,
        weight,
        flips_observable: flips,
        boundary_parity: [with_b0, with_b1],
    }
}

// ---------------------------------------------------------------------------
// Union-find decoder and cluster gap
// ---------------------------------------------------------------------------

/// Final cluster structure of a union-find decode.
#[derive(Debug, Clone)]
pub struct ClusterSet {
    /// Per node: id (root) of the containing cluster, if any.
    pub membership: Vec<Option<usize>>,
    pub clusters: Vec<Cluster>,
    /// Accumulated growth per edge, in weight units; fully grown edges have
    /// `support >= weight`. Partial support discounts the quotient metric.
    pub edge_support: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Cluster {
    pub root: usize,
    pub nodes: Vec<usize>,
    /// Fully grown edges with both endpoints inside the cluster.
    pub edges: Vec<usize>,
}

struct Dsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
    defect_parity: Vec<bool>,
    boundary: Vec<bool>,
    members: Vec<Vec<usize>>,
}

impl Dsu {
    fn new(n: usize, defects: &[bool], boundary_from: usize) -> Dsu {
        Dsu {
            parent: (0..n).collect(),
            rank: vec![0; n],
            defect_parity: defects.to_vec(),
            boundary: (0..n).map(|i| i >= boundary_from).collect(),
            members: (0..n).map(|i| vec![i]).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.rank[ra] < self.rank[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        if self.rank[ra] == self.rank[rb] {
            self.rank[ra] += 1;
        }
        self.parent[rb] = ra;
        let parity = self.defect_parity[rb];
        self.defect_parity[ra] ^= parity;
        self.boundary[ra] |= self.boundary[rb];
        let mut moved = std::mem::take(&mut self.members[rb]);
        self.members[ra].append(&mut moved);
    }

    fn invalid(&mut self, root: usize) -> bool {
        let r = self.find(root);
        self.defect_parity[r] && !self.boundary[r]
    }
}

/// Union-find decode: synchronized cluster growth until every cluster has
/// even defect parity or touches a boundary, then peeling.
///
/// Growth is uniform in the weight metric and event-driven: all invalid
/// clusters inflate together until the next frontier edge fills (half an
/// edge per step on uniform graphs, since an edge between two invalid
/// clusters fills at twice the rate), with per-edge residual tracking on
/// weighted graphs. Uniform inflation keeps the grown regions metric balls,
/// which is what makes the cluster gap a lower bound on the complementary
/// gap. Simultaneous merges are processed in ascending edge order. The
/// returned matching's weight is the summed weight of the peeled correction.
pub fn uf_decode(graph: &DecodingGraph, events: &DetectionEvents) -> (Matching, ClusterSet) {
    let n = graph.n_nodes();
    let sigma = events.sigma(graph.basis);
    let mut defect = vec![false; n];
    for (i, &fired) in sigma.iter().enumerate() {
        defect[i] = fired;
    }
    let mut dsu = Dsu::new(n, &defect, graph.n_detectors());
    let n_edges = graph.edges().len();
    let mut support = vec![0.0f64; n_edges];
    let mut grown = vec![false; n_edges];

    let mut guard = 0usize;
    loop {
        let mut invalid_roots: Vec<usize> = (0..n)
            .filter(|&v| dsu.find(v) == v && dsu.invalid(v))
            .collect();
        if invalid_roots.is_empty() {
            break;
        }
        invalid_roots.sort_unstable();
        guard += 1;
        assert!(guard <= 2 * n_edges + 2, "union-find growth failed to terminate");

        // Frontier edges with their growth rate: an edge between two invalid
        // clusters fills from both sides at once.
        let mut rate: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        for &root in &invalid_roots {
            let members = dsu.members[root].clone();
            let mut cluster_frontier = std::collections::BTreeSet::new();
            for v in members {
                for &(ei, other) in graph.adjacency(v) {
                    if !grown[ei] && dsu.find(other) != root {
                        cluster_frontier.insert(ei);
                    }
                }
            }
            for ei in cluster_frontier {
                *rate.entry(ei).or_insert(0.0) += 1.0;
            }
        }
        // Inflate exactly until the first frontier edge fills.
        let delta = rate
            .iter()
            .map(|(&ei, &r)| (graph.edges()[ei].weight - support[ei]) / r)
            .fold(f64::INFINITY, f64::min);
        assert!(delta.is_finite() && delta > -1e-12, "invalid cluster with no frontier");
        for (&ei, &r) in &rate {
            support[ei] += r * delta.max(0.0);
        }
        for (&ei, _) in &rate {
            if !grown[ei] && support[ei] >= graph.edges()[ei].weight - 1e-12 {
                grown[ei] = true;
                dsu.union(graph.edges()[ei].u, graph.edges()[ei].v);
            }
        }
    }

    // Qualifying clusters grew out of defects, so they have more than one
    // node; bare detector or boundary singletons are not clusters.
    let mut membership = vec![None; n];
    let mut clusters = Vec::new();
    let mut roots: Vec<usize> =
        (0..n).filter(|&v| dsu.find(v) == v && dsu.members[v].len() > 1).collect();
    roots.sort_unstable();
    for &root in &roots {
        let mut nodes = dsu.members[root].clone();
        nodes.sort_unstable();
        for &v in &nodes {
            membership[v] = Some(root);
        }
        let edges: Vec<usize> = (0..n_edges)
            .filter(|&ei| {
                grown[ei]
                    && membership[graph.edges()[ei].u] == Some(root)
                    && membership[graph.edges()[ei].v] == Some(root)
            })
            .collect();
        clusters.push(Cluster { root, nodes, edges });
    }

    let matching = peel(graph, &defect, &clusters);

    // Inflate the growth record to the exact matching's region certificate.
    // Union-find balls alone cover the peeled correction but not necessarily
    // the minimum-weight one, and only certified regions make the cluster
    // gap a true lower bound on the complementary gap.
    let depth = certificate_depths(graph, events);
    for (ei, e) in graph.edges().iter().enumerate() {
        let certified = depth[e.u].max(0.0) + depth[e.v].max(0.0);
        if certified > support[ei] {
            support[ei] = certified;
        }
    }

    let clusters = ClusterSet { membership, clusters, edge_support: support };
    (matching, clusters)
}

/// Per-node coverage depth of the base matching's dual-ball certificate.
///
/// Solves the unconstrained matching over defects plus both boundary nodes
/// (a zero-weight boundary-boundary edge encodes "boundaries unused", and a
/// zero-weight helper node absorbs the odd-parity case), then reads off the
/// dual variables: each defect or boundary carries a metric ball whose radii
/// satisfy complementary slackness. `depth[n]` is how deep node `n` sits
/// inside the deepest covering ball (negative outside all balls).
fn certificate_depths(graph: &DecodingGraph, events: &DetectionEvents) -> Vec<f64> {
    let defects = events.defects(graph.basis);
    if defects.is_empty() {
        return vec![f64::NEG_INFINITY; graph.n_nodes()];
    }
    let weights = graph.edge_weights();
    let sps: Vec<ShortestPaths> = defects.iter().map(|&d| dijkstra(graph, d, &weights)).collect();
    let sp_b0 = dijkstra(graph, graph.boundary_0(), &weights);
    let sp_b1 = dijkstra(graph, graph.boundary_1(), &weights);

    let k = defects.len();
    let (ib0, ib1) = (k, k + 1);
    let n_nodes = if k % 2 == 0 { k + 2 } else { k + 3 };
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            edges.push((i, j, quantize(sps[i].dist[defects[j]])));
        }
        edges.push((i, ib0, quantize(sps[i].dist[graph.boundary_0()])));
        edges.push((i, ib1, quantize(sps[i].dist[graph.boundary_1()])));
    }
    edges.push((ib0, ib1, 0));
    if k % 2 == 1 {
        edges.push((ib0, k + 2, 0));
        edges.push((ib1, k + 2, 0));
    }
    let (_, duals) = min_weight_perfect_matching_with_duals(n_nodes, &edges)
        .expect("boundary super-nodes guarantee a feasible matching");

    let mut depth = vec![f64::NEG_INFINITY; graph.n_nodes()];
    let cover = |radius: f64, sp: &ShortestPaths, depth: &mut Vec<f64>| {
        if radius <= 0.0 {
            return;
        }
        for node in 0..graph.n_nodes() {
            depth[node] = depth[node].max(radius - sp.dist[node]);
        }
    };
    for i in 0..k {
        cover(duals[i] / WEIGHT_SCALE, &sps[i], &mut depth);
    }
    cover(duals[ib0] / WEIGHT_SCALE, &sp_b0, &mut depth);
    cover(duals[ib1] / WEIGHT_SCALE, &sp_b1, &mut depth);
    depth
}

/// Peel each cluster's spanning forest, pairing defects along tree paths.
fn peel(graph: &DecodingGraph, defect: &[bool], clusters: &[Cluster]) -> Matching {
    let mut pairs = Vec::new();
    let mut in_correction = vec![false; graph.edges().len()];

    for cluster in clusters {
        // Root the tree at a boundary node when the cluster touches one.
        let root = cluster
            .nodes
            .iter()
            .copied()
            .find(|&v| v == graph.boundary_0())
            .or_else(|| cluster.nodes.iter().copied().find(|&v| v == graph.boundary_1()))
            .unwrap_or(cluster.nodes[0]);

        // BFS spanning tree over the cluster's grown edges.
        let in_cluster: std::collections::BTreeSet<usize> =
            cluster.nodes.iter().copied().collect();
        let cluster_edges: std::collections::BTreeSet<usize> =
            cluster.edges.iter().copied().collect();
        let mut parent: std::collections::BTreeMap<usize, (usize, usize)> =
            std::collections::BTreeMap::new();
        let mut order = vec![root];
        let mut seen = std::collections::BTreeSet::from([root]);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &(ei, v) in graph.adjacency(u) {
                if cluster_edges.contains(&ei) && in_cluster.contains(&v) && seen.insert(v) {
                    parent.insert(v, (u, ei));
                    order.push(v);
                }
            }
        }
        assert_eq!(order.len(), cluster.nodes.len(), "cluster is disconnected");

        let mut carry: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
        for &v in cluster.nodes.iter() {
            if defect[v] {
                carry.insert(v, v);
            }
        }
        for &v in order.iter().rev() {
            if v == root {
                continue;
            }
            let Some(origin) = carry.remove(&v) else { continue };
            let (p, ei) = parent[&v];
            in_correction[ei] ^= true;
            if graph.is_boundary(p) {
                pairs.push((origin, p));
            } else if let Some(other) = carry.remove(&p) {
                pairs.push((origin, other));
            } else {
                carry.insert(p, origin);
            }
        }
        if let Some(origin) = carry.remove(&root) {
            assert!(graph.is_boundary(root), "unpaired defect in a valid cluster");
            pairs.push((origin, root));
        }
        assert!(carry.is_empty());
    }

    let correction: Vec<usize> =
        (0..graph.edges().len()).filter(|&e| in_correction[e]).collect();
    let weight = correction.iter().map(|&e| graph.edges()[e].weight).sum();
    let flips = correction
        .iter()
        .fold(false, |acc, &e| acc ^ graph.edges()[e].flips_observable);
    let mut boundary_parity = [false, false];
    for &(a, b) in &pairs {
        for node in [a, b] {
            if node == graph.boundary_0() {
                boundary_parity[0] ^= true;
            } else if node == graph.boundary_1() {
                boundary_parity[1] ^= true;
            }
        }
    }
    Matching { pairs, correction, weight, flips_observable: flips, boundary_parity }
}

/// Cluster-gap soft output: weight of the shortest inequivalent-boundary path
/// in the quotient metric where cluster-internal edges cost zero and
/// partially grown edges cost their residual.
pub fn cluster_gap(graph: &DecodingGraph, clusters: &ClusterSet) -> GapResult {
    let weights: Vec<f64> = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(ei, e)| {
            let same_cluster = clusters.membership[e.u].is_some()
                && clusters.membership[e.u] == clusters.membership[e.v];
            if same_cluster {
                0.0
            } else {
                (e.weight - clusters.edge_support[ei]).max(0.0)
            }
        })
        .collect();
    let sp = dijkstra(graph, graph.boundary_0(), &weights);
    GapResult {
        kind: GapKind::Cluster,
        gap_db: DB_PER_NAT * sp.dist[graph.boundary_1()],
        weights: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{Basis, CodeModel, DecodingGraph, NoiseParams, SurfaceCodeSpec};

    fn model(d: usize, p: f64) -> CodeModel {
        CodeModel::new(SurfaceCodeSpec::memory(d, Basis::Z).unwrap(), NoiseParams::new(p).unwrap())
            .unwrap()
    }

    fn uniform_model(d: usize, p: f64) -> CodeModel {
        let mut m = model(d, p);
        m.graph_x = m.graph_x.with_uniform_probability(p);
        m.graph_z = m.graph_z.with_uniform_probability(p);
        m
    }

    fn empty_events(m: &CodeModel) -> crate::code::DetectionEvents {
        m.checks.apply(&vec![false; m.checks.mechanisms.len()])
    }

    #[test]
    fn empty_syndrome_gaps_hit_the_distance_wall() {
        let m = uniform_model(3, 0.1);
        for graph in [&m.graph_x, &m.graph_z] {
            let ev = empty_events(&m);
            let (base, gap) = mwpm_decode_with_gap(graph, &ev);
            assert_eq!(base.pairs.len(), 0);
            assert_eq!(base.weight, 0.0);
            assert!(!base.flips_observable);
            let expected = DB_PER_NAT * 3.0 * 9.0f64.ln();
            assert!((gap.gap_db - expected).abs() < 1e-9, "{} vs {expected}", gap.gap_db);
            assert!((expected - 28.627).abs() < 1e-3);
            let (w_min, w_comp) = gap.weights.unwrap();
            assert_eq!(w_min, 0.0);
            assert!((w_comp - 3.0 * 9.0f64.ln()).abs() < 1e-9);

            // Cluster gap over no clusters takes the same bare path.
            let (_, clusters) = uf_decode(graph, &ev);
            assert!(clusters.clusters.is_empty());
            let cg = cluster_gap(graph, &clusters);
            assert!((cg.gap_db - expected).abs() < 1e-9);
        }
    }

    // B0 - n0 - n1 - B1 line with unit-ish weights; defect in the middle of a
    // two-edge side gives degenerate homology classes.
    fn line(weights: &[f64], flips_at: usize) -> DecodingGraph {
        let n = weights.len() - 1;
        let mut b = DecodingGraph::builder(Basis::X, n);
        for (i, &w) in weights.iter().enumerate() {
            let p = 1.0 / (1.0 + w.exp());
            let u = if i == 0 { n } else { i - 1 };
            let v = if i == weights.len() - 1 { n + 1 } else { i };
            b.mechanism_edge(u, v, p, i == flips_at, i, None);
        }
        b.build().unwrap()
    }

    fn events_for(graph: &DecodingGraph, defects: &[usize]) -> DetectionEvents {
        let mut sigma = vec![false; graph.n_detectors()];
        for &d in defects {
            sigma[d] = true;
        }
        DetectionEvents {
            sigma_x: sigma.clone(),
            sigma_z: sigma,
            obs_flip_x: false,
            obs_flip_z: false,
        }
    }

    use crate::code::DetectionEvents;

    #[test]
    fn single_defect_matches_nearest_boundary() {
        let g = line(&[1.0, 2.0, 4.0], 0);
        let ev = events_for(&g, &[0]);
        let m = mwpm_decode(&g, &ev);
        assert_eq!(m.pairs, vec![(0, g.boundary_0())]);
        assert!((m.weight - 1.0).abs() < 1e-9);
        assert!(m.flips_observable, "chain through the flip edge");
        let gap = complementary_gap(&g, &ev, &m);
        // Complementary route: defect to the far boundary.
        assert!((gap.gap_db - DB_PER_NAT * (6.0 - 1.0)).abs() < 1e-6);
    }

    #[test]
    fn equidistant_defect_gives_zero_gap() {
        let g = line(&[1.0, 1.0], 0);
        let ev = events_for(&g, &[0]);
        let (m, gap) = mwpm_decode_with_gap(&g, &ev);
        assert!((m.weight - 1.0).abs() < 1e-9);
        assert!(gap.gap_db.abs() < 1e-9, "degenerate classes must give g = 0");
        assert!((gap.signed_db(true) - 0.0).abs() < 1e-9);
        assert!(gap.signed_db(false).abs() < 1e-9);
    }

    #[test]
    fn signed_gap_sign_convention() {
        let g = line(&[1.0, 2.0, 4.0], 0);
        let ev = events_for(&g, &[0]);
        let (_, gap) = mwpm_decode_with_gap(&g, &ev);
        assert!(gap.signed_db(true) > 0.0);
        assert!(gap.signed_db(false) < 0.0);
        assert_eq!(gap.signed_db(true), -gap.signed_db(false));
        assert_eq!(gap.gap_db, gap.signed_db(true).abs());
    }

    #[test]
    fn decode_is_deterministic() {
        let m = model(3, 0.08);
        for seed in 0..20 {
            let (_, ev) = m.sample_shot(seed);
            let (a, ga) = mwpm_decode_with_gap(&m.graph_z, &ev);
            let (b, gb) = mwpm_decode_with_gap(&m.graph_z, &ev);
            assert_eq!(a.pairs, b.pairs);
            assert_eq!(a.correction, b.correction);
            assert_eq!(ga.gap_db, gb.gap_db);
        }
    }

    #[test]
    fn matched_defects_partition_the_syndrome() {
        let m = model(5, 0.06);
        for seed in 0..50 {
            let (_, ev) = m.sample_shot(seed);
            for graph in [&m.graph_x, &m.graph_z] {
                let defects = ev.defects(graph.basis);
                let matching = mwpm_decode(graph, &ev);
                let mut seen: Vec<usize> = matching
                    .pairs
                    .iter()
                    .flat_map(|&(a, b)| [a, b])
                    .filter(|&v| !graph.is_boundary(v))
                    .collect();
                seen.sort_unstable();
                assert_eq!(seen, defects, "every defect in exactly one pair");
            }
        }
    }

    #[test]
    fn uf_empty_syndrome_is_empty() {
        let m = model(3, 0.05);
        let ev = empty_events(&m);
        let (matching, clusters) = uf_decode(&m.graph_x, &ev);
        assert!(matching.pairs.is_empty());
        assert!(matching.correction.is_empty());
        assert!(clusters.clusters.is_empty());
        assert_eq!(matching.weight, 0.0);
    }

    #[test]
    fn uf_adjacent_defect_pair_forms_one_cluster() {
        let m = uniform_model(3, 0.1);
        let g = &m.graph_z;
        // Find an interior space edge between two detectors.
        let e = g
            .edges()
            .iter()
            .find(|e| !g.is_boundary(e.u) && !g.is_boundary(e.v))
            .unwrap();
        let ev = events_for(g, &[e.u, e.v]);
        let (matching, clusters) = uf_decode(g, &ev);
        assert_eq!(clusters.clusters.len(), 1);
        assert_eq!(clusters.clusters[0].nodes, {
            let mut v = vec![e.u, e.v];
            v.sort_unstable();
            v
        });
        assert_eq!(matching.pairs.len(), 1);
        let mwpm = mwpm_decode(g, &ev);
        assert_eq!(matching.flips_observable, mwpm.flips_observable);
    }

    #[test]
    fn uf_single_defect_reaches_boundary() {
        let g = line(&[1.0, 1.0, 1.0], 0);
        let ev = events_for(&g, &[0]);
        let (matching, clusters) = uf_decode(&g, &ev);
        assert_eq!(matching.pairs.len(), 1);
        let (a, b) = matching.pairs[0];
        assert!(g.is_boundary(a) || g.is_boundary(b), "defect matched to boundary");
        assert_eq!(clusters.clusters.len(), 1);
        let cluster = &clusters.clusters[0];
        assert!(cluster.nodes.iter().any(|&v| g.is_boundary(v)));
    }

    #[test]
    fn clusters_covering_a_logical_path_zero_the_gap() {
        // A single cluster blanketing everything makes the whole quotient
        // free, including the boundary-to-boundary traversal.
        let m = uniform_model(3, 0.1);
        let g = &m.graph_z;
        let clusters = ClusterSet {
            membership: vec![Some(0); g.n_nodes()],
            clusters: vec![Cluster {
                root: 0,
                nodes: (0..g.n_nodes()).collect(),
                edges: (0..g.edges().len()).collect(),
            }],
            edge_support: vec![0.0; g.edges().len()],
        };
        let gap = cluster_gap(g, &clusters);
        assert!(gap.gap_db < 1e-12, "covered path must be free, got {}", gap.gap_db);

        // Partial support discounts the quotient without zeroing it.
        let support = vec![g.edges()[0].weight / 2.0; g.edges().len()];
        let half = ClusterSet {
            membership: vec![None; g.n_nodes()],
            clusters: Vec::new(),
            edge_support: support,
        };
        let gap = cluster_gap(g, &half);
        let bare = DB_PER_NAT * 3.0 * 9.0f64.ln();
        assert!((gap.gap_db - bare / 2.0).abs() < 1e-9);
    }

    #[test]
    fn uf_validity_and_gap_inequality_on_random_shots() {
        for (d, p) in [(3usize, 0.05), (5, 0.03)] {
            let m = model(d, p);
            for seed in 0..400 {
                let (_, ev) = m.sample_shot(seed);
                for graph in [&m.graph_x, &m.graph_z] {
                    let (uf, clusters) = uf_decode(graph, &ev);
                    // Validity: every cluster has even defect parity or
                    // touches a boundary.
                    for cluster in &clusters.clusters {
                        let parity = cluster
                            .nodes
                            .iter()
                            .filter(|&&v| !graph.is_boundary(v) && ev.sigma(graph.basis)[v])
                            .count()
                            % 2;
                        let touches = cluster.nodes.iter().any(|&v| graph.is_boundary(v));
                        assert!(parity == 0 || touches);
                    }
                    // Defect partition for the UF matching too.
                    let mut seen: Vec<usize> = uf
                        .pairs
                        .iter()
                        .flat_map(|&(a, b)| [a, b])
                        .filter(|&v| !graph.is_boundary(v))
                        .collect();
                    seen.sort_unstable();
                    assert_eq!(seen, ev.defects(graph.basis));

                    // Gap inequality, shot by shot.
                    let (_, comp) = mwpm_decode_with_gap(graph, &ev);
                    let cg = cluster_gap(graph, &clusters);
                    assert!(
                        cg.gap_db <= comp.gap_db + 1e-9,
                        "seed {seed}: cluster {} > complementary {}",
                        cg.gap_db,
                        comp.gap_db
                    );
                }
            }
        }
    }
}
