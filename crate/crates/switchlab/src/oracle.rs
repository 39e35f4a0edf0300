//! Brute-force reference implementations used by the test suites.
//!
//! Everything here is exponential-cost and deliberately independent of the
//! production decode path: distances come from Floyd-Warshall instead of
//! Dijkstra, matchings from exhaustive pairing enumeration instead of the
//! blossom solver, and marginals from full pattern enumeration instead of BP.

use crate::code::{DecodingGraph, DetectionEvents};

/// All-pairs shortest path distances over the decoding graph, boundary
/// super-nodes included, by Floyd-Warshall.
pub fn floyd_warshall(graph: &DecodingGraph) -> Vec<Vec<f64>> {
    let n = graph.n_nodes();
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in graph.edges() {
        if e.weight < dist[e.u][e.v] {
            dist[e.u][e.v] = e.weight;
            dist[e.v][e.u] = e.weight;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    dist
}

/// Minimum correction weight per logical class, by exhaustive enumeration of
/// all defect pairings (defect-defect or defect-boundary, either boundary).
///
/// Returns `[weight of the non-flipping class, weight of the flipping class]`
/// in natural-log units; the unconstrained MWPM weight is the smaller entry
/// and the complementary weight the larger.
pub fn brute_force_class_weights(graph: &DecodingGraph, events: &DetectionEvents) -> [f64; 2] {
    let dist = floyd_warshall(graph);
    let defects = events.defects(graph.basis);
    let (b0, b1) = (graph.boundary_0(), graph.boundary_1());
    let mut best = [f64::INFINITY; 2];

    fn rec(
        unmatched: &mut Vec<usize>,
        acc: f64,
        flip: bool,
        dist: &[Vec<f64>],
        side: &dyn Fn(usize) -> bool,
        boundaries: (usize, usize),
        best: &mut [f64; 2],
    ) {
        if unmatched.is_empty() {
            let class = flip as usize;
            if acc < best[class] {
                best[class] = acc;
            }
            return;
        }
        let a = unmatched.remove(0);
        // Pair with a later defect.
        for idx in 0..unmatched.len() {
            let b = unmatched.remove(idx);
            rec(
                unmatched,
                acc + dist[a][b],
                flip ^ (side(a) != side(b)),
                dist,
                side,
                boundaries,
                best,
            );
            unmatched.insert(idx, b);
        }
        // Or terminate at either boundary.
        for b in [boundaries.0, boundaries.1] {
            rec(
                unmatched,
                acc + dist[a][b],
                flip ^ (side(a) != side(b)),
                dist,
                side,
                boundaries,
                best,
            );
        }
        unmatched.insert(0, a);
    }

    let side = |v: usize| graph.side(v);
    let mut pool = defects;
    rec(&mut pool, 0.0, false, &dist, &side, (b0, b1), &mut best);

    // The complementary class can always pay a full boundary-to-boundary
    // chain on top of the base solution.
    let logical = dist[b0][b1];
    for class in 0..2 {
        let other = best[1 - class] + logical;
        if other < best[class] {
            best[class] = other;
        }
    }
    best
}

/// Exact conditional marginals `P(var = 1 | syndrome)` by enumerating all
/// 2^n mechanism patterns of a small Tanner graph.
pub fn exhaustive_bayes_marginals(
    priors: &[f64],
    var_checks: &[Vec<usize>],
    syndrome: &[bool],
) -> Vec<f64> {
    let n = priors.len();
    assert!(n <= 24, "exhaustive enumeration is limited to small instances");
    let n_checks = syndrome.len();
    let mut num = vec![0.0f64; n];
    let mut den = 0.0f64;
    for pattern in 0u64..(1 << n) {
        let mut s = vec![false; n_checks];
        let mut prob = 1.0;
        for (v, &p) in priors.iter().enumerate() {
            if pattern >> v & 1 == 1 {
                prob *= p;
                for &c in &var_checks[v] {
                    s[c] ^= true;
                }
            } else {
                prob *= 1.0 - p;
            }
        }
        if s == syndrome {
            den += prob;
            for v in 0..n {
                if pattern >> v & 1 == 1 {
                    num[v] += prob;
                }
            }
        }
    }
    assert!(den > 0.0, "no pattern reproduces the syndrome");
    num.iter().map(|&x| x / den).collect()
}

/// Convenience: the brute-force unconstrained MWPM weight.
pub fn brute_force_mwpm_weight(graph: &DecodingGraph, events: &DetectionEvents) -> f64 {
    let [a, b] = brute_force_class_weights(graph, events);
    a.min(b)
}

/// Convenience: brute-force complementary gap in natural-log units.
pub fn brute_force_gap_nats(graph: &DecodingGraph, events: &DetectionEvents) -> f64 {
    let [a, b] = brute_force_class_weights(graph, events);
    (a - b).abs()
}

/// Defect count helper shared by tests that cap the brute-force cost.
pub fn defect_count(graph: &DecodingGraph, events: &DetectionEvents) -> usize {
    events.defects(graph.basis).len()
}
