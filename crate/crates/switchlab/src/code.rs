//! Rotated-surface-code model under phenomenological depolarizing noise.
//!
//! Each data qubit suffers independent X, Y, Z flags with probability `p/3`
//! per round, and each stabilizer measurement flips with probability `p` in
//! non-terminal rounds (terminal time boundaries are perfect). Every error
//! mechanism touches at most two detectors per basis, so both bases decode as
//! matching problems on weighted graphs with two inequivalent boundary
//! super-nodes. Y mechanisms contribute one edge to each basis graph; the two
//! edges share a correlation tag, which is what the belief-propagation
//! reweighting in [`crate::strong`] exploits.

use rand::Rng;

use crate::rng::stream_rng;

/// Probability floor applied when converting probabilities to weights or
/// priors, so that `p = 0` grid points stay decodable (weights finite and
/// positive) while sampling remains exactly error-free.
pub const PROB_FLOOR: f64 = 1e-12;

/// Decoding basis: `X` names the graph whose detectors are X-type checks
/// (sensitive to Z error components, predicting flips of the X logical
/// observable); `Z` is the converse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Basis::X => write!(f, "x"),
            Basis::Z => write!(f, "z"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CodeError {
    #[error("code distance must be odd and >= 3, got {0}")]
    BadDistance(usize),
    #[error("round count must be >= 1, got {0}")]
    BadRounds(usize),
    #[error("physical error rate must lie in [0, 0.5), got {0}")]
    BadProbability(f64),
    #[error("edge ({0}, {1}) has non-positive weight")]
    NonPositiveWeight(usize, usize),
    #[error("observable annotations are inconsistent around a cycle at edge ({0}, {1})")]
    InconsistentObservable(usize, usize),
    #[error("node {0} is not connected to the boundary")]
    Disconnected(usize),
}

/// Memory-experiment geometry: distance-`d` rotated surface code measured for
/// `rounds` rounds with perfect terminal time boundaries.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SurfaceCodeSpec {
    pub distance: usize,
    pub rounds: usize,
    pub basis: Basis,
}

impl SurfaceCodeSpec {
    pub fn new(distance: usize, rounds: usize, basis: Basis) -> Result<Self, CodeError> {
        if distance < 3 || distance % 2 == 0 {
            return Err(CodeError::BadDistance(distance));
        }
        if rounds == 0 {
            return Err(CodeError::BadRounds(rounds));
        }
        Ok(SurfaceCodeSpec { distance, rounds, basis })
    }

    /// The d-round memory experiment used throughout the experiments.
    pub fn memory(distance: usize, basis: Basis) -> Result<Self, CodeError> {
        Self::new(distance, distance, basis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseParams {
    pub p: f64,
}

impl NoiseParams {
    pub fn new(p: f64) -> Result<Self, CodeError> {
        if !(0.0..0.5).contains(&p) || !p.is_finite() {
            return Err(CodeError::BadProbability(p));
        }
        Ok(NoiseParams { p })
    }
}

/// Log-likelihood edge weight `ln((1-p)/p)` with the probability floor.
pub fn prob_to_weight(p: f64) -> f64 {
    let p = p.max(PROB_FLOOR);
    ((1.0 - p) / p).ln()
}

/// Probability that an odd number of two independent mechanisms fire.
pub fn merge_parallel(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

/// One independent error mechanism of the noise model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MechanismKind {
    DataX { qubit: usize, round: usize },
    DataY { qubit: usize, round: usize },
    DataZ { qubit: usize, round: usize },
    Measurement { basis: Basis, check: usize, round: usize },
}

#[derive(Debug, Clone)]
pub struct Mechanism {
    pub kind: MechanismKind,
    pub prior: f64,
    /// Detector node ids in the X-basis graph (at most two).
    pub detectors_x: Vec<usize>,
    /// Detector node ids in the Z-basis graph (at most two).
    pub detectors_z: Vec<usize>,
    pub flips_x: bool,
    pub flips_z: bool,
}

impl Mechanism {
    pub fn detectors(&self, basis: Basis) -> &[usize] {
        match basis {
            Basis::X => &self.detectors_x,
            Basis::Z => &self.detectors_z,
        }
    }

    pub fn flips(&self, basis: Basis) -> bool {
        match basis {
            Basis::X => self.flips_x,
            Basis::Z => self.flips_z,
        }
    }
}

/// Mechanism-to-detector incidence for both bases; the strong decoder builds
/// its Tanner graph directly from this.
#[derive(Debug, Clone)]
pub struct CheckMatrix {
    pub mechanisms: Vec<Mechanism>,
    pub n_detectors_x: usize,
    pub n_detectors_z: usize,
}

impl CheckMatrix {
    /// Apply the GF(2) parity map to a mechanism flag vector.
    pub fn apply(&self, flags: &[bool]) -> DetectionEvents {
        assert_eq!(flags.len(), self.mechanisms.len());
        let mut events = DetectionEvents {
            sigma_x: vec![false; self.n_detectors_x],
            sigma_z: vec![false; self.n_detectors_z],
            obs_flip_x: false,
            obs_flip_z: false,
        };
        for (mech, &hit) in self.mechanisms.iter().zip(flags) {
            if !hit {
                continue;
            }
            for &det in &mech.detectors_x {
                events.sigma_x[det] ^= true;
            }
            for &det in &mech.detectors_z {
                events.sigma_z[det] ^= true;
            }
            events.obs_flip_x ^= mech.flips_x;
            events.obs_flip_z ^= mech.flips_z;
        }
        events
    }
}

/// One sampled noise realization.
#[derive(Debug, Clone)]
pub struct ErrorSample {
    pub flags: Vec<bool>,
    pub seed: u64,
}

/// Fired detectors and ground-truth observable flips for one shot.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionEvents {
    pub sigma_x: Vec<bool>,
    pub sigma_z: Vec<bool>,
    pub obs_flip_x: bool,
    pub obs_flip_z: bool,
}

impl DetectionEvents {
    pub fn sigma(&self, basis: Basis) -> &[bool] {
        match basis {
            Basis::X => &self.sigma_x,
            Basis::Z => &self.sigma_z,
        }
    }

    pub fn observable_flip(&self, basis: Basis) -> bool {
        match basis {
            Basis::X => self.obs_flip_x,
            Basis::Z => self.obs_flip_z,
        }
    }

    /// Indices of fired detectors in the given basis.
    pub fn defects(&self, basis: Basis) -> Vec<usize> {
        self.sigma(basis)
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

/// Weighted edge of a decoding graph. Merged parallel mechanisms share one
/// edge; `correlations` carries the Y-mechanism ids linking this edge to its
/// partner edges in the other basis graph (boundary edges can merge several
/// qubits' mechanisms, so more than one tag is possible).
#[derive(Debug, Clone)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    pub probability: f64,
    pub weight: f64,
    pub flips_observable: bool,
    pub mechanisms: Vec<usize>,
    pub correlations: Vec<usize>,
}

/// Detector graph for one basis with two inequivalent boundary super-nodes.
///
/// Node ids `0..n_detectors` are detectors; `boundary_0()` and `boundary_1()`
/// are the two boundary super-nodes. Any chain connecting the two boundaries
/// flips the logical observable.
#[derive(Debug, Clone)]
pub struct DecodingGraph {
    pub basis: Basis,
    n_detectors: usize,
    edges: Vec<GraphEdge>,
    adj: Vec<Vec<(usize, usize)>>,
    side: Vec<bool>,
}

impl DecodingGraph {
    pub fn builder(basis: Basis, n_detectors: usize) -> DecodingGraphBuilder {
        DecodingGraphBuilder {
            basis,
            n_detectors,
            edges: std::collections::BTreeMap::new(),
        }
    }

    pub fn n_detectors(&self) -> usize {
        self.n_detectors
    }

    pub fn n_nodes(&self) -> usize {
        self.n_detectors + 2
    }

    pub fn boundary_0(&self) -> usize {
        self.n_detectors
    }

    pub fn boundary_1(&self) -> usize {
        self.n_detectors + 1
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        node >= self.n_detectors
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// `(edge index, other endpoint)` pairs incident to `node`.
    pub fn adjacency(&self, node: usize) -> &[(usize, usize)] {
        &self.adj[node]
    }

    /// Parity of observable-flip annotations along any path from boundary 0
    /// to `node`; well defined because annotations are cycle-consistent.
    pub fn side(&self, node: usize) -> bool {
        self.side[node]
    }

    pub fn edge_weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// Copy of this graph with every edge probability replaced by `p`.
    pub fn with_uniform_probability(&self, p: f64) -> DecodingGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.probability = p;
            e.weight = prob_to_weight(p);
        }
        g
    }

    /// Copy of this graph reweighted from per-edge probabilities.
    pub fn with_edge_probabilities(&self, probs: &[f64]) -> DecodingGraph {
        assert_eq!(probs.len(), self.edges.len());
        let mut g = self.clone();
        for (e, &p) in g.edges.iter_mut().zip(probs) {
            e.probability = p;
            e.weight = prob_to_weight(p);
        }
        g
    }
}

pub struct DecodingGraphBuilder {
    basis: Basis,
    n_detectors: usize,
    edges: std::collections::BTreeMap<(usize, usize), GraphEdge>,
}

impl DecodingGraphBuilder {
    /// Add one mechanism edge; parallel edges merge their probabilities.
    pub fn mechanism_edge(
        &mut self,
        u: usize,
        v: usize,
        probability: f64,
        flips_observable: bool,
        mechanism: usize,
        correlation: Option<usize>,
    ) -> &mut Self {
        assert!(u != v, "self-loop at node {u}");
        let key = (u.min(v), u.max(v));
        match self.edges.get_mut(&key) {
            Some(edge) => {
                assert_eq!(
                    edge.flips_observable, flips_observable,
                    "parallel mechanisms disagree on the observable"
                );
                edge.probability = merge_parallel(edge.probability, probability);
                edge.mechanisms.push(mechanism);
                edge.correlations.extend(correlation);
            }
            None => {
                self.edges.insert(
                    key,
                    GraphEdge {
                        u: key.0,
                        v: key.1,
                        probability,
                        weight: 0.0,
                        flips_observable,
                        mechanisms: vec![mechanism],
                        correlations: correlation.into_iter().collect(),
                    },
                );
            }
        }
        self
    }

    pub fn build(self) -> Result<DecodingGraph, CodeError> {
        let n_nodes = self.n_detectors + 2;
        let mut edges: Vec<GraphEdge> = self.edges.into_values().collect();
        let mut adj = vec![Vec::new(); n_nodes];
        for (i, e) in edges.iter_mut().enumerate() {
            e.weight = prob_to_weight(e.probability);
            if e.weight <= 0.0 {
                return Err(CodeError::NonPositiveWeight(e.u, e.v));
            }
            adj[e.u].push((i, e.v));
            adj[e.v].push((i, e.u));
        }
        // Assign flip-parity sides by BFS from boundary 0 and verify the
        // annotations are cycle-consistent.
        let b0 = self.n_detectors;
        let mut side = vec![false; n_nodes];
        let mut seen = vec![false; n_nodes];
        let mut queue = std::collections::VecDeque::from([b0]);
        seen[b0] = true;
        while let Some(u) = queue.pop_front() {
            for &(ei, v) in &adj[u] {
                let expected = side[u] ^ edges[ei].flips_observable;
                if !seen[v] {
                    seen[v] = true;
                    side[v] = expected;
                    queue.push_back(v);
                } else if side[v] != expected {
                    return Err(CodeError::InconsistentObservable(edges[ei].u, edges[ei].v));
                }
            }
        }
        if let Some(node) = seen.iter().position(|&s| !s) {
            return Err(CodeError::Disconnected(node));
        }
        Ok(DecodingGraph {
            basis: self.basis,
            n_detectors: self.n_detectors,
            edges,
            adj,
            side,
        })
    }
}

/// Static plaquette layout of the rotated surface code.
struct Layout {
    d: usize,
    /// Per qubit: adjacent X-check indices (1 or 2).
    x_checks_of: Vec<Vec<usize>>,
    z_checks_of: Vec<Vec<usize>>,
    n_x_checks: usize,
    n_z_checks: usize,
}

impl Layout {
    fn new(d: usize) -> Layout {
        let di = d as i64;
        let mut x_checks: Vec<Vec<usize>> = Vec::new();
        let mut z_checks: Vec<Vec<usize>> = Vec::new();
        for pr in -1..di {
            for pc in -1..di {
                let mut qubits = Vec::new();
                for (dr, dc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let (r, c) = (pr + dr, pc + dc);
                    if (0..di).contains(&r) && (0..di).contains(&c) {
                        qubits.push((r * di + c) as usize);
                    }
                }
                let z_type = (pr + pc).rem_euclid(2) == 0;
                let keep = match qubits.len() {
                    4 => true,
                    // Top/bottom boundaries host X checks, left/right host Z.
                    2 if pr == -1 || pr == di - 1 => !z_type,
                    2 if pc == -1 || pc == di - 1 => z_type,
                    _ => false,
                };
                if keep {
                    if z_type {
                        z_checks.push(qubits);
                    } else {
                        x_checks.push(qubits);
                    }
                }
            }
        }
        assert_eq!(x_checks.len() + z_checks.len(), d * d - 1);
        assert_eq!(x_checks.len(), z_checks.len());

        let mut x_checks_of = vec![Vec::new(); d * d];
        for (s, qs) in x_checks.iter().enumerate() {
            for &q in qs {
                x_checks_of[q].push(s);
            }
        }
        let mut z_checks_of = vec![Vec::new(); d * d];
        for (s, qs) in z_checks.iter().enumerate() {
            for &q in qs {
                z_checks_of[q].push(s);
            }
        }
        for q in 0..d * d {
            let (r, c) = (q / d, q % d);
            // Z error chains terminate on the left/right boundaries, X chains
            // on top/bottom; interior qubits see two checks of each type.
            assert_eq!(x_checks_of[q].len(), if c == 0 || c == d - 1 { 1 } else { 2 });
            assert_eq!(z_checks_of[q].len(), if r == 0 || r == d - 1 { 1 } else { 2 });
        }
        Layout {
            d,
            x_checks_of,
            z_checks_of,
            n_x_checks: x_checks.len(),
            n_z_checks: z_checks.len(),
        }
    }
}

/// Build both basis graphs plus the mechanism-to-detector check matrix.
///
/// Detector node ids are `(round - 1) * n_checks + check` for rounds
/// `1..=r`. The X logical observable is X on data column 0 (flipped by Z/Y
/// mechanisms there); the Z observable is Z on data row 0.
pub fn build_graphs(
    spec: &SurfaceCodeSpec,
    noise: &NoiseParams,
) -> Result<(DecodingGraph, DecodingGraph, CheckMatrix), CodeError> {
    let d = spec.distance;
    let r = spec.rounds;
    let layout = Layout::new(d);
    let p_data = noise.p / 3.0;

    let mut mechanisms: Vec<Mechanism> = Vec::new();
    for t in 1..=r {
        for q in 0..d * d {
            let (row, col) = (q / d, q % d);
            let dets_x: Vec<usize> =
                layout.x_checks_of[q].iter().map(|&s| (t - 1) * layout.n_x_checks + s).collect();
            let dets_z: Vec<usize> =
                layout.z_checks_of[q].iter().map(|&s| (t - 1) * layout.n_z_checks + s).collect();
            let flips_x = col == 0;
            let flips_z = row == 0;
            mechanisms.push(Mechanism {
                kind: MechanismKind::DataX { qubit: q, round: t },
                prior: p_data,
                detectors_x: Vec::new(),
                detectors_z: dets_z.clone(),
                flips_x: false,
                flips_z,
            });
            mechanisms.push(Mechanism {
                kind: MechanismKind::DataY { qubit: q, round: t },
                prior: p_data,
                detectors_x: dets_x.clone(),
                detectors_z: dets_z,
                flips_x,
                flips_z,
            });
            mechanisms.push(Mechanism {
                kind: MechanismKind::DataZ { qubit: q, round: t },
                prior: p_data,
                detectors_x: dets_x,
                detectors_z: Vec::new(),
                flips_x,
                flips_z: false,
            });
        }
    }
    for t in 1..r {
        for s in 0..layout.n_x_checks {
            mechanisms.push(Mechanism {
                kind: MechanismKind::Measurement { basis: Basis::X, check: s, round: t },
                prior: noise.p,
                detectors_x: vec![(t - 1) * layout.n_x_checks + s, t * layout.n_x_checks + s],
                detectors_z: Vec::new(),
                flips_x: false,
                flips_z: false,
            });
        }
        for s in 0..layout.n_z_checks {
            mechanisms.push(Mechanism {
                kind: MechanismKind::Measurement { basis: Basis::Z, check: s, round: t },
                prior: noise.p,
                detectors_x: Vec::new(),
                detectors_z: vec![(t - 1) * layout.n_z_checks + s, t * layout.n_z_checks + s],
                flips_x: false,
                flips_z: false,
            });
        }
    }

    let checks = CheckMatrix {
        mechanisms,
        n_detectors_x: layout.n_x_checks * r,
        n_detectors_z: layout.n_z_checks * r,
    };

    let graph_x = basis_graph(&checks, Basis::X, &layout)?;
    let graph_z = basis_graph(&checks, Basis::Z, &layout)?;
    Ok((graph_x, graph_z, checks))
}

fn basis_graph(
    checks: &CheckMatrix,
    basis: Basis,
    layout: &Layout,
) -> Result<DecodingGraph, CodeError> {
    let n_det = match basis {
        Basis::X => checks.n_detectors_x,
        Basis::Z => checks.n_detectors_z,
    };
    let mut builder = DecodingGraph::builder(basis, n_det);
    let (b0, b1) = (n_det, n_det + 1);
    for (id, mech) in checks.mechanisms.iter().enumerate() {
        let dets = mech.detectors(basis);
        if dets.is_empty() {
            continue;
        }
        let correlation = match mech.kind {
            MechanismKind::DataY { .. } => Some(id),
            _ => None,
        };
        let (u, v) = match dets.len() {
            2 => (dets[0], dets[1]),
            1 => {
                let qubit = match mech.kind {
                    MechanismKind::DataX { qubit, .. }
                    | MechanismKind::DataY { qubit, .. }
                    | MechanismKind::DataZ { qubit, .. } => qubit,
                    MechanismKind::Measurement { .. } => {
                        unreachable!("measurement mechanisms always have two detectors")
                    }
                };
                let (row, col) = (qubit / layout.d, qubit % layout.d);
                let boundary = match basis {
                    Basis::X => {
                        assert!(col == 0 || col == layout.d - 1);
                        if col == 0 {
                            b0
                        } else {
                            b1
                        }
                    }
                    Basis::Z => {
                        assert!(row == 0 || row == layout.d - 1);
                        if row == 0 {
                            b0
                        } else {
                            b1
                        }
                    }
                };
                (dets[0], boundary)
            }
            n => unreachable!("mechanism with {n} detectors in one basis"),
        };
        builder.mechanism_edge(u, v, mech.prior, mech.flips(basis), id, correlation);
    }
    builder.build()
}

/// Code, noise, graphs, and check matrix bundled for the experiment drivers.
#[derive(Debug, Clone)]
pub struct CodeModel {
    pub spec: SurfaceCodeSpec,
    pub noise: NoiseParams,
    pub graph_x: DecodingGraph,
    pub graph_z: DecodingGraph,
    pub checks: CheckMatrix,
}

impl CodeModel {
    pub fn new(spec: SurfaceCodeSpec, noise: NoiseParams) -> Result<Self, CodeError> {
        let (graph_x, graph_z, checks) = build_graphs(&spec, &noise)?;
        Ok(CodeModel { spec, noise, graph_x, graph_z, checks })
    }

    pub fn graph(&self, basis: Basis) -> &DecodingGraph {
        match basis {
            Basis::X => &self.graph_x,
            Basis::Z => &self.graph_z,
        }
    }

    /// Draw one shot; deterministic in `(spec, noise, seed)`.
    pub fn sample_shot(&self, seed: u64) -> (ErrorSample, DetectionEvents) {
        let mut rng = stream_rng(seed, 0);
        let flags: Vec<bool> =
            self.checks.mechanisms.iter().map(|m| rng.gen::<f64>() < m.prior).collect();
        let events = self.checks.apply(&flags);
        (ErrorSample { flags, seed }, events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(d: usize, r: usize, p: f64) -> CodeModel {
        CodeModel::new(
            SurfaceCodeSpec::new(d, r, Basis::Z).unwrap(),
            NoiseParams::new(p).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(SurfaceCodeSpec::new(4, 4, Basis::Z), Err(CodeError::BadDistance(4)));
        assert_eq!(SurfaceCodeSpec::new(1, 1, Basis::Z), Err(CodeError::BadDistance(1)));
        assert_eq!(SurfaceCodeSpec::new(3, 0, Basis::Z), Err(CodeError::BadRounds(0)));
        assert!(NoiseParams::new(0.5).is_err());
        assert!(NoiseParams::new(-0.1).is_err());
        assert!(NoiseParams::new(0.0).is_ok());
    }

    #[test]
    fn weight_formula_spot_checks() {
        assert!((prob_to_weight(0.01) - 99.0f64.ln()).abs() < 1e-12);
        // Weights grow monotonically as p shrinks.
        assert!(prob_to_weight(0.001) > prob_to_weight(0.01));
        let p = 0.3;
        assert!((merge_parallel(p, p) - 2.0 * p * (1.0 - p)).abs() < 1e-15);
    }

    #[test]
    fn check_counts_match_code_size() {
        for d in [3usize, 5, 7] {
            let m = model(d, d, 0.01);
            assert_eq!(m.graph_x.n_detectors(), (d * d - 1) / 2 * d);
            assert_eq!(m.graph_z.n_detectors(), (d * d - 1) / 2 * d);
            for e in m.graph_x.edges().iter().chain(m.graph_z.edges()) {
                assert!(e.weight > 0.0);
            }
        }
    }

    fn boundary_hop_distance(g: &DecodingGraph) -> usize {
        // Unweighted BFS from boundary 0 to boundary 1.
        let mut dist = vec![usize::MAX; g.n_nodes()];
        let mut queue = std::collections::VecDeque::from([g.boundary_0()]);
        dist[g.boundary_0()] = 0;
        while let Some(u) = queue.pop_front() {
            for &(_, v) in g.adjacency(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist[g.boundary_1()]
    }

    #[test]
    fn boundary_to_boundary_crosses_d_edges() {
        for d in [3usize, 5] {
            let m = model(d, d, 0.1);
            assert_eq!(boundary_hop_distance(&m.graph_x), d);
            assert_eq!(boundary_hop_distance(&m.graph_z), d);
        }
    }

    #[test]
    fn y_edges_pair_across_bases() {
        // Every Y-tagged edge in the X graph has exactly one partner in the
        // Z graph, checked by exhaustive iteration over mechanisms.
        let m = model(5, 5, 0.05);
        for (id, mech) in m.checks.mechanisms.iter().enumerate() {
            if !matches!(mech.kind, MechanismKind::DataY { .. }) {
                continue;
            }
            let in_x = m.graph_x.edges().iter().filter(|e| e.correlations.contains(&id)).count();
            let in_z = m.graph_z.edges().iter().filter(|e| e.correlations.contains(&id)).count();
            assert_eq!(in_x, 1);
            assert_eq!(in_z, 1);
        }
        // And every tag on an X edge points at exactly one partner edge in Z.
        for e in m.graph_x.edges() {
            for &tag in &e.correlations {
                assert_eq!(
                    m.graph_z.edges().iter().filter(|f| f.correlations.contains(&tag)).count(),
                    1
                );
            }
        }
    }

    #[test]
    fn space_edges_merge_z_and_y() {
        let m = model(3, 3, 0.09);
        let p = 0.03; // p/3
        // Bulk space edges merge the Z and Y mechanisms of one qubit-round;
        // boundary edges may fold in several qubits; time-like edges carry a
        // single measurement flag. The merged probability always equals the
        // parallel-merge fold over the constituent mechanism priors.
        let mut seen_pair = false;
        for e in m.graph_x.edges() {
            let folded = m
                .checks
                .mechanisms
                .iter()
                .enumerate()
                .filter(|(id, _)| e.mechanisms.contains(id))
                .fold(0.0, |acc, (_, mech)| merge_parallel(acc, mech.prior));
            assert!((e.probability - folded).abs() < 1e-15);
            if e.mechanisms.len() == 2 {
                seen_pair = true;
                assert!((e.probability - merge_parallel(p, p)).abs() < 1e-15);
                assert!((e.probability - 2.0 * p * (1.0 - p)).abs() < 1e-15);
            }
            if e.mechanisms.len() == 1 {
                assert!((e.probability - 0.09).abs() < 1e-15);
            }
        }
        assert!(seen_pair);
    }

    #[test]
    fn zero_sample_gives_zero_events() {
        let m = model(3, 3, 0.05);
        let zeros = vec![false; m.checks.mechanisms.len()];
        let ev = m.checks.apply(&zeros);
        assert!(ev.sigma_x.iter().all(|&b| !b));
        assert!(ev.sigma_z.iter().all(|&b| !b));
        assert!(!ev.obs_flip_x && !ev.obs_flip_z);

        let zero_noise = model(3, 3, 0.0);
        let (sample, ev) = zero_noise.sample_shot(7);
        assert!(sample.flags.iter().all(|&f| !f));
        assert!(ev.defects(Basis::X).is_empty() && ev.defects(Basis::Z).is_empty());
    }

    #[test]
    fn single_measurement_flip_fires_adjacent_rounds() {
        let m = model(3, 3, 0.05);
        let n_x = (3 * 3 - 1) / 2;
        for (id, mech) in m.checks.mechanisms.iter().enumerate() {
            if let MechanismKind::Measurement { basis: Basis::X, check, round } = mech.kind {
                let mut flags = vec![false; m.checks.mechanisms.len()];
                flags[id] = true;
                let ev = m.checks.apply(&flags);
                let expect = vec![(round - 1) * n_x + check, round * n_x + check];
                assert_eq!(ev.defects(Basis::X), expect);
                assert!(ev.defects(Basis::Z).is_empty());
                assert!(!ev.obs_flip_x && !ev.obs_flip_z);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_parity_sound() {
        let m = model(3, 3, 0.08);
        let (s1, e1) = m.sample_shot(99);
        let (s2, e2) = m.sample_shot(99);
        assert_eq!(s1.flags, s2.flags);
        assert_eq!(e1, e2);
        let (s3, _) = m.sample_shot(100);
        assert_ne!(s1.flags, s3.flags);

        // Independent re-evaluation of the parity map over random shots:
        // walk detectors and recount incident mechanisms.
        for seed in 0..200 {
            let (sample, events) = m.sample_shot(seed);
            for det in 0..m.checks.n_detectors_x {
                let parity = m
                    .checks
                    .mechanisms
                    .iter()
                    .zip(&sample.flags)
                    .filter(|(mech, &f)| f && mech.detectors_x.contains(&det))
                    .count()
                    % 2;
                assert_eq!(events.sigma_x[det], parity == 1);
            }
        }
    }

    #[test]
    fn uniform_probability_override() {
        let m = model(3, 3, 0.05);
        let g = m.graph_x.with_uniform_probability(0.1);
        for e in g.edges() {
            assert!((e.weight - 9.0f64.ln()).abs() < 1e-12);
        }
    }
}
