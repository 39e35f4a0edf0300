//! Strong decoder: belief-propagation posterior reweighting of the matching
//! graphs (belief matching), plus an exhaustive maximum-likelihood oracle
//! used only by tests.
//!
//! The Tanner graph spans both bases at once, so Y mechanisms couple the X
//! and Z decoding problems and BP posteriors carry the cross-basis
//! correlations that a per-basis matcher cannot see.

use crate::code::{Basis, CheckMatrix, DecodingGraph, DetectionEvents, PROB_FLOOR};
use crate::weak::{mwpm_decode, Matching};

/// Message magnitude clamp in LLR units; tanh saturates just below 1 here.
const MSG_CLAMP: f64 = 35.0;
/// Posterior clamp applied before any weight conversion.
pub const P_MIN: f64 = 1e-9;

/// Bipartite factor graph: variables are error mechanisms, checks are
/// detectors of both bases (X-basis checks first, then Z-basis).
#[derive(Debug, Clone)]
pub struct TannerGraph {
    pub priors: Vec<f64>,
    /// Per variable: which logical observables it flips, per basis.
    pub flips: Vec<(bool, bool)>,
    var_checks: Vec<Vec<usize>>,
    n_checks: usize,
}

impl TannerGraph {
    pub fn from_check_matrix(checks: &CheckMatrix) -> TannerGraph {
        let n_checks_x = checks.n_detectors_x;
        let n_checks = checks.n_detectors_x + checks.n_detectors_z;
        let mut var_checks = Vec::with_capacity(checks.mechanisms.len());
        let mut priors = Vec::with_capacity(checks.mechanisms.len());
        let mut flips = Vec::with_capacity(checks.mechanisms.len());
        for mech in &checks.mechanisms {
            let mut cs: Vec<usize> = mech.detectors_x.iter().copied().collect();
            cs.extend(mech.detectors_z.iter().map(|&d| n_checks_x + d));
            var_checks.push(cs);
            priors.push(mech.prior.clamp(PROB_FLOOR, 0.5 - PROB_FLOOR));
            flips.push((mech.flips_x, mech.flips_z));
        }
        TannerGraph { priors, flips, var_checks, n_checks }
    }

    /// Hand-built Tanner graph for tests and toy instances.
    pub fn new(priors: Vec<f64>, var_checks: Vec<Vec<usize>>, n_checks: usize) -> TannerGraph {
        assert_eq!(priors.len(), var_checks.len());
        for cs in &var_checks {
            for &c in cs {
                assert!(c < n_checks);
            }
        }
        let flips = vec![(false, false); priors.len()];
        TannerGraph {
            priors: priors.iter().map(|p| p.clamp(PROB_FLOOR, 0.5 - PROB_FLOOR)).collect(),
            flips,
            var_checks,
            n_checks,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.priors.len()
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    /// Concatenated syndrome vector in this graph's check order.
    pub fn syndrome(&self, events: &DetectionEvents) -> Vec<bool> {
        let mut s = Vec::with_capacity(self.n_checks);
        s.extend_from_slice(&events.sigma_x);
        s.extend_from_slice(&events.sigma_z);
        assert_eq!(s.len(), self.n_checks, "syndrome does not match this Tanner graph");
        s
    }
}

/// BP output: posterior mechanism probabilities.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub posteriors: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Belief-propagation settings. `latency_factor` models the strong decoder's
/// decoding time per round in units of the generation time; the decoders
/// ignore it, but the harness uses it when coupling accuracy experiments to
/// the backlog schedulers.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct BpParams {
    pub max_iters: usize,
    pub damping: f64,
    pub latency_factor: f64,
}

impl Default for BpParams {
    fn default() -> Self {
        BpParams { max_iters: 30, damping: 0.5, latency_factor: 10.0 }
    }
}

/// Syndrome-conditioned sum-product message passing with a flooding schedule.
///
/// Stops early once the hard decisions are unchanged for two consecutive
/// iterations and the damped messages have reached a fixed point (decision
/// stability alone would stop long before the marginals settle);
/// non-convergence is a valid, flagged outcome.
pub fn bp_posteriors(tanner: &TannerGraph, syndrome: &[bool], params: &BpParams) -> Marginals {
    assert_eq!(syndrome.len(), tanner.n_checks);
    let n_vars = tanner.n_vars();
    let prior_llr: Vec<f64> =
        tanner.priors.iter().map(|&p| ((1.0 - p) / p).ln()).collect();

    // Flat edge storage: edge e = (var, check).
    let mut edge_of: Vec<Vec<usize>> = Vec::with_capacity(n_vars);
    let mut check_edges: Vec<Vec<usize>> = vec![Vec::new(); tanner.n_checks];
    let mut n_edges = 0;
    for (v, cs) in tanner.var_checks.iter().enumerate() {
        let mut ids = Vec::with_capacity(cs.len());
        for &c in cs {
            ids.push(n_edges);
            check_edges[c].push(n_edges);
            n_edges += 1;
        }
        let _ = v;
        edge_of.push(ids);
    }

    let mut msg_vc = vec![0.0f64; n_edges];
    let mut msg_cv = vec![0.0f64; n_edges];
    let mut decisions = vec![false; n_vars];
    let mut stable = 0usize;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=params.max_iters {
        iterations = iter;
        let mut delta = 0.0f64;
        // Variable-to-check.
        for v in 0..n_vars {
            let total: f64 = prior_llr[v] + edge_of[v].iter().map(|&e| msg_cv[e]).sum::<f64>();
            for &e in &edge_of[v] {
                msg_vc[e] = (total - msg_cv[e]).clamp(-MSG_CLAMP, MSG_CLAMP);
            }
        }
        // Check-to-variable with leave-one-out prefix/suffix products.
        for c in 0..tanner.n_checks {
            let edges = &check_edges[c];
            if edges.is_empty() {
                continue;
            }
            let sign = if syndrome[c] { -1.0 } else { 1.0 };
            let tanhs: Vec<f64> = edges.iter().map(|&e| (msg_vc[e] / 2.0).tanh()).collect();
            let mut prefix = vec![1.0; edges.len() + 1];
            for (i, &t) in tanhs.iter().enumerate() {
                prefix[i + 1] = prefix[i] * t;
            }
            let mut suffix = 1.0;
            for i in (0..edges.len()).rev() {
                let loo = prefix[i] * suffix;
                suffix *= tanhs[i];
                let arg = (sign * loo).clamp(-(1.0 - 1e-15), 1.0 - 1e-15);
                let raw = 2.0 * arg.atanh();
                let new = (1.0 - params.damping) * raw + params.damping * msg_cv[edges[i]];
                delta = delta.max((new - msg_cv[edges[i]]).abs());
                msg_cv[edges[i]] = new;
            }
        }
        // Hard-decision stability check.
        let mut changed = false;
        for v in 0..n_vars {
            let llr: f64 = prior_llr[v] + edge_of[v].iter().map(|&e| msg_cv[e]).sum::<f64>();
            let d = llr < 0.0;
            if d != decisions[v] {
                decisions[v] = d;
                changed = true;
            }
        }
        if changed {
            stable = 0;
        } else {
            stable += 1;
            if stable >= 2 && delta < 1e-11 {
                converged = true;
                break;
            }
        }
    }

    let posteriors: Vec<f64> = (0..n_vars)
        .map(|v| {
            let llr: f64 = prior_llr[v] + edge_of[v].iter().map(|&e| msg_cv[e]).sum::<f64>();
            (1.0 / (1.0 + llr.exp())).clamp(P_MIN, 1.0 - P_MIN)
        })
        .collect();
    Marginals { posteriors, converged, iterations }
}

/// Per-basis result of a belief-matching decode.
#[derive(Debug, Clone)]
pub struct BeliefMatchResult {
    pub x: Matching,
    pub z: Matching,
}

impl BeliefMatchResult {
    pub fn matching(&self, basis: Basis) -> &Matching {
        match basis {
            Basis::X => &self.x,
            Basis::Z => &self.z,
        }
    }

    pub fn flips(&self, basis: Basis) -> bool {
        self.matching(basis).flips_observable
    }
}

/// Posterior edge probability: parallel-merge of the constituent mechanisms'
/// marginals, clamped below 1/2 so reweighted edges keep positive weight.
fn posterior_edge_probability(mechanisms: &[usize], posteriors: &[f64]) -> f64 {
    let q = mechanisms
        .iter()
        .fold(0.0, |acc, &m| crate::code::merge_parallel(acc, posteriors[m]));
    q.clamp(PROB_FLOOR, 0.5 - P_MIN)
}

/// Exact MWPM on both basis graphs after reweighting every edge from the BP
/// posteriors.
pub fn belief_match(
    graph_x: &DecodingGraph,
    graph_z: &DecodingGraph,
    marginals: &Marginals,
    events: &DetectionEvents,
) -> BeliefMatchResult {
    let decode = |graph: &DecodingGraph| -> Matching {
        let probs: Vec<f64> = graph
            .edges()
            .iter()
            .map(|e| posterior_edge_probability(&e.mechanisms, &marginals.posteriors))
            .collect();
        let reweighted = graph.with_edge_probabilities(&probs);
        mwpm_decode(&reweighted, events)
    };
    BeliefMatchResult { x: decode(graph_x), z: decode(graph_z) }
}

/// Convenience wrapper: BP then belief matching.
pub fn strong_decode(
    graph_x: &DecodingGraph,
    graph_z: &DecodingGraph,
    tanner: &TannerGraph,
    params: &BpParams,
    events: &DetectionEvents,
) -> (BeliefMatchResult, Marginals) {
    let marginals = bp_posteriors(tanner, &tanner.syndrome(events), params);
    let result = belief_match(graph_x, graph_z, &marginals, events);
    (result, marginals)
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MleError {
    #[error("no syndrome-consistent pattern within {0} flipped mechanisms; increase w_max")]
    NoConsistentPattern(usize),
}

/// Exhaustive per-class probability masses (test oracle; exponential cost).
#[derive(Debug, Clone)]
pub struct ClassMasses {
    /// Mass per class, indexed by `flip_x as usize | (flip_z as usize) << 1`.
    pub masses: [f64; 4],
    pub argmax: (bool, bool),
    /// Total probability of patterns with more than `w_max` flips; whatever
    /// was not enumerated is at most this heavy.
    pub unexplored_bound: f64,
    /// True when the argmax margin exceeds the unexplored bound, so the class
    /// decision is provably complete.
    pub certified: bool,
}

/// Sum pattern probabilities per homology class over all syndrome-consistent
/// patterns with at most `w_max` flipped mechanisms.
pub fn mle_oracle(
    tanner: &TannerGraph,
    events: &DetectionEvents,
    w_max: usize,
) -> Result<ClassMasses, MleError> {
    let syndrome = tanner.syndrome(events);
    let n = tanner.n_vars();
    let base: f64 = tanner.priors.iter().map(|&p| (1.0 - p).ln()).sum::<f64>().exp();
    let odds: Vec<f64> = tanner.priors.iter().map(|&p| p / (1.0 - p)).collect();

    let mut masses = [0.0f64; 4];
    // DFS over flipped subsets of size <= w_max with incremental syndrome.
    let mut residual: Vec<bool> = syndrome.clone();
    fn class_index(fx: bool, fz: bool) -> usize {
        (fx as usize) | ((fz as usize) << 1)
    }
    struct Ctx<'a> {
        tanner: &'a TannerGraph,
        odds: &'a [f64],
        masses: &'a mut [f64; 4],
    }
    fn dfs(
        ctx: &mut Ctx,
        residual: &mut Vec<bool>,
        start: usize,
        left: usize,
        mass: f64,
        fx: bool,
        fz: bool,
    ) {
        if residual.iter().all(|&b| !b) {
            ctx.masses[class_index(fx, fz)] += mass;
        }
        if left == 0 {
            return;
        }
        for v in start..ctx.tanner.n_vars() {
            for &c in &ctx.tanner.var_checks[v] {
                residual[c] ^= true;
            }
            let (mfx, mfz) = ctx.tanner.flips[v];
            dfs(ctx, residual, v + 1, left - 1, mass * ctx.odds[v], fx ^ mfx, fz ^ mfz);
            for &c in &ctx.tanner.var_checks[v] {
                residual[c] ^= true;
            }
        }
    }
    let mut ctx = Ctx { tanner, odds: &odds, masses: &mut masses };
    dfs(&mut ctx, &mut residual, 0, w_max, base, false, false);

    let total: f64 = masses.iter().sum();
    if total == 0.0 {
        return Err(MleError::NoConsistentPattern(w_max));
    }

    // Poisson-binomial tail: probability of more than w_max flips anywhere.
    let mut count_dist = vec![0.0f64; w_max + 2];
    count_dist[0] = 1.0;
    for &p in &tanner.priors {
        for k in (0..count_dist.len()).rev() {
            let stay = count_dist[k] * (1.0 - p);
            let up = if k > 0 { count_dist[k - 1] * p } else { 0.0 };
            count_dist[k] = stay + up;
        }
        let _ = n;
    }
    let unexplored_bound = (1.0 - count_dist[..=w_max].iter().sum::<f64>()).max(0.0);

    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| masses[b].total_cmp(&masses[a]));
    let argmax_idx = order[0];
    let margin = masses[order[0]] - masses[order[1]];
    Ok(ClassMasses {
        masses,
        argmax: (argmax_idx & 1 == 1, argmax_idx & 2 == 2),
        unexplored_bound,
        certified: margin > unexplored_bound,
    })
}
