//! Syndrome-backlog dynamics under decoder switching: analytic closed form
//! for the single-decoder recursion, Monte Carlo simulators for the naive,
//! sliding-window, and double-window online decoding schemes, and the
//! double-window sufficient-condition bounds.
//!
//! All times are measured in rounds (normalized by the generation time per
//! round); rounds are real-valued throughout, and ceilings appear only in
//! the commit-size rules.

use rayon::prelude::*;

use crate::rng::{composite_seed, stream_rng};
use rand::Rng;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SchedError {
    #[error("generation time must be positive")]
    BadGenerationTime,
    #[error("latency and decode times must be nonnegative and finite")]
    BadLatency,
    #[error("switching rate must lie in [0, 1]")]
    BadSwitchingRate,
    #[error("structural parameters (d, r_op, r_buf, n_gate, cap) must be positive")]
    BadStructure,
    #[error("sliding scheme requires tau_dec_weak < 0.95 * tau_gen")]
    WeakTooSlowForSliding,
    #[error("double-window scheme requires tau_dec_weak < tau_gen")]
    WeakTooSlow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    Naive,
    Sliding,
    DoubleWindow,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Naive => write!(f, "naive"),
            Scheme::Sliding => write!(f, "sliding"),
            Scheme::DoubleWindow => write!(f, "double"),
        }
    }
}

/// Latency and workload parameters of the real-time decoding system.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SchedulerParams {
    pub tau_gen: f64,
    pub tau_dec_weak: f64,
    pub tau_dec_strong: f64,
    pub t_comm_weak: f64,
    pub t_comm_strong: f64,
    pub d: usize,
    /// Rounds per gate segment (9d for a compact surface-code footprint).
    pub r_op: f64,
    pub n_gate: usize,
    /// Switching probability per d-round window.
    pub gamma_switch: f64,
    pub scheme: Scheme,
    pub r_buf: f64,
    /// Strong assignment size factor: r_strong = r_com + alpha * r_buf.
    pub alpha: f64,
    /// A trajectory diverges when any r_i exceeds this many rounds.
    pub divergence_cap: f64,
}

impl SchedulerParams {
    /// The experiment family's standard setup: T_comm_weak = tau_gen,
    /// T_comm_strong = tau_dec_strong = 10 tau_gen, d = 21, r_op = 9d,
    /// r_buf = d, alpha = 2, N_gate = 1e4, cap = 1e6.
    pub fn standard(scheme: Scheme, f_weak: f64, gamma_switch: f64) -> SchedulerParams {
        let d = 21usize;
        SchedulerParams {
            tau_gen: 1.0,
            tau_dec_weak: f_weak,
            tau_dec_strong: 10.0,
            t_comm_weak: 1.0,
            t_comm_strong: 10.0,
            d,
            r_op: 9.0 * d as f64,
            n_gate: 10_000,
            gamma_switch,
            scheme,
            r_buf: d as f64,
            alpha: 2.0,
            divergence_cap: 1e6,
        }
    }

    pub fn validate(&self) -> Result<(), SchedError> {
        if !(self.tau_gen > 0.0) || !self.tau_gen.is_finite() {
            return Err(SchedError::BadGenerationTime);
        }
        for t in [self.tau_dec_weak, self.tau_dec_strong, self.t_comm_weak, self.t_comm_strong] {
            if t < 0.0 || !t.is_finite() {
                return Err(SchedError::BadLatency);
            }
        }
        if !(0.0..=1.0).contains(&self.gamma_switch) {
            return Err(SchedError::BadSwitchingRate);
        }
        if self.d == 0
            || self.r_op < 1.0
            || self.r_buf < 1.0
            || self.n_gate == 0
            || self.alpha < 0.0
            || !(self.divergence_cap > 0.0)
        {
            return Err(SchedError::BadStructure);
        }
        match self.scheme {
            Scheme::Sliding if self.tau_dec_weak >= 0.95 * self.tau_gen => {
                Err(SchedError::WeakTooSlowForSliding)
            }
            Scheme::DoubleWindow if self.tau_dec_weak >= self.tau_gen => {
                Err(SchedError::WeakTooSlow)
            }
            _ => Ok(()),
        }
    }

    pub fn f_weak(&self) -> f64 {
        self.tau_dec_weak / self.tau_gen
    }

    pub fn f_strong(&self) -> f64 {
        self.tau_dec_strong / self.tau_gen
    }

    pub fn delta_tau_dec(&self) -> f64 {
        self.tau_dec_strong - self.tau_dec_weak
    }

    pub fn delta_t_comm(&self) -> f64 {
        self.t_comm_strong - self.t_comm_weak
    }

    /// Sliding-window commit size: `max(d, ceil(f_w / (0.95 - f_w) * r_buf))`.
    pub fn sliding_commit_size(&self) -> Result<f64, SchedError> {
        let fw = self.f_weak();
        if fw >= 0.95 {
            return Err(SchedError::WeakTooSlowForSliding);
        }
        Ok((self.d as f64).max((fw / (0.95 - fw) * self.r_buf).ceil()))
    }

    /// Double-window commit size: equality case of the commit-size rule,
    /// floored at r_buf when the rule gives zero.
    pub fn double_commit_size(&self) -> Result<f64, SchedError> {
        let fw = self.f_weak();
        if fw >= 1.0 {
            return Err(SchedError::WeakTooSlow);
        }
        let r_com = (fw / (1.0 - fw) * self.r_buf).ceil();
        Ok(if r_com == 0.0 { self.r_buf } else { r_com })
    }
}

/// Backlog sequence of one simulated gate stream.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// r_0..r_N in rounds; truncated at the first divergent entry.
    pub backlog: Vec<f64>,
    /// Gate indices at which at least one switching event fired.
    pub switch_events: Vec<usize>,
    pub diverged: bool,
    /// Time-averaged backlog over the non-diverged prefix.
    pub mean_backlog: f64,
}

impl Trajectory {
    fn finish(backlog: Vec<f64>, switch_events: Vec<usize>, diverged: bool) -> Trajectory {
        let mean = backlog.iter().sum::<f64>() / backlog.len().max(1) as f64;
        Trajectory { backlog, switch_events, diverged, mean_backlog: mean }
    }
}

/// Ensemble summary of backlog divergence behaviour.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DivergenceReport {
    pub ensemble_size: usize,
    pub diverged: usize,
    pub divergence_probability: f64,
    /// Mean backlog over all steps of trajectories that never diverged.
    pub mean_backlog: f64,
    pub params: SchedulerParams,
}

/// Closed-form backlog of the single-decoder recursion:
/// `r_i = f^i r_0 + (1 - f^i) / (1 - f) (r_op + T_comm / tau_gen)`,
/// with the linear-growth limit at f = 1.
pub fn closed_form_backlog(f: f64, t_comm_over_tau_gen: f64, r_op: f64, r_0: f64, i: u32) -> f64 {
    let c = r_op + t_comm_over_tau_gen;
    if f == 1.0 {
        return r_0 + i as f64 * c;
    }
    let fi = f.powi(i as i32);
    fi * r_0 + (1.0 - fi) / (1.0 - f) * c
}

/// Converged backlog for f < 1: `(r_op + T_comm / tau_gen) / (1 - f)`.
pub fn steady_state_backlog(f: f64, t_comm_over_tau_gen: f64, r_op: f64) -> f64 {
    assert!(f < 1.0);
    (r_op + t_comm_over_tau_gen) / (1.0 - f)
}

/// Naive online decoding: one batch decode per gate segment; a switching
/// event makes the whole interval decode at strong-decoder rates.
pub fn simulate_naive(params: &SchedulerParams, seed: u64) -> Trajectory {
    params.validate().expect("invalid scheduler parameters");
    let mut rng = stream_rng(seed, 0);
    simulate_naive_with(params, |r_prev| {
        let p = (params.gamma_switch * r_prev / params.d as f64).min(1.0);
        rng.gen::<f64>() < p
    })
}

fn simulate_naive_with(
    params: &SchedulerParams,
    mut switch_draw: impl FnMut(f64) -> bool,
) -> Trajectory {
    let mut backlog = vec![params.r_op];
    let mut switch_events = Vec::new();
    let mut diverged = false;
    let mut r_prev = params.r_op;
    for i in 1..=params.n_gate {
        let switched = switch_draw(r_prev);
        let (tau, t_comm) = if switched {
            switch_events.push(i);
            (params.tau_dec_strong, params.t_comm_strong)
        } else {
            (params.tau_dec_weak, params.t_comm_weak)
        };
        let r = (t_comm + tau * r_prev) / params.tau_gen + params.r_op;
        backlog.push(r);
        if r > params.divergence_cap {
            diverged = true;
            break;
        }
        r_prev = r;
    }
    Trajectory::finish(backlog, switch_events, diverged)
}

/// Sliding-window decoding: the weak decoder processes
/// `(r_com + r_buf)`-round windows committing `r_com` each; a switched
/// window is re-decoded by the strong decoder while the weak decoder waits
/// and incoming rounds accumulate.
pub fn simulate_sliding(params: &SchedulerParams, seed: u64) -> Trajectory {
    params.validate().expect("invalid scheduler parameters");
    let r_com = params.sliding_commit_size().expect("validated above");
    let mut rng = stream_rng(seed, 0);
    let p_switch = (params.gamma_switch * r_com / params.d as f64).min(1.0);
    simulate_sliding_with(params, r_com, |_| rng.gen::<f64>() < p_switch)
}

fn simulate_sliding_with(
    params: &SchedulerParams,
    r_com: f64,
    mut switch_draw: impl FnMut(usize) -> bool,
) -> Trajectory {
    let fw = params.f_weak();
    let fs = params.f_strong();
    let tw = params.t_comm_weak / params.tau_gen;
    let ts = params.t_comm_strong / params.tau_gen;
    let window = r_com + params.r_buf;

    let mut backlog = vec![params.r_op];
    let mut switch_events = Vec::new();
    let mut diverged = false;

    // Window pipeline state: next window index and its earliest start time.
    let mut next_window = 0usize;
    let mut last_finish = 0.0f64;
    let mut feedback_time = 0.0f64;

    for i in 1..=params.n_gate {
        // Measurement closes after the gate's operation rounds.
        let measurement = feedback_time + params.r_op;
        // Process windows until the commit frontier covers the measurement.
        let needed = (measurement / r_com).ceil().max(1.0) as usize; // commits count
        let mut switched_this_gate = false;
        while next_window < needed {
            let data_ready = (next_window as f64 + 1.0) * r_com + params.r_buf;
            let start = last_finish.max(data_ready);
            let mut finish = start + fw * window + tw;
            if switch_draw(next_window) {
                finish += fs * window + ts;
                switched_this_gate = true;
            }
            last_finish = finish;
            next_window += 1;
            if finish > 100.0 * params.divergence_cap {
                break; // runaway pipeline; the backlog check below fires
            }
        }
        if switched_this_gate {
            switch_events.push(i);
        }
        let new_feedback = measurement.max(last_finish);
        let r = new_feedback - feedback_time;
        feedback_time = new_feedback;
        backlog.push(r);
        if r > params.divergence_cap {
            diverged = true;
            break;
        }
    }
    Trajectory::finish(backlog, switch_events, diverged)
}

/// Double-window decoding: the weak decoder always keeps pace (guaranteed by
/// the commit-size rule); switched windows enqueue `r_strong` rounds on the
/// strong decoder's queue, drained in bulk at its decode rate. The
/// gate-boundary backlog is the operation rounds plus the weak pipeline
/// depth, the strong queue's drain latency, and the communication terms.
pub fn simulate_double_window(params: &SchedulerParams, seed: u64) -> Trajectory {
    params.validate().expect("invalid scheduler parameters");
    let r_com = params.double_commit_size().expect("validated above");
    let mut rng = stream_rng(seed, 0);
    let p_switch = (params.gamma_switch * r_com / params.d as f64).min(1.0);
    simulate_double_with(params, r_com, |_| rng.gen::<f64>() < p_switch)
}

fn simulate_double_with(
    params: &SchedulerParams,
    r_com: f64,
    mut switch_draw: impl FnMut(usize) -> bool,
) -> Trajectory {
    let fs = params.f_strong();
    let tw = params.t_comm_weak / params.tau_gen;
    let ts = params.t_comm_strong / params.tau_gen;
    let pipeline = r_com + params.r_buf;
    let r_strong = r_com + params.alpha * params.r_buf;

    let mut backlog = vec![params.r_op];
    let mut switch_events = Vec::new();
    let mut diverged = false;
    let mut queue = 0.0f64; // strong-decoder backlog in rounds
    let mut window_progress = 0.0f64;
    let mut window_index = 0usize;

    for i in 1..=params.n_gate {
        let comm = tw + if queue > 0.0 { ts } else { 0.0 };
        let r = params.r_op + pipeline + fs * queue + comm;
        backlog.push(r);
        if r > params.divergence_cap {
            diverged = true;
            break;
        }
        // Advance the stream by r rounds: the weak decoder commits windows on
        // schedule while the strong queue drains continuously.
        let mut remaining = r;
        let mut switched_this_gate = false;
        while remaining > 0.0 {
            let to_commit = r_com - window_progress;
            let step = remaining.min(to_commit);
            if fs > 0.0 {
                queue = (queue - step / fs).max(0.0);
            } else {
                queue = 0.0;
            }
            window_progress += step;
            remaining -= step;
            if window_progress >= r_com - 1e-12 {
                window_progress = 0.0;
                if switch_draw(window_index) {
                    queue += r_strong;
                    switched_this_gate = true;
                }
                window_index += 1;
            }
        }
        if switched_this_gate {
            switch_events.push(i);
        }
    }
    Trajectory::finish(backlog, switch_events, diverged)
}

/// Simulate one trajectory under the configured scheme.
pub fn simulate(params: &SchedulerParams, seed: u64) -> Trajectory {
    match params.scheme {
        Scheme::Naive => simulate_naive(params, seed),
        Scheme::Sliding => simulate_sliding(params, seed),
        Scheme::DoubleWindow => simulate_double_window(params, seed),
    }
}

/// Sufficient-condition outputs for the double-window scheme.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Theorem1Bounds {
    /// Minimum commit size `ceil(f_w / (1 - f_w) * r_buf)` (floored at r_buf
    /// when the rule gives zero).
    pub r_com_min: f64,
    /// Exact bound `(d / r_strong) / f_strong` with the ceiling applied.
    pub gamma_bound_exact: f64,
    /// Ceiling-free form `(1 - f_w) / (alpha + (1 - alpha) f_w) / f_strong`.
    pub gamma_bound_formula: f64,
    /// True when the exact (ceiling-aware) bound is the tighter of the two.
    pub exact_is_tighter: bool,
}

impl Theorem1Bounds {
    pub fn tighter(&self) -> f64 {
        self.gamma_bound_exact.min(self.gamma_bound_formula)
    }
}

/// Evaluate the double-window sufficient conditions for these parameters.
pub fn theorem1_bounds(params: &SchedulerParams) -> Result<Theorem1Bounds, SchedError> {
    let fw = params.f_weak();
    let fs = params.f_strong();
    if fw >= 1.0 {
        return Err(SchedError::WeakTooSlow);
    }
    let r_com = {
        let raw = (fw / (1.0 - fw) * params.r_buf).ceil();
        if raw == 0.0 {
            params.r_buf
        } else {
            raw
        }
    };
    let r_strong = r_com + params.alpha * params.r_buf;
    let exact = if fs > 0.0 { params.d as f64 / r_strong / fs } else { f64::INFINITY };
    let formula = if fs > 0.0 {
        (1.0 - fw) / (params.alpha + (1.0 - params.alpha) * fw) / fs
    } else {
        f64::INFINITY
    };
    Ok(Theorem1Bounds {
        r_com_min: r_com,
        gamma_bound_exact: exact,
        gamma_bound_formula: formula,
        exact_is_tighter: exact <= formula,
    })
}

/// Run an ensemble of independent trajectories with counter-based seeds and
/// summarize divergence behaviour. The mean backlog excludes trajectories
/// that diverged.
pub fn divergence_report(
    params: &SchedulerParams,
    ensemble_size: usize,
    seed: u64,
) -> DivergenceReport {
    params.validate().expect("invalid scheduler parameters");
    let results: Vec<(bool, f64, usize)> = (0..ensemble_size)
        .into_par_iter()
        .map(|t| {
            let traj = simulate(params, composite_seed(seed, t as u64));
            (traj.diverged, traj.backlog.iter().sum::<f64>(), traj.backlog.len())
        })
        .collect();
    let diverged = results.iter().filter(|r| r.0).count();
    let (sum, steps) = results
        .iter()
        .filter(|r| !r.0)
        .fold((0.0, 0usize), |acc, r| (acc.0 + r.1, acc.1 + r.2));
    DivergenceReport {
        ensemble_size,
        diverged,
        divergence_probability: diverged as f64 / ensemble_size.max(1) as f64,
        mean_backlog: if steps > 0 { sum / steps as f64 } else { f64::NAN },
        params: *params,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_spot_values() {
        // One step of the recursion.
        assert_eq!(closed_form_backlog(0.5, 1.0, 189.0, 0.0, 1), 190.0);
        // Long-time limit.
        let limit = steady_state_backlog(0.5, 1.0, 189.0);
        assert!((limit - 380.0).abs() < 1e-12);
        assert!((closed_form_backlog(0.5, 1.0, 189.0, 0.0, 200) - 380.0).abs() < 1e-9);
        // f = 1 grows linearly.
        assert_eq!(closed_form_backlog(1.0, 1.0, 189.0, 10.0, 5), 10.0 + 5.0 * 190.0);
    }

    #[test]
    fn naive_matches_closed_form_without_switching() {
        for f in [0.1f64, 0.5, 0.9, 1.2] {
            let mut params = SchedulerParams::standard(Scheme::Naive, f, 0.0);
            params.n_gate = 300;
            let traj = simulate_naive(&params, 1);
            for (i, &r) in traj.backlog.iter().enumerate() {
                let expect =
                    closed_form_backlog(f, 1.0, params.r_op, params.r_op, i as u32);
                assert!(
                    (r - expect).abs() <= 1e-9 * expect.abs().max(1.0),
                    "f={f}, step {i}: {r} vs {expect}"
                );
            }
            if f > 1.0 {
                // Geometric divergence: consecutive ratios approach f.
                let r9 = traj.backlog[9];
                let r10 = traj.backlog[10];
                assert!((r10 / r9 - f).abs() < 0.05);
                assert!(traj.diverged);
            } else {
                assert!(!traj.diverged);
                let limit = steady_state_backlog(f, 1.0, params.r_op);
                assert!(
                    (traj.backlog[200] - limit).abs() < 1e-6 * limit,
                    "f={f}: {} vs {limit}",
                    traj.backlog[200]
                );
            }
        }
        // Spot limits from the worked example: f = 0.9 and f = 0.1.
        assert!((steady_state_backlog(0.9, 1.0, 189.0) - 10.0 * 190.0).abs() < 1e-9);
        assert!((steady_state_backlog(0.1, 1.0, 189.0) - 10.0 / 9.0 * 190.0).abs() < 1e-9);
    }

    #[test]
    fn naive_diverges_at_high_switching_rate() {
        // gamma = 1e-3 at f_weak = 0.9 destabilizes the naive scheme.
        let params = SchedulerParams::standard(Scheme::Naive, 0.9, 1e-3);
        let report = divergence_report(&params, 200, 7);
        assert!(
            report.divergence_probability > 0.0,
            "expected some divergence, got {}",
            report.divergence_probability
        );
        // And gamma = 0 never diverges for f < 1.
        let calm = SchedulerParams::standard(Scheme::Naive, 0.9, 0.0);
        let report = divergence_report(&calm, 100, 7);
        assert_eq!(report.divergence_probability, 0.0);
    }

    #[test]
    fn sliding_commit_rule_and_stability() {
        let params = SchedulerParams::standard(Scheme::Sliding, 0.7, 0.0);
        assert_eq!(params.sliding_commit_size().unwrap(), 59.0);
        let traj = simulate_sliding(&params, 3);
        assert!(!traj.diverged);
        // Steady backlog is bounded and at least r_op.
        let tail = &traj.backlog[100..];
        let max = tail.iter().fold(0.0f64, |a, &b| a.max(b));
        assert!(max < 2000.0, "steady sliding backlog bounded, got {max}");
        for &r in &traj.backlog {
            assert!(r >= params.r_op - 1e-9);
        }

        let mut too_slow = params;
        too_slow.tau_dec_weak = 0.96;
        assert_eq!(too_slow.validate(), Err(SchedError::WeakTooSlowForSliding));
    }

    #[test]
    fn sliding_bounded_at_moderate_switching() {
        // Stable at gamma = 1e-3 for f_weak in {0.4, 0.7} over the standard
        // ensemble horizon.
        for f in [0.4, 0.7] {
            let mut params = SchedulerParams::standard(Scheme::Sliding, f, 1e-3);
            params.n_gate = 10_000;
            for seed in 0..5 {
                let traj = simulate_sliding(&params, seed);
                assert!(!traj.diverged, "f={f} seed={seed} diverged");
            }
        }
    }

    #[test]
    fn forced_consecutive_switches_grow_linearly_in_sliding() {
        // Inject M consecutive switched windows and measure the backlog
        // spike: it must grow linearly with M, not geometrically.
        let params = SchedulerParams::standard(Scheme::Sliding, 0.4, 0.0);
        let r_com = params.sliding_commit_size().unwrap();
        let spike = |m: usize| -> f64 {
            let mut p = params;
            p.n_gate = 400;
            let traj = simulate_sliding_with(&p, r_com, |w| (10..10 + m).contains(&w));
            traj.backlog.iter().fold(0.0f64, |a, &b| a.max(b))
        };
        let base = spike(0);
        let s1 = spike(1) - base;
        let s4 = spike(4) - base;
        let s8 = spike(8) - base;
        assert!(s1 > 0.0);
        let ratio4 = s4 / s1;
        let ratio8 = s8 / s1;
        assert!(
            (3.0..6.0).contains(&ratio4),
            "4 switches should cost about 4x one switch, got {ratio4}"
        );
        assert!(
            (6.0..12.0).contains(&ratio8),
            "8 switches should cost about 8x one switch, got {ratio8}"
        );
        // Geometric growth would give ratios of f_strong^3 = 1000 and more.
    }

    #[test]
    fn double_window_commit_and_bounds_worked_example() {
        let params = SchedulerParams::standard(Scheme::DoubleWindow, 0.7, 0.0);
        assert_eq!(params.double_commit_size().unwrap(), 49.0);
        let bounds = theorem1_bounds(&params).unwrap();
        assert_eq!(bounds.r_com_min, 49.0);
        assert!((bounds.gamma_bound_exact - 21.0 / 91.0 / 10.0).abs() < 1e-12);
        assert!((bounds.gamma_bound_exact - 2.31e-2).abs() < 1e-4);
        assert!((bounds.gamma_bound_formula - 0.3 / 1.3 / 10.0).abs() < 1e-12);

        // Ceiling-free arithmetic examples.
        let mut p = params;
        p.tau_dec_weak = 0.5;
        p.tau_dec_strong = 1.0;
        let b = theorem1_bounds(&p).unwrap();
        assert!((b.gamma_bound_formula - 0.5 / 1.5).abs() < 1e-12);

        // f_weak = 0: commit floored at r_buf.
        p.tau_dec_weak = 0.0;
        p.tau_dec_strong = 10.0;
        let b = theorem1_bounds(&p).unwrap();
        assert_eq!(b.r_com_min, 21.0);
        assert!((b.gamma_bound_exact - 21.0 / (21.0 + 42.0) / 10.0).abs() < 1e-12);

        // Weak decoder as slow as generation: no bound exists.
        p.tau_dec_weak = 1.0;
        assert!(matches!(theorem1_bounds(&p), Err(SchedError::WeakTooSlow)));
    }

    #[test]
    fn double_window_stability_tracks_the_bound() {
        // At gamma = 3e-2 only f_weak = 0.4 satisfies the sufficient
        // condition, and only its trajectories stay bounded.
        for (f, expect_stable) in [(0.4, true), (0.7, false), (0.9, false)] {
            let params = SchedulerParams::standard(Scheme::DoubleWindow, f, 3e-2);
            let bounds = theorem1_bounds(&params).unwrap();
            assert_eq!(
                3e-2 < bounds.gamma_bound_exact,
                expect_stable,
                "bound classification for f={f}"
            );
            let mut any_diverged = false;
            for seed in 0..5 {
                let traj = simulate_double_window(&params, seed);
                any_diverged |= traj.diverged;
            }
            assert_eq!(!any_diverged, expect_stable, "f={f}");
        }
    }

    #[test]
    fn double_window_divergence_probabilities_against_bound() {
        let params = SchedulerParams::standard(Scheme::DoubleWindow, 0.7, 0.0);
        let bound = theorem1_bounds(&params).unwrap().gamma_bound_exact;
        // Half the bound: zero divergence.
        let mut below = params;
        below.gamma_switch = bound / 2.0;
        below.n_gate = 3000;
        let rep = divergence_report(&below, 100, 11);
        assert_eq!(rep.divergence_probability, 0.0);
        // Ten times the bound: overwhelming divergence.
        let mut above = params;
        above.gamma_switch = (10.0 * bound).min(1.0);
        above.n_gate = 3000;
        let rep = divergence_report(&above, 100, 11);
        assert!(rep.divergence_probability >= 0.9, "got {}", rep.divergence_probability);
    }

    #[test]
    fn mean_backlog_grows_with_switching_below_the_bound() {
        let params = SchedulerParams::standard(Scheme::DoubleWindow, 0.7, 0.0);
        let bound = theorem1_bounds(&params).unwrap().gamma_bound_exact;
        let mut means = Vec::new();
        for frac in [0.1, 0.4, 0.8] {
            let mut p = params;
            p.gamma_switch = bound * frac;
            p.n_gate = 3000;
            let rep = divergence_report(&p, 60, 5);
            assert_eq!(rep.divergence_probability, 0.0, "frac {frac}");
            means.push(rep.mean_backlog);
        }
        assert!(means[0] < means[1] && means[1] < means[2], "means {means:?}");
    }

    #[test]
    fn reports_are_reproducible_and_order_independent() {
        let params = SchedulerParams::standard(Scheme::DoubleWindow, 0.7, 2e-2);
        let a = divergence_report(&params, 64, 9);
        let b = divergence_report(&params, 64, 9);
        assert_eq!(a.divergence_probability, b.divergence_probability);
        assert_eq!(a.mean_backlog, b.mean_backlog);
        // Individual trajectories keyed by composite seeds.
        let t1 = simulate(&params, composite_seed(9, 5));
        let t2 = simulate(&params, composite_seed(9, 5));
        assert_eq!(t1.backlog, t2.backlog);
    }
}
