//! Monte Carlo experiment drivers: one per CLI subcommand.
//!
//! Shots and trajectories run in parallel with counter-based per-shot seeds
//! and commutative accumulators, so outputs are byte-identical regardless of
//! thread scheduling.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::backlog::{divergence_report, simulate, theorem1_bounds};
use crate::code::{CodeModel, NoiseParams, SurfaceCodeSpec};
use crate::harness::config::{ExperimentConfig, ExperimentKind};
use crate::harness::table::{binomial_sigma, Cell, ResultTable};
use crate::rng::{composite_seed, stream_rng};
use crate::strong::{BpParams, TannerGraph};
use crate::switching::{
    switching_rate, GapSpectrum, HybridDecoder, RecordedShot, StrongEvalMode, SwitchPolicy,
};

pub struct ExperimentOutput {
    pub tables: Vec<ResultTable>,
    pub headline: serde_json::Value,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> ExperimentOutput {
    let mut output = match cfg.kind {
        ExperimentKind::Memory => run_memory_experiment(cfg),
        ExperimentKind::Gaps => run_gap_histogram(cfg),
        ExperimentKind::Spectrum => run_spectrum(cfg),
        ExperimentKind::Tradeoff => run_tradeoff_scan(cfg),
        ExperimentKind::Backlog => run_backlog_suite(cfg),
        ExperimentKind::Bounds => run_bounds(cfg),
    };
    for table in &mut output.tables {
        table.metadata = cfg.echo_lines();
        table.metadata.push(format!("version = {}", env!("CARGO_PKG_VERSION")));
    }
    output
}

/// Accumulated statistics for one (d, p) grid point.
#[derive(Clone)]
struct PointStats {
    shots: u64,
    weak_errors: u64,
    switches: u64,
    switched_errors: u64,
    /// Uniform (threshold-independent) strong evaluations, the unbiased
    /// estimator of the strong decoder's own error rate.
    audit_shots: u64,
    audit_errors: u64,
    spectrum: GapSpectrum,
    signed_hist: BTreeMap<i64, u64>,
}

impl PointStats {
    fn new(bin_width: f64) -> PointStats {
        PointStats {
            shots: 0,
            weak_errors: 0,
            switches: 0,
            switched_errors: 0,
            audit_shots: 0,
            audit_errors: 0,
            spectrum: GapSpectrum::new(bin_width),
            signed_hist: BTreeMap::new(),
        }
    }

    fn merge(mut self, other: PointStats) -> PointStats {
        self.shots += other.shots;
        self.weak_errors += other.weak_errors;
        self.switches += other.switches;
        self.switched_errors += other.switched_errors;
        self.audit_shots += other.audit_shots;
        self.audit_errors += other.audit_errors;
        self.spectrum.merge(&other.spectrum);
        for (bin, count) in other.signed_hist {
            *self.signed_hist.entry(bin).or_insert(0) += count;
        }
        self
    }
}

/// Run all shots of one grid point under the configured policy.
fn run_point(
    cfg: &ExperimentConfig,
    d: usize,
    p: f64,
    point_index: u64,
    eval: StrongEvalMode,
) -> PointStats {
    let spec = SurfaceCodeSpec::new(d, d * cfg.rounds_factor, cfg.basis)
        .expect("validated configuration");
    let noise = NoiseParams::new(p).expect("validated configuration");
    let model = CodeModel::new(spec, noise).expect("validated configuration");
    let tanner = TannerGraph::from_check_matrix(&model.checks);
    let bp = BpParams {
        max_iters: cfg.bp_iters,
        damping: cfg.bp_damping,
        latency_factor: cfg.tau_dec_strong / cfg.tau_gen,
    };
    let mut policy = SwitchPolicy::new(cfg.decoder, cfg.g_th_db, cfg.epsilon)
        .expect("validated configuration");
    policy.parallel_launch = cfg.parallel_launch;
    let decoder = HybridDecoder::new(&model, &tanner, bp, policy);
    let point_seed = composite_seed(cfg.seed, point_index + 1);
    let force_all = cfg.strong_eval.force_all(d) || matches!(eval, StrongEvalMode::Forced);
    let audit_rate = cfg.audit_rate;
    let bin_width = cfg.bin_width_db;

    (0..cfg.shots)
        .into_par_iter()
        .fold(
            || PointStats::new(bin_width),
            |mut acc, shot| {
                let shot_seed = composite_seed(point_seed, shot);
                let (_, events) = model.sample_shot(shot_seed);
                let audit = force_all
                    || stream_rng(shot_seed, 1).gen::<f64>() < audit_rate;
                let mode = if audit { StrongEvalMode::Forced } else { eval };
                let outcome = decoder.decode_with_switching(&events, mode);
                acc.shots += 1;
                acc.weak_errors += (!outcome.weak_correct) as u64;
                acc.switches += (outcome.used == crate::switching::DecoderUsed::Strong) as u64;
                acc.switched_errors += (!outcome.final_correct) as u64;
                if audit {
                    acc.audit_shots += 1;
                    acc.audit_errors += outcome.strong_correct.map(|c| !c).unwrap_or(false) as u64;
                }
                acc.spectrum.record(&RecordedShot::from(&outcome));
                let signed = if outcome.weak_correct { outcome.gap_db } else { -outcome.gap_db };
                let bin = (signed / bin_width).floor() as i64;
                *acc.signed_hist.entry(bin).or_insert(0) += 1;
                acc
            },
        )
        .reduce(|| PointStats::new(bin_width), PointStats::merge)
}

/// d-round memory experiments: weak-only, strong-only, and switched logical
/// error rates plus the switching rate, with binomial one-sigma columns.
pub fn run_memory_experiment(cfg: &ExperimentConfig) -> ExperimentOutput {
    let mut table = ResultTable::new(
        "memory",
        &[
            "d",
            "p",
            "rounds",
            "shots",
            "pl_weak",
            "pl_weak_sigma",
            "strong_shots",
            "pl_strong",
            "pl_strong_sigma",
            "pl_switch",
            "pl_switch_sigma",
            "gamma_switch",
            "gamma_switch_sigma",
        ],
    );
    let mut headline = Vec::new();
    let mut point_index = 0u64;
    for &d in &cfg.distances {
        for &p in &cfg.p_values {
            let stats = run_point(cfg, d, p, point_index, StrongEvalMode::Lazy);
            point_index += 1;
            let n = stats.shots;
            let pl_weak = stats.weak_errors as f64 / n as f64;
            let pl_switch = stats.switched_errors as f64 / n as f64;
            let gamma = stats.switches as f64 / n as f64;
            let pl_strong = if stats.audit_shots > 0 {
                Some(stats.audit_errors as f64 / stats.audit_shots as f64)
            } else {
                None
            };
            table.push(vec![
                d.into(),
                p.into(),
                (d * cfg.rounds_factor).into(),
                n.into(),
                pl_weak.into(),
                binomial_sigma(stats.weak_errors, n).into(),
                stats.audit_shots.into(),
                pl_strong.into(),
                if stats.audit_shots > 0 {
                    binomial_sigma(stats.audit_errors, stats.audit_shots).into()
                } else {
                    Cell::Empty
                },
                pl_switch.into(),
                binomial_sigma(stats.switched_errors, n).into(),
                gamma.into(),
                binomial_sigma(stats.switches, n).into(),
            ]);
            headline.push(serde_json::json!({
                "d": d, "p": p,
                "pl_weak": pl_weak, "pl_strong": pl_strong,
                "pl_switch": pl_switch, "gamma_switch": gamma,
            }));
        }
    }
    ExperimentOutput { tables: vec![table], headline: serde_json::json!({ "points": headline }) }
}

/// Signed-gap histograms (the weak decoder's soft-output distribution).
pub fn run_gap_histogram(cfg: &ExperimentConfig) -> ExperimentOutput {
    let mut table = ResultTable::new(
        "gaps",
        &["d", "p", "bin_low_db", "bin_high_db", "count", "density"],
    );
    let mut point_index = 0u64;
    for &d in &cfg.distances {
        for &p in &cfg.p_values {
            let stats = run_point(cfg, d, p, point_index, StrongEvalMode::Lazy);
            point_index += 1;
            for (&bin, &count) in &stats.signed_hist {
                table.push(vec![
                    d.into(),
                    p.into(),
                    (bin as f64 * cfg.bin_width_db).into(),
                    ((bin + 1) as f64 * cfg.bin_width_db).into(),
                    count.into(),
                    (count as f64 / stats.shots as f64).into(),
                ]);
            }
        }
    }
    ExperimentOutput { tables: vec![table], headline: serde_json::json!({}) }
}

/// Gap spectrum: p(g) and the conditional weak/strong error rates per bin.
pub fn run_spectrum(cfg: &ExperimentConfig) -> ExperimentOutput {
    let mut table = ResultTable::new(
        "spectrum",
        &[
            "d",
            "p",
            "bin_low_db",
            "bin_high_db",
            "shots",
            "density",
            "weak_errors",
            "p_weak_error",
            "strong_evaluated",
            "strong_errors",
            "p_strong_error",
        ],
    );
    let mut point_index = 0u64;
    for &d in &cfg.distances {
        for &p in &cfg.p_values {
            let stats = run_point(cfg, d, p, point_index, StrongEvalMode::Lazy);
            point_index += 1;
            let s = &stats.spectrum;
            for (i, bin) in s.bins.iter().enumerate() {
                if bin.shots == 0 {
                    continue;
                }
                table.push(vec![
                    d.into(),
                    p.into(),
                    (i as f64 * s.bin_width_db).into(),
                    ((i + 1) as f64 * s.bin_width_db).into(),
                    bin.shots.into(),
                    s.density(i).into(),
                    bin.weak_errors.into(),
                    s.p_weak_error(i).into(),
                    bin.strong_evaluated.into(),
                    bin.strong_errors.into(),
                    s.p_strong_error(i).into(),
                ]);
            }
        }
    }
    ExperimentOutput { tables: vec![table], headline: serde_json::json!({}) }
}

/// Switched error rate at a grid threshold, computed from spectrum counts
/// (exact because the strong decoder was forced on every sub-level shot).
fn switched_rate_from_spectrum(s: &GapSpectrum, g_th_db: f64) -> f64 {
    let mut errors = 0u64;
    for (i, bin) in s.bins.iter().enumerate() {
        if (i as f64) * s.bin_width_db < g_th_db {
            assert_eq!(
                bin.strong_evaluated, bin.shots,
                "sub-threshold shots must carry strong evaluations"
            );
            errors += bin.strong_errors;
        } else {
            errors += bin.weak_errors;
        }
    }
    errors as f64 / s.total_shots.max(1) as f64
}

/// Threshold sweep: (g_th, switching rate, switched error rate) plus the
/// first threshold within 1% of the asymptotic error rate, and a power-law
/// fit of the optimal points across distances.
pub fn run_tradeoff_scan(cfg: &ExperimentConfig) -> ExperimentOutput {
    let mut table = ResultTable::new(
        "tradeoff",
        &[
            "d",
            "p",
            "gth_db",
            "gamma_switch",
            "pl_switch",
            "pl_switch_sigma",
            "is_optimal",
        ],
    );
    let steps = (cfg.g_th_max_db / cfg.bin_width_db).round() as usize;
    let mut optima: BTreeMap<String, Vec<(usize, f64, f64)>> = BTreeMap::new();
    let mut point_index = 0u64;
    for &d in &cfg.distances {
        for &p in &cfg.p_values {
            // Force strong evaluation on every shot that any threshold in the
            // sweep could hand to the strong decoder.
            let stats =
                run_point(cfg, d, p, point_index, StrongEvalMode::ForcedBelow(cfg.g_th_max_db));
            point_index += 1;
            let s = &stats.spectrum;
            let asymptote = switched_rate_from_spectrum(s, cfg.g_th_max_db);
            let mut optimal: Option<(usize, f64, f64)> = None;
            let mut rows = Vec::new();
            for k in 0..=steps {
                let g_th = k as f64 * cfg.bin_width_db;
                let rate = switched_rate_from_spectrum(s, g_th);
                let gamma = switching_rate(s, g_th);
                let within = (rate - asymptote).abs() <= 0.01 * asymptote.max(f64::MIN_POSITIVE);
                if optimal.is_none() && within {
                    optimal = Some((k, gamma, rate));
                }
                rows.push((g_th, gamma, rate));
            }
            for (k, (g_th, gamma, rate)) in rows.into_iter().enumerate() {
                table.push(vec![
                    d.into(),
                    p.into(),
                    g_th.into(),
                    gamma.into(),
                    rate.into(),
                    binomial_sigma((rate * s.total_shots as f64).round() as u64, s.total_shots)
                        .into(),
                    (optimal.map(|(ok, _, _)| ok) == Some(k)).into(),
                ]);
            }
            if let Some((_, gamma, rate)) = optimal {
                if gamma > 0.0 && rate > 0.0 {
                    optima.entry(format!("{p}")).or_default().push((d, gamma, rate));
                }
            }
        }
    }
    // Power-law fit log10(P_L) = log10(c) + e * log10(gamma) over the optimal
    // points when at least three distances contribute.
    let mut fits = Vec::new();
    for (p, pts) in &optima {
        if pts.len() < 3 {
            continue;
        }
        let xs: Vec<f64> = pts.iter().map(|(_, g, _)| g.log10()).collect();
        let ys: Vec<f64> = pts.iter().map(|(_, _, r)| r.log10()).collect();
        let n = xs.len() as f64;
        let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
        let sxx = xs.iter().map(|x| x * x).sum::<f64>();
        let sxy = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        fits.push(serde_json::json!({
            "p": p,
            "coefficient": 10f64.powf(intercept),
            "exponent": slope,
            "points": pts.iter().map(|(d, g, r)| serde_json::json!({
                "d": d, "gamma": g, "pl_switch": r
            })).collect::<Vec<_>>(),
        }));
    }
    ExperimentOutput {
        tables: vec![table],
        headline: serde_json::json!({ "optimal_point_fits": fits }),
    }
}

/// Backlog suite: divergence probabilities and mean backlogs over a gamma
/// grid, the double-window bound column, and sampled trajectories.
pub fn run_backlog_suite(cfg: &ExperimentConfig) -> ExperimentOutput {
    let mut curves = ResultTable::new(
        "backlog",
        &[
            "scheme",
            "f_weak",
            "f_strong",
            "gamma",
            "ensemble",
            "n_gate",
            "diverged",
            "divergence_probability",
            "mean_backlog",
            "bound_gamma_exact",
            "bound_gamma_formula",
        ],
    );
    let mut trajectories = ResultTable::new(
        "backlog_trajectories",
        &["scheme", "f_weak", "gamma", "trajectory", "step", "backlog"],
    );
    let mut headline = Vec::new();
    for &fw in &cfg.tau_dec_weak {
        for &gamma in &cfg.gammas {
            let params = cfg.scheduler_params(fw, gamma);
            let report = divergence_report(&params, cfg.ensemble, cfg.seed);
            let bounds = theorem1_bounds(&params).ok();
            curves.push(vec![
                params.scheme.to_string().into(),
                params.f_weak().into(),
                params.f_strong().into(),
                gamma.into(),
                cfg.ensemble.into(),
                cfg.n_gate.into(),
                (report.diverged as u64).into(),
                report.divergence_probability.into(),
                if report.mean_backlog.is_nan() {
                    Cell::Empty
                } else {
                    report.mean_backlog.into()
                },
                bounds.map(|b| b.gamma_bound_exact).into(),
                bounds.map(|b| b.gamma_bound_formula).into(),
            ]);
            headline.push(serde_json::json!({
                "scheme": params.scheme.to_string(),
                "f_weak": params.f_weak(),
                "gamma": gamma,
                "divergence_probability": report.divergence_probability,
                "bound_gamma": bounds.map(|b| b.gamma_bound_exact),
            }));
            for t in 0..cfg.trajectory_samples.min(cfg.ensemble) {
                let traj = simulate(&params, composite_seed(cfg.seed, t as u64));
                for (step, &r) in traj.backlog.iter().enumerate() {
                    trajectories.push(vec![
                        params.scheme.to_string().into(),
                        params.f_weak().into(),
                        gamma.into(),
                        t.into(),
                        step.into(),
                        r.into(),
                    ]);
                }
            }
        }
    }
    ExperimentOutput {
        tables: vec![curves, trajectories],
        headline: serde_json::json!({ "ensembles": headline }),
    }
}

/// Double-window sufficient-condition bounds for the configured grid.
pub fn run_bounds(cfg: &ExperimentConfig) -> ExperimentOutput {
    let mut table = ResultTable::new(
        "bounds",
        &[
            "f_weak",
            "f_strong",
            "alpha",
            "r_buf",
            "d",
            "r_com_min",
            "gamma_bound_exact",
            "gamma_bound_formula",
            "exact_is_tighter",
        ],
    );
    let mut headline = Vec::new();
    for &fw in &cfg.tau_dec_weak {
        let params = cfg.scheduler_params(fw, 0.0);
        match theorem1_bounds(&params) {
            Ok(b) => {
                table.push(vec![
                    params.f_weak().into(),
                    params.f_strong().into(),
                    params.alpha.into(),
                    params.r_buf.into(),
                    params.d.into(),
                    b.r_com_min.into(),
                    b.gamma_bound_exact.into(),
                    b.gamma_bound_formula.into(),
                    b.exact_is_tighter.into(),
                ]);
                headline.push(serde_json::json!({
                    "f_weak": params.f_weak(),
                    "r_com_min": b.r_com_min,
                    "gamma_bound": b.tighter(),
                }));
            }
            Err(e) => {
                table.push(vec![
                    params.f_weak().into(),
                    params.f_strong().into(),
                    params.alpha.into(),
                    params.r_buf.into(),
                    params.d.into(),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Text(format!("{e}")),
                ]);
            }
        }
    }
    ExperimentOutput { tables: vec![table], headline: serde_json::json!({ "bounds": headline }) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(kind: ExperimentKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.kind = kind;
        cfg.distances = vec![3];
        cfg.p_values = vec![0.04];
        cfg.shots = 400;
        cfg.seed = 5;
        cfg.gammas = vec![0.0, 1e-2];
        cfg.tau_dec_weak = vec![0.4];
        cfg.ensemble = 20;
        cfg.n_gate = 200;
        cfg.trajectory_samples = 1;
        cfg.validate().unwrap();
        cfg
    }

    #[test]
    fn memory_tables_are_deterministic() {
        let cfg = tiny_config(ExperimentKind::Memory);
        let a = run_experiment(&cfg);
        let b = run_experiment(&cfg);
        assert_eq!(a.tables[0].to_csv_string(), b.tables[0].to_csv_string());
    }

    #[test]
    fn memory_p_zero_point_is_exactly_quiet() {
        let mut cfg = tiny_config(ExperimentKind::Memory);
        cfg.p_values = vec![0.0];
        cfg.shots = 200;
        let out = run_experiment(&cfg);
        let row = &out.tables[0].rows[0];
        // pl_weak, pl_switch, gamma_switch all exactly zero.
        assert_eq!(row[4], Cell::Float(0.0));
        assert_eq!(row[9], Cell::Float(0.0));
        assert_eq!(row[11], Cell::Float(0.0));
    }

    #[test]
    fn memory_weak_only_equals_switched_at_zero_threshold() {
        let mut cfg = tiny_config(ExperimentKind::Memory);
        cfg.g_th_db = 0.0;
        let out = run_experiment(&cfg);
        for row in &out.tables[0].rows {
            assert_eq!(row[4], row[9], "pl_weak == pl_switch at g_th = 0");
            assert_eq!(row[11], Cell::Float(0.0), "never switches");
        }
    }

    #[test]
    fn tradeoff_endpoints_and_monotone_gamma() {
        let mut cfg = tiny_config(ExperimentKind::Tradeoff);
        cfg.g_th_max_db = 30.0;
        cfg.shots = 300;
        let out = run_experiment(&cfg);
        let table = &out.tables[0];
        let gamma_col = table.columns.iter().position(|c| c == "gamma_switch").unwrap();
        let gth_col = table.columns.iter().position(|c| c == "gth_db").unwrap();
        let mut prev = -1.0;
        for row in &table.rows {
            let (Cell::Float(g_th), Cell::Float(gamma)) = (&row[gth_col], &row[gamma_col]) else {
                panic!("schema mismatch");
            };
            if *g_th == 0.0 {
                assert_eq!(*gamma, 0.0, "gamma(0) = 0");
                prev = -1.0; // new grid point
            }
            assert!(*gamma >= prev, "gamma monotone along the sweep");
            prev = *gamma;
        }
    }

    #[test]
    fn backlog_suite_emits_bound_column_and_trajectories() {
        let mut cfg = tiny_config(ExperimentKind::Backlog);
        cfg.scheme = crate::backlog::Scheme::DoubleWindow;
        let out = run_experiment(&cfg);
        assert_eq!(out.tables.len(), 2);
        let curves = &out.tables[0];
        assert_eq!(curves.rows.len(), 2);
        let bound_col = curves.columns.iter().position(|c| c == "bound_gamma_exact").unwrap();
        for row in &curves.rows {
            assert!(matches!(row[bound_col], Cell::Float(_)));
        }
        let traj = &out.tables[1];
        assert!(traj.rows.len() >= 2 * cfg.n_gate, "per-step trajectory rows");
    }

    #[test]
    fn bounds_table_matches_module_results() {
        let cfg = tiny_config(ExperimentKind::Bounds);
        let out = run_experiment(&cfg);
        let row = &out.tables[0].rows[0];
        let params = cfg.scheduler_params(0.4, 0.0);
        let b = theorem1_bounds(&params).unwrap();
        assert_eq!(row[5], Cell::Float(b.r_com_min));
        assert_eq!(row[6], Cell::Float(b.gamma_bound_exact));
    }
}
