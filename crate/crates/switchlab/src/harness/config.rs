//! Experiment configuration: a flat key-value file format (one `key = value`
//! per line, `#` comments, unknown keys rejected) plus CLI overrides.
//!
//! The canonical echo of a config is itself parseable, which is how result
//! tables embed a reproducible header.

use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::backlog::Scheme;
use crate::code::Basis;
use crate::switching::WeakKind;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {0}: expected 'key = value', got '{1}'")]
    Malformed(usize, String),
    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),
    #[error("invalid value for '{key}': {message}")]
    BadValue { key: String, message: String },
    #[error("missing experiment kind")]
    MissingKind,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ExperimentKind {
    Memory,
    Gaps,
    Spectrum,
    Tradeoff,
    Backlog,
    Bounds,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<ExperimentKind> {
        match s {
            "memory" => Some(ExperimentKind::Memory),
            "gaps" => Some(ExperimentKind::Gaps),
            "spectrum" => Some(ExperimentKind::Spectrum),
            "tradeoff" => Some(ExperimentKind::Tradeoff),
            "backlog" => Some(ExperimentKind::Backlog),
            "bounds" => Some(ExperimentKind::Bounds),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Memory => "memory",
            ExperimentKind::Gaps => "gaps",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Tradeoff => "tradeoff",
            ExperimentKind::Backlog => "backlog",
            ExperimentKind::Bounds => "bounds",
        }
    }
}

/// When the harness evaluates the strong decoder for statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StrongEvalPolicy {
    /// All shots at d = 3, sub-threshold plus a uniform audit sample above.
    Auto,
    /// Force the strong decoder on every shot.
    All,
    /// Sub-threshold shots plus a uniform audit sample.
    Audit,
}

impl StrongEvalPolicy {
    fn parse(s: &str) -> Option<StrongEvalPolicy> {
        match s {
            "auto" => Some(StrongEvalPolicy::Auto),
            "all" => Some(StrongEvalPolicy::All),
            "audit" => Some(StrongEvalPolicy::Audit),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            StrongEvalPolicy::Auto => "auto",
            StrongEvalPolicy::All => "all",
            StrongEvalPolicy::Audit => "audit",
        }
    }

    /// Resolve Auto for a concrete distance.
    pub fn force_all(&self, d: usize) -> bool {
        match self {
            StrongEvalPolicy::All => true,
            StrongEvalPolicy::Audit => false,
            StrongEvalPolicy::Auto => d <= 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub shots: u64,

    // Code and noise grid.
    pub distances: Vec<usize>,
    pub p_values: Vec<f64>,
    pub rounds_factor: usize,
    pub basis: Basis,

    // Decoder pair and policy.
    pub decoder: WeakKind,
    pub g_th_db: f64,
    pub g_th_max_db: f64,
    pub epsilon: f64,
    pub bin_width_db: f64,
    pub parallel_launch: bool,
    pub strong_eval: StrongEvalPolicy,
    pub audit_rate: f64,
    pub bp_iters: usize,
    pub bp_damping: f64,

    // Scheduler grid.
    pub scheme: Scheme,
    pub tau_gen: f64,
    pub tau_dec_weak: Vec<f64>,
    pub tau_dec_strong: f64,
    pub t_comm_weak: f64,
    pub t_comm_strong: f64,
    pub sched_d: usize,
    pub r_op_factor: f64,
    pub r_buf: Option<f64>,
    pub alpha: f64,
    pub n_gate: usize,
    pub gammas: Vec<f64>,
    pub ensemble: usize,
    pub divergence_cap: f64,
    pub trajectory_samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Memory,
            seed: 1,
            out_dir: PathBuf::from("results"),
            shots: 20_000,
            distances: vec![3, 5, 7],
            p_values: vec![0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08],
            rounds_factor: 1,
            basis: Basis::Z,
            decoder: WeakKind::MwpmComplementary,
            g_th_db: 10.0,
            g_th_max_db: 50.0,
            epsilon: 0.1,
            bin_width_db: 1.0,
            parallel_launch: false,
            strong_eval: StrongEvalPolicy::Auto,
            audit_rate: 0.01,
            bp_iters: 30,
            bp_damping: 0.5,
            scheme: Scheme::DoubleWindow,
            tau_gen: 1.0,
            tau_dec_weak: vec![0.4, 0.7, 0.9],
            tau_dec_strong: 10.0,
            t_comm_weak: 1.0,
            t_comm_strong: 10.0,
            sched_d: 21,
            r_op_factor: 9.0,
            r_buf: None,
            alpha: 2.0,
            n_gate: 10_000,
            gammas: vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2],
            ensemble: 1000,
            divergence_cap: 1e6,
            trajectory_samples: 3,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(|s| {
            s.trim().parse::<T>().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                message: format!("cannot parse '{}'", s.trim()),
            })
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse::<T>().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        message: format!("cannot parse '{value}'"),
    })
}

impl ExperimentConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |key: &str, message: &str| ConfigError::BadValue {
            key: key.to_string(),
            message: message.to_string(),
        };
        match key {
            "experiment" => {
                self.kind =
                    ExperimentKind::parse(value).ok_or_else(|| bad(key, "unknown experiment"))?;
            }
            "seed" => self.seed = parse_one(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "shots" => self.shots = parse_one(key, value)?,
            "d" => self.distances = parse_list(key, value)?,
            "p" => self.p_values = parse_list(key, value)?,
            "rounds_factor" => self.rounds_factor = parse_one(key, value)?,
            "basis" => {
                self.basis = match value {
                    "x" => Basis::X,
                    "z" => Basis::Z,
                    _ => return Err(bad(key, "expected x or z")),
                };
            }
            "decoder" => {
                self.decoder = match value {
                    "mwpm" => WeakKind::MwpmComplementary,
                    "uf" => WeakKind::UfCluster,
                    _ => return Err(bad(key, "expected mwpm or uf")),
                };
            }
            "gth_db" => self.g_th_db = parse_one(key, value)?,
            "gth_max_db" => self.g_th_max_db = parse_one(key, value)?,
            "epsilon" => self.epsilon = parse_one(key, value)?,
            "bin_width_db" => self.bin_width_db = parse_one(key, value)?,
            "parallel_launch" => self.parallel_launch = parse_one(key, value)?,
            "strong_eval" => {
                self.strong_eval = StrongEvalPolicy::parse(value)
                    .ok_or_else(|| bad(key, "expected auto, all, or audit"))?;
            }
            "audit_rate" => self.audit_rate = parse_one(key, value)?,
            "bp_iters" => self.bp_iters = parse_one(key, value)?,
            "bp_damping" => self.bp_damping = parse_one(key, value)?,
            "scheme" => {
                self.scheme = match value {
                    "naive" => Scheme::Naive,
                    "sliding" => Scheme::Sliding,
                    "double" => Scheme::DoubleWindow,
                    _ => return Err(bad(key, "expected naive, sliding, or double")),
                };
            }
            "tau_gen" => self.tau_gen = parse_one(key, value)?,
            "tau_dec_weak" => self.tau_dec_weak = parse_list(key, value)?,
            "tau_dec_strong" => self.tau_dec_strong = parse_one(key, value)?,
            "t_comm_weak" => self.t_comm_weak = parse_one(key, value)?,
            "t_comm_strong" => self.t_comm_strong = parse_one(key, value)?,
            "sched_d" => self.sched_d = parse_one(key, value)?,
            "r_op_factor" => self.r_op_factor = parse_one(key, value)?,
            "r_buf" => self.r_buf = Some(parse_one(key, value)?),
            "alpha" => self.alpha = parse_one(key, value)?,
            "n_gate" => self.n_gate = parse_one(key, value)?,
            "gamma" => self.gammas = parse_list(key, value)?,
            "ensemble" => self.ensemble = parse_one(key, value)?,
            "divergence_cap" => self.divergence_cap = parse_one(key, value)?,
            "trajectory_samples" => self.trajectory_samples = parse_one(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Parse the flat key-value format.
    pub fn parse_lines<'a>(
        lines: impl Iterator<Item = &'a str>,
        base: ExperimentConfig,
    ) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = base;
        let mut seen = BTreeSet::new();
        for (no, raw) in lines.enumerate() {
            let line = raw.trim();
            let line = match line.find('#') {
                Some(idx) => line[..idx].trim(),
                None => line,
            };
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Malformed(no + 1, raw.to_string()))?;
            let key = key.trim();
            cfg.set(key, value.trim())?;
            seen.insert(key.to_string());
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_lines(text.lines(), ExperimentConfig::default())
    }

    /// Validate every referenced parameter before any work starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, message: String| ConfigError::BadValue { key: key.into(), message };
        for &d in &self.distances {
            crate::code::SurfaceCodeSpec::new(d, d.max(1) * self.rounds_factor.max(1), self.basis)
                .map_err(|e| bad("d", e.to_string()))?;
        }
        for &p in &self.p_values {
            crate::code::NoiseParams::new(p).map_err(|e| bad("p", e.to_string()))?;
        }
        if self.rounds_factor == 0 {
            return Err(bad("rounds_factor", "must be >= 1".into()));
        }
        if self.shots == 0 {
            return Err(bad("shots", "must be >= 1".into()));
        }
        if self.g_th_db < 0.0 || self.g_th_max_db < 0.0 {
            return Err(bad("gth_db", "thresholds must be nonnegative".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(bad("epsilon", "must be > 0".into()));
        }
        if self.bin_width_db <= 0.0 {
            return Err(bad("bin_width_db", "must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.audit_rate) {
            return Err(bad("audit_rate", "must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.bp_damping) {
            return Err(bad("bp_damping", "must lie in [0, 1)".into()));
        }
        for &fw in &self.tau_dec_weak {
            let params = self.scheduler_params(fw, self.gammas.first().copied().unwrap_or(0.0));
            params.validate().map_err(|e| bad("tau_dec_weak", e.to_string()))?;
        }
        for &g in &self.gammas {
            if !(0.0..=1.0).contains(&g) {
                return Err(bad("gamma", "must lie in [0, 1]".into()));
            }
        }
        if self.ensemble == 0 || self.n_gate == 0 {
            return Err(bad("ensemble", "ensemble and n_gate must be >= 1".into()));
        }
        Ok(())
    }

    /// Scheduler parameters for one weak decode time and switching rate.
    pub fn scheduler_params(&self, tau_dec_weak: f64, gamma: f64) -> crate::backlog::SchedulerParams {
        crate::backlog::SchedulerParams {
            tau_gen: self.tau_gen,
            tau_dec_weak,
            tau_dec_strong: self.tau_dec_strong,
            t_comm_weak: self.t_comm_weak,
            t_comm_strong: self.t_comm_strong,
            d: self.sched_d,
            r_op: self.r_op_factor * self.sched_d as f64,
            n_gate: self.n_gate,
            gamma_switch: gamma,
            scheme: self.scheme,
            r_buf: self.r_buf.unwrap_or(self.sched_d as f64),
            alpha: self.alpha,
            divergence_cap: self.divergence_cap,
        }
    }

    /// Canonical `key = value` echo; parsing it reproduces the config.
    pub fn echo_lines(&self) -> Vec<String> {
        fn join<T: std::fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let mut lines = vec![
            format!("experiment = {}", self.kind.name()),
            format!("seed = {}", self.seed),
            format!("out = {}", self.out_dir.display()),
            format!("shots = {}", self.shots),
            format!("d = {}", join(&self.distances)),
            format!("p = {}", join(&self.p_values)),
            format!("rounds_factor = {}", self.rounds_factor),
            format!("basis = {}", self.basis),
            format!("decoder = {}", self.decoder),
            format!("gth_db = {}", self.g_th_db),
            format!("gth_max_db = {}", self.g_th_max_db),
            format!("epsilon = {}", self.epsilon),
            format!("bin_width_db = {}", self.bin_width_db),
            format!("parallel_launch = {}", self.parallel_launch),
            format!("strong_eval = {}", self.strong_eval.name()),
            format!("audit_rate = {}", self.audit_rate),
            format!("bp_iters = {}", self.bp_iters),
            format!("bp_damping = {}", self.bp_damping),
            format!("scheme = {}", self.scheme),
            format!("tau_gen = {}", self.tau_gen),
            format!("tau_dec_weak = {}", join(&self.tau_dec_weak)),
            format!("tau_dec_strong = {}", self.tau_dec_strong),
            format!("t_comm_weak = {}", self.t_comm_weak),
            format!("t_comm_strong = {}", self.t_comm_strong),
            format!("sched_d = {}", self.sched_d),
            format!("r_op_factor = {}", self.r_op_factor),
            format!("alpha = {}", self.alpha),
            format!("n_gate = {}", self.n_gate),
            format!("gamma = {}", join(&self.gammas)),
            format!("ensemble = {}", self.ensemble),
            format!("divergence_cap = {}", self.divergence_cap),
            format!("trajectory_samples = {}", self.trajectory_samples),
        ];
        if let Some(r_buf) = self.r_buf {
            lines.push(format!("r_buf = {r_buf}"));
        }
        lines
    }
}
