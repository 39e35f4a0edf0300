//! Command-line front end for the decoding laboratory.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use switchlab::harness::{run_experiment, ConfigError, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "switchlab",
    version,
    about = "Hybrid weak/strong surface-code decoding experiments: memory runs, \
             soft-output spectra, threshold tradeoffs, and real-time backlog models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Logical error rates (weak, strong, switched) over a (d, p) grid.
    Memory(CommonArgs),
    /// Signed soft-output histograms.
    Gaps(CommonArgs),
    /// Gap spectrum with conditional error rates per bin.
    Spectrum(CommonArgs),
    /// Error rate and switching rate over a threshold sweep.
    Tradeoff(CommonArgs),
    /// Backlog trajectories and divergence probabilities per scheme.
    Backlog(CommonArgs),
    /// Double-window sufficient-condition bounds.
    Bounds(CommonArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Memory(_) => ExperimentKind::Memory,
            Command::Gaps(_) => ExperimentKind::Gaps,
            Command::Spectrum(_) => ExperimentKind::Spectrum,
            Command::Tradeoff(_) => ExperimentKind::Tradeoff,
            Command::Backlog(_) => ExperimentKind::Backlog,
            Command::Bounds(_) => ExperimentKind::Bounds,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Memory(a)
            | Command::Gaps(a)
            | Command::Spectrum(a)
            | Command::Tradeoff(a)
            | Command::Backlog(a)
            | Command::Bounds(a) => a,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file: one `key = value` per line, `#` comments.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV tables and the JSON run summary.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shots per grid point.
    #[arg(long)]
    shots: Option<u64>,
    /// Code distances, comma separated (odd, >= 3).
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    /// Physical error rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Switching threshold in dB.
    #[arg(long = "gth-db")]
    gth_db: Option<f64>,
    /// Weak decoder pair: mwpm (complementary gap) or uf (cluster gap).
    #[arg(long)]
    decoder: Option<String>,
    /// Online decoding scheme: naive, sliding, or double.
    #[arg(long)]
    scheme: Option<String>,
    /// Switching rates per d-round window, comma separated.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
}

fn build_config(command: &Command) -> Result<ExperimentConfig, ConfigError> {
    let args = command.args();
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.kind = command.kind();
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(shots) = args.shots {
        cfg.set("shots", &shots.to_string())?;
    }
    if let Some(d) = &args.d {
        let list = d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        cfg.set("d", &list)?;
    }
    if let Some(p) = &args.p {
        let list = p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        cfg.set("p", &list)?;
    }
    if let Some(g) = args.gth_db {
        cfg.set("gth_db", &g.to_string())?;
    }
    if let Some(decoder) = &args.decoder {
        cfg.set("decoder", decoder)?;
    }
    if let Some(scheme) = &args.scheme {
        cfg.set("scheme", scheme)?;
    }
    if let Some(gamma) = &args.gamma {
        let list = gamma.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        cfg.set("gamma", &list)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let started = Instant::now();
    let output = run_experiment(cfg);
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating output directory {}", cfg.out_dir.display()))?;
    let mut table_files = Vec::new();
    for table in &output.tables {
        let path = cfg.out_dir.join(format!("{}.csv", table.name));
        let mut file = std::fs::File::create(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        table.write_csv(&mut file)?;
        eprintln!("wrote {} ({} rows)", path.display(), table.rows.len());
        table_files.push(serde_json::json!({
            "name": table.name,
            "path": path.display().to_string(),
            "rows": table.rows.len(),
        }));
    }
    let summary = serde_json::json!({
        "experiment": cfg.kind.name(),
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": started.elapsed().as_secs_f64(),
        "config": cfg.echo_lines(),
        "tables": table_files,
        "headline": output.headline,
    });
    let summary_path = cfg.out_dir.join("run_summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    eprintln!("wrote {}", summary_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli.command) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("configuration error: {err}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("runtime error: {err:#}");
            ExitCode::from(3)
        }
    }
}
