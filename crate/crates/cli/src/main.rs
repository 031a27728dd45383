use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use skigp::experiments::{self, data, Experiment, ExperimentConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExperimentArg {
    Reconstruct,
    KernelLearn,
    Infill,
}

impl From<ExperimentArg> for Experiment {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::Reconstruct => Experiment::Reconstruct,
            ExperimentArg::KernelLearn => Experiment::KernelLearn,
            ExperimentArg::Infill => Experiment::Infill,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Linear,
    Cubic,
    Idw,
    Globalgp,
}

impl SchemeArg {
    fn key(self) -> &'static str {
        match self {
            SchemeArg::Linear => "linear",
            SchemeArg::Cubic => "cubic",
            SchemeArg::Idw => "idw",
            SchemeArg::Globalgp => "globalgp",
        }
    }
}

/// Scalable Gaussian process experiments with structured kernel interpolation.
#[derive(Debug, Parser)]
#[command(name = "skigp", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: ExperimentArg,
    /// Config file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated grid sizes; overrides `m_sweep`.
    #[arg(long = "m-sweep", value_delimiter = ',')]
    m_sweep: Option<Vec<usize>>,
    /// Interpolation scheme; overrides `schemes`.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Overrides `lengthscale`.
    #[arg(long)]
    lengthscale: Option<f64>,
}

fn load_config(args: &Args) -> skigp::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    let experiment = Experiment::from(args.experiment);
    match cfg.experiment {
        Some(e) if e != experiment => {
            return Err(skigp::Error::Config(format!(
                "config is for `{}` but `{}` was requested",
                e.name(),
                experiment.name()
            )))
        }
        _ => cfg.experiment = Some(experiment),
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(ms) = &args.m_sweep {
        let joined: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
        cfg.set("m_sweep", &joined.join(","))?;
    }
    if let Some(s) = args.scheme {
        cfg.set("schemes", s.key())?;
    }
    if let Some(l) = args.lengthscale {
        cfg.set("lengthscale", &l.to_string())?;
    }
    Ok(cfg)
}

fn run(args: &Args) -> skigp::Result<()> {
    let cfg = load_config(args)?;
    let experiment = Experiment::from(args.experiment);
    if let Some(path) = &cfg.data {
        eprintln!("{}: {}", path.display(), data::describe(&data::ingest_csv(path)?));
    }
    let output = experiments::run(experiment, &cfg)?;
    for row in &output.rows {
        let m = row.m.map_or("-".to_string(), |m| m.to_string());
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4e}"));
        println!(
            "{:<10} m={:<7} build={:.3}s solve={} mae={} smae={} {}",
            row.method,
            m,
            row.build_time_s,
            row.solve_time_s.map_or("-".to_string(), |t| format!("{t:.3}s")),
            fmt(row.mae),
            fmt(row.smae),
            row.notes
        );
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out").join(experiment.name()));
    for path in output.write(&dir, experiment, &cfg)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
