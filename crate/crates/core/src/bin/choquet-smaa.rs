use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use choquet_smaa::pipeline::{self, bundled_data_dir, ProfileOutcome, RunConfig, VERIFY_TOLERANCE};
use choquet_smaa::sampler::{DEFAULT_BURN_IN, DEFAULT_THINNING};

/// Hierarchical Choquet composite indicators with stochastic acceptability analysis.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve, sample and write SMAA reports for every preference profile.
    Run(RunArgs),
    /// Re-derive the normalized table from raw data and diff it against a golden file.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Inputs {
    /// Criteria tree (JSON).
    #[arg(long, default_value_os_t = bundled_data_dir().join("eis_hierarchy.json"))]
    hierarchy: PathBuf,
    /// Raw performance table (CSV).
    #[arg(long, default_value_os_t = bundled_data_dir().join("eis_raw.csv"))]
    data: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Preference files, comma separated; defaults to the three bundled profiles.
    #[arg(long, value_delimiter = ',')]
    prefs: Vec<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "burnin", default_value_t = DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long = "thin", default_value_t = DEFAULT_THINNING)]
    thinning: usize,
    /// Independent sampling chains per profile.
    #[arg(long, default_value_t = 4)]
    chains: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Node labels, comma separated; defaults to the root and its children.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<String>>,
    /// Also write every sampled capacity.
    #[arg(long)]
    emit_samples: bool,
    /// Also write the ε-max program in MPS format.
    #[arg(long)]
    emit_lp: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Expected normalized table (CSV).
    #[arg(long, default_value_os_t = bundled_data_dir().join("eis_normalized_expected.csv"))]
    golden: PathBuf,
    #[arg(long, default_value_t = VERIFY_TOLERANCE)]
    tolerance: f64,
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("CHOQUET_SMAA_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("CHOQUET_SMAA_THREADS must be a positive integer, got `{v}`")),
        },
    }
}

fn run(args: RunArgs) -> Result<ExitCode, String> {
    let mut cfg = RunConfig::bundled(args.out);
    cfg.hierarchy = args.inputs.hierarchy;
    cfg.data = args.inputs.data;
    if !args.prefs.is_empty() {
        cfg.prefs = args.prefs;
    }
    cfg.samples = args.samples;
    cfg.seed = args.seed;
    cfg.burn_in = args.burn_in;
    cfg.thinning = args.thinning;
    cfg.chains = args.chains;
    cfg.nodes = args.nodes;
    cfg.emit_samples = args.emit_samples;
    cfg.emit_lp = args.emit_lp;
    cfg.threads = threads_from_env()?;
    let report = pipeline::run(&cfg).map_err(|e| e.to_string())?;
    for p in &report.profiles {
        match &p.outcome {
            ProfileOutcome::Ranked { sampling_epsilon, .. } => println!(
                "{}: ε* = {:.6}, sampled {} capacities at ε = {:.1e}",
                p.name, p.epsilon_star, cfg.samples, sampling_epsilon
            ),
            ProfileOutcome::Incompatible { conflict } => println!(
                "{}: no compatible capacity, conflicting statements {}",
                p.name,
                conflict.join(", ")
            ),
        }
    }
    println!("reports written to {}", cfg.out.display());
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let report = pipeline::verify(&args.inputs.hierarchy, &args.inputs.data, &args.golden, args.tolerance)
        .map_err(|e| e.to_string())?;
    print!("{}", report.render());
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
