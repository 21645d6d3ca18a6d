use avoc::certify::{
    emit_report, validate, Certificate, ReportFormat, RunConfig,
};
use avoc::clustering::Clustering;
use avoc::error::Error;
use avoc::exact::solve;
use avoc::ingest::{ingest_csv, read_labels, write_csv, write_labels};
use avoc::kmeans::{multistart, KMeansConfig};
use avoc::synthetic::generate_synthetic;
use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_DEGRADED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "avoc",
    about = "Validate a clustering by certifying a lower bound through an anticlustering decomposition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic Gaussian mixture dataset
    Generate(GenerateArgs),
    /// Compute a multi-start k-means clustering
    Kmeans(KmeansArgs),
    /// Validate a clustering and certify an optimality gap
    Validate(ValidateArgs),
    /// Solve a small instance exactly by branch and bound
    Exact(ExactArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of points
    #[arg(short = 'n', long)]
    n: usize,
    /// Number of mixture components
    #[arg(short = 'k', long)]
    k: usize,
    /// Component standard deviation
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Dimensions
    #[arg(short = 'd', long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(short = 'o', long)]
    out: PathBuf,
    /// Optional path for the ground-truth labels
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct KmeansArgs {
    /// Input dataset CSV
    #[arg(short = 'i', long)]
    input: PathBuf,
    #[arg(long, default_value_t = false)]
    has_header: bool,
    #[arg(short = 'k', long)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the cluster labels
    #[arg(long)]
    labels_out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Input dataset CSV
    #[arg(short = 'i', long)]
    input: PathBuf,
    #[arg(long, default_value_t = false)]
    has_header: bool,
    /// Labels CSV for the clustering to validate; computed by multi-start
    /// k-means when omitted
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(short = 'k', long)]
    k: usize,
    /// Number of anticlusters
    #[arg(short = 't', long)]
    t: usize,
    /// Candidate partitions in the initialization phase
    #[arg(short = 'r', long, default_value_t = 15)]
    restarts: usize,
    /// Multi-start restarts when computing the clustering internally
    #[arg(long, default_value_t = 1000)]
    kmeans_restarts: usize,
    /// Minimum gap threshold in percent
    #[arg(long, default_value_t = 0.001)]
    eps_gamma: f64,
    /// Swap time limit in seconds (default 4*T minutes)
    #[arg(long)]
    time_limit: Option<f64>,
    /// Certification budget per anticluster in seconds
    #[arg(long, default_value_t = 60.0)]
    budget: f64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Report format
    #[arg(long, default_value = "text", value_parser = ["text", "json"])]
    format: String,
}

#[derive(Args)]
struct ExactArgs {
    /// Input dataset CSV
    #[arg(short = 'i', long)]
    input: PathBuf,
    #[arg(long, default_value_t = false)]
    has_header: bool,
    #[arg(short = 'k', long)]
    k: usize,
    /// Time budget in seconds
    #[arg(long, default_value_t = 60.0)]
    budget: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not usage errors
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidConfig(_) | Error::InvalidBudget(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            })
        }
    }
}

fn run(cli: Cli) -> avoc::Result<u8> {
    match cli.command {
        Command::Generate(args) => {
            let mut rng = StdRng::seed_from_u64(args.seed);
            let (ds, labels) = generate_synthetic(args.n, args.k, args.sigma, args.dim, &mut rng)?;
            write_csv(&args.out, &ds)?;
            if let Some(path) = args.labels_out {
                write_labels(&path, &labels)?;
            }
            println!("wrote {} points in {} dimensions to {}", ds.n(), ds.d(), args.out.display());
            Ok(EXIT_OK)
        }
        Command::Kmeans(args) => {
            let ds = ingest_csv(&args.input, args.has_header)?;
            let mut cfg = KMeansConfig::new(args.k);
            cfg.restarts = args.restarts;
            cfg.seed = args.seed;
            let clustering = multistart(&ds, &cfg)?;
            write_labels(&args.labels_out, clustering.assignment())?;
            println!("N={} D={} K={} SSE={:.6}", ds.n(), ds.d(), args.k, clustering.sse());
            Ok(EXIT_OK)
        }
        Command::Validate(args) => {
            if let Some(threads) = args.threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()
                    .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            }
            let ds = ingest_csv(&args.input, args.has_header)?;
            let mut config = RunConfig::new(args.k, args.t);
            config.restarts_kmeans = args.kmeans_restarts;
            config.restarts_anticluster = args.restarts;
            config.eps_gamma_pct = args.eps_gamma;
            config.swap_time_limit_s = args.time_limit;
            config.certify_budget_s = args.budget;
            config.seed = args.seed;

            let clustering = match args.labels {
                Some(path) => {
                    let labels = read_labels(&path)?;
                    Clustering::new(&ds, labels, args.k)?
                }
                None => multistart(&ds, &config.kmeans_config())?,
            };
            let run = validate(&ds, &clustering, &config)?;
            emit(&run.certificate, &args.format, args.report_out.as_deref())?;
            Ok(if run.certificate.degraded {
                EXIT_DEGRADED
            } else {
                EXIT_OK
            })
        }
        Command::Exact(args) => {
            let ds = ingest_csv(&args.input, args.has_header)?;
            let subset: Vec<usize> = (0..ds.n()).collect();
            let result = solve(&ds, &subset, args.k, f64::INFINITY, args.budget)?;
            println!(
                "status={:?} value_lb={:.9} value_ub={:.9} nodes={} time_s={:.3}",
                result.status, result.value_lb, result.value_ub, result.nodes_explored,
                result.time_spent
            );
            Ok(EXIT_OK)
        }
    }
}

fn emit(cert: &Certificate, format: &str, out: Option<&std::path::Path>) -> avoc::Result<()> {
    let format = if format == "json" {
        ReportFormat::Json
    } else {
        ReportFormat::Text
    };
    let report = emit_report(cert, format)?;
    match out {
        Some(path) => std::fs::write(path, report)?,
        None => print!("{report}"),
    }
    Ok(())
}
