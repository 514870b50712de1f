use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isg_core::bench::{run_bench, run_solver, summarize, write_summary, BenchConfig, SolverConfig, SolverKind, CSV_HEADER};
use isg_core::driver::SolveOptions;
use isg_core::exact::Acceptance;
use isg_core::game::{game_to_json_with_meta, generate_game, parse_game_document, GameSpec, WeightDistribution};
use isg_core::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "isg", version, about = "Coalition structure generation for induced subgraph games")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug, -vvv per-evaluation optimizer trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random fully connected game and write it as JSON.
    Generate(GenerateArgs),
    /// Solve a game file and print a JSON report.
    Solve(SolveArgs),
    /// Sweep solvers over seeded random games and write a results CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Normal,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct DistributionArgs {
    /// Mean of the normal distribution.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mean: f64,
    /// Standard deviation of the normal distribution.
    #[arg(long, default_value_t = 1.0)]
    stddev: f64,
    /// Lower bound of the uniform distribution.
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    low: f64,
    /// Upper bound of the uniform distribution.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    high: f64,
}

impl DistributionArgs {
    fn build(&self, kind: DistKind) -> WeightDistribution {
        match kind {
            DistKind::Normal => WeightDistribution::Normal { mean: self.mean, stddev: self.stddev },
            DistKind::Uniform => WeightDistribution::Uniform { low: self.low, high: self.high },
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "normal")]
    distribution: DistKind,
    #[command(flatten)]
    params: DistributionArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Game JSON file.
    #[arg(long)]
    game: PathBuf,
    #[arg(long, default_value = "exact")]
    solver: String,
    /// QAOA depth.
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1024)]
    shots: usize,
    /// Only accept splits that strictly increase value.
    #[arg(long)]
    strict: bool,
    /// Evaluate queued coalitions concurrently.
    #[arg(long)]
    parallel: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 4)]
    n_min: usize,
    #[arg(long, default_value_t = 14)]
    n_max: usize,
    #[arg(long, default_value_t = 25)]
    games_per_n: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["normal", "uniform"])]
    distributions: Vec<DistKind>,
    #[command(flatten)]
    params: DistributionArgs,
    #[arg(long, value_delimiter = ',', default_values = ["exact", "quacs-classical", "quacs-qaoa"])]
    solvers: Vec<String>,
    #[arg(long, default_value_t = 1)]
    p_min: usize,
    #[arg(long, default_value_t = 1)]
    p_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1024)]
    shots: usize,
    /// Skip the exact solver above this agent count.
    #[arg(long, default_value_t = isg_core::bench::DEFAULT_EXACT_MAX_N)]
    exact_max_n: usize,
    /// Results CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Summary CSV path; defaults to `<out stem>.summary.csv`.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Also print the summary to stdout in this format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

enum Failure {
    Validation(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (kind, message, code) = match failure {
                Failure::Validation(m) => ("validation", m, 2),
                Failure::Solver(m) => ("solver", m, 3),
            };
            eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
            ExitCode::from(code)
        }
    }
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let spec = GameSpec { n: args.n, distribution: args.params.build(args.distribution), seed: args.seed };
    let game = generate_game(&spec)?;
    let text = game_to_json_with_meta(&game, Some(&spec)) + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(path, e))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Validation(format!("{}: {e}", path.display()))
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.game).map_err(|e| io_failure(&args.game, e))?;
    let doc = parse_game_document(&text)?;
    let solver: SolverKind = args.solver.parse()?;
    if args.p == 0 || args.shots == 0 {
        return Err(Failure::Validation("--p and --shots must be at least 1".into()));
    }
    let config = SolverConfig {
        p: args.p,
        shots: args.shots,
        seed: args.seed,
        options: SolveOptions {
            acceptance: if args.strict { Acceptance::Strict } else { Acceptance::Weak },
            parallel: args.parallel,
        },
        ..SolverConfig::default()
    };
    let outcome = run_solver(&doc.game, solver, &config)?;
    let p = if solver == SolverKind::QuacsQaoa { args.p } else { 0 };

    match args.format {
        Format::Json => {
            let mut report = json!({
                "solver": solver.name(),
                "n": doc.game.n(),
                "value": outcome.value,
                "structure": outcome.structure.labels(),
                "time_s": outcome.time_s,
            });
            if solver == SolverKind::QuacsQaoa {
                report["p"] = json!(args.p);
                report["shots"] = json!(args.shots);
                report["seed"] = json!(args.seed);
            }
            if let Some(run) = &outcome.run {
                report["oracle_calls"] = json!(run.oracle_calls);
                report["max_qubits"] = json!(run.max_qubits);
                report["history"] = serde_json::to_value(&run.history).expect("history serializes");
            }
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Format::Csv => {
            let distribution = doc.distribution.map_or("file", |d| d.name());
            let seed = doc.seed.unwrap_or(args.seed);
            println!("{}", CSV_HEADER.join(","));
            println!("{},{distribution},{seed},{solver},{p},{},NaN,{}", doc.game.n(), outcome.value, outcome.time_s);
        }
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let solvers = args
        .solvers
        .iter()
        .map(|s| s.parse::<SolverKind>())
        .collect::<Result<Vec<_>, _>>()?;
    let config = BenchConfig {
        n_min: args.n_min,
        n_max: args.n_max,
        games_per_n: args.games_per_n,
        distributions: args.distributions.iter().map(|&d| args.params.build(d)).collect(),
        solvers,
        p_min: args.p_min,
        p_max: args.p_max,
        seed: args.seed,
        shots: args.shots,
        exact_max_n: args.exact_max_n,
        ..BenchConfig::default()
    };
    config.validate()?;
    let file = File::create(&args.out).map_err(|e| io_failure(&args.out, e))?;
    let rows = run_bench(&config, BufWriter::new(file))?;

    let summary = summarize(&rows);
    let summary_path = args.summary.unwrap_or_else(|| {
        let stem = args.out.file_stem().map_or("results".into(), |s| s.to_string_lossy().into_owned());
        args.out.with_file_name(format!("{stem}.summary.csv"))
    });
    let file = File::create(&summary_path).map_err(|e| io_failure(&summary_path, e))?;
    write_summary(&summary, BufWriter::new(file))?;
    match args.format {
        Some(Format::Json) => println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes")),
        Some(Format::Csv) => write_summary(&summary, std::io::stdout())?,
        None => {}
    }
    Ok(())
}
