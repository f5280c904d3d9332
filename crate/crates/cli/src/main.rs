//! `bnmix` command-line tool: learn, sample, impute and bench.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bnmix", version, about = "Bayesian networks for mixed discrete/continuous data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn structure and parameters from a CSV file.
    Learn(LearnArgs),
    /// Draw forward samples from a saved network.
    Sample(SampleArgs),
    /// Fill empty cells of a CSV file from a saved network.
    Impute(ImputeArgs),
    /// Run the discretized-versus-mixed learning matrix.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ScoreArg {
    /// Mixed mutual information on the raw columns.
    MiMixed,
    /// Mutual information on equal-frequency bins.
    MiDisc,
    Ll,
    Bic,
    Aic,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SearchArg {
    Hc,
    Evo,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ParamsArg {
    Mixed,
    Disc,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Sample,
    Mode,
}

#[derive(Args, Clone, Debug)]
struct EvoArgs {
    /// Population size of the evolutionary search.
    #[arg(long, default_value_t = 20)]
    population: usize,
    #[arg(long, default_value_t = 100)]
    generations: usize,
    #[arg(long, default_value_t = 0.8)]
    mutation_rate: f64,
    #[arg(long, default_value_t = 0.8)]
    crossover_rate: f64,
    #[arg(long, default_value_t = 3)]
    tournament: usize,
    /// Generations without improvement before stopping.
    #[arg(long, default_value_t = 15)]
    stagnation: usize,
}

#[derive(Args, Debug)]
struct LearnArgs {
    #[arg(long)]
    data: PathBuf,
    /// Two-column `name,kind` CSV overriding kind inference.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "mi-mixed")]
    score: ScoreArg,
    #[arg(long, value_enum, default_value = "hc")]
    search: SearchArg,
    #[arg(long, value_enum, default_value = "mixed")]
    params: ParamsArg,
    #[arg(long, default_value_t = 5)]
    bins: usize,
    #[arg(long)]
    max_parents: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Smallest admissible discrete-parent group.
    #[arg(long, default_value_t = 2)]
    min_group_size: usize,
    /// Additive smoothing for probability tables.
    #[arg(long, default_value_t = 0.0)]
    laplace: f64,
    /// Also write the graph in DOT format.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[command(flatten)]
    evo: EvoArgs,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ImputeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "sample")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Cell content that marks a missing value.
    #[arg(long, default_value = "")]
    na: String,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["spec", "preset", "data"])))]
struct BenchArgs {
    /// JSON generator spec for a synthetic ground truth.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Built-in generator shape: healthcare, sangiovese, mehra, reservoirs or social.
    #[arg(long)]
    preset: Option<String>,
    /// Real data; no ground truth is available.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, requires = "data")]
    schema: Option<PathBuf>,
    /// Search algorithm; repeat to run several.
    #[arg(long, value_enum, default_values = ["hc"])]
    search: Vec<SearchArg>,
    /// Number of seeds, counted up from `--seed`.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 5)]
    bins: usize,
    #[arg(long)]
    max_parents: Option<usize>,
    #[arg(long, value_enum, default_value = "sample")]
    strategy: StrategyArg,
    /// Restoration passes per cell.
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[command(flatten)]
    evo: EvoArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the bad-input status
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Learn(args) => commands::learn(args),
        Command::Sample(args) => commands::sample(args),
        Command::Impute(args) => commands::impute(args),
        Command::Bench(args) => commands::bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
