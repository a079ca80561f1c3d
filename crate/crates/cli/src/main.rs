use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use ahis_cli::{
    emit_csv, emit_json, exit_code, run_pipeline, AnalysisConfig, CliError, Stages, TimeWindow,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "ahis",
    version,
    about = "Newton diagram, parametrization, metric and heat-trace analysis of a hypersurface germ"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage.
    Analyze(RunArgs),
    /// Newton diagram only.
    Diagram(RunArgs),
    /// Diagram and parametrization.
    Parametrize(RunArgs),
    /// Up to the model operator.
    Metric(RunArgs),
    /// Same as `analyze`.
    Heat(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Polynomial as JSON (`{"dim", "terms"}`) or text (`x1^2 - x2^3`).
    input: PathBuf,
    /// Number of variables for text input.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long = "q-max", default_value = "6")]
    q_max: String,
    #[arg(long = "nr", default_value_t = 512)]
    n_r: usize,
    #[arg(long, default_value_t = 32)]
    modes: usize,
    /// Heat window `start:end:count` in units of the model radius squared.
    #[arg(long = "t", default_value = "1e-4:1e-1:48")]
    t_window: TimeWindow,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long = "max-condition", default_value_t = 1e12)]
    max_condition: f64,
    #[arg(long = "prune-sigmas", default_value_t = 3.0)]
    prune_sigmas: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for CSV plot data.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self, stages: Stages) -> AnalysisConfig {
        AnalysisConfig {
            input: self.input.clone(),
            dim: self.dim,
            epsilon: self.epsilon,
            delta: self.delta,
            q_max: self.q_max.clone(),
            n_r: self.n_r,
            modes: self.modes,
            t_window: self.t_window,
            levels: self.levels,
            max_condition: self.max_condition,
            prune_sigmas: self.prune_sigmas,
            seed: self.seed,
            stages,
        }
    }
}

fn run(args: &RunArgs, stages: Stages) -> Result<i32, CliError> {
    let report = run_pipeline(&args.config(stages))?;
    match &args.out {
        Some(path) => emit_json(&report, path)?,
        None => {
            let s = serde_json::to_string_pretty(&report)?;
            writeln!(std::io::stdout(), "{s}").map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    if let Some(dir) = &args.csv {
        emit_csv(&report, dir)?;
    }
    Ok(exit_code(&report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, stages) = match &cli.command {
        Command::Diagram(a) => (a, Stages::up_to(1)),
        Command::Parametrize(a) => (a, Stages::up_to(2)),
        Command::Metric(a) => (a, Stages::up_to(3)),
        Command::Analyze(a) | Command::Heat(a) => (a, Stages::ALL),
    };
    let code = match run(args, stages) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ahis: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
