use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kr_core::harness::{load_config, run_experiment, RunOptions, ScenarioConfig, Stage};
use kr_core::Error;

#[derive(Parser)]
#[command(name = "kr", version, about = "Kaleidoscope-roulette experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play the match and write the observable trajectory.
    Simulate(RunArgs),
    /// Also write the word sequence and match log.
    Verbalize(RunArgs),
    /// Certify quasirandomness and test for resonance.
    Resonance(RunArgs),
    /// Backtest the predictive controller.
    Bet(RunArgs),
    /// Every stage, with a manifest of all artifacts.
    Run(RunArgs),
    /// Serve the HTTP session protocol.
    Serve(ServeArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the generator's hidden parameters next to the run.
    #[arg(long)]
    reveal_hidden: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Config used when a client creates a session without a body.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Input(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = match e.field() {
            Some(field) => format!("{} ({field}): {e}", e.code()),
            None => format!("{}: {e}", e.code()),
        };
        if e.is_validation() {
            Failure::Input(message)
        } else {
            Failure::Runtime(message)
        }
    }
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<ScenarioConfig, Failure> {
    let mut config = load_config(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run_stage(stage: Stage, args: RunArgs) -> Result<(), Failure> {
    let config = load(&args.config, args.seed)?;
    let opts = RunOptions {
        stage,
        out_dir: args.out,
        reveal_hidden: args.reveal_hidden,
    };
    let outcome = run_experiment(&config, &opts)?;
    let summary = serde_json::json!({
        "scenario": outcome.manifest.scenario,
        "seed": outcome.manifest.seed,
        "run_hash": outcome.manifest.run_hash,
        "words": outcome.words.len(),
        "report": outcome.report,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("report serializes"));
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let config = args.config.as_ref().map(|p| load(p, args.seed)).transpose()?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Runtime(e.to_string()))?;
    eprintln!("listening on http://{}", args.addr);
    runtime
        .block_on(kr_session::serve(args.addr, config))
        .map_err(|e| Failure::Runtime(format!("io: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => run_stage(Stage::Simulate, a),
        Command::Verbalize(a) => run_stage(Stage::Verbalize, a),
        Command::Resonance(a) => run_stage(Stage::Resonance, a),
        Command::Bet(a) => run_stage(Stage::Bet, a),
        Command::Run(a) => run_stage(Stage::Run, a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
