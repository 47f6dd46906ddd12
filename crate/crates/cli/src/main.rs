mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::{disentangle, games, hamiltonian, states, verifiers, Ctx};
use config::{merge_params, resolve, ConfigFile, Format, GlobalArgs};
use error::CliError;
use output::{write_all, Report, RunInfo};

#[derive(Parser, Debug)]
#[command(name = "qphlab", version, about = "Quantum polynomial-hierarchy toolkit: states, games, verifiers, Hamiltonians")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SWAP-test acceptance on random pairs against the projector.
    SwapProb(states::SwapProbArgs),
    /// Product-test effect versus the symmetric projector.
    ProductProb(states::ProductProbArgs),
    /// Post-measurement disturbance against 2√ε.
    GentleMeasure(states::GentleMeasureArgs),
    /// Solve a quantified game instance.
    GameSolve(games::GameSolveArgs),
    /// Pure and mixed values of the copy game.
    CopyGame(games::CopyGameArgs),
    /// ∃∀ = ∀∃ on random two-slot mixed games.
    MinimaxCheck(games::MinimaxCheckArgs),
    /// Acceptance curve of the compiled QMA(2) verifier.
    Qma2Curve(verifiers::Qma2CurveArgs),
    /// Compile a two-round game to three rounds and verify it.
    CompileQsigma3(verifiers::CompileQsigma3Args),
    /// Peaked-distribution sampler on random or given instances.
    Peaked(disentangle::PeakedArgs),
    /// Apply the disentangling channel to input ensembles.
    GammaChannel(disentangle::GammaChannelArgs),
    /// Repeated SWAP-test amplification toy.
    AmplifyToy(disentangle::AmplifyToyArgs),
    /// Clock Hamiltonians of the circuit corpus.
    Kitaev(hamiltonian::KitaevArgs),
    /// Quantified Hamiltonian reduction of the built-in fixtures.
    PshReduce(hamiltonian::PshReduceArgs),
    /// Complement reduction H → −H with brute-force comparison.
    Complement(hamiltonian::ComplementArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SwapProb(_) => "swap-prob",
            Command::ProductProb(_) => "product-prob",
            Command::GentleMeasure(_) => "gentle-measure",
            Command::GameSolve(_) => "game-solve",
            Command::CopyGame(_) => "copy-game",
            Command::MinimaxCheck(_) => "minimax-check",
            Command::Qma2Curve(_) => "qma2-curve",
            Command::CompileQsigma3(_) => "compile-qsigma3",
            Command::Peaked(_) => "peaked",
            Command::GammaChannel(_) => "gamma-channel",
            Command::AmplifyToy(_) => "amplify-toy",
            Command::Kitaev(_) => "kitaev",
            Command::PshReduce(_) => "psh-reduce",
            Command::Complement(_) => "complement",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Qma2Curve(_) | Command::Kitaev(_) | Command::SwapProb(_) => Format::Csv,
            _ => Format::Json,
        }
    }
}

fn go<P, F>(file: &ConfigFile, flags: &P, ctx: &Ctx, f: F) -> Result<Report, CliError>
where
    P: Serialize + DeserializeOwned,
    F: FnOnce(P, &Ctx) -> Result<Report, CliError>,
{
    f(merge_params(&file.params, flags)?, ctx)
}

fn dispatch(cmd: &Command, file: &ConfigFile, ctx: &Ctx) -> Result<Report, CliError> {
    match cmd {
        Command::SwapProb(a) => go(file, a, ctx, states::swap_prob),
        Command::ProductProb(a) => go(file, a, ctx, states::product_prob),
        Command::GentleMeasure(a) => go(file, a, ctx, states::gentle_measure),
        Command::GameSolve(a) => go(file, a, ctx, games::game_solve),
        Command::CopyGame(a) => go(file, a, ctx, games::copy_game),
        Command::MinimaxCheck(a) => go(file, a, ctx, games::minimax_check),
        Command::Qma2Curve(a) => go(file, a, ctx, verifiers::qma2_curve),
        Command::CompileQsigma3(a) => go(file, a, ctx, verifiers::compile_qsigma3),
        Command::Peaked(a) => go(file, a, ctx, disentangle::peaked),
        Command::GammaChannel(a) => go(file, a, ctx, disentangle::gamma_channel_cmd),
        Command::AmplifyToy(a) => go(file, a, ctx, disentangle::amplify_toy),
        Command::Kitaev(a) => go(file, a, ctx, hamiltonian::kitaev),
        Command::PshReduce(a) => go(file, a, ctx, hamiltonian::psh_reduce),
        Command::Complement(a) => go(file, a, ctx, hamiltonian::complement),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let start = Instant::now();
    let name = cli.command.name();
    let file = match &cli.global.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let settings = resolve(&cli.global, &file, name)?;
    if let Some(n) = settings.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failure(format!("thread pool: {e}")))?;
    }
    let ctx = Ctx { name, seed: settings.seed };
    let report = dispatch(&cli.command, &file, &ctx)?;
    let info = RunInfo {
        subcommand: name,
        seed: settings.seed,
        format: settings.format.unwrap_or_else(|| cli.command.default_format()),
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_all(settings.out.as_deref(), &report, &info)?;
    Ok(report.pass != Some(false))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("qphlab {name}: check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("qphlab {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
