use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ngmac::commands;
use ngmac::config::RunConfig;
use ngmac_core::capacity::OptimizerConfig;
use ngmac_core::correlations::DEFAULT_ENUMERATION_CAP;
use ngmac_core::ChannelType;

#[derive(Parser)]
#[command(name = "ngmac", version, about = "Sum-capacities of nonlocal-game multiple access channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacities over an eta grid, written as CSV.
    Sweep(RunArgs),
    /// Randomized identity checks and perfect-box hypotheses.
    Verify(VerifyArgs),
    /// Recompute the comparison table for the (1, 0) channels.
    Table(TableArgs),
    /// Optimal classical win probability by brute force.
    GameValue(GameValueArgs),
    /// Write a built-in box (or a channel matrix) as CSV.
    BoxExport(BoxExportArgs),
    /// Upper bound from a user-supplied vertex file, written as CSV.
    VertexBound(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    game: Option<String>,
    #[arg(long, value_parser = ["1", "2"])]
    channel_type: Option<String>,
    /// start:stop:points
    #[arg(long)]
    eta_grid: Option<String>,
    /// Comma list of L-exact, L-bound, Q-lower, Q-exact, NS-exact, vertex-file:<path>
    #[arg(long)]
    resources: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    vertex_file: Option<PathBuf>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random (π, encoder, channel) triples per game.
    #[arg(long, default_value_t = 1000)]
    triples: usize,
    /// Replace sampled channels with one that breaks constant branch noise.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GameValueArgs {
    #[arg(long)]
    game: String,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u64,
}

#[derive(Args)]
struct BoxExportArgs {
    /// pr, tsirelson, magic-square, mpp:<n> or local:<game>
    #[arg(long = "box", conflicts_with = "game")]
    name: Option<String>,
    /// Export the game's perfect box, or its channel with --channel.
    #[arg(long)]
    game: Option<String>,
    /// Export the channel matrix of --game instead of a box.
    #[arg(long, requires = "game")]
    channel: bool,
    #[arg(long, value_parser = ["1", "2"], default_value = "2")]
    channel_type: String,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self, vertex_only: bool) -> Result<RunConfig> {
        let resources = if vertex_only {
            Some(self.resources.unwrap_or_else(|| "vertex-file".into()))
        } else {
            self.resources
        };
        let path = |p: Option<PathBuf>| p.map(|p| p.display().to_string());
        RunConfig::load(
            self.config.as_deref(),
            &[
                ("game", self.game),
                ("channel_type", self.channel_type),
                ("eta_grid", self.eta_grid),
                ("resources", resources),
                ("seed", self.seed.map(|s| s.to_string())),
                ("out", path(self.out)),
                ("vertex_file", path(self.vertex_file)),
                ("restarts", self.restarts.map(|r| r.to_string())),
            ],
        )
    }
}

fn family(label: &str) -> ChannelType {
    if label == "1" {
        ChannelType::TypeI
    } else {
        ChannelType::TypeII
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep(args) => {
            let cfg = args.into_config(false)?;
            sweep(&cfg)?;
        }
        Command::VertexBound(args) => {
            let cfg = args.into_config(true)?;
            sweep(&cfg)?;
        }
        Command::Verify(args) => {
            let report = commands::verify(args.seed, args.triples, args.inject_fault)?;
            println!("{report}");
            if !report.all_passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Table(args) => {
            let cfg = OptimizerConfig {
                seed: args.seed,
                ..OptimizerConfig::default()
            };
            print!("{}", commands::render_table(&commands::table_rows(&cfg)?));
        }
        Command::GameValue(args) => print!("{}", commands::game_value(&args.game, args.cap)?),
        Command::BoxExport(args) => {
            let text = match (&args.name, &args.game) {
                (_, Some(g)) if args.channel => commands::channel_export(g, family(&args.channel_type), args.eta)?,
                (Some(name), _) => commands::box_export(name, DEFAULT_ENUMERATION_CAP)?,
                (None, Some(g)) => commands::box_export(g, DEFAULT_ENUMERATION_CAP)?,
                (None, None) => anyhow::bail!("give --box <name> or --game <name>"),
            };
            emit(&text, args.out.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(cfg: &RunConfig) -> Result<()> {
    let output = commands::sweep(cfg)?;
    for w in &output.warnings {
        eprintln!("{w}");
    }
    emit(&output.csv, cfg.out.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
