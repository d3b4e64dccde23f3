use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eigenres::cli::{self, CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "eigenres", version, about = "Eigenresidual speech analysis and resynthesis")]
struct Args {
    /// key = value run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective configuration and exit
    #[arg(long, global = true)]
    dump_config: bool,
    /// Noise seed for unvoiced excitation (overrides config and EIGENRES_SEED)
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Train an eigenresidual model from a directory of WAV files
    Train { corpus_dir: PathBuf, out_model: PathBuf },
    /// Extract a parameter track from one utterance
    Analyze {
        wav: PathBuf,
        model: PathBuf,
        out_track: PathBuf,
        /// Also write <track>.csv
        #[arg(long)]
        csv: bool,
    },
    /// Render a parameter track to audio
    Synth {
        track: PathBuf,
        out_wav: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// eigen or pulse
        #[arg(long)]
        excitation: Option<String>,
    },
    /// Analyze and resynthesize with both excitations, reporting LSD
    Copysynth {
        wav: PathBuf,
        model: PathBuf,
        out_dir: PathBuf,
    },
    /// Dump plot data for a model
    Inspect { model: PathBuf, out_dir: PathBuf },
}

fn run(args: Args) -> CliResult {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.resolve_seed(args.seed, std::env::var("EIGENRES_SEED").ok().as_deref())?;
    if let Some(Command::Synth {
        excitation: Some(x), ..
    }) = &args.command
    {
        cfg.synth.excitation_kind = cli::parse_excitation(x)?;
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if args.dump_config {
        write!(out, "{}", cfg.dump()).map_err(|e| CliError::usage(e.to_string()))?;
        return Ok(());
    }
    match args.command {
        None => Err(CliError::usage(
            "missing subcommand (train|analyze|synth|copysynth|inspect)",
        )),
        Some(Command::Train { corpus_dir, out_model }) => cli::cmd_train(&corpus_dir, &out_model, &cfg, &mut out),
        Some(Command::Analyze {
            wav,
            model,
            out_track,
            csv,
        }) => cli::cmd_analyze(&wav, &model, &out_track, csv, &cfg, &mut out),
        Some(Command::Synth {
            track, out_wav, model, ..
        }) => cli::cmd_synth(&track, model.as_deref(), &out_wav, &cfg, &mut out),
        Some(Command::Copysynth { wav, model, out_dir }) => cli::cmd_copysynth(&wav, &model, &out_dir, &cfg, &mut out),
        Some(Command::Inspect { model, out_dir }) => cli::cmd_inspect(&model, &out_dir, &mut out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let head: Vec<&str> = msg
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("{}", CliError::usage(head.join(" ").trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code as u8)
        }
    }
}
