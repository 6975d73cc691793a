use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use riscleanse::pipeline::{self, Overrides, PipelineConfig, CONFIG_ENV};

#[derive(Parser)]
#[command(name = "riscleanse", version, about = "Cleanse, match and merge researcher records")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write every artifact
    Clean(RunArgs),
    /// Profile the raw input only
    Profile(RunArgs),
    /// Write clusters and pairwise scores without merging
    Match(RunArgs),
    /// Write golden records and their provenance
    Merge(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config (JSON); falls back to $RISCLEANSE_CONFIG
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Match threshold in [0, 1]
    #[arg(long)]
    threshold: Option<f64>,
    /// Drop identifiers failing the MOD 11-2 check
    #[arg(long)]
    strict_orcid: bool,
}

impl RunArgs {
    fn config(&self) -> riscleanse::Result<PipelineConfig> {
        let path = self.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let mut cfg = match path {
            Some(p) => PipelineConfig::load(&p)?,
            None => PipelineConfig::default(),
        };
        cfg.apply(&Overrides {
            input: self.input.clone(),
            out_dir: self.out_dir.clone(),
            threshold: self.threshold,
            strict_orcid: self.strict_orcid,
        });
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (args, run): (&RunArgs, fn(&PipelineConfig) -> riscleanse::Result<pipeline::RunSummary>) = match &cli.command {
        Command::Clean(a) => (a, pipeline::run_clean),
        Command::Profile(a) => (a, pipeline::run_profile),
        Command::Match(a) => (a, pipeline::run_match),
        Command::Merge(a) => (a, pipeline::run_merge),
    };
    match args.config().and_then(|cfg| run(&cfg)) {
        Ok(summary) => {
            println!("{}", summary.line);
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            eprintln!("riscleanse: {e}");
            ExitCode::from(pipeline::exit_code(&e) as u8)
        }
    }
}
