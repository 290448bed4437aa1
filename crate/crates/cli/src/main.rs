use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use clarq_cli::commands::{self, Context};
use clarq_cli::{CliResult, Manifest, Overrides, PipelineConfig};

/// Exit status for command-line usage errors.
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "clarq", version, about = "Build and evaluate a clarification-question dataset")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, default_value = "clarq.toml")]
    config: PathBuf,

    /// Overrides the master seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the domain allowlist, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    domains: Option<Vec<String>>,

    /// Overrides the work directory of the config.
    #[arg(long, global = true, env = "CLARQ_WORKDIR")]
    work_dir: Option<PathBuf>,

    /// Accept upstream artifacts produced under a different config.
    #[arg(long, global = true)]
    allow_mixed: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Parse the archive dump into per-domain post records.
    Ingest,
    /// Build the seed set D0 from last comments.
    Seed,
    /// Run down-sampling and up-sampling refinement and train the final model.
    Refine,
    /// Classify every (post, comment) pair of the corpus.
    Classify,
    /// Score the final model on the annotated test set.
    Eval,
    /// Answer reranking with and without clarification questions.
    Rerank,
    /// Per-domain counts of the classified dataset.
    Stats,
}

fn run(cli: &Cli) -> CliResult<Manifest> {
    let overrides = Overrides {
        seed: cli.seed,
        domains: cli.domains.clone(),
        work_dir: cli.work_dir.clone(),
    };
    let cfg = PipelineConfig::load(&cli.config, &overrides)?;
    let ctx = Context::new(cfg, cli.allow_mixed)?;
    match cli.command {
        Command::Ingest => commands::cmd_ingest(&ctx),
        Command::Seed => commands::cmd_seed(&ctx),
        Command::Refine => commands::cmd_refine(&ctx),
        Command::Classify => commands::cmd_classify(&ctx),
        Command::Eval => commands::cmd_eval(&ctx),
        Command::Rerank => commands::cmd_rerank(&ctx),
        Command::Stats => commands::cmd_stats(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(manifest) => {
            println!("{}", serde_json::to_string_pretty(&manifest).expect("manifest serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
