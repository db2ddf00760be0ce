use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quenchlab::{execute, resolve_out_dir, set_threads, Command, OUT_ENV};

#[derive(Parser)]
#[command(name = "quenchlab", version, about = "Quench and SGD aging experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Langevin quench of the spherical 3-spin model.
    Pspin(Common),
    /// One SGD training run.
    Train(Common),
    /// Regime report and plots for a finished run.
    Analyze(Common),
    /// Training runs over a list of parameter values.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; QUENCHLAB_OUT takes precedence.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Pspin(a) => (Command::Pspin, a),
        Sub::Train(a) => (Command::Train, a),
        Sub::Analyze(a) => (Command::Analyze, a),
        Sub::Sweep(a) => (Command::Sweep, a),
    };
    let out = resolve_out_dir(args.out_dir, std::env::var(OUT_ENV).ok());
    let result = args
        .threads
        .map_or(Ok(()), set_threads)
        .and_then(|()| execute(command, &args.config, &out));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
