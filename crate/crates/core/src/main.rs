use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mmwave::channel::ClusterStats;
use mmwave::cli::{cmd_genpool, cmd_run, cmd_validate, format_summary, GenpoolArgs, RunArgs};

#[derive(Parser)]
#[command(name = "mmwave-sim", version, about = "Millimeter-wave cellular link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write traces plus a summary.
    Run {
        file: PathBuf,
        /// Dotted-key override, e.g. `run.link_state=nlos`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        replications: usize,
    },
    /// Generate a channel-realization pool file.
    Genpool {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 64)]
        tx_antennas: usize,
        #[arg(long, default_value_t = 16)]
        rx_antennas: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario file without running it.
    Validate { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            file,
            set,
            out,
            seed,
            replications,
        } => cmd_run(
            &file,
            &RunArgs {
                overrides: set,
                out,
                seed,
                replications,
            },
        )
        .map(|reports| {
            for r in &reports {
                println!("{}", format_summary(r));
            }
        }),
        Command::Genpool {
            seed,
            count,
            tx_antennas,
            rx_antennas,
            out,
        } => cmd_genpool(&GenpoolArgs {
            seed,
            count,
            tx_antennas,
            rx_antennas,
            stats: ClusterStats::default(),
            out: out.clone(),
        })
        .map(|pool| println!("wrote {} realizations to {}", pool.len(), out.display())),
        Command::Validate { file } => {
            let diags = cmd_validate(&file);
            if diags.is_empty() {
                println!("ok");
                return ExitCode::SUCCESS;
            }
            for d in &diags {
                eprintln!("{d}");
            }
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
