use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xgrad::harness::{self, ExperimentConfig};

/// Train with weight prediction, sweep prediction steps, or check gradients.
///
/// Set XGRAD_OUTPUT_DIR to redirect every output file into one directory.
#[derive(Parser)]
#[command(name = "xgrad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its metrics CSV.
    Run { config: PathBuf },
    /// Run one experiment per prediction step and write a comparison table.
    Sweep {
        config: PathBuf,
        #[arg(long = "s", value_delimiter = ',', default_value = "0,1,2,3,4")]
        s: Vec<u32>,
    },
    /// Compare analytic gradients with central differences.
    Gradcheck {
        problem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report file; defaults to gradcheck_<problem>_seed<N>.txt.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load(path: &PathBuf) -> xgrad::Result<ExperimentConfig> {
    ExperimentConfig::parse(&fs::read_to_string(path)?)
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> xgrad::Result<bool> {
    match command {
        Command::Run { config } => {
            let report = harness::run(&load(&config)?)?;
            println!("wrote {} ({} iterations)", report.output.display(), report.iterations);
            if let Some((it, msg)) = &report.abort {
                eprintln!("aborted at iteration {it}: {msg}");
            }
            Ok(report.succeeded())
        }
        Command::Sweep { config, s } => {
            let report = harness::sweep(&load(&config)?, &s)?;
            print!("{}", harness::aligned_table(&report.rows));
            println!("wrote {} and {}", report.table_csv.display(), report.table_txt.display());
            for (row, run) in report.rows.iter().zip(&report.runs) {
                if let Err(e) = run {
                    eprintln!("s={} failed: {e}", row.s);
                }
            }
            Ok(report.all_succeeded())
        }
        Command::Gradcheck { problem, seed, output } => {
            let report = harness::gradcheck(&problem, seed)?;
            let path = output.unwrap_or_else(|| PathBuf::from(format!("gradcheck_{problem}_seed{seed}.txt")));
            let written = harness::write_gradcheck(&report, &path)?;
            print!("{}", report.to_text());
            println!("wrote {}", written.display());
            Ok(report.passed())
        }
    }
}
