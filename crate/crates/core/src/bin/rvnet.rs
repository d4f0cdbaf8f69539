use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rvnet::ingest::MissingPolicy;
use rvnet::pipeline::{
    generate_fixture, run_pipeline, Format, PipelineConfig, EXIT_IO, EXIT_PARSE,
};

/// Build the RV-coefficient MST of a bid/ask price panel and rank its nodes.
#[derive(Debug, Parser)]
#[command(name = "rvnet", version, args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Long-format CSV with header `date,code,bid,ask`.
    #[arg(long, required = true)]
    input: Option<PathBuf>,

    /// Directory receiving the output files.
    #[arg(long, required = true)]
    out_dir: Option<PathBuf>,

    /// Gap handling: `drop` keeps common dates, `ffill` carries quotes forward.
    #[arg(long, default_value = "drop")]
    missing_policy: MissingPolicy,

    #[arg(long, default_value_t = rvnet::ranking::DEFAULT_TOP_K)]
    top_k: usize,

    #[arg(long, default_value_t = rvnet::ranking::DEFAULT_LEAST_M)]
    least_m: usize,

    /// Comma-separated subset of dot,graphml,json,csv.
    #[arg(long, value_delimiter = ',', default_value = "dot,graphml,json,csv")]
    formats: Vec<Format>,

    #[arg(long, default_value_t = rvnet::centrality::DEFAULT_EIG_TOL)]
    eig_tol: f64,

    #[arg(long, default_value_t = rvnet::centrality::DEFAULT_EIG_MAX_ITER)]
    eig_max_iter: usize,

    /// Also write rv_matrix.csv and dist_matrix.csv.
    #[arg(long)]
    matrices: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic bid/ask panel in the input CSV format.
    Fixture {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 45)]
        assets: usize,
        #[arg(long, default_value_t = 1250)]
        days: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Some(Command::Fixture { seed, assets, days, output }) => {
            let text = match generate_fixture(seed, assets, days) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: [fixture] {e}");
                    return ExitCode::from(EXIT_PARSE as u8);
                }
            };
            match output {
                Some(path) => {
                    if let Err(e) = fs::write(&path, text) {
                        eprintln!("error: [fixture] {}: {e}", path.display());
                        return ExitCode::from(EXIT_IO as u8);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
        None => {
            let config = PipelineConfig {
                input: cli.input.expect("required by clap"),
                out_dir: cli.out_dir.expect("required by clap"),
                missing_policy: cli.missing_policy,
                top_k: cli.top_k,
                least_m: cli.least_m,
                formats: cli.formats.into_iter().collect::<BTreeSet<_>>(),
                eig_tol: cli.eig_tol,
                eig_max_iter: cli.eig_max_iter,
                write_matrices: cli.matrices,
            };
            match run_pipeline(&config) {
                Ok(outcome) => {
                    let b = &outcome.bundle;
                    println!(
                        "{} assets x {} dates -> {} tree edges; wrote {} files to {}",
                        b.summary().n_assets,
                        b.summary().n_dates,
                        b.tree().edges().len(),
                        outcome.written.len(),
                        config.out_dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
