//! `smlab run <experiment> [--config FILE] [--out DIR] [--seeds K] [--n N] [--print-config]`
//! and `smlab check [--out DIR] [--master-seed S]`.
//!
//! `SMLAB_THREADS` caps the worker threads.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use smlab::expcli::check::default_check_dir;
use smlab::expcli::{run, run_check, write_outputs, CheckOptions, ConfigFile, Experiment, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "smlab", version, about = "Score matching vs. maximum likelihood experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV and SVG files.
    Run {
        /// One of: bimodal_cut, bimodal_nocut, oscillating, neural_bimodal,
        /// functional_sweep, discrete_suite, rademacher_gaussian, appendix_lyu.
        experiment: Experiment,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Print the resolved config as JSON and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Run the acceptance suite; exits nonzero if any criterion fails.
    Check {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = smlab::expcli::config::DEFAULT_MASTER_SEED)]
        master_seed: u64,
    },
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("SMLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or_else(|| format!("SMLAB_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("smlab: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Run { experiment, config, out, seeds, n, print_config } => {
            let file = match config.as_deref().map(ConfigFile::load).transpose() {
                Ok(f) => f.unwrap_or_default(),
                Err(e) => {
                    eprintln!("smlab: {e}");
                    return ExitCode::from(2);
                }
            };
            let cfg = match ExperimentConfig::resolve(experiment, file, &Overrides { output_dir: out, seeds, n }) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("smlab: {e}");
                    return ExitCode::from(2);
                }
            };
            if print_config {
                println!("{}", cfg.to_json_pretty());
                return ExitCode::SUCCESS;
            }
            let result = run(&cfg).and_then(|o| {
                let files = write_outputs(&o, &cfg.output_dir)?;
                Ok((o, files))
            });
            match result {
                Ok((o, files)) => {
                    for f in files {
                        println!("wrote {}", f.display());
                    }
                    if !o.failures.is_empty() {
                        eprintln!("{} replicate(s) failed; see the failures file", o.failures.len());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("smlab: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Check { out, master_seed } => {
            let opts = CheckOptions { master_seed, out_dir: Some(out.unwrap_or_else(|| default_check_dir().to_path_buf())) };
            let report = run_check(&opts, &mut |r| println!("{}", r.line()));
            let failed = report.failed_ids();
            println!("{}/{} criteria passed", report.results.len() - failed.len(), report.results.len());
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
