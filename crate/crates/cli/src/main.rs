use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qgibbs::markov::{MixingOptions, MixingTime};
use qgibbs_cli::commands;
use qgibbs_cli::config::ModelSpec;
use qgibbs_cli::{run_config, CliError, RunConfig, RunOptions};

#[derive(Parser)]
#[command(name = "qgibbs", version, about = "Parent Hamiltonians of Markov chains: experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// ising, is-chain, star or random-is
    #[arg(long, value_parser = parse_model)]
    model: ModelSpec,
    #[arg(long)]
    beta: f64,
    /// Ring or chain length, star branch count, or random-graph vertex count.
    #[arg(long)]
    n: usize,
    /// Seed for random-is graphs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Spectral gap of the parent Hamiltonian.
    Gap(ModelArgs),
    /// Worst-case mixing time against the spectral lower bound.
    Mixing {
        #[command(flatten)]
        model: ModelArgs,
        /// Total-variation threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Detailed balance and ground-state residuals of the parent Hamiltonian.
    ParentCheck(ModelArgs),
    /// Experiment kinds a config may use.
    ListExperiments,
}

fn parse_model(s: &str) -> Result<ModelSpec, String> {
    ModelSpec::parse(s).ok_or_else(|| format!("unknown model `{s}`"))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, out, jobs, seed } => {
            let text = std::fs::read_to_string(&config).map_err(|e| CliError::io(config.display(), e))?;
            let cfg = RunConfig::parse(&text)?;
            let opts = RunOptions {
                out_dir: out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out")),
                jobs,
                seed: seed.unwrap_or(cfg.seed),
            };
            let summary = run_config(&cfg, &text, &opts)?;
            for e in &summary.manifest.experiments {
                match &e.error {
                    None => println!("{:<24} ok      {:>9.2}s  {} files", e.name, e.wall_time_seconds, e.files.len()),
                    Some(err) => eprintln!("{:<24} failed  {err}", e.name),
                }
            }
            println!("manifest: {}", summary.manifest_path.display());
            Ok(summary.exit_code)
        }
        Command::Gap(m) => {
            println!("{}", commands::gap(m.model, m.n, m.beta, m.seed)?);
            Ok(0)
        }
        Command::Mixing { model: m, threshold } => {
            let mut opts = MixingOptions::default();
            if let Some(t) = threshold {
                opts.threshold = t;
            }
            let r = commands::mixing(m.model, m.n, m.beta, m.seed, &opts)?;
            match r.t_mix {
                MixingTime::Steps(t) => println!("t_mix = {t}"),
                MixingTime::CapExceeded(t) => println!("t_mix > {t}"),
            }
            if let Some(t) = r.t_m() {
                println!("t_m = {t}");
            }
            println!("parent_gap = {}", r.parent_gap);
            println!("lower_bound = {}", r.lower_bound());
            if let Some(h) = r.bound_holds() {
                println!("bound_holds = {h}");
            }
            Ok(0)
        }
        Command::ParentCheck(m) => {
            let c = commands::parent_check(m.model, m.n, m.beta, m.seed)?;
            println!("basis_size = {}", c.basis_size);
            println!("detailed_balance_residual = {:e}", c.detailed_balance_residual);
            println!("ground_residual = {:e}", c.ground_residual);
            println!("min_eigenvalue = {:e}", c.min_eigenvalue);
            commands::require(&c)?;
            println!("ok");
            Ok(0)
        }
        Command::ListExperiments => {
            print!("{}", commands::list_experiments());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
