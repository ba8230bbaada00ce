use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plrank_core::evaluation::evaluate;
use plrank_core::harness::{
    aggregate, environment, format_float, read_ranking, read_weights, run_experiment,
    write_aggregates, write_runs, ExperimentConfig,
};
use plrank_core::Error;

#[derive(Parser)]
#[command(name = "plrank", version, about = "PAC ranking experiments under the Plackett-Luce model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write one CSV row per run and checkpoint.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Overrides the master seed of the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write per-budget summary statistics here.
        #[arg(long)]
        aggregate: Option<PathBuf>,
        /// Record wall-clock time per run (output is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Print the weights of a built-in environment, one per line.
    Env {
        #[arg(long)]
        name: String,
    },
    /// Score a ranking file against a weights file.
    Eval {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        ranking: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Divide the weights by their maximum instead of requiring it to be 1.
        #[arg(long)]
        normalize: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("plrank: {e}");
            match e {
                Error::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn execute(command: Command) -> plrank_core::Result<()> {
    match command {
        Command::Run {
            config,
            out,
            jobs,
            seed,
            aggregate: aggregate_path,
            timing,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
            let mut cfg = ExperimentConfig::parse(&text)?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            cfg.record_wall_time |= timing;
            let records = run_experiment(&cfg, jobs)?;
            write_runs(&records, create(&out)?)?;
            if let Some(path) = aggregate_path {
                write_aggregates(&aggregate(&records)?, create(&path)?)?;
            }
            Ok(())
        }
        Command::Env { name } => {
            let inst = environment(&name)?;
            let mut stdout = io::stdout().lock();
            for &w in inst.weights() {
                writeln!(stdout, "{}", format_float(w))?;
            }
            Ok(())
        }
        Command::Eval {
            weights,
            ranking,
            eps,
            normalize,
        } => {
            let inst = read_weights(&weights, normalize)?;
            let r = read_ranking(&ranking)?;
            let rep = evaluate(&inst, &r, eps)?;
            println!("eps_best={}", rep.is_eps_best);
            println!("eps_best_multiplicative={}", rep.is_eps_best_mult);
            println!("kendall_eps_loss={}", format_float(rep.kendall_eps_loss));
            for (i, j) in rep.violating_pairs {
                println!("violation={},{}", i + 1, j + 1);
            }
            Ok(())
        }
    }
}

fn create(path: &Path) -> plrank_core::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
