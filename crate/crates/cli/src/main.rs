//! Command line front end: run a configuration file, run or dump a built-in
//! scenario, or print a convergence table.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use dimseis::riemann::SolverKind;
use dimseis::sim::convergence::{convergence_study, default_cells};
use dimseis::sim::{self, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "dimseis", version, about = "Diffuse-interface ADER-DG elastic wave solver")]
struct Cli {
    /// Directory for seismograms, snapshots and the manifest. Overrides the
    /// directory given in the configuration.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Riemann solver used for the face fluctuations.
    #[arg(long, global = true, value_parser = parse_solver)]
    solver: Option<SolverKind>,

    /// Worker threads for the parallel phases (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation described by a TOML configuration file.
    Run { config: PathBuf },
    /// Run a built-in scenario, or print its configuration with `--dump`.
    Scenario {
        name: String,
        #[arg(long)]
        dump: bool,
    },
    /// Plane-wave convergence table for degree `n` on `levels` grids.
    Convergence { n: usize, levels: usize },
}

fn parse_solver(s: &str) -> std::result::Result<SolverKind, String> {
    s.parse::<SolverKind>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::load(config)?;
            let base = config.parent().unwrap_or(Path::new(".")).to_path_buf();
            run_config(cfg, &base, &cli)
        }
        Command::Scenario { name, dump } => {
            let cfg = sim::scenario(name)?;
            if *dump {
                print!("{}", cfg.to_toml_string());
                Ok(())
            } else {
                run_config(cfg, Path::new("."), &cli)
            }
        }
        Command::Convergence { n, levels } => {
            let rows = convergence_study(*n, &default_cells(*levels), 0.5)?;
            println!("{:>6} {:>12} {:>14} {:>8}", "cells", "h", "l2_error", "order");
            for r in rows {
                let order = r.order.map_or("-".to_string(), |o| format!("{o:.3}"));
                println!("{:>6} {:>12.5e} {:>14.6e} {:>8}", r.cells, r.h, r.l2_error, order);
            }
            Ok(())
        }
    }
}

fn run_config(mut cfg: RunConfig, base: &Path, cli: &Cli) -> Result<()> {
    if let Some(s) = cli.solver {
        cfg.discretization.solver = s;
    }
    let out = cli.output_dir.clone().unwrap_or_else(|| cfg.output.directory.clone());
    let manifest = sim::run(&cfg, base, &out).with_context(|| format!("running `{}`", cfg.name))?;
    println!(
        "{}: {} steps to t = {}, {} cells ({} refined, {} limited), {:.2} s",
        manifest.name,
        manifest.steps,
        manifest.t_end,
        manifest.cells,
        manifest.refined_cells,
        manifest.limited_cells,
        manifest.wall_time_s
    );
    println!("artifacts written to {}", out.display());
    Ok(())
}
