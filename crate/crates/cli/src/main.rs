use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod args;
mod commands;

use args::{GridArgs, ParamArgs};

/// Numerical lab for the complex Ginzburg-Landau equation.
///
/// Exit codes: 0 confirmed / success, 2 refuted, 3 inconclusive, 1 error.
/// CGL_LAB_THREADS caps the worker threads (batch runs and eigensolves).
#[derive(Debug, Parser)]
#[command(name = "cgl-lab", version = cgl_core::experiments::GIT_DESCRIBE)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run scenario files; several files run in parallel.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// Output directory (one subdirectory per file when several are given).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct the explicit bound state and write its profile.
    Boundstate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "cgl-out/boundstate")]
        out: PathBuf,
        #[arg(long)]
        no_svg: bool,
    },
    /// Evolve initial data and record monitors.
    Evolve {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        evolve: commands::EvolveArgs,
        #[arg(long, default_value = "cgl-out/evolve")]
        out: PathBuf,
        #[arg(long)]
        no_svg: bool,
    },
    /// Spectrum of the linearization about the bound state.
    Spectrum {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Eigenvalues with modulus below this count as kernel.
        #[arg(long, default_value_t = cgl_core::spectra::DEFAULT_KERNEL_TOL)]
        kernel_tol: f64,
        #[arg(long, default_value = "cgl-out/spectrum")]
        out: PathBuf,
        #[arg(long)]
        no_svg: bool,
    },
    /// Newton continuation of the branch bifurcating from a Dirichlet eigenvalue.
    Continuation {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Index of the Dirichlet eigenvalue.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        mu_max: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Also report the mu at which the branch reaches this k.
        #[arg(long, allow_negative_numbers = true)]
        k_target: Option<f64>,
        #[arg(long, default_value = "cgl-out/continuation")]
        out: PathBuf,
        #[arg(long)]
        no_svg: bool,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("CGL_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("CGL_LAB_THREADS must be a thread count, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    cgl_core::spectra::set_eigensolver_threads(n);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let res = match cli.command {
        Command::Run { scenarios, out } => commands::run(&scenarios, out.as_deref()),
        Command::Boundstate { params, grid, out, no_svg } => commands::boundstate(&params, &grid, &out, !no_svg),
        Command::Evolve { params, grid, evolve, out, no_svg } => {
            commands::evolve(&params, &grid, &evolve, &out, !no_svg)
        }
        Command::Spectrum { params, grid, kernel_tol, out, no_svg } => {
            commands::spectrum(&params, &grid, kernel_tol, &out, !no_svg)
        }
        Command::Continuation { params, grid, n, mu_max, steps, k_target, out, no_svg } => {
            commands::continuation(&params, &grid, n, mu_max, steps, k_target, &out, !no_svg)
        }
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
