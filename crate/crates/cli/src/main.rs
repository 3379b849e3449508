mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::config::{Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hjlab", version, about = "Hamilton-Jacobi solvers, characteristic flows and uniqueness checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Shared {
    /// `key = value` config file; flags override its entries.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory for CSV data and JSON reports.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    /// Monotone Lax-Friedrichs scheme.
    Lf,
    /// Characteristic oracle (1D, before the classical horizon).
    Characteristic,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve on the periodic cell and write the space-time field.
    Solve {
        #[command(flatten)]
        shared: Shared,
        /// Hamiltonian, e.g. `quadratic:0.5,0,0`, `cosine:1,1`, `negsquare`.
        #[arg(long)]
        hamiltonian: Option<String>,
        /// Initial data, e.g. `cos`, `sin:0.5`, `trig:0.1,0.2,0.3`, `trig:random`.
        #[arg(long)]
        psi: Option<String>,
        /// Grid points per axis.
        #[arg(long)]
        n: Option<usize>,
        /// Final time.
        #[arg(long = "T", value_name = "T")]
        t: Option<f64>,
        /// CFL number in (0, 1].
        #[arg(long)]
        cfl: Option<f64>,
        /// Seed for random initial data.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Method::Lf)]
        method: Method,
    },
    /// Integrate characteristics through a stored solution and check them.
    Characteristics {
        #[command(flatten)]
        shared: Shared,
        /// Solution CSV written by `solve`.
        #[arg(long, value_name = "CSV")]
        solution: PathBuf,
        /// Hamiltonian, e.g. `quadratic:0.5,0,0`, `cosine:1,1`, `negsquare`.
        #[arg(long)]
        hamiltonian: Option<String>,
        /// Initial data, e.g. `cos`, `sin:0.5`, `trig:0.1,0.2,0.3`, `trig:random`.
        #[arg(long)]
        psi: Option<String>,
        /// Number of characteristic seeds.
        #[arg(long)]
        seeds: Option<usize>,
        /// Seed for random initial data.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Semi-concavity constants per slice, optionally the gradient bound for `c`.
    Semiconcavity {
        #[command(flatten)]
        shared: Shared,
        /// Field CSV.
        #[arg(long, value_name = "CSV")]
        input: PathBuf,
        /// Semi-concavity constant for the gradient bound.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Check initial condition, equation a.e. and uniform semi-concavity.
    CheckWeak {
        #[command(flatten)]
        shared: Shared,
        /// Candidate solution CSV.
        #[arg(long, value_name = "CSV")]
        f: PathBuf,
        /// Initial data, e.g. `cos`, `sin:0.5`, `trig:0.1,0.2,0.3`, `trig:random`.
        #[arg(long)]
        psi: Option<String>,
        /// Hamiltonian, e.g. `quadratic:0.5,0,0`, `cosine:1,1`, `negsquare`.
        #[arg(long)]
        hamiltonian: Option<String>,
        /// Seed for random initial data.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Gronwall certificate for the difference of two solutions.
    Certify {
        #[command(flatten)]
        shared: Shared,
        /// Candidate solution CSV.
        #[arg(long, value_name = "CSV")]
        f: PathBuf,
        /// Reference solution CSV.
        #[arg(long, value_name = "CSV")]
        g: PathBuf,
        /// Hamiltonian, e.g. `quadratic:0.5,0,0`, `cosine:1,1`, `negsquare`.
        #[arg(long)]
        hamiltonian: Option<String>,
        /// Certificate floor, normally the measured scheme error.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// The weak solution |x| - t of zero data that is not the viscosity solution.
    Counterexample {
        #[command(flatten)]
        shared: Shared,
        /// Grid points per axis.
        #[arg(long)]
        n: Option<usize>,
        /// Final time.
        #[arg(long = "T", value_name = "T")]
        t: Option<f64>,
    },
    /// Run every acceptance pipeline and write all artifacts.
    Suite {
        #[command(flatten)]
        shared: Shared,
        /// Seed for the random corpora.
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Characteristics { .. } => "characteristics",
            Command::Semiconcavity { .. } => "semiconcavity",
            Command::CheckWeak { .. } => "check-weak",
            Command::Certify { .. } => "certify",
            Command::Counterexample { .. } => "counterexample",
            Command::Suite { .. } => "suite",
        }
    }

    fn shared(&self) -> &Shared {
        match self {
            Command::Solve { shared, .. }
            | Command::Characteristics { shared, .. }
            | Command::Semiconcavity { shared, .. }
            | Command::CheckWeak { shared, .. }
            | Command::Certify { shared, .. }
            | Command::Counterexample { shared, .. }
            | Command::Suite { shared, .. } => shared,
        }
    }

    fn overrides(&self) -> Overrides {
        let out = self.shared().out.clone();
        match self {
            Command::Solve { hamiltonian, psi, n, t, cfl, seed, .. } => Overrides {
                hamiltonian: hamiltonian.clone(),
                psi: psi.clone(),
                n: *n,
                t: *t,
                cfl: *cfl,
                seed: *seed,
                out,
                ..Default::default()
            },
            Command::Characteristics { hamiltonian, psi, seeds, seed, .. } => Overrides {
                hamiltonian: hamiltonian.clone(),
                psi: psi.clone(),
                seeds: *seeds,
                seed: *seed,
                out,
                ..Default::default()
            },
            Command::Semiconcavity { .. } => Overrides { out, ..Default::default() },
            Command::CheckWeak { psi, hamiltonian, seed, .. } => Overrides {
                hamiltonian: hamiltonian.clone(),
                psi: psi.clone(),
                seed: *seed,
                out,
                ..Default::default()
            },
            Command::Certify { hamiltonian, eps, .. } => {
                Overrides { hamiltonian: hamiltonian.clone(), eps: *eps, out, ..Default::default() }
            }
            Command::Counterexample { n, t, .. } => Overrides { n: *n, t: *t, out, ..Default::default() },
            Command::Suite { seed, .. } => Overrides { seed: *seed, out, ..Default::default() },
        }
    }
}

fn resolve_config(command: &Command) -> Result<RunConfig, commands::Failure> {
    let mut cfg = match &command.shared().config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| commands::Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| commands::Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    cfg.apply(&command.overrides());
    Ok(cfg)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("HJLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("HJLAB_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let name = cli.command.name();
    let result = resolve_config(&cli.command).and_then(|cfg| match &cli.command {
        Command::Solve { method, .. } => commands::solve(&cfg, *method),
        Command::Characteristics { solution, .. } => commands::characteristics(&cfg, solution),
        Command::Semiconcavity { input, c, .. } => commands::semiconcavity(&cfg, input, *c),
        Command::CheckWeak { f, .. } => commands::check_weak(&cfg, f),
        Command::Certify { f, g, .. } => commands::certify(&cfg, f, g),
        Command::Counterexample { .. } => commands::counterexample(&cfg),
        Command::Suite { .. } => commands::suite(&cfg),
    });
    match result {
        Ok(Some(false)) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            let mut cmd = Cli::command();
            if let Some(sub) = cmd.find_subcommand_mut(name) {
                eprintln!("{}", sub.render_help());
            }
            ExitCode::from(2)
        }
        Err(commands::Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
