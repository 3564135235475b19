use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use optsplit::bench::compare::{solve_with, write_comparison_csv};
use optsplit::bench::io::{
    attach_options, load_problem, write_json, ExperimentSpec, Problem, ProblemSource,
};
use optsplit::bench::sweep::{sweep_problem, write_sweep_csv, write_sweep_file};
use optsplit::bench::validate::{validate_problem, DEFAULT_GRID};
use optsplit::bench::{parse_methods, run_method_comparison};
use optsplit::{Error, SolveConfig};

#[derive(Parser)]
#[command(
    name = "optsplit",
    version,
    about = "Options over finite MDPs as matrix splittings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem JSON (MDP, optionally with `options` and `mu`).
    #[arg(long)]
    problem: PathBuf,
    /// Separate option-set JSON.
    #[arg(long)]
    options: Option<PathBuf>,
}

impl ProblemArgs {
    fn load(&self) -> Result<Problem, Error> {
        let mut p = load_problem(&self.problem)?;
        if let Some(path) = &self.options {
            attach_options(&mut p, path)?;
        }
        Ok(p)
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long = "max-iters", default_value_t = 100_000)]
    max_iters: usize,
}

impl SolverArgs {
    fn config(&self) -> SolveConfig {
        SolveConfig::default()
            .with_tol(self.tol)
            .with_max_iters(self.max_iters)
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Generator {
    Random,
    FourRooms,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem with one method.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// options(c) | jacobi | gauss_seidel | sor(w) | richardson(t)
        #[arg(long, default_value = "options(1)")]
        method: String,
        /// Write the report as JSON instead of printing `v`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scale the termination functions over a grid and tabulate rates.
    SweepBeta {
        /// Experiment spec JSON.
        spec: Option<PathBuf>,
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        options: Option<PathBuf>,
        /// Overrides the generator seed of a spec.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated scale factors.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "max-iters")]
        max_iters: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several methods on one problem and compare against a direct solve.
    Compare {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(
            long,
            default_value = "options(0),options(0.5),options(1),jacobi,gauss_seidel,sor(1.2),richardson(1)"
        )]
        method: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite on a problem; exit code 1 on any failure.
    Validate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit a generated problem as JSON.
    Gen {
        #[arg(long, value_enum, default_value = "random")]
        generator: Generator,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        sparsity: f64,
        #[arg(long = "n-options", default_value_t = 3)]
        n_options: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct SolveOutput {
    method: String,
    v: Vec<f64>,
    iterations: usize,
    converged: bool,
    diverged: bool,
    final_residual: f64,
    empirical_rate: Option<f64>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidMdp(_) | Error::InvalidPolicy(_) | Error::InvalidOption { .. } => {
                    ExitCode::from(1)
                }
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Solve {
            problem,
            solver,
            method,
            out,
        } => {
            let p = problem.load()?;
            let method = method.parse()?;
            let report = solve_with(&p, method, &solver.config())?;
            let output = SolveOutput {
                method: method.to_string(),
                v: report.v.iter().copied().collect(),
                iterations: report.iterations,
                converged: report.converged,
                diverged: report.diverged,
                final_residual: report.final_residual(),
                empirical_rate: report.empirical_rate,
            };
            match out {
                Some(path) => write_json(&path, &output)?,
                None => {
                    let mut stdout = io::stdout().lock();
                    for x in &output.v {
                        let _ = writeln!(stdout, "{x}");
                    }
                }
            }
            eprintln!(
                "{}: {} iterations, residual {:e}, converged {}",
                output.method, output.iterations, output.final_residual, output.converged
            );
            Ok(if report.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::SweepBeta {
            spec,
            problem,
            options,
            seed,
            grid,
            tol,
            max_iters,
            out,
        } => {
            let mut spec = match (spec, problem) {
                (Some(path), _) => optsplit::bench::io::read_json::<ExperimentSpec>(&path)?,
                (None, Some(path)) => ExperimentSpec {
                    problem: ProblemSource::File { path },
                    beta_grid: DEFAULT_GRID.to_vec(),
                    tol: 1e-10,
                    max_iters: 100_000,
                    output: None,
                },
                (None, None) => {
                    return Err(Error::InvalidParameter(
                        "sweep-beta needs an experiment spec or --problem".into(),
                    ))
                }
            };
            if let Some(seed) = seed {
                spec.problem = spec.problem.with_seed(seed);
            }
            if let Some(grid) = grid {
                spec.beta_grid = grid;
            }
            if let Some(tol) = tol {
                spec.tol = tol;
            }
            if let Some(m) = max_iters {
                spec.max_iters = m;
            }
            if out.is_some() {
                spec.output = out;
            }
            spec.validate()?;
            let mut p = spec.problem.load()?;
            if let Some(path) = &options {
                attach_options(&mut p, path)?;
            }
            let cfg = SolveConfig::default()
                .with_tol(spec.tol)
                .with_max_iters(spec.max_iters);
            let outcome = sweep_problem(&p, &spec.beta_grid, &cfg)?;
            match &spec.output {
                Some(path) => write_sweep_file(path, &outcome.rows)?,
                None => write_sweep_csv(io::stdout().lock(), &outcome.rows)?,
            }
            eprintln!(
                "sweep {}: monotone {}, contractive {}",
                outcome.status(),
                outcome.monotone,
                outcome.contractive
            );
            Ok(if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Compare {
            problem,
            solver,
            method,
            out,
        } => {
            let p = problem.load()?;
            let methods = parse_methods(&method)?;
            let rows = run_method_comparison(&p, &methods, &solver.config())?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })?;
                    write_comparison_csv(file, &rows)?;
                }
                None => write_comparison_csv(io::stdout().lock(), &rows)?,
            }
            for r in rows.iter().filter(|r| !r.agrees) {
                eprintln!(
                    "flagged: {} (converged {}, diverged {})",
                    r.method, r.converged, r.diverged
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            problem,
            solver,
            seed,
        } => {
            let p = problem.load()?;
            let report = validate_problem(&p, &solver.config(), seed);
            for check in &report.checks {
                println!("{check}");
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Gen {
            generator,
            n,
            k,
            gamma,
            seed,
            sparsity,
            n_options,
            out,
        } => {
            let source = match generator {
                Generator::Random => ProblemSource::Random {
                    n,
                    k,
                    gamma,
                    seed,
                    sparsity,
                    n_options,
                },
                Generator::FourRooms => ProblemSource::FourRooms { gamma },
            };
            let json = source.load()?.to_json();
            match out {
                Some(path) => write_json(&path, &json)?,
                None => print_json(&json, Path::new("<stdout>"))?,
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_json<T: Serialize>(value: &T, label: &Path) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: label.to_path_buf(),
        source,
    })?;
    println!("{text}");
    Ok(())
}
