//! Scales the hallway options' termination on four-rooms and prints how the
//! rate and iteration count move with it. Pass a path to also write the CSV.

use optsplit::bench::sweep::sweep_problem;
use optsplit::bench::sweep::write_sweep_file;
use optsplit::bench::ProblemSource;
use optsplit::SolveConfig;

fn main() -> optsplit::Result<()> {
    let problem = ProblemSource::FourRooms { gamma: 0.99 }.load()?;
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let outcome = sweep_problem(&problem, &grid, &SolveConfig::default())?;

    println!(
        "{:>5} {:>9} {:>9} {:>6} {:>10}",
        "c", "rho", "bound", "iters", "factor ms"
    );
    for r in &outcome.rows {
        println!(
            "{:>5.1} {:>9.5} {:>9.5} {:>6} {:>10.3}",
            r.c, r.rho, r.norm_bound, r.iterations, r.factor_ms
        );
    }
    println!(
        "monotone: {}, contractive: {}",
        outcome.monotone, outcome.contractive
    );

    if let Some(path) = std::env::args_os().nth(1) {
        write_sweep_file(path.as_ref(), &outcome.rows)?;
    }
    Ok(())
}
