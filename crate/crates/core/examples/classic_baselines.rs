//! Options-induced splittings next to Jacobi, Gauss-Seidel, SOR and
//! Richardson on the same system.

use optsplit::bench::{parse_methods, run_method_comparison, ProblemSource};
use optsplit::SolveConfig;

fn main() -> optsplit::Result<()> {
    let problem = ProblemSource::Random {
        n: 40,
        k: 4,
        gamma: 0.95,
        seed: 3,
        sparsity: 0.25,
        n_options: 3,
    }
    .load()?;
    let methods = parse_methods(
        "options(0),options(0.25),options(1),jacobi,gauss_seidel,sor(1.3),richardson(1),richardson(1.9)",
    )?;
    let rows = run_method_comparison(&problem, &methods, &SolveConfig::default())?;

    println!(
        "{:<16} {:>8} {:>7} {:>12} {:>9}",
        "method", "rho", "iters", "oracle err", "ms"
    );
    for r in rows {
        let flag = if r.agrees { "" } else { "  (flagged)" };
        println!(
            "{:<16} {:>8.4} {:>7} {:>12.2e} {:>9.3}{flag}",
            r.method.to_string(),
            r.rho,
            r.iterations,
            r.oracle_error,
            r.wall_ms
        );
    }
    Ok(())
}
