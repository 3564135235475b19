//! Writes a generated problem to JSON, reads it back and runs the full
//! invariant suite on it.

use optsplit::bench::io::{load_problem, write_json};
use optsplit::bench::{validate_problem, ProblemSource};
use optsplit::SolveConfig;

fn main() -> optsplit::Result<()> {
    let dir = std::env::temp_dir().join("optsplit-example");
    std::fs::create_dir_all(&dir).map_err(|source| optsplit::Error::Io {
        path: dir.clone(),
        source,
    })?;
    let path = dir.join("problem.json");

    let problem = ProblemSource::Random {
        n: 10,
        k: 2,
        gamma: 0.9,
        seed: 5,
        sparsity: 0.5,
        n_options: 3,
    }
    .load()?;
    write_json(&path, &problem.to_json())?;
    println!("wrote {}", path.display());

    let back = load_problem(&path)?;
    let report = validate_problem(&back, &SolveConfig::default(), 0);
    for check in &report.checks {
        println!("{check}");
    }
    println!("all passed: {}", report.passed());
    Ok(())
}
