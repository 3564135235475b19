//! Compares the rate observed in the residual history with the spectral
//! radius of the iteration matrix.

use optsplit::bench::ProblemSource;
use optsplit::spectral::{eigenvalue_moduli, spectral_radius};
use optsplit::{build_gating_models, iterate_splitting, splitting_from_options, SolveConfig};

fn main() -> optsplit::Result<()> {
    let problem = ProblemSource::Random {
        n: 30,
        k: 3,
        gamma: 0.9,
        seed: 21,
        sparsity: 0.5,
        n_options: 2,
    }
    .load()?;
    let set = problem.option_set()?;

    for c in [0.25, 0.5, 1.0] {
        let models = build_gating_models(&problem.mdp, &set.scale_termination(c)?)?;
        let split = splitting_from_options(&models, &problem.mdp)?;
        let g = split.iteration_matrix()?;
        let moduli = eigenvalue_moduli(&g)?;
        let run = iterate_splitting(
            &split,
            &models.r_sigma,
            &SolveConfig::default().with_tol(1e-13),
        )?;
        println!(
            "c = {c}: rho {:.5} (next {:.5}), empirical {:?} after {} iterations",
            spectral_radius(&g)?,
            moduli.get(1).copied().unwrap_or(0.0),
            run.empirical_rate.map(|r| (r * 1e5).round() / 1e5),
            run.iterations
        );
    }
    Ok(())
}
