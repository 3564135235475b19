//! Certifies the options splitting of a random problem as regular and
//! solves the policy evaluation system with it.

use optsplit::bench::generators::{random_mdp_with, random_option_set, rng_from_seed};
use optsplit::splitting::{preconditioned_system, rate_bound};
use optsplit::{
    build_gating_models, check_regular, direct_solve, iterate_splitting, splitting_from_options,
    SolveConfig,
};

fn main() -> optsplit::Result<()> {
    let mut rng = rng_from_seed(11);
    let mdp = random_mdp_with(&mut rng, 20, 3, 0.95, 0.3)?;
    let set = random_option_set(&mut rng, 20, 3, 4)?;

    let models = build_gating_models(&mdp, &set)?;
    let split = splitting_from_options(&models, &mdp)?;
    let report = check_regular(&split)?;
    println!(
        "M^-1 >= 0: {} (min {:e}), N >= 0: {} (min {:e})",
        report.m_inverse_nonneg, report.m_inverse_worst.0, report.n_nonneg, report.n_worst.0
    );
    let bound = rate_bound(&split)?;
    println!(
        "rho(M^-1 N) = {:.6}, |I - M^-1 A|_inf = {:.6}",
        bound.rho, bound.upper_bound
    );

    let run = iterate_splitting(&split, &models.r_sigma, &SolveConfig::default())?;
    let oracle = direct_solve(&mdp, &models.sigma)?;
    println!(
        "{} iterations, residual {:e}, error vs direct solve {:e}",
        run.iterations,
        run.final_residual(),
        (&run.v - &oracle).amax()
    );

    // The preconditioned system M^-1 A v = M^-1 r has the same solution.
    let (pa, pr) = preconditioned_system(&split, &models.r_sigma)?;
    let v = pa.lu().solve(&pr).expect("M^-1 A is invertible");
    println!("preconditioned solve error {:e}", (v - oracle).amax());
    Ok(())
}
