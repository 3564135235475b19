//! Builds the gating models of a small hand-written problem and shows that
//! the multi-step operator `L v = b + F v` has the policy value as its fixed
//! point.

use optsplit::solver::apply_generalized_bellman;
use optsplit::{
    build_gating_models, direct_solve, Mdp, MetaPolicy, OptionSet, OptionSpec, PolicyMatrix, Vector,
};

fn main() -> optsplit::Result<()> {
    // 3 states, 2 actions; transition[s][a] is the successor distribution.
    let mdp = Mdp::from_nested(
        &[
            vec![vec![0.1, 0.6, 0.3], vec![0.0, 0.0, 1.0]],
            vec![vec![0.5, 0.5, 0.0], vec![0.2, 0.2, 0.6]],
            vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]],
        ],
        &[vec![1.0, 0.0], vec![0.0, 2.0], vec![-1.0, 0.5]],
        0.9,
    )?;

    let left = OptionSpec::new(
        PolicyMatrix::deterministic(3, 2, 0)?,
        Vector::from_vec(vec![0.2, 0.5, 1.0]),
    )?;
    let right = OptionSpec::new(
        PolicyMatrix::deterministic(3, 2, 1)?,
        Vector::from_vec(vec![0.0, 0.3, 0.9]),
    )?;
    let set = OptionSet::new(vec![left, right], MetaPolicy::uniform(3, 2))?;

    let models = build_gating_models(&mdp, &set)?;
    println!("marginal policy{}", models.sigma.probs());
    println!("continuation P_cont{}", models.p_sharp);
    println!("termination P_term{}", models.p_bot);
    println!("reward model b{}", models.b);
    println!("transition model F{}", models.f);

    let v = direct_solve(&mdp, &models.sigma)?;
    let lv = apply_generalized_bellman(&models, &v)?;
    println!("v_sigma{}", v);
    println!("|L v_sigma - v_sigma| = {:e}", (lv - &v).amax());
    Ok(())
}
