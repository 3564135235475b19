//! Per-option models under call-and-return execution.
//!
//! For a single option `w` with policy `pi_w` and termination `beta_w`:
//!
//! ```text
//! r_w(s)         = sum_a pi_w(a|s) r(s,a)
//! P_w,cont(s,s') = sum_a pi_w(a|s) P(s'|s,a) (1 - beta_w(s'))
//! P_w,term(s,s') = sum_a pi_w(a|s) P(s'|s,a) beta_w(s')
//! b_w = (I - gamma P_w,cont)^-1 r_w
//! F_w = (I - gamma P_w,cont)^-1 gamma P_w,term
//! ```
//!
//! Termination is evaluated at the successor state in both matrices, so that
//! `P_w,cont + P_w,term = P_{pi_w}` and `M_w - N_w = I - gamma P_{pi_w}`.

use crate::error::Result;
use crate::gating::{factor_continuation, OptionSpec};
use crate::linalg::{check_len, Matrix, Vector};
use crate::mdp::Mdp;
use crate::splitting::Splitting;

#[derive(Debug, Clone)]
pub struct OptionModels {
    pub r_w: Vector,
    pub p_w_sharp: Matrix,
    pub p_w_bot: Matrix,
    pub b_w: Vector,
    pub f_w: Matrix,
}

fn option_parts(mdp: &Mdp, w: &OptionSpec) -> Result<(Vector, Matrix, Matrix)> {
    let n = mdp.n_states();
    check_len("option states", n, w.policy().n_states())?;
    check_len("option actions", mdp.n_actions(), w.policy().n_actions())?;
    let beta = w.termination();
    let mut r_w = Vector::zeros(n);
    let mut sharp = Matrix::zeros(n, n);
    let mut bot = Matrix::zeros(n, n);
    for s in 0..n {
        for a in 0..mdp.n_actions() {
            let pi = w.policy().prob(s, a);
            if pi == 0.0 {
                continue;
            }
            r_w[s] += pi * mdp.reward()[(s, a)];
            let p = mdp.transition(a);
            for s2 in 0..n {
                let x = pi * p[(s, s2)];
                sharp[(s, s2)] += x * (1.0 - beta[s2]);
                bot[(s, s2)] += x * beta[s2];
            }
        }
    }
    Ok((r_w, sharp, bot))
}

pub fn option_models(mdp: &Mdp, w: &OptionSpec) -> Result<OptionModels> {
    let (r_w, p_w_sharp, p_w_bot) = option_parts(mdp, w)?;
    let lu = factor_continuation(&p_w_sharp, mdp.gamma(), "I - gamma P_w,cont")?;
    let b_w = lu.solve_vec(&r_w)?;
    let f_w = lu.solve_mat(&(&p_w_bot * mdp.gamma()))?;
    Ok(OptionModels {
        r_w,
        p_w_sharp,
        p_w_bot,
        b_w,
        f_w,
    })
}

pub fn option_reward_model(mdp: &Mdp, w: &OptionSpec) -> Result<Vector> {
    Ok(option_models(mdp, w)?.b_w)
}

pub fn option_transition_model(mdp: &Mdp, w: &OptionSpec) -> Result<Matrix> {
    Ok(option_models(mdp, w)?.f_w)
}

/// `(A, M_w, N_w) = (I - gamma P_{pi_w}, I - gamma P_w,cont, gamma P_w,term)`.
pub fn splitting_identity(mdp: &Mdp, w: &OptionSpec) -> Result<Splitting> {
    let (_, sharp, bot) = option_parts(mdp, w)?;
    let n = mdp.n_states();
    let gamma = mdp.gamma();
    let a = crate::splitting::system_matrix(mdp, w.policy())?;
    let m = Matrix::identity(n, n) - sharp * gamma;
    Splitting::new(a, m, bot * gamma, "option")
}

impl OptionModels {
    /// `max |b_w(s) - sum_a pi_w(a|s) [r(s,a) + gamma sum_s' P(s'|s,a) (1 - beta_w(s')) b_w(s')]|`.
    pub fn reward_recursion_residual(&self, gamma: f64) -> f64 {
        let rhs = &self.r_w + &self.p_w_sharp * &self.b_w * gamma;
        crate::linalg::vec_inf_norm(&(&self.b_w - rhs))
    }
}
