//! Option models under gating execution, where the policy over options
//! reselects an option at every step.
//!
//! Every transition `s -a-> s'` taken by option `w` is split into a
//! continuation part weighted by `1 - beta_w(s')` and a termination part
//! weighted by `beta_w(s')`. Summing over options and actions gives
//!
//! ```text
//! P_cont(s, s') = sum_w mu(w|s) sum_a pi_w(a|s) P(s'|s,a) (1 - beta_w(s'))
//! P_term(s, s') = sum_w mu(w|s) sum_a pi_w(a|s) P(s'|s,a) beta_w(s')
//! ```
//!
//! and the reward and transition models solve
//! `(I - gamma P_cont) b = r_sigma` and `(I - gamma P_cont) F = gamma P_term`.
//! The discounted horizon is never sampled: both models come from one LU
//! factorization of `I - gamma P_cont`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_len, Factorized, Matrix, Vector};
use crate::mdp::{check_row_stochastic, matrix_from_rows, matrix_to_rows, Mdp, PolicyMatrix};

/// One Markov option: an intra-option policy and a per-state termination
/// probability. Options may be initiated in every state.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionSpec {
    policy: PolicyMatrix,
    termination: Vector,
}

impl OptionSpec {
    pub fn new(policy: PolicyMatrix, termination: Vector) -> Result<Self> {
        check_len("termination", policy.n_states(), termination.len())?;
        if let Some((s, b)) = termination
            .iter()
            .enumerate()
            .find(|(_, b)| !(0.0..=1.0).contains(*b))
        {
            return Err(Error::InvalidOption {
                index: 0,
                reason: format!("termination at state {s} is {b}, outside [0, 1]"),
            });
        }
        Ok(Self {
            policy,
            termination,
        })
    }

    pub fn policy(&self) -> &PolicyMatrix {
        &self.policy
    }

    pub fn termination(&self) -> &Vector {
        &self.termination
    }

    /// Same policy with `beta` replaced by `c * beta`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.policy.clone(), &self.termination * c)
    }

    pub fn with_termination(&self, termination: Vector) -> Result<Self> {
        Self::new(self.policy.clone(), termination)
    }
}

/// `mu(w | s)`, one row per state and one column per option.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaPolicy {
    probs: Matrix,
}

impl MetaPolicy {
    pub fn new(probs: Matrix) -> Result<Self> {
        if let Some(reason) = check_row_stochastic(&probs) {
            return Err(Error::InvalidParameter(format!(
                "policy over options: {reason}"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n_states: usize, n_options: usize) -> Self {
        Self {
            probs: Matrix::from_element(n_states, n_options, 1.0 / n_options as f64),
        }
    }

    pub fn probs(&self) -> &Matrix {
        &self.probs
    }

    pub fn prob(&self, state: usize, option: usize) -> f64 {
        self.probs[(state, option)]
    }
}

/// Options together with the policy over them.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionSet {
    options: Vec<OptionSpec>,
    mu: MetaPolicy,
}

impl OptionSet {
    pub fn new(options: Vec<OptionSpec>, mu: MetaPolicy) -> Result<Self> {
        let first = options.first().ok_or_else(|| {
            Error::InvalidParameter("an option set needs at least one option".into())
        })?;
        let n = first.policy.n_states();
        let k = first.policy.n_actions();
        for o in &options {
            check_len("option states", n, o.policy.n_states())?;
            check_len("option actions", k, o.policy.n_actions())?;
        }
        check_len("policy over options states", n, mu.probs.nrows())?;
        check_len(
            "policy over options columns",
            options.len(),
            mu.probs.ncols(),
        )?;
        Ok(Self { options, mu })
    }

    /// A single option chosen everywhere.
    pub fn single(option: OptionSpec) -> Self {
        let n = option.policy.n_states();
        Self {
            options: vec![option],
            mu: MetaPolicy::uniform(n, 1),
        }
    }

    pub fn options(&self) -> &[OptionSpec] {
        &self.options
    }

    pub fn mu(&self) -> &MetaPolicy {
        &self.mu
    }

    pub fn n_states(&self) -> usize {
        self.mu.probs.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.options[0].policy.n_actions()
    }

    /// Every termination function multiplied by `c`, with `c` in `[0, 1]`.
    pub fn scale_termination(&self, c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!(
                "termination scale {c} outside [0, 1]"
            )));
        }
        let options = self
            .options
            .iter()
            .map(|o| o.scaled(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            options,
            mu: self.mu.clone(),
        })
    }

    /// Every termination function replaced by the constant `beta`.
    pub fn with_constant_termination(&self, beta: f64) -> Result<Self> {
        let n = self.n_states();
        let options = self
            .options
            .iter()
            .map(|o| o.with_termination(Vector::from_element(n, beta)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            options,
            mu: self.mu.clone(),
        })
    }

    fn check_against(&self, mdp: &Mdp) -> Result<()> {
        check_len("option states", mdp.n_states(), self.n_states())?;
        check_len("option actions", mdp.n_actions(), self.n_actions())
    }

    pub fn to_json(&self) -> OptionSetJson {
        OptionSetJson {
            options: self
                .options
                .iter()
                .map(|o| OptionJson {
                    policy: o.policy.to_rows(),
                    termination: o.termination.iter().copied().collect(),
                })
                .collect(),
            mu: matrix_to_rows(&self.mu.probs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionJson {
    pub policy: Vec<Vec<f64>>,
    pub termination: Vec<f64>,
}

/// Wire form of an [`OptionSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionSetJson {
    pub options: Vec<OptionJson>,
    pub mu: Vec<Vec<f64>>,
}

impl TryFrom<&OptionSetJson> for OptionSet {
    type Error = Error;

    fn try_from(j: &OptionSetJson) -> Result<Self> {
        let options = j
            .options
            .iter()
            .enumerate()
            .map(|(index, o)| {
                let policy =
                    PolicyMatrix::from_rows(&o.policy).map_err(|e| Error::InvalidOption {
                        index,
                        reason: e.to_string(),
                    })?;
                OptionSpec::new(policy, Vector::from_vec(o.termination.clone())).map_err(
                    |e| match e {
                        Error::InvalidOption { reason, .. } => {
                            Error::InvalidOption { index, reason }
                        }
                        other => other,
                    },
                )
            })
            .collect::<Result<Vec<_>>>()?;
        OptionSet::new(options, MetaPolicy::new(matrix_from_rows(&j.mu)?)?)
    }
}

/// Everything the generalized Bellman operator `L v = b + F v` needs.
#[derive(Debug, Clone)]
pub struct GatingModels {
    pub sigma: PolicyMatrix,
    pub r_sigma: Vector,
    pub p_sharp: Matrix,
    pub p_bot: Matrix,
    pub b: Vector,
    pub f: Matrix,
    pub gamma: f64,
}

/// `sigma(a|s) = sum_w mu(w|s) pi_w(a|s)`.
pub fn marginal_policy(set: &OptionSet) -> Result<PolicyMatrix> {
    let n = set.n_states();
    let k = set.n_actions();
    let mut sigma = Matrix::zeros(n, k);
    for (w, o) in set.options.iter().enumerate() {
        for s in 0..n {
            let m = set.mu.prob(s, w);
            for a in 0..k {
                sigma[(s, a)] += m * o.policy.prob(s, a);
            }
        }
    }
    PolicyMatrix::new(sigma)
}

/// Continuation and termination matrices in one pass.
pub fn split_transitions(mdp: &Mdp, set: &OptionSet) -> Result<(Matrix, Matrix)> {
    set.check_against(mdp)?;
    let n = mdp.n_states();
    let mut p_sharp = Matrix::zeros(n, n);
    let mut p_bot = Matrix::zeros(n, n);
    for (w, o) in set.options.iter().enumerate() {
        let beta = &o.termination;
        for s in 0..n {
            let m = set.mu.prob(s, w);
            if m == 0.0 {
                continue;
            }
            for a in 0..mdp.n_actions() {
                let weight = m * o.policy.prob(s, a);
                if weight == 0.0 {
                    continue;
                }
                let p = mdp.transition(a);
                for s2 in 0..n {
                    let x = weight * p[(s, s2)];
                    p_sharp[(s, s2)] += x * (1.0 - beta[s2]);
                    p_bot[(s, s2)] += x * beta[s2];
                }
            }
        }
    }
    Ok((p_sharp, p_bot))
}

pub fn continuation_matrix(mdp: &Mdp, set: &OptionSet) -> Result<Matrix> {
    Ok(split_transitions(mdp, set)?.0)
}

pub fn termination_matrix(mdp: &Mdp, set: &OptionSet) -> Result<Matrix> {
    Ok(split_transitions(mdp, set)?.1)
}

/// `I - gamma P_cont`, factorized.
pub(crate) fn factor_continuation(p_sharp: &Matrix, gamma: f64, label: &str) -> Result<Factorized> {
    let n = p_sharp.nrows();
    Factorized::new(&(Matrix::identity(n, n) - p_sharp * gamma), label)
}

pub fn reward_model(mdp: &Mdp, set: &OptionSet) -> Result<Vector> {
    Ok(build_gating_models(mdp, set)?.b)
}

pub fn transition_model(mdp: &Mdp, set: &OptionSet) -> Result<Matrix> {
    Ok(build_gating_models(mdp, set)?.f)
}

pub fn build_gating_models(mdp: &Mdp, set: &OptionSet) -> Result<GatingModels> {
    let sigma = marginal_policy(set)?;
    let (p_sharp, p_bot) = split_transitions(mdp, set)?;
    let gamma = mdp.gamma();
    let r_sigma = crate::mdp::induce_chain(mdp, &sigma)?.r_pi;
    let lu = factor_continuation(&p_sharp, gamma, "I - gamma P_cont")?;
    let b = lu.solve_vec(&r_sigma)?;
    let f = lu.solve_mat(&(&p_bot * gamma))?;
    Ok(GatingModels {
        sigma,
        r_sigma,
        p_sharp,
        p_bot,
        b,
        f,
        gamma,
    })
}

impl GatingModels {
    /// `max |b - (r_sigma + gamma P_cont b)|`.
    pub fn reward_recursion_residual(&self) -> f64 {
        let rhs = &self.r_sigma + &self.p_sharp * &self.b * self.gamma;
        crate::linalg::vec_inf_norm(&(&self.b - rhs))
    }

    /// `max |F - (gamma P_term + gamma P_cont F)|`.
    pub fn transition_recursion_residual(&self) -> f64 {
        let rhs = (&self.p_bot + &self.p_sharp * &self.f) * self.gamma;
        crate::linalg::max_abs_diff(&self.f, &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn one_state_mdp(r: f64, gamma: f64) -> Mdp {
        Mdp::new(
            vec![Matrix::from_element(1, 1, 1.0)],
            Matrix::from_element(1, 1, r),
            gamma,
        )
        .unwrap()
    }

    fn one_state_option(beta: f64) -> OptionSet {
        OptionSet::single(
            OptionSpec::new(PolicyMatrix::uniform(1, 1), Vector::from_element(1, beta)).unwrap(),
        )
    }

    fn two_action_mdp() -> Mdp {
        Mdp::from_nested(
            &[
                vec![vec![0.3, 0.7], vec![1.0, 0.0]],
                vec![vec![0.5, 0.5], vec![0.1, 0.9]],
            ],
            &[vec![1.0, -1.0], vec![0.5, 2.0]],
            0.9,
        )
        .unwrap()
    }

    fn deterministic_pair(beta0: f64, beta1: f64, mu0: f64) -> OptionSet {
        let o0 = OptionSpec::new(
            PolicyMatrix::deterministic(2, 2, 0).unwrap(),
            Vector::from_element(2, beta0),
        )
        .unwrap();
        let o1 = OptionSpec::new(
            PolicyMatrix::deterministic(2, 2, 1).unwrap(),
            Vector::from_element(2, beta1),
        )
        .unwrap();
        let mu = MetaPolicy::new(Matrix::from_row_slice(
            2,
            2,
            &[mu0, 1.0 - mu0, mu0, 1.0 - mu0],
        ))
        .unwrap();
        OptionSet::new(vec![o0, o1], mu).unwrap()
    }

    #[test]
    fn marginal_of_single_option_is_its_policy() {
        let pi = PolicyMatrix::from_rows(&[vec![0.2, 0.8], vec![1.0, 0.0]]).unwrap();
        let set = OptionSet::single(OptionSpec::new(pi.clone(), Vector::zeros(2)).unwrap());
        assert_eq!(marginal_policy(&set).unwrap(), pi);
    }

    #[test]
    fn marginal_of_identical_policies_ignores_mu() {
        let pi = PolicyMatrix::from_rows(&[vec![0.25, 0.75], vec![0.5, 0.5]]).unwrap();
        let o = OptionSpec::new(pi.clone(), Vector::zeros(2)).unwrap();
        let mu = MetaPolicy::new(Matrix::from_row_slice(2, 2, &[0.9, 0.1, 0.3, 0.7])).unwrap();
        let set = OptionSet::new(vec![o.clone(), o], mu).unwrap();
        let sigma = marginal_policy(&set).unwrap();
        assert!(max_abs_diff(sigma.probs(), pi.probs()) < 1e-15);
    }

    #[test]
    fn marginal_mixes_deterministic_options() {
        let sigma = marginal_policy(&deterministic_pair(0.5, 0.5, 0.3)).unwrap();
        for s in 0..2 {
            assert!((sigma.prob(s, 0) - 0.3).abs() < 1e-15);
            assert!((sigma.prob(s, 1) - 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn continuation_and_termination_limits() {
        let mdp = two_action_mdp();
        let sigma = marginal_policy(&deterministic_pair(1.0, 1.0, 0.4)).unwrap();
        let p_sigma = crate::mdp::induce_chain(&mdp, &sigma).unwrap().p_pi;

        let (sharp, bot) = split_transitions(&mdp, &deterministic_pair(1.0, 1.0, 0.4)).unwrap();
        assert_eq!(sharp, Matrix::zeros(2, 2));
        assert!(max_abs_diff(&bot, &p_sigma) < 1e-15);

        let (sharp, bot) = split_transitions(&mdp, &deterministic_pair(0.0, 0.0, 0.4)).unwrap();
        assert_eq!(bot, Matrix::zeros(2, 2));
        assert!(max_abs_diff(&sharp, &p_sigma) < 1e-15);
    }

    #[test]
    fn scalar_continuation_and_termination() {
        let mdp = one_state_mdp(1.0, 0.9);
        let set = one_state_option(0.5);
        assert_eq!(continuation_matrix(&mdp, &set).unwrap()[(0, 0)], 0.5);
        assert_eq!(termination_matrix(&mdp, &set).unwrap()[(0, 0)], 0.5);
    }

    #[test]
    fn scalar_reward_model() {
        let mdp = one_state_mdp(1.0, 0.9);
        // 1 / (1 - 0.9)
        assert!((reward_model(&mdp, &one_state_option(0.0)).unwrap()[0] - 10.0).abs() < 1e-12);
        // 1 / (1 - 0.9 * 0.5)
        let b = reward_model(&mdp, &one_state_option(0.5)).unwrap()[0];
        assert!((b - 1.0 / 0.55).abs() < 1e-12);
        assert!((b - 1.818182).abs() < 1e-6);
        assert_eq!(reward_model(&mdp, &one_state_option(1.0)).unwrap()[0], 1.0);
    }

    #[test]
    fn scalar_transition_model() {
        let mdp = one_state_mdp(1.0, 0.9);
        // gamma beta / (1 - gamma (1 - beta))
        let f = transition_model(&mdp, &one_state_option(0.5)).unwrap()[(0, 0)];
        assert!((f - 0.45 / 0.55).abs() < 1e-12);
        assert!((f - 0.818182).abs() < 1e-6);
        assert_eq!(
            transition_model(&mdp, &one_state_option(0.0)).unwrap()[(0, 0)],
            0.0
        );
    }

    #[test]
    fn immediate_termination_gives_one_step_models() {
        let mdp = two_action_mdp();
        let set = deterministic_pair(1.0, 1.0, 0.25);
        let m = build_gating_models(&mdp, &set).unwrap();
        let chain = crate::mdp::induce_chain(&mdp, &m.sigma).unwrap();
        assert!(crate::linalg::vec_inf_norm(&(&m.b - &chain.r_pi)) < 1e-15);
        assert!(max_abs_diff(&m.f, &(&chain.p_pi * mdp.gamma())) < 1e-15);
    }

    #[test]
    fn never_terminating_gives_exact_values() {
        let mdp = two_action_mdp();
        let set = deterministic_pair(0.0, 0.0, 0.25);
        let m = build_gating_models(&mdp, &set).unwrap();
        assert_eq!(m.f, Matrix::zeros(2, 2));
        let v = crate::solver::direct_solve(&mdp, &m.sigma).unwrap();
        assert!(crate::linalg::vec_inf_norm(&(&m.b - v)) < 1e-12);
    }

    #[test]
    fn recursions_hold_on_mixed_terminations() {
        let mdp = two_action_mdp();
        let o0 = OptionSpec::new(
            PolicyMatrix::from_rows(&[vec![0.6, 0.4], vec![0.1, 0.9]]).unwrap(),
            Vector::from_vec(vec![0.2, 0.7]),
        )
        .unwrap();
        let o1 = OptionSpec::new(
            PolicyMatrix::deterministic(2, 2, 1).unwrap(),
            Vector::from_vec(vec![1.0, 0.0]),
        )
        .unwrap();
        let mu = MetaPolicy::new(Matrix::from_row_slice(2, 2, &[0.5, 0.5, 0.2, 0.8])).unwrap();
        let m = build_gating_models(&mdp, &OptionSet::new(vec![o0, o1], mu).unwrap()).unwrap();
        assert!(m.reward_recursion_residual() < 1e-12);
        assert!(m.transition_recursion_residual() < 1e-12);
        assert!(m.f.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn rejects_out_of_range_termination() {
        let err = OptionSpec::new(
            PolicyMatrix::uniform(2, 1),
            Vector::from_vec(vec![0.5, 1.2]),
        );
        assert!(matches!(err, Err(Error::InvalidOption { .. })));
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let mdp = two_action_mdp();
        let set = one_state_option(0.5);
        let err = build_gating_models(&mdp, &set).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                axis: "option states",
                ..
            }
        ));
    }

    #[test]
    fn json_round_trip() {
        let set = deterministic_pair(0.25, 0.75, 0.4);
        let text = serde_json::to_string(&set.to_json()).unwrap();
        let back: OptionSetJson = serde_json::from_str(&text).unwrap();
        assert_eq!(OptionSet::try_from(&back).unwrap(), set);
    }
}
