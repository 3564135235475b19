//! Finite discounted MDPs, stochastic policies and the Markov chains they
//! induce.
//!
//! Transitions are stored as one dense `n x n` matrix per action, so that
//! `transition(a)[(s, s')] = P(s' | s, a)`. Rewards are an `n x k` table.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_len, Matrix, Vector};

/// Tolerance on every probability row sum.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeProbability {
        state: usize,
        action: usize,
        next: usize,
        value: f64,
    },
    RowSum {
        state: usize,
        action: usize,
        sum: f64,
    },
    Gamma(f64),
    NonFinite {
        what: &'static str,
        state: usize,
        action: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeProbability {
                state,
                action,
                next,
                value,
            } => write!(
                f,
                "negative probability P({next}|{state},{action}) = {value}"
            ),
            Violation::RowSum { state, action, sum } => {
                write!(f, "row ({state},{action}) sums to {sum}")
            }
            Violation::Gamma(g) => write!(f, "gamma must be < 1 and >= 0 (got {g})"),
            Violation::NonFinite {
                what,
                state,
                action,
            } => write!(f, "non-finite {what} at ({state},{action})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mdp {
    transition: Vec<Matrix>,
    reward: Matrix,
    gamma: f64,
}

impl Mdp {
    /// Builds an MDP and rejects it if any invariant is violated.
    pub fn new(transition: Vec<Matrix>, reward: Matrix, gamma: f64) -> Result<Self> {
        let mdp = Self::unchecked(transition, reward, gamma)?;
        let violations = validate_mdp(&mdp);
        if violations.is_empty() {
            Ok(mdp)
        } else {
            Err(Error::InvalidMdp(violations))
        }
    }

    /// Checks shapes only. Use [`validate_mdp`] to diagnose the rest.
    pub fn unchecked(transition: Vec<Matrix>, reward: Matrix, gamma: f64) -> Result<Self> {
        let n = reward.nrows();
        let k = reward.ncols();
        if n == 0 || k == 0 {
            return Err(Error::InvalidParameter(
                "mdp needs at least one state and one action".into(),
            ));
        }
        check_len("actions", k, transition.len())?;
        for p in &transition {
            check_len("transition rows", n, p.nrows())?;
            check_len("transition columns", n, p.ncols())?;
        }
        Ok(Self {
            transition,
            reward,
            gamma,
        })
    }

    /// Builds an MDP from a `(s, a, s')`-nested transition table and a
    /// `(s, a)` reward table.
    pub fn from_nested(
        transition: &[Vec<Vec<f64>>],
        reward: &[Vec<f64>],
        gamma: f64,
    ) -> Result<Self> {
        let n = transition.len();
        check_len("reward rows", n, reward.len())?;
        let k = reward.first().map_or(0, Vec::len);
        let mut per_action = vec![Matrix::zeros(n, n); k];
        for (s, rows) in transition.iter().enumerate() {
            check_len("transition actions", k, rows.len())?;
            for (a, row) in rows.iter().enumerate() {
                check_len("transition next states", n, row.len())?;
                for (s2, &p) in row.iter().enumerate() {
                    per_action[a][(s, s2)] = p;
                }
            }
        }
        let mut r = Matrix::zeros(n, k);
        for (s, row) in reward.iter().enumerate() {
            check_len("reward actions", k, row.len())?;
            for (a, &x) in row.iter().enumerate() {
                r[(s, a)] = x;
            }
        }
        Self::new(per_action, r, gamma)
    }

    pub fn n_states(&self) -> usize {
        self.reward.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.reward.ncols()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `P(. | ., a)` as an `n x n` matrix.
    pub fn transition(&self, action: usize) -> &Matrix {
        &self.transition[action]
    }

    pub fn reward(&self) -> &Matrix {
        &self.reward
    }

    /// Same dynamics with another reward table.
    pub fn with_reward(&self, reward: Matrix) -> Result<Self> {
        check_len("reward rows", self.n_states(), reward.nrows())?;
        check_len("reward actions", self.n_actions(), reward.ncols())?;
        Self::new(self.transition.clone(), reward, self.gamma)
    }

    pub fn to_json(&self) -> MdpJson {
        let n = self.n_states();
        let k = self.n_actions();
        MdpJson {
            n_states: n,
            n_actions: k,
            gamma: self.gamma,
            transition: (0..n)
                .map(|s| {
                    (0..k)
                        .map(|a| (0..n).map(|s2| self.transition[a][(s, s2)]).collect())
                        .collect()
                })
                .collect(),
            reward: (0..n)
                .map(|s| (0..k).map(|a| self.reward[(s, a)]).collect())
                .collect(),
        }
    }
}

/// Wire form of an [`Mdp`], nested `(s, a, s')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpJson {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub reward: Vec<Vec<f64>>,
}

impl TryFrom<&MdpJson> for Mdp {
    type Error = Error;

    fn try_from(j: &MdpJson) -> Result<Self> {
        check_len("n_states", j.n_states, j.transition.len())?;
        if let Some(first) = j.transition.first() {
            check_len("n_actions", j.n_actions, first.len())?;
        }
        Mdp::from_nested(&j.transition, &j.reward, j.gamma)
    }
}

/// Reports every violated invariant. Never fails.
pub fn validate_mdp(mdp: &Mdp) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(0.0..1.0).contains(&mdp.gamma) {
        out.push(Violation::Gamma(mdp.gamma));
    }
    for a in 0..mdp.n_actions() {
        let p = &mdp.transition[a];
        for s in 0..mdp.n_states() {
            if !mdp.reward[(s, a)].is_finite() {
                out.push(Violation::NonFinite {
                    what: "reward",
                    state: s,
                    action: a,
                });
            }
            let mut sum = 0.0;
            let mut finite = true;
            for s2 in 0..mdp.n_states() {
                let x = p[(s, s2)];
                if !x.is_finite() {
                    finite = false;
                } else if x < 0.0 {
                    out.push(Violation::NegativeProbability {
                        state: s,
                        action: a,
                        next: s2,
                        value: x,
                    });
                }
                sum += x;
            }
            if !finite {
                out.push(Violation::NonFinite {
                    what: "transition",
                    state: s,
                    action: a,
                });
            } else if (sum - 1.0).abs() > PROB_TOL {
                out.push(Violation::RowSum {
                    state: s,
                    action: a,
                    sum,
                });
            }
        }
    }
    out
}

/// A stochastic policy `pi(a | s)` stored as an `n x k` row-stochastic table.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyMatrix {
    probs: Matrix,
}

impl PolicyMatrix {
    pub fn new(probs: Matrix) -> Result<Self> {
        if let Some(reason) = check_row_stochastic(&probs) {
            return Err(Error::InvalidPolicy(reason));
        }
        Ok(Self { probs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    /// Always picks `action`.
    pub fn deterministic(n_states: usize, n_actions: usize, action: usize) -> Result<Self> {
        if action >= n_actions {
            return Err(Error::InvalidParameter(format!(
                "action {action} out of range for {n_actions} actions"
            )));
        }
        let mut probs = Matrix::zeros(n_states, n_actions);
        probs.column_mut(action).fill(1.0);
        Ok(Self { probs })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            probs: Matrix::from_element(n_states, n_actions, 1.0 / n_actions as f64),
        }
    }

    pub fn n_states(&self) -> usize {
        self.probs.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.probs.ncols()
    }

    pub fn probs(&self) -> &Matrix {
        &self.probs
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.probs[(state, action)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.probs)
    }
}

/// `P_pi` and `r_pi` for a fixed policy.
#[derive(Debug, Clone)]
pub struct InducedChain {
    pub p_pi: Matrix,
    pub r_pi: Vector,
}

pub fn induce_chain(mdp: &Mdp, policy: &PolicyMatrix) -> Result<InducedChain> {
    check_len("policy states", mdp.n_states(), policy.n_states())?;
    check_len("policy actions", mdp.n_actions(), policy.n_actions())?;
    let n = mdp.n_states();
    let mut p_pi = Matrix::zeros(n, n);
    let mut r_pi = Vector::zeros(n);
    for s in 0..n {
        for a in 0..mdp.n_actions() {
            let w = policy.prob(s, a);
            if w == 0.0 {
                continue;
            }
            r_pi[s] += w * mdp.reward[(s, a)];
            let p = &mdp.transition[a];
            for s2 in 0..n {
                p_pi[(s, s2)] += w * p[(s, s2)];
            }
        }
    }
    Ok(InducedChain { p_pi, r_pi })
}

/// `None` when every row is a probability vector within [`PROB_TOL`].
pub(crate) fn check_row_stochastic(m: &Matrix) -> Option<String> {
    for (i, row) in m.row_iter().enumerate() {
        let mut sum = 0.0;
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Some(format!("entry ({i},{j}) = {x} is not a probability"));
            }
            sum += x;
        }
        if (sum - 1.0).abs() > PROB_TOL {
            return Some(format!("row {i} sums to {sum}"));
        }
    }
    None
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    for row in rows {
        check_len("row length", k, row.len())?;
    }
    Ok(Matrix::from_fn(n, k, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
