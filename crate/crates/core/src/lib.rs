//! Options over finite discounted MDPs, read as matrix splittings.
//!
//! Evaluating a policy `sigma` means solving `(I - gamma P_sigma) v = r_sigma`.
//! A set of Markov options and a policy over them whose marginal action
//! distribution is `sigma` split that matrix as `M - N` with
//! `M = I - gamma P_cont` and `N = gamma P_term`. The split is regular, the
//! induced iteration `v <- b + F v` converges to `v_sigma` from any start, and
//! its asymptotic rate `rho(M^-1 N)` can only drop when termination
//! probabilities are lowered pointwise.
//!
//! Modules, bottom-up:
//!
//! - [`mdp`]: MDPs, policies, induced chains.
//! - [`spectral`]: spectral radius.
//! - [`gating`]: marginal policy, continuation/termination matrices, reward
//!   and transition models under gating execution.
//! - [`splitting`]: splittings from options and classic baselines,
//!   regularity certification, rate bounds and comparisons.
//! - [`solver`]: successive approximation, the generalized Bellman operator
//!   in its two equivalent forms, direct solve, empirical rates.
//! - [`call_return`]: per-option models under call-and-return execution.
//! - [`bench`]: problem generators, the termination sweep, method comparison,
//!   JSON/CSV I/O and the invariant checker behind the `optsplit` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod bench;
pub mod call_return;
pub mod error;
pub mod gating;
pub mod linalg;
pub mod mdp;
pub mod solver;
pub mod spectral;
pub mod splitting;

pub use error::{Error, Result};
pub use gating::{
    build_gating_models, marginal_policy, GatingModels, MetaPolicy, OptionSet, OptionSpec,
};
pub use linalg::{Matrix, Vector};
pub use mdp::{induce_chain, validate_mdp, InducedChain, Mdp, PolicyMatrix};
pub use solver::{direct_solve, iterate_splitting, SolveConfig, SolveReport};
pub use splitting::{
    check_regular, classic_splitting, splitting_from_options, ClassicMethod, Splitting,
};
