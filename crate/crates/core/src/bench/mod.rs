//! Experiment harness: generators, problem files, termination sweeps,
//! method comparisons and the invariant checker.

pub mod compare;
pub mod generators;
pub mod io;
pub mod sweep;
pub mod validate;

pub use compare::{parse_methods, run_method_comparison, Method, MethodRow};
pub use generators::{gen_four_rooms, gen_random_mdp, random_option_set};
pub use io::{ExperimentSpec, Problem, ProblemSource};
pub use sweep::{run_beta_sweep, SweepOutcome, SweepRow};
pub use validate::{validate_problem, ValidationReport};
