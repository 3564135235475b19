//! Side-by-side runs of option-induced and classic splittings on the same
//! policy-evaluation system.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::bench::io::Problem;
use crate::error::{Error, Result};
use crate::gating::{build_gating_models, marginal_policy};
use crate::linalg::{vec_inf_norm, Vector};
use crate::mdp::{induce_chain, PolicyMatrix};
use crate::solver::{direct_solve, iterate_splitting, SolveConfig, SolveReport};
use crate::splitting::{
    classic_splitting, parse_call, rate_bound, splitting_from_options, ClassicMethod, Splitting,
};

/// Agreement with the direct solve required of every converged method, as a
/// multiple of the solver tolerance. Raised to `1 / (1 - gamma)` when that is
/// larger, since a residual of `tol` only bounds the error by `tol / (1 - gamma)`.
pub const ORACLE_FACTOR: f64 = 10.0;

pub fn agreement_bound(tol: f64, gamma: f64) -> f64 {
    ORACLE_FACTOR.max(1.0 / (1.0 - gamma)) * tol
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Options with termination scaled by `c`.
    Options(f64),
    Classic(ClassicMethod),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Options(c) => write!(f, "options({c})"),
            Method::Classic(m) => m.fmt(f),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "options" {
            return Ok(Method::Options(1.0));
        }
        if s.starts_with("options(") {
            let (_, c) = parse_call(s)?;
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidParameter(format!(
                    "options scale {c} outside [0, 1]"
                )));
            }
            return Ok(Method::Options(c));
        }
        s.parse().map(Method::Classic)
    }
}

/// Parses a comma-separated method list such as `options(0.5),jacobi,sor(1.2)`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// The policy evaluated by `problem`: the marginal of its options, or the
/// uniform policy when it has none.
pub fn target_policy(problem: &Problem) -> Result<PolicyMatrix> {
    match &problem.options {
        Some(set) => marginal_policy(set),
        None => Ok(PolicyMatrix::uniform(
            problem.mdp.n_states(),
            problem.mdp.n_actions(),
        )),
    }
}

pub fn build_splitting(problem: &Problem, method: Method) -> Result<Splitting> {
    match method {
        Method::Options(c) => {
            let set = problem.option_set()?.scale_termination(c)?;
            let models = build_gating_models(&problem.mdp, &set)?;
            splitting_from_options(&models, &problem.mdp)
        }
        Method::Classic(m) => classic_splitting(&problem.mdp, &target_policy(problem)?, m),
    }
}

/// Builds the splitting for `method` and runs it on `r_sigma`.
pub fn solve_with(problem: &Problem, method: Method, cfg: &SolveConfig) -> Result<SolveReport> {
    let split = build_splitting(problem, method)?;
    let r = induce_chain(&problem.mdp, &target_policy(problem)?)?.r_pi;
    iterate_splitting(&split, &r, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub method: String,
    pub rho: f64,
    pub iterations: usize,
    pub final_residual: f64,
    /// `||v - v_sigma||_inf` against the direct solve.
    pub oracle_error: f64,
    pub converged: bool,
    pub diverged: bool,
    /// Converged and within [`agreement_bound`] of the direct solve.
    pub agrees: bool,
    pub wall_ms: f64,
}

pub const COMPARISON_COLUMNS: [&str; 9] = [
    "method",
    "rho",
    "iterations",
    "final_residual",
    "oracle_error",
    "converged",
    "diverged",
    "agrees",
    "wall_ms",
];

pub fn run_method_comparison(
    problem: &Problem,
    methods: &[Method],
    cfg: &SolveConfig,
) -> Result<Vec<MethodRow>> {
    let policy = target_policy(problem)?;
    let oracle = direct_solve(&problem.mdp, &policy)?;
    let r = induce_chain(&problem.mdp, &policy)?.r_pi;
    let bound = agreement_bound(cfg.tol, problem.mdp.gamma());
    methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let split = build_splitting(problem, method)?;
            let rho = rate_bound(&split)?.rho;
            let report = iterate_splitting(&split, &r, cfg)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let oracle_error = error_against(&report.v, &oracle);
            Ok(MethodRow {
                method: method.to_string(),
                rho,
                iterations: report.iterations,
                final_residual: report.final_residual(),
                oracle_error,
                converged: report.converged,
                diverged: report.diverged,
                agrees: report.converged && oracle_error <= bound,
                wall_ms,
            })
        })
        .collect()
}

fn error_against(v: &Vector, oracle: &Vector) -> f64 {
    let e = vec_inf_norm(&(v - oracle));
    if e.is_finite() {
        e
    } else {
        f64::INFINITY
    }
}

pub fn write_comparison_csv<W: Write>(out: W, rows: &[MethodRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.rho.to_string(),
            r.iterations.to_string(),
            r.final_residual.to_string(),
            r.oracle_error.to_string(),
            r.converged.to_string(),
            r.diverged.to_string(),
            r.agrees.to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
