//! Successive approximation driven by a splitting, plus the two equivalent
//! one-step forms of the generalized Bellman operator and a direct solve
//! used as ground truth.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::gating::{factor_continuation, GatingModels};
use crate::linalg::{check_len, vec_inf_norm, Factorized, Matrix, Vector};
use crate::mdp::{induce_chain, Mdp, PolicyMatrix};
use crate::splitting::{system_matrix, Splitting};

/// Residuals beyond this multiple of the initial residual abort the run.
pub const DIVERGENCE_FACTOR: f64 = 1e12;
/// Number of successive ratios averaged by [`estimate_rate`].
pub const RATE_WINDOW: usize = 20;
/// Minimum number of usable residuals required by [`estimate_rate`].
pub const RATE_MIN_HISTORY: usize = 25;

#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Threshold on `||A v - r||_inf`.
    pub tol: f64,
    pub max_iters: usize,
    /// Initial guess; zero when `None`.
    pub v0: Option<Vector>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 100_000,
            v0: None,
        }
    }
}

impl SolveConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_v0(mut self, v0: Vector) -> Self {
        self.v0 = Some(v0);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub v: Vector,
    /// Number of updates applied to `v0`.
    pub iterations: usize,
    /// `||A v_k - r||_inf` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    /// `||r||_inf`, used to locate the round-off floor of the residuals.
    pub rhs_norm: f64,
    /// See [`estimate_rate`]; `None` when the history is too short.
    pub empirical_rate: Option<f64>,
    pub converged: bool,
    pub diverged: bool,
    /// Time spent factorizing `M`.
    pub factor_time: Duration,
    /// Time spent in the iteration loop.
    pub iter_time: Duration,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }

    /// Mean wall time of one update.
    pub fn time_per_iteration(&self) -> Duration {
        if self.iterations == 0 {
            Duration::ZERO
        } else {
            self.iter_time / self.iterations as u32
        }
    }
}

/// `v_sigma = (I - gamma P_sigma)^-1 r_sigma` by dense LU.
pub fn direct_solve(mdp: &Mdp, policy: &PolicyMatrix) -> Result<Vector> {
    let chain = induce_chain(mdp, policy)?;
    let a = system_matrix(mdp, policy)?;
    Factorized::new(&a, "I - gamma P_sigma")?.solve_vec(&chain.r_pi)
}

/// One application of the standard policy Bellman operator,
/// `r_pi + gamma P_pi v`.
pub fn bellman_step(mdp: &Mdp, policy: &PolicyMatrix, v: &Vector) -> Result<Vector> {
    check_len("value vector", mdp.n_states(), v.len())?;
    let chain = induce_chain(mdp, policy)?;
    Ok(chain.r_pi + chain.p_pi * v * mdp.gamma())
}

/// The iterates `v_{k+1} = M^-1 (N v_k + r)` as an iterator, reusing one
/// factorization of `M`.
pub struct SplittingIteration<'a> {
    lu: Factorized,
    n: &'a Matrix,
    r: &'a Vector,
    v: Vector,
}

impl<'a> SplittingIteration<'a> {
    pub fn new(s: &'a Splitting, r: &'a Vector, v0: Vector) -> Result<Self> {
        check_len("right-hand side", s.dim(), r.len())?;
        check_len("initial guess", s.dim(), v0.len())?;
        Ok(Self::with_factor(s.factor_m()?, s, r, v0))
    }

    fn with_factor(lu: Factorized, s: &'a Splitting, r: &'a Vector, v0: Vector) -> Self {
        Self {
            lu,
            n: s.n(),
            r,
            v: v0,
        }
    }

    pub fn current(&self) -> &Vector {
        &self.v
    }
}

impl Iterator for SplittingIteration<'_> {
    type Item = Vector;

    fn next(&mut self) -> Option<Vector> {
        let rhs = self.n * &self.v + self.r;
        self.v = self.lu.solve_vec(&rhs).ok()?;
        Some(self.v.clone())
    }
}

pub fn iterate_splitting(s: &Splitting, r: &Vector, cfg: &SolveConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let n = s.dim();
    check_len("right-hand side", n, r.len())?;
    let v0 = cfg.v0.clone().unwrap_or_else(|| Vector::zeros(n));
    check_len("initial guess", n, v0.len())?;

    let start = Instant::now();
    let lu = s.factor_m()?;
    let factor_time = start.elapsed();

    let residual = |v: &Vector| vec_inf_norm(&(s.a() * v - r));
    let start = Instant::now();
    let res0 = residual(&v0);
    let mut history = vec![res0];
    let mut converged = res0 <= cfg.tol;
    let mut diverged = false;
    let mut iterations = 0;
    let mut it = SplittingIteration::with_factor(lu, s, r, v0);
    while !converged && !diverged && iterations < cfg.max_iters {
        let v = it.next().ok_or_else(|| Error::Singular {
            label: s.label().to_string(),
        })?;
        iterations += 1;
        let res = residual(&v);
        history.push(res);
        if res <= cfg.tol {
            converged = true;
        } else if !res.is_finite() || res > DIVERGENCE_FACTOR * res0 {
            diverged = true;
        }
    }
    let iter_time = start.elapsed();

    let mut report = SolveReport {
        v: it.v,
        iterations,
        residual_history: history,
        rhs_norm: vec_inf_norm(r),
        empirical_rate: None,
        converged,
        diverged,
        factor_time,
        iter_time,
    };
    report.empirical_rate = estimate_rate(&report).ok();
    Ok(report)
}

/// `L v = b + F v`.
pub fn apply_generalized_bellman(models: &GatingModels, v: &Vector) -> Result<Vector> {
    check_len("value vector", models.b.len(), v.len())?;
    Ok(&models.b + &models.f * v)
}

/// `v + M^-1 (r_sigma - A v)` with `M = I - gamma P_cont`. Algebraically
/// identical to [`apply_generalized_bellman`].
pub fn richardson_step(models: &GatingModels, mdp: &Mdp, v: &Vector) -> Result<Vector> {
    check_len("value vector", models.b.len(), v.len())?;
    check_len("model states", mdp.n_states(), models.b.len())?;
    let a = system_matrix(mdp, &models.sigma)?;
    let lu = factor_continuation(&models.p_sharp, mdp.gamma(), "I - gamma P_cont")?;
    let correction = lu.solve_vec(&(&models.r_sigma - a * v))?;
    Ok(v + correction)
}

/// Geometric mean of the last [`RATE_WINDOW`] successive residual ratios.
///
/// Only the leading run of residuals above `100 eps ||r||` is used, since
/// ratios below the round-off floor are noise. As the iteration proceeds the
/// estimate approaches `rho(M^-1 N)`.
pub fn estimate_rate(report: &SolveReport) -> Result<f64> {
    let floor = 100.0 * f64::EPSILON * report.rhs_norm;
    let usable = report
        .residual_history
        .iter()
        .take_while(|&&x| x.is_finite() && x > floor)
        .count();
    if usable < RATE_MIN_HISTORY {
        return Err(Error::InsufficientHistory {
            usable,
            required: RATE_MIN_HISTORY,
        });
    }
    let last = report.residual_history[usable - 1];
    let first = report.residual_history[usable - 1 - RATE_WINDOW];
    Ok((last / first).powf(1.0 / RATE_WINDOW as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gating::{build_gating_models, OptionSet, OptionSpec};
    use crate::splitting::splitting_from_options;

    fn scalar_mdp() -> Mdp {
        Mdp::new(
            vec![Matrix::from_element(1, 1, 1.0)],
            Matrix::from_element(1, 1, 1.0),
            0.9,
        )
        .unwrap()
    }

    fn scalar_models(beta: f64) -> (Mdp, GatingModels) {
        let mdp = scalar_mdp();
        let set = OptionSet::single(
            OptionSpec::new(PolicyMatrix::uniform(1, 1), Vector::from_element(1, beta)).unwrap(),
        );
        let models = build_gating_models(&mdp, &set).unwrap();
        (mdp, models)
    }

    fn scalar_run(beta: f64) -> SolveReport {
        let (mdp, models) = scalar_models(beta);
        let s = splitting_from_options(&models, &mdp).unwrap();
        iterate_splitting(&s, &models.r_sigma, &SolveConfig::default()).unwrap()
    }

    fn synthetic(history: Vec<f64>) -> SolveReport {
        SolveReport {
            v: Vector::zeros(1),
            iterations: history.len() - 1,
            residual_history: history,
            rhs_norm: 1.0,
            empirical_rate: None,
            converged: true,
            diverged: false,
            factor_time: Duration::ZERO,
            iter_time: Duration::ZERO,
        }
    }

    #[test]
    fn direct_solve_scalar() {
        let v = direct_solve(&scalar_mdp(), &PolicyMatrix::uniform(1, 1)).unwrap();
        assert!((v[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn direct_solve_zero_reward() {
        let mdp = scalar_mdp().with_reward(Matrix::zeros(1, 1)).unwrap();
        assert_eq!(
            direct_solve(&mdp, &PolicyMatrix::uniform(1, 1)).unwrap()[0],
            0.0
        );
    }

    #[test]
    fn direct_solve_absorbing_chain() {
        let mdp = Mdp::from_nested(
            &[vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]],
            &[vec![0.0], vec![1.0]],
            0.5,
        )
        .unwrap();
        let v = direct_solve(&mdp, &PolicyMatrix::uniform(2, 1)).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14);
        assert!((v[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn never_terminating_options_solve_in_one_step() {
        let report = scalar_run(0.0);
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert!((report.v[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_recurrence() {
        let (mdp, models) = scalar_models(0.5);
        let s = splitting_from_options(&models, &mdp).unwrap();
        let mut it = SplittingIteration::new(&s, &models.r_sigma, Vector::zeros(1)).unwrap();
        let b = 1.0 / 0.55;
        let f = 0.45 / 0.55;
        let v1 = it.next().unwrap()[0];
        assert!((v1 - b).abs() < 1e-12);
        assert!((v1 - 1.818182).abs() < 1e-6);
        let v2 = it.next().unwrap()[0];
        assert!((v2 - (b + f * b)).abs() < 1e-12);
        let report = scalar_run(0.5);
        assert!(report.converged);
        assert!((report.v[0] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn immediate_termination_is_value_iteration() {
        let (mdp, models) = scalar_models(1.0);
        let s = splitting_from_options(&models, &mdp).unwrap();
        let it = SplittingIteration::new(&s, &models.r_sigma, Vector::zeros(1)).unwrap();
        let mut vi = Vector::zeros(1);
        for v in it.take(50) {
            vi = bellman_step(&mdp, &PolicyMatrix::uniform(1, 1), &vi).unwrap();
            assert!((v[0] - vi[0]).abs() <= 1e-12);
        }
    }

    #[test]
    fn exhausting_iterations_is_not_an_error() {
        let (mdp, models) = scalar_models(1.0);
        let s = splitting_from_options(&models, &mdp).unwrap();
        let cfg = SolveConfig::default().with_max_iters(5);
        let report = iterate_splitting(&s, &models.r_sigma, &cfg).unwrap();
        assert!(!report.converged && !report.diverged);
        assert_eq!(report.iterations, 5);
        assert_eq!(report.residual_history.len(), 6);
    }

    #[test]
    fn divergence_is_flagged() {
        // rho(M^-1 N) = 3
        let a = Matrix::from_element(1, 1, 1.0);
        let s = Splitting::new(
            a,
            Matrix::from_element(1, 1, -0.5),
            Matrix::from_element(1, 1, -1.5),
            "bad",
        )
        .unwrap();
        let report =
            iterate_splitting(&s, &Vector::from_element(1, 1.0), &SolveConfig::default()).unwrap();
        assert!(report.diverged && !report.converged);
    }

    #[test]
    fn rejects_bad_config() {
        let (mdp, models) = scalar_models(1.0);
        let s = splitting_from_options(&models, &mdp).unwrap();
        assert!(
            iterate_splitting(&s, &models.r_sigma, &SolveConfig::default().with_tol(0.0)).is_err()
        );
        assert!(iterate_splitting(
            &s,
            &models.r_sigma,
            &SolveConfig::default().with_max_iters(0)
        )
        .is_err());
        let cfg = SolveConfig::default().with_v0(Vector::zeros(3));
        assert!(matches!(
            iterate_splitting(&s, &models.r_sigma, &cfg),
            Err(Error::DimensionMismatch {
                axis: "initial guess",
                ..
            })
        ));
    }

    #[test]
    fn bellman_forms_agree_on_scalar() {
        let (mdp, models) = scalar_models(0.5);
        let v = Vector::from_element(1, 3.0);
        let l = apply_generalized_bellman(&models, &v).unwrap();
        let r = richardson_step(&models, &mdp, &v).unwrap();
        assert!((l[0] - r[0]).abs() < 1e-12);
        assert_eq!(
            apply_generalized_bellman(&models, &Vector::zeros(1)).unwrap(),
            models.b
        );
        let fixed = Vector::from_element(1, 10.0);
        assert!((apply_generalized_bellman(&models, &fixed).unwrap()[0] - 10.0).abs() < 1e-12);
        assert!((richardson_step(&models, &mdp, &fixed).unwrap()[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn richardson_step_with_no_termination_is_exact() {
        let (mdp, models) = scalar_models(0.0);
        let v = richardson_step(&models, &mdp, &Vector::from_element(1, -42.0)).unwrap();
        assert!((v[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rate_of_geometric_sequence() {
        let report = synthetic((0..40).map(|k| 0.5f64.powi(k)).collect());
        assert!((estimate_rate(&report).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rate_needs_history() {
        let report = synthetic((0..10).map(|k| 0.5f64.powi(k)).collect());
        let err = estimate_rate(&report).unwrap_err();
        assert!(err.to_string().contains("insufficient history"));
    }

    #[test]
    fn rate_ignores_round_off_tail() {
        let mut history: Vec<f64> = (0..30).map(|k| 0.5f64.powi(k)).collect();
        history.extend([1e-15, 3e-15, 1e-16]);
        assert!((estimate_rate(&synthetic(history)).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn scalar_rates() {
        let r = scalar_run(1.0).empirical_rate.unwrap();
        assert!((r - 0.9).abs() < 1e-6, "{r}");
        let r = scalar_run(0.5).empirical_rate.unwrap();
        assert!((r - 0.45 / 0.55).abs() < 1e-6, "{r}");
    }
}
