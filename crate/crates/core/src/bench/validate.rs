//! The full invariant suite for one problem, as run by `optsplit validate`.

use std::fmt;

use rand::Rng;

use crate::bench::generators::rng_from_seed;
use crate::bench::io::Problem;
use crate::call_return::{option_models, splitting_identity};
use crate::gating::{build_gating_models, OptionSet};
use crate::linalg::{max_abs_diff, min_entry, vec_inf_norm, Vector};
use crate::mdp::{induce_chain, validate_mdp, PolicyMatrix};
use crate::solver::{
    apply_generalized_bellman, bellman_step, direct_solve, iterate_splitting, richardson_step,
    SolveConfig, SplittingIteration,
};
use crate::splitting::{check_regular, compare_rates, splitting_from_options, SPLIT_TOL};

/// Scale factors used for the ordering check.
pub const DEFAULT_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name,
            passed,
            detail: detail.into(),
        });
    }

    fn fail(&mut self, name: &'static str, err: impl fmt::Display) {
        self.push(name, false, format!("error: {err}"));
    }
}

/// Runs every check against `problem`. Failing checks are recorded, never
/// raised; `seed` drives the random starting points.
pub fn validate_problem(problem: &Problem, cfg: &SolveConfig, seed: u64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let violations = validate_mdp(&problem.mdp);
    report.push(
        "mdp",
        violations.is_empty(),
        if violations.is_empty() {
            format!(
                "{} states, {} actions, gamma {}",
                problem.mdp.n_states(),
                problem.mdp.n_actions(),
                problem.mdp.gamma()
            )
        } else {
            format!("{} violations, first: {}", violations.len(), violations[0])
        },
    );
    let Some(set) = problem.options.as_ref() else {
        report.push("options", false, "problem has no option set");
        return report;
    };
    if !violations.is_empty() {
        return report;
    }
    let mut rng = rng_from_seed(seed);
    gating_checks(problem, set, cfg, &mut rng, &mut report);
    ordering_check(problem, set, &mut report);
    call_return_checks(problem, set, &mut report);
    report
}

fn gating_checks<R: Rng>(
    problem: &Problem,
    set: &OptionSet,
    cfg: &SolveConfig,
    rng: &mut R,
    report: &mut ValidationReport,
) {
    let mdp = &problem.mdp;
    let models = match build_gating_models(mdp, set) {
        Ok(m) => m,
        Err(e) => return report.fail("models", e),
    };
    let p_sigma = match induce_chain(mdp, &models.sigma) {
        Ok(c) => c.p_pi,
        Err(e) => return report.fail("models", e),
    };
    let gap = max_abs_diff(&(&models.p_sharp + &models.p_bot), &p_sigma);
    let neg = min_entry(&models.p_sharp).0.min(min_entry(&models.p_bot).0);
    report.push(
        "exhaustive split",
        gap <= 1e-12 && neg >= 0.0,
        format!("max |P_cont + P_term - P_sigma| = {gap:e}, min entry {neg:e}"),
    );
    let rb = models.reward_recursion_residual();
    let rf = models.transition_recursion_residual();
    report.push(
        "model recursions",
        rb < 1e-9 && rf < 1e-9,
        format!("reward residual {rb:e}, transition residual {rf:e}"),
    );

    let split = match splitting_from_options(&models, mdp) {
        Ok(s) => s,
        Err(e) => return report.fail("regular splitting", e),
    };
    match check_regular(&split) {
        Ok(r) => {
            let gap = max_abs_diff(split.a(), &(split.m() - split.n()));
            report.push(
                "regular splitting",
                r.is_regular && gap <= SPLIT_TOL,
                format!(
                    "min M^-1 {:e}, min N {:e}, |A - (M - N)| {gap:e}",
                    r.m_inverse_worst.0, r.n_worst.0
                ),
            );
            report.push(
                "contraction",
                r.rho < 1.0,
                format!("rho(M^-1 N) = {}", r.rho),
            );
        }
        Err(e) => report.fail("regular splitting", e),
    }

    let oracle = match direct_solve(mdp, &models.sigma) {
        Ok(v) => v,
        Err(e) => return report.fail("consistency", e),
    };
    match iterate_splitting(&split, &models.r_sigma, cfg) {
        Ok(run) => {
            let err = vec_inf_norm(&(&run.v - &oracle));
            report.push(
                "consistency",
                run.converged && err <= 1e-8,
                format!("{} iterations, |v - v_sigma| = {err:e}", run.iterations),
            );
        }
        Err(e) => report.fail("consistency", e),
    }

    let n = mdp.n_states();
    let scale = 1.0 + vec_inf_norm(&oracle);
    let mut limits: Vec<Vector> = Vec::new();
    let mut all_converged = true;
    for _ in 0..10 {
        let v0 = Vector::from_fn(n, |_, _| rng.gen_range(-scale..scale));
        match iterate_splitting(&split, &models.r_sigma, &cfg.clone().with_v0(v0)) {
            Ok(run) => {
                all_converged &= run.converged;
                limits.push(run.v);
            }
            Err(e) => return report.fail("random starts", e),
        }
    }
    let (residual_spread, value_spread) = start_spread(split.a(), &limits);
    let value_bound = 2.0 * cfg.tol / (1.0 - mdp.gamma());
    report.push(
        "random starts",
        all_converged && residual_spread <= 2.0 * cfg.tol && value_spread <= value_bound,
        format!(
            "10 starts, max |A (v_i - v_j)| {residual_spread:e}, max |v_i - v_j| {value_spread:e} (bound {value_bound:e})"
        ),
    );

    let mut worst = 0.0f64;
    for _ in 0..10 {
        let v = Vector::from_fn(n, |_, _| rng.gen_range(-scale..scale));
        match (
            apply_generalized_bellman(&models, &v),
            richardson_step(&models, mdp, &v),
        ) {
            (Ok(l), Ok(r)) => worst = worst.max(vec_inf_norm(&(l - r))),
            (Err(e), _) | (_, Err(e)) => return report.fail("bellman forms", e),
        }
    }
    report.push(
        "bellman forms",
        worst <= 1e-10,
        format!("max |L v - richardson(v)| = {worst:e}"),
    );

    limit_checks(problem, set, &models.sigma, cfg, report);
}

/// Largest pairwise distance between final iterates, in the residual metric
/// `|A (v_i - v_j)|_inf` and in the sup norm.
///
/// Runs stopped at residual `tol` agree within `2 tol` in the residual
/// metric; in the sup norm the bound picks up `|A^-1|_inf = 1 / (1 - gamma)`.
pub fn start_spread(a: &crate::Matrix, limits: &[Vector]) -> (f64, f64) {
    let mut residual = 0.0f64;
    let mut value = 0.0f64;
    for (i, x) in limits.iter().enumerate() {
        for y in &limits[i + 1..] {
            let d = x - y;
            residual = residual.max(vec_inf_norm(&(a * &d)));
            value = value.max(vec_inf_norm(&d));
        }
    }
    (residual, value)
}

fn limit_checks(
    problem: &Problem,
    set: &OptionSet,
    sigma: &PolicyMatrix,
    cfg: &SolveConfig,
    report: &mut ValidationReport,
) {
    let mdp = &problem.mdp;
    let run = || -> crate::Result<(usize, f64)> {
        let never = build_gating_models(mdp, &set.scale_termination(0.0)?)?;
        let split = splitting_from_options(&never, mdp)?;
        let one_shot = iterate_splitting(&split, &never.r_sigma, cfg)?;

        let always = build_gating_models(mdp, &set.with_constant_termination(1.0)?)?;
        let split = splitting_from_options(&always, mdp)?;
        let mut vi = Vector::zeros(mdp.n_states());
        let mut worst = 0.0f64;
        let iterates = SplittingIteration::new(&split, &always.r_sigma, vi.clone())?;
        for v in iterates.take(200) {
            vi = bellman_step(mdp, sigma, &vi)?;
            worst = worst.max(vec_inf_norm(&(v - &vi)));
        }
        Ok((one_shot.iterations, worst))
    };
    match run() {
        Ok((iters, worst)) => report.push(
            "limiting operators",
            iters <= 1 && worst <= 1e-12,
            format!("no termination: {iters} iteration(s); immediate termination vs value iteration: {worst:e}"),
        ),
        Err(e) => report.fail("limiting operators", e),
    }
}

fn ordering_check(problem: &Problem, set: &OptionSet, report: &mut ValidationReport) {
    let run = || -> crate::Result<Vec<f64>> {
        let splits = DEFAULT_GRID
            .iter()
            .map(|&c| {
                let models = build_gating_models(&problem.mdp, &set.scale_termination(c)?)?;
                splitting_from_options(&models, &problem.mdp)
            })
            .collect::<crate::Result<Vec<_>>>()?;
        let mut rhos = Vec::new();
        for pair in splits.windows(2) {
            let cmp = compare_rates(&pair[1], &pair[0])?;
            if rhos.is_empty() {
                rhos.push(cmp.rho_fine);
            }
            rhos.push(cmp.rho_coarse);
        }
        Ok(rhos)
    };
    match run() {
        Ok(rhos) => report.push("rate ordering", true, format!("rho by scale: {rhos:?}")),
        Err(e) => report.fail("rate ordering", e),
    }
}

fn call_return_checks(problem: &Problem, set: &OptionSet, report: &mut ValidationReport) {
    let mdp = &problem.mdp;
    let mut worst_identity = 0.0f64;
    let mut worst_coincide = 0.0f64;
    let mut worst_rho = 0.0f64;
    let mut all_regular = true;
    for w in set.options() {
        let mut run = || -> crate::Result<()> {
            let split = splitting_identity(mdp, w)?;
            worst_identity = worst_identity.max(max_abs_diff(split.a(), &(split.m() - split.n())));
            let reg = check_regular(&split)?;
            all_regular &= reg.is_regular;
            worst_rho = worst_rho.max(reg.rho);

            let single = build_gating_models(mdp, &OptionSet::single(w.clone()))?;
            let own = option_models(mdp, w)?;
            let diffs: [f64; 4] = [
                max_abs_diff(&single.p_sharp, &own.p_w_sharp),
                max_abs_diff(&single.p_bot, &own.p_w_bot),
                vec_inf_norm(&(&single.b - &own.b_w)),
                max_abs_diff(&single.f, &own.f_w),
            ];
            worst_coincide = diffs.iter().fold(worst_coincide, |a, &b| a.max(b));
            Ok(())
        };
        if let Err(e) = run() {
            return report.fail("call-and-return", e);
        }
    }
    report.push(
        "call-and-return",
        worst_identity <= SPLIT_TOL && worst_coincide <= 1e-12 && all_regular && worst_rho < 1.0,
        format!(
            "{} options, |M_w - N_w - A_w| {worst_identity:e}, gating vs per-option {worst_coincide:e}, max rho {worst_rho}",
            set.options().len()
        ),
    );
}
