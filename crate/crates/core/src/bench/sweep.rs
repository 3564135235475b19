//! Termination sweeps: scale one base termination profile by `c` and record
//! the asymptotic rate and the cost of reaching the tolerance for each `c`.
//!
//! Scaling a single profile keeps the termination functions pointwise
//! ordered across rows, so the `N` matrices are ordered entrywise and the
//! `rho` column must be nondecreasing in `c`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::bench::io::{ExperimentSpec, Problem};
use crate::error::{Error, Result};
use crate::gating::build_gating_models;
use crate::solver::{iterate_splitting, SolveConfig};
use crate::splitting::{rate_bound, splitting_from_options, ORDERING_TOL};

pub const SWEEP_COLUMNS: [&str; 7] = [
    "c",
    "rho",
    "norm_bound",
    "iterations",
    "factor_ms",
    "iter_ms",
    "final_residual",
];

/// Columns holding wall times, excluded from reproducibility checks.
pub const TIMING_COLUMNS: [&str; 2] = ["factor_ms", "iter_ms"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub c: f64,
    pub rho: f64,
    pub norm_bound: f64,
    pub iterations: usize,
    /// Wall time of the factorization of `M`.
    pub factor_ms: f64,
    /// Mean wall time of one iteration.
    pub iter_ms: f64,
    pub final_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// `rho` nondecreasing in `c` within [`ORDERING_TOL`].
    pub monotone: bool,
    /// Every row has `rho < 1`.
    pub contractive: bool,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.monotone && self.contractive
    }

    pub fn status(&self) -> &'static str {
        if self.passed() {
            "PASSED"
        } else {
            "FAILED"
        }
    }
}

pub fn run_beta_sweep(spec: &ExperimentSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let problem = spec.problem.load()?;
    let cfg = SolveConfig::default()
        .with_tol(spec.tol)
        .with_max_iters(spec.max_iters);
    let outcome = sweep_problem(&problem, &spec.beta_grid, &cfg)?;
    if let Some(path) = &spec.output {
        write_sweep_file(path, &outcome.rows)?;
    }
    Ok(outcome)
}

pub fn sweep_problem(problem: &Problem, grid: &[f64], cfg: &SolveConfig) -> Result<SweepOutcome> {
    let base = problem.option_set()?;
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);

    let mut rows = Vec::with_capacity(grid.len());
    for &c in &grid {
        let set = base.scale_termination(c)?;
        let models = build_gating_models(&problem.mdp, &set)?;
        let split = splitting_from_options(&models, &problem.mdp)?;
        let bound = rate_bound(&split)?;
        let report = iterate_splitting(&split, &models.r_sigma, cfg)?;
        rows.push(SweepRow {
            c,
            rho: bound.rho,
            norm_bound: bound.upper_bound,
            iterations: report.iterations,
            factor_ms: report.factor_time.as_secs_f64() * 1e3,
            iter_ms: report.time_per_iteration().as_secs_f64() * 1e3,
            final_residual: report.final_residual(),
            converged: report.converged,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].rho >= w[0].rho - ORDERING_TOL);
    let contractive = rows.iter().all(|r| r.rho < 1.0);
    Ok(SweepOutcome {
        rows,
        monotone,
        contractive,
    })
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.c.to_string(),
            r.rho.to_string(),
            r.norm_bound.to_string(),
            r.iterations.to_string(),
            r.factor_ms.to_string(),
            r.iter_ms.to_string(),
            r.final_residual.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_sweep_file(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_sweep_csv(file, rows)
}

/// Drops the wall-time columns from a sweep CSV.
pub fn strip_timing_columns(csv_text: &str) -> Result<String> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    let keep: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !TIMING_COLUMNS.contains(h))
        .map(|(i, _)| i)
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(keep.iter().map(|&i| &headers[i]))?;
    for record in reader.records() {
        let record = record?;
        w.write_record(keep.iter().map(|&i| &record[i]))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::io::ProblemSource;
    use crate::gating::{OptionSet, OptionSpec};
    use crate::linalg::{Matrix, Vector};
    use crate::mdp::{Mdp, PolicyMatrix};

    fn scalar_problem() -> Problem {
        let mdp = Mdp::new(
            vec![Matrix::from_element(1, 1, 1.0)],
            Matrix::from_element(1, 1, 1.0),
            0.9,
        )
        .unwrap();
        let set = OptionSet::single(
            OptionSpec::new(PolicyMatrix::uniform(1, 1), Vector::from_element(1, 1.0)).unwrap(),
        );
        Problem {
            mdp,
            options: Some(set),
        }
    }

    #[test]
    fn scalar_sweep() {
        let out =
            sweep_problem(&scalar_problem(), &[1.0, 0.0, 0.5], &SolveConfig::default()).unwrap();
        let rhos: Vec<f64> = out.rows.iter().map(|r| r.rho).collect();
        assert_eq!(out.rows[0].c, 0.0);
        assert!(rhos[0].abs() < 1e-12);
        assert!((rhos[1] - 0.818182).abs() < 1e-6);
        assert!((rhos[2] - 0.9).abs() < 1e-12);
        assert_eq!(out.rows[0].iterations, 1);
        assert!(out.passed());
        assert_eq!(out.status(), "PASSED");
    }

    #[test]
    fn csv_layout() {
        let out = sweep_problem(&scalar_problem(), &[0.0, 1.0], &SolveConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &out.rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "c,rho,norm_bound,iterations,factor_ms,iter_ms,final_residual"
        );
        assert_eq!(lines.count(), 2);
        let stripped = strip_timing_columns(&text).unwrap();
        assert!(stripped.starts_with("c,rho,norm_bound,iterations,final_residual\n"));
    }

    #[test]
    fn spec_without_options_is_rejected() {
        let mut p = scalar_problem();
        p.options = None;
        assert!(sweep_problem(&p, &[0.0], &SolveConfig::default()).is_err());
    }

    #[test]
    fn spec_output_is_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let spec = ExperimentSpec {
            problem: ProblemSource::Random {
                n: 6,
                k: 2,
                gamma: 0.9,
                seed: 11,
                sparsity: 1.0,
                n_options: 2,
            },
            beta_grid: vec![0.0, 0.5, 1.0],
            tol: 1e-10,
            max_iters: 10_000,
            output: Some(path.clone()),
        };
        let out = run_beta_sweep(&spec).unwrap();
        assert!(out.passed());
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 4);
    }
}
