//! Matrix splittings `A = M - N` of the policy-evaluation system
//! `(I - gamma P_sigma) v = r_sigma`.
//!
//! A splitting is *regular* when `M^-1 >= 0` and `N >= 0` entrywise. Options
//! under gating execution always produce one (`M = I - gamma P_cont` is an
//! M-matrix and `N = gamma P_term >= 0`), so the induced iteration
//! `v <- M^-1 (N v + r)` converges with rate `rho(M^-1 N) < 1`. The classic
//! Jacobi, Gauss-Seidel, SOR and Richardson splittings are provided as
//! baselines on the same `A`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gating::GatingModels;
use crate::linalg::{check_len, inf_norm, max_abs_diff, min_entry, Factorized, Matrix, Vector};
use crate::mdp::{induce_chain, Mdp, PolicyMatrix};
use crate::spectral::spectral_radius;

/// Tolerance on `A - (M - N)`.
pub const SPLIT_TOL: f64 = 1e-12;
/// Entries above `-NONNEG_TOL` count as nonnegative.
pub const NONNEG_TOL: f64 = 1e-10;
/// Tolerance used to decide whether two splittings share the same `A`.
pub const SAME_SYSTEM_TOL: f64 = 1e-10;
/// Slack on the ordering of spectral radii.
pub const ORDERING_TOL: f64 = 1e-9;
/// Slack on the entrywise domination of `N`.
pub const DOMINATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Splitting {
    a: Matrix,
    m: Matrix,
    n: Matrix,
    label: String,
}

impl Splitting {
    /// Checks shapes and `A = M - N`. Singularity of `M` surfaces on first
    /// factorization.
    pub fn new(a: Matrix, m: Matrix, n: Matrix, label: impl Into<String>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        check_len("M rows", a.nrows(), m.nrows())?;
        check_len("M columns", a.ncols(), m.ncols())?;
        check_len("N rows", a.nrows(), n.nrows())?;
        check_len("N columns", a.ncols(), n.ncols())?;
        let label = label.into();
        let gap = max_abs_diff(&a, &(&m - &n));
        if gap.is_nan() || gap > SPLIT_TOL {
            return Err(Error::InvalidParameter(format!(
                "`{label}`: A differs from M - N by {gap:e}"
            )));
        }
        Ok(Self { a, m, n, label })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn n(&self) -> &Matrix {
        &self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn factor_m(&self) -> Result<Factorized> {
        Factorized::new(&self.m, self.label.clone())
    }

    /// `M^-1 N`.
    pub fn iteration_matrix(&self) -> Result<Matrix> {
        self.factor_m()?.solve_mat(&self.n)
    }
}

/// `A = I - gamma P_sigma` for the policy's induced chain.
pub fn system_matrix(mdp: &Mdp, policy: &PolicyMatrix) -> Result<Matrix> {
    let chain = induce_chain(mdp, policy)?;
    let n = mdp.n_states();
    Ok(Matrix::identity(n, n) - chain.p_pi * mdp.gamma())
}

/// `M = I - gamma P_cont`, `N = gamma P_term`, `A = I - gamma P_sigma`.
pub fn splitting_from_options(models: &GatingModels, mdp: &Mdp) -> Result<Splitting> {
    let n = mdp.n_states();
    check_len("model states", n, models.p_sharp.nrows())?;
    let gamma = mdp.gamma();
    let a = system_matrix(mdp, &models.sigma)?;
    let m = Matrix::identity(n, n) - &models.p_sharp * gamma;
    let n_mat = &models.p_bot * gamma;
    Splitting::new(a, m, n_mat, "options")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicMethod {
    Jacobi,
    GaussSeidel,
    /// Relaxation factor, `0 < omega < 2`.
    Sor(f64),
    /// Step size, `tau > 0`.
    Richardson(f64),
}

impl fmt::Display for ClassicMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassicMethod::Jacobi => write!(f, "jacobi"),
            ClassicMethod::GaussSeidel => write!(f, "gauss-seidel"),
            ClassicMethod::Sor(w) => write!(f, "sor({w})"),
            ClassicMethod::Richardson(t) => write!(f, "richardson({t})"),
        }
    }
}

impl FromStr for ClassicMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "jacobi" => return Ok(ClassicMethod::Jacobi),
            "gauss_seidel" | "gauss-seidel" => return Ok(ClassicMethod::GaussSeidel),
            _ => {}
        }
        let (name, arg) = parse_call(s)?;
        match name {
            "sor" => Ok(ClassicMethod::Sor(arg)),
            "richardson" => Ok(ClassicMethod::Richardson(arg)),
            _ => Err(Error::InvalidParameter(format!("unknown method `{s}`"))),
        }
    }
}

/// Splits `name(x)` into `("name", x)`.
pub(crate) fn parse_call(s: &str) -> Result<(&str, f64)> {
    let bad = || Error::InvalidParameter(format!("cannot parse method `{s}`"));
    let open = s.find('(').ok_or_else(bad)?;
    let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
    let arg = inner.trim().parse::<f64>().map_err(|_| bad())?;
    Ok((s[..open].trim(), arg))
}

pub fn classic_splitting(
    mdp: &Mdp,
    policy: &PolicyMatrix,
    method: ClassicMethod,
) -> Result<Splitting> {
    classic_splitting_of(system_matrix(mdp, policy)?, method)
}

/// Classic splitting of an arbitrary square `A`; `N` is always `M - A`.
pub fn classic_splitting_of(a: Matrix, method: ClassicMethod) -> Result<Splitting> {
    let n = a.nrows();
    let m = match method {
        ClassicMethod::Jacobi => Matrix::from_diagonal(&a.diagonal()),
        ClassicMethod::GaussSeidel => a.lower_triangle(),
        ClassicMethod::Sor(omega) => {
            if !(omega > 0.0 && omega < 2.0) {
                return Err(Error::InvalidParameter(format!(
                    "sor relaxation factor must lie in (0, 2), got {omega}"
                )));
            }
            let mut m = a.lower_triangle();
            for i in 0..n {
                m[(i, i)] = a[(i, i)] / omega;
            }
            m
        }
        ClassicMethod::Richardson(tau) => {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "richardson step must be positive, got {tau}"
                )));
            }
            Matrix::identity(n, n) / tau
        }
    };
    let n_mat = &m - &a;
    Splitting::new(a, m, n_mat, method.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub m_inverse_nonneg: bool,
    /// Most negative entry of `M^-1` and where it sits (0 and `None` if none).
    pub m_inverse_worst: (f64, Option<(usize, usize)>),
    pub n_nonneg: bool,
    pub n_worst: (f64, Option<(usize, usize)>),
    /// `rho(M^-1 N)`.
    pub rho: f64,
    pub is_regular: bool,
}

pub fn check_regular(s: &Splitting) -> Result<RegularityReport> {
    let lu = s.factor_m()?;
    let m_inv = lu.inverse()?;
    let m_inverse_worst = min_entry(&m_inv);
    let n_worst = min_entry(&s.n);
    let m_inverse_nonneg = m_inverse_worst.0 >= -NONNEG_TOL;
    let n_nonneg = n_worst.0 >= -NONNEG_TOL;
    let rho = spectral_radius(&(&m_inv * &s.n))?;
    Ok(RegularityReport {
        m_inverse_nonneg,
        m_inverse_worst,
        n_nonneg,
        n_worst,
        rho,
        is_regular: m_inverse_nonneg && n_nonneg,
    })
}

/// `(M^-1 A, M^-1 r)`, a system with the same solution as `A v = r`.
pub fn preconditioned_system(s: &Splitting, r: &Vector) -> Result<(Matrix, Vector)> {
    check_len("right-hand side", s.dim(), r.len())?;
    let lu = s.factor_m()?;
    Ok((lu.solve_mat(&s.a)?, lu.solve_vec(r)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBound {
    pub rho: f64,
    /// `||I - M^-1 A||_inf`.
    pub upper_bound: f64,
}

pub fn rate_bound(s: &Splitting) -> Result<RateBound> {
    let lu = s.factor_m()?;
    let rho = spectral_radius(&lu.solve_mat(&s.n)?)?;
    let n = s.dim();
    let upper_bound = inf_norm(&(Matrix::identity(n, n) - lu.solve_mat(&s.a)?));
    Ok(RateBound { rho, upper_bound })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateComparison {
    pub rho_coarse: f64,
    pub rho_fine: f64,
    /// `max(N_fine - N_coarse)`; nonpositive when the hypothesis holds exactly.
    pub n_excess: f64,
}

/// Compares two splittings of the same `A` whose `N` matrices are ordered
/// entrywise (`N_fine <= N_coarse`), and checks that the finer one has the
/// smaller asymptotic rate.
pub fn compare_rates(coarse: &Splitting, fine: &Splitting) -> Result<RateComparison> {
    if coarse.a.shape() != fine.a.shape() {
        return Err(Error::DifferentSystems {
            max_diff: f64::INFINITY,
        });
    }
    let max_diff = max_abs_diff(&coarse.a, &fine.a);
    if max_diff.is_nan() || max_diff > SAME_SYSTEM_TOL {
        return Err(Error::DifferentSystems { max_diff });
    }
    let n_excess = (&fine.n - &coarse.n).max();
    if n_excess > DOMINATION_TOL {
        return Err(Error::HypothesisNotMet { excess: n_excess });
    }
    let rho_coarse = spectral_radius(&coarse.iteration_matrix()?)?;
    let rho_fine = spectral_radius(&fine.iteration_matrix()?)?;
    if rho_fine > rho_coarse + ORDERING_TOL {
        return Err(Error::OrderingViolated {
            rho_fine,
            rho_coarse,
        });
    }
    Ok(RateComparison {
        rho_coarse,
        rho_fine,
        n_excess,
    })
}
