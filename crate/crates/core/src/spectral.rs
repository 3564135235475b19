//! Spectral radius of dense real matrices.
//!
//! Up to [`DENSE_LIMIT`] rows the full complex spectrum is computed through a
//! real Schur decomposition. Above that, power iteration runs on the matrix of
//! absolute values, which bounds the spectral radius from above and is exact
//! for the entrywise nonnegative iteration matrices produced by regular
//! splittings.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

pub const DENSE_LIMIT: usize = 256;
pub const POWER_TOL: f64 = 1e-10;

pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    ensure_square(m)?;
    if m.nrows() <= DENSE_LIMIT {
        Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
    } else {
        Ok(power_iteration_abs(m))
    }
}

/// All eigenvalues, unordered.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex<f64>>> {
    ensure_square(m)?;
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "matrix has non-finite entries".into(),
        ));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    Ok(m.clone().complex_eigenvalues().iter().copied().collect())
}

/// Eigenvalue moduli sorted in decreasing order.
pub fn eigenvalue_moduli(m: &Matrix) -> Result<Vec<f64>> {
    let mut moduli: Vec<f64> = eigenvalues(m)?.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok(moduli)
}

/// Whether exactly one eigenvalue attains the spectral radius, with the
/// runner-up at most `gap` times the radius.
pub fn has_simple_dominant(m: &Matrix, gap: f64) -> Result<bool> {
    let moduli = eigenvalue_moduli(m)?;
    Ok(match moduli.as_slice() {
        [] => false,
        [_] => true,
        [first, second, ..] => *first > 0.0 && *second <= gap * first,
    })
}

/// Rayleigh-quotient power iteration on `|m|` from a seeded positive start.
/// Stops when successive estimates differ by less than [`POWER_TOL`] or after
/// `100 n` steps.
pub fn power_iteration_abs(m: &Matrix) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let abs = m.abs();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = Vector::from_fn(n, |_, _| rng.gen_range(0.5..1.5));
    x /= x.norm();
    let mut estimate = 0.0;
    for _ in 0..100 * n {
        let y = &abs * &x;
        let next = x.dot(&y);
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        x = y / norm;
        if (next - estimate).abs() < POWER_TOL {
            return next;
        }
        estimate = next;
    }
    estimate
}

fn ensure_square(m: &Matrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_radius_one() {
        assert!((spectral_radius(&Matrix::identity(3, 3)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_has_radius_zero() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, 0.5, 0.0, 0.0]);
        assert!(spectral_radius(&m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn scalar() {
        let m = Matrix::from_element(1, 1, 0.9);
        assert!((spectral_radius(&m).unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn rotation_uses_modulus() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert!((spectral_radius(&m).unwrap() - 0.5).abs() < 1e-12);
        assert!(!has_simple_dominant(&m, 0.999).unwrap());
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            spectral_radius(&Matrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn power_iteration_matches_dense_on_positive_matrix() {
        let n = 40;
        let m = Matrix::from_fn(n, n, |i, j| 1.0 / (1.0 + i as f64 + 2.0 * j as f64));
        let dense = spectral_radius(&m).unwrap();
        let power = power_iteration_abs(&m);
        assert!((dense - power).abs() < 1e-8, "{dense} vs {power}");
    }

    #[test]
    fn large_matrix_takes_power_route() {
        let n = DENSE_LIMIT + 4;
        let m = Matrix::from_element(n, n, 0.7 / n as f64);
        assert!((spectral_radius(&m).unwrap() - 0.7).abs() < 1e-9);
    }
}
