//! Small dense helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// An LU factorization with partial pivoting, kept around so that many
/// right-hand sides can be solved against the same matrix.
#[derive(Debug, Clone)]
pub struct Factorized {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    label: String,
}

impl Factorized {
    pub fn new(m: &Matrix, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let lu = m.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::Singular { label });
        }
        Ok(Self { lu, label })
    }

    pub fn dim(&self) -> usize {
        self.lu.l().nrows()
    }

    pub fn solve_vec(&self, b: &Vector) -> Result<Vector> {
        self.lu.solve(b).ok_or_else(|| Error::Singular {
            label: self.label.clone(),
        })
    }

    pub fn solve_mat(&self, b: &Matrix) -> Result<Matrix> {
        self.lu.solve(b).ok_or_else(|| Error::Singular {
            label: self.label.clone(),
        })
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.lu.try_inverse().ok_or_else(|| Error::Singular {
            label: self.label.clone(),
        })
    }
}

/// Induced infinity norm (max absolute row sum).
pub fn inf_norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Largest entrywise absolute difference. Panics on shape mismatch.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Most negative entry, or 0 when all entries are nonnegative.
pub fn min_entry(m: &Matrix) -> (f64, Option<(usize, usize)>) {
    let mut worst = 0.0;
    let mut at = None;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] < worst {
                worst = m[(i, j)];
                at = Some((i, j));
            }
        }
    }
    (worst, at)
}

pub(crate) fn check_len(axis: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            axis,
            expected,
            found,
        });
    }
    Ok(())
}
