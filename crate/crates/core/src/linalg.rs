//! Dense helpers shared by the chain routines.
//!
//! Every inverse goes through partial-pivot LU followed by one step of
//! iterative refinement. Matrices here are desk scale (m up to a few
//! thousand), so forming explicit inverses is fine.

use nalgebra::{DMatrix, DVector};

use crate::error::{KemenyError, Result};

/// Pivot ratio below which a factorization is treated as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

fn pivots_ok(lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> bool {
    let u = lu.u();
    let diag = u.diagonal();
    let max = diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    let min = diag.iter().fold(f64::INFINITY, |acc, d| acc.min(d.abs()));
    max > 0.0 && min.is_finite() && min / max > SINGULAR_PIVOT_RATIO
}

/// Inverse of `a` with one refinement step `X <- X + X (I - A X)`.
pub(crate) fn inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let lu = a.clone().lu();
    if !pivots_ok(&lu) {
        return None;
    }
    let x = lu.try_inverse()?;
    let residual = DMatrix::<f64>::identity(n, n) - a * &x;
    let refined = &x + &x * residual;
    refined.iter().all(|v| v.is_finite()).then_some(refined)
}

/// Solves `a x = b` with one step of refinement.
pub(crate) fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.clone().lu();
    if !pivots_ok(&lu) {
        return None;
    }
    let x = lu.solve(b)?;
    let r = b - a * &x;
    let correction = lu.solve(&r)?;
    let refined = x + correction;
    refined.iter().all(|v| v.is_finite()).then_some(refined)
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|col| col.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn vec_inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// `a` with row and column `j` removed.
pub(crate) fn delete_index(a: &DMatrix<f64>, j: usize) -> DMatrix<f64> {
    a.clone().remove_row(j).remove_column(j)
}

/// `I - P`.
pub(crate) fn i_minus(p: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::<f64>::identity(p.nrows(), p.ncols()) - p
}

/// `e x^T`: every row equal to `x`.
pub(crate) fn rows_of(x: &DVector<f64>) -> DMatrix<f64> {
    let m = x.len();
    DMatrix::from_fn(m, m, |_, j| x[j])
}

pub(crate) fn check_square(a: &DMatrix<f64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(KemenyError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a.nrows())
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(KemenyError::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_singular_is_none() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(inverse(&a).is_none());
    }

    #[test]
    fn inverse_round_trip() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let x = inverse(&a).unwrap();
        let err = (&a * &x - DMatrix::<f64>::identity(3, 3)).abs().max();
        assert!(err < 1e-15);
    }

    #[test]
    fn norms() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 0.25]);
        assert_eq!(inf_norm(&a), 3.0);
        assert_eq!(one_norm(&a), 2.25);
    }
}
