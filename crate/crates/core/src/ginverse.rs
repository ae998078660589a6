//! Generalized inverses of `A = I − P`.
//!
//! Every member of the family `G = [I − P + t uᵀ]⁻¹ + e fᵀ + g πᵀ` satisfies
//! `A G A = A`. The fundamental matrix `Z` (t = e, u = π, f = g = 0) and the
//! group inverse `A# = Z − eπᵀ` are the two members used most.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::chain::{ProbabilityVector, TransitionMatrix};
use crate::error::{KemenyError, Result};
use crate::linalg;

/// Residual bound for `‖A G A − A‖∞`.
pub const GINVERSE_TOL: f64 = 1e-8;
/// `max − min` of `G e` below which row sums are considered constant.
pub const GE_CONSTANT_TOL: f64 = 1e-9;
/// Condition number above which a warning is logged.
pub const CONDITION_WARN: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GInverseKind {
    Fundamental,
    Group,
    Parametric,
}

/// The vectors `t, u, f, g` of a parametric member.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    pub t: DVector<f64>,
    pub u: DVector<f64>,
    pub f: DVector<f64>,
    pub g: DVector<f64>,
}

/// A g-inverse of `I − P` with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct GInverse {
    pub matrix: DMatrix<f64>,
    pub kind: GInverseKind,
    pub params: Option<FamilyParams>,
    /// `g` with `G e = g e`, when the row sums are constant.
    pub ge_constant: Option<f64>,
    /// ∞-norm condition number of the matrix that was inverted.
    pub condition: f64,
}

impl GInverse {
    pub fn m(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Row sums `g_i·`.
    pub fn row_sums(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.matrix.row_iter().map(|r| r.sum()))
    }
}

/// Result of checking `A G A = A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GInverseCheck {
    pub residual: f64,
    pub passed: bool,
}

/// Particular solution of a consistent system `A X = C`.
#[derive(Debug, Clone, PartialEq)]
pub struct GSolve {
    pub solution: DMatrix<f64>,
    /// `‖A A⁻ C − C‖∞`.
    pub consistency_residual: f64,
}

fn detect_ge_constant(g: &DMatrix<f64>) -> Option<f64> {
    let sums: Vec<f64> = g.row_iter().map(|r| r.sum()).collect();
    let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = sums.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min < GE_CONSTANT_TOL).then(|| sums.iter().sum::<f64>() / sums.len() as f64)
}

fn check_stationary(p: &TransitionMatrix, pi: &ProbabilityVector) -> Result<()> {
    linalg::check_dim(p.m(), pi.len())?;
    if pi.stationarity_residual(p) > 1e-9 {
        return Err(KemenyError::SingularSystem);
    }
    Ok(())
}

fn invert_with_condition(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let inv = linalg::inverse(a).ok_or(KemenyError::SingularSystem)?;
    let condition = linalg::inf_norm(a) * linalg::inf_norm(&inv);
    if condition > CONDITION_WARN {
        warn!("ill-conditioned g-inverse construction (condition {condition:e})");
    }
    Ok((inv, condition))
}

/// `Z = [I − P + eπᵀ]⁻¹`.
pub fn fundamental_matrix(p: &TransitionMatrix, pi: &ProbabilityVector) -> Result<GInverse> {
    check_stationary(p, pi)?;
    let a = p.i_minus_p() + pi.pi_matrix();
    let (z, condition) = invert_with_condition(&a)?;
    match detect_ge_constant(&z) {
        Some(g) if (g - 1.0).abs() < GE_CONSTANT_TOL => {}
        _ => return Err(KemenyError::SingularSystem),
    }
    Ok(GInverse { matrix: z, kind: GInverseKind::Fundamental, params: None, ge_constant: Some(1.0), condition })
}

/// `A# = Z − eπᵀ`.
pub fn group_inverse(p: &TransitionMatrix, pi: &ProbabilityVector) -> Result<GInverse> {
    let z = fundamental_matrix(p, pi)?;
    let matrix = z.matrix - pi.pi_matrix();
    Ok(GInverse { matrix, kind: GInverseKind::Group, params: None, ge_constant: Some(0.0), condition: z.condition })
}

/// `G = [I − P + t uᵀ]⁻¹ + e fᵀ + g πᵀ`.
pub fn parametric_ginverse(
    p: &TransitionMatrix,
    pi: &ProbabilityVector,
    t: &DVector<f64>,
    u: &DVector<f64>,
    f: &DVector<f64>,
    g: &DVector<f64>,
) -> Result<GInverse> {
    let m = p.m();
    for v in [t, u, f, g] {
        linalg::check_dim(m, v.len())?;
    }
    linalg::check_dim(m, pi.len())?;
    let pi_t = pi.vector().dot(t);
    let u_e = u.sum();
    if pi_t.abs() < 1e-12 || u_e.abs() < 1e-12 {
        return Err(KemenyError::DegenerateParameters { pi_t, u_e });
    }
    let a = p.i_minus_p() + t * u.transpose();
    let (inv, condition) = invert_with_condition(&a)?;
    let matrix = inv + linalg::rows_of(f) + g * pi.vector().transpose();
    let ge_constant = detect_ge_constant(&matrix);
    Ok(GInverse {
        matrix,
        kind: GInverseKind::Parametric,
        params: Some(FamilyParams { t: t.clone(), u: u.clone(), f: f.clone(), g: g.clone() }),
        ge_constant,
        condition,
    })
}

/// `‖(I−P) G (I−P) − (I−P)‖∞` and pass/fail at [`GINVERSE_TOL`].
pub fn verify_ginverse(p: &TransitionMatrix, g: &DMatrix<f64>) -> Result<GInverseCheck> {
    linalg::check_dim(p.m(), g.nrows())?;
    linalg::check_dim(p.m(), g.ncols())?;
    let a = p.i_minus_p();
    let residual = linalg::inf_norm(&(&a * g * &a - &a));
    Ok(GInverseCheck { residual, passed: residual < GINVERSE_TOL })
}

pub(crate) fn require_ginverse(p: &TransitionMatrix, g: &GInverse) -> Result<()> {
    let check = verify_ginverse(p, &g.matrix)?;
    if !check.passed {
        return Err(KemenyError::NotAGInverse { residual: check.residual });
    }
    Ok(())
}

/// Solves `A X = C` as `X = A⁻ C` after checking `A A⁻ C = C`.
///
/// Any other solution differs by `(I − A⁻A) W`.
pub fn ginverse_solve(a: &DMatrix<f64>, a_minus: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<GSolve> {
    let n = linalg::check_square(a)?;
    linalg::check_dim(n, a_minus.nrows())?;
    linalg::check_dim(n, a_minus.ncols())?;
    linalg::check_dim(n, c.nrows())?;
    let solution = a_minus * c;
    let residual = linalg::inf_norm(&(a * &solution - c));
    if residual > GINVERSE_TOL * linalg::inf_norm(c).max(1.0) {
        return Err(KemenyError::Inconsistent { residual });
    }
    Ok(GSolve { solution, consistency_residual: residual })
}
