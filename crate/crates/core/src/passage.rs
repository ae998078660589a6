//! Mean first passage times.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain::{strongly_connected, ProbabilityVector, TransitionMatrix};
use crate::error::{KemenyError, Result};
use crate::ginverse::{require_ginverse, GInverse};
use crate::linalg;
use crate::par::{self, Execution};

/// Diagonal convention of a mean first passage matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `m_ii = 1/π_i`, the mean recurrence time.
    #[default]
    Classic,
    /// `m_ii = 0`.
    Modified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfptMatrix {
    pub entries: DMatrix<f64>,
    pub convention: Convention,
}

impl MfptMatrix {
    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Same passage times with a zeroed diagonal.
    pub fn to_modified(&self) -> MfptMatrix {
        let mut entries = self.entries.clone();
        entries.fill_diagonal(0.0);
        MfptMatrix { entries, convention: Convention::Modified }
    }

    pub fn with_convention(&self, convention: Convention) -> Result<MfptMatrix> {
        match (self.convention, convention) {
            (a, b) if a == b => Ok(self.clone()),
            (Convention::Classic, Convention::Modified) => Ok(self.to_modified()),
            _ => Err(KemenyError::WrongConvention),
        }
    }

    /// `‖(I − P) M − (E − P M_d)‖∞` for a classic-convention matrix.
    pub fn equation_residual(&self, p: &TransitionMatrix) -> f64 {
        let m = self.m();
        let md = DMatrix::from_diagonal(&self.entries.diagonal());
        let lhs = p.i_minus_p() * &self.entries;
        let rhs = DMatrix::from_element(m, m, 1.0) - p.matrix() * md;
        linalg::inf_norm(&(lhs - rhs))
    }
}

/// Mean first passage times from any g-inverse, elementwise:
/// `m_ij = (g_jj − g_ij + δ_ij)/π_j + (g_i· − g_j·)`.
///
/// The row-sum term vanishes when `G e = g e`.
pub fn mfpt_from_ginverse(p: &TransitionMatrix, pi: &ProbabilityVector, g: &GInverse) -> Result<MfptMatrix> {
    linalg::check_dim(p.m(), pi.len())?;
    require_ginverse(p, g)?;
    let m = p.m();
    let gm = &g.matrix;
    let rows = g.row_sums();
    let entries = DMatrix::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        let base = (gm[(j, j)] - gm[(i, j)] + delta) / pi.get(j);
        if g.ge_constant.is_some() {
            base
        } else {
            base + (rows[i] - rows[j])
        }
    });
    Ok(MfptMatrix { entries, convention: Convention::Classic })
}

/// Column `j` of `M` by a direct solve of `(I − Q_j) x = e`, where `Q_j` is
/// `P` without row and column `j`.
fn mfpt_column(p: &TransitionMatrix, j: usize) -> Result<DVector<f64>> {
    let m = p.m();
    let a = linalg::delete_index(&p.i_minus_p(), j);
    let x = linalg::solve(&a, &DVector::from_element(m - 1, 1.0)).ok_or(KemenyError::SingularSystem)?;
    let mut col = DVector::zeros(m);
    let mut k = 0;
    for i in 0..m {
        if i != j {
            col[i] = x[k];
            k += 1;
        }
    }
    col[j] = 1.0 + (0..m).filter(|&i| i != j).map(|i| p.get(j, i) * col[i]).sum::<f64>();
    Ok(col)
}

/// Mean first passage times by `m` first-step linear solves. Independent of
/// any g-inverse or stationary vector.
pub fn mfpt_direct(p: &TransitionMatrix) -> Result<MfptMatrix> {
    mfpt_direct_with(p, Execution::default())
}

pub fn mfpt_direct_with(p: &TransitionMatrix, exec: Execution) -> Result<MfptMatrix> {
    if !strongly_connected(&p.successors()) {
        return Err(KemenyError::NotIrreducible);
    }
    let m = p.m();
    let cols = par::map_indices(exec, m, |j| mfpt_column(p, j));
    let mut entries = DMatrix::zeros(m, m);
    for (j, col) in cols.into_iter().enumerate() {
        entries.set_column(j, &col?);
    }
    Ok(MfptMatrix { entries, convention: Convention::Classic })
}

/// `E(T_j*) = Σ_i π_i m_ij`: expected passage time to `j` from a stationary
/// start, via
/// `1 + Σ_i π_i g_i· − g_j· + (g_jj − Σ_i π_i g_ij)/π_j`.
pub fn stationary_hitting_expectation(
    p: &TransitionMatrix,
    pi: &ProbabilityVector,
    g: &GInverse,
    j: usize,
) -> Result<f64> {
    p.check_state(j)?;
    linalg::check_dim(p.m(), pi.len())?;
    require_ginverse(p, g)?;
    let rows = g.row_sums();
    let col_j = g.matrix.column(j);
    let pi_g_j: f64 = pi.vector().dot(&col_j);
    let pi_rows: f64 = pi.vector().dot(&rows);
    Ok(1.0 + pi_rows - rows[j] + (g.matrix[(j, j)] - pi_g_j) / pi.get(j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::stationary;
    use crate::ginverse::{fundamental_matrix, group_inverse};

    fn fixture() -> (TransitionMatrix, ProbabilityVector) {
        let p = TransitionMatrix::from_rows(&[&[0.7, 0.3], &[0.5, 0.5]]).unwrap();
        let pi = stationary(&p).unwrap();
        (p, pi)
    }

    fn fixture_m() -> DMatrix<f64> {
        // [(1−d)/b, 1/a; 1/b, (1−d)/a] at a = 0.3, b = 0.5.
        DMatrix::from_row_slice(2, 2, &[1.6, 10.0 / 3.0, 2.0, 8.0 / 3.0])
    }

    #[test]
    fn fixture_from_z_and_direct() {
        let (p, pi) = fixture();
        let z = fundamental_matrix(&p, &pi).unwrap();
        let m = mfpt_from_ginverse(&p, &pi, &z).unwrap();
        assert!((&m.entries - fixture_m()).abs().max() < 1e-12);
        let d = mfpt_direct(&p).unwrap();
        assert!((&d.entries - fixture_m()).abs().max() < 1e-10);
        assert_eq!(d.convention, Convention::Classic);
        assert!(d.equation_residual(&p) < 1e-12);
    }

    #[test]
    fn three_cycle_via_group_inverse() {
        let p = TransitionMatrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]).unwrap();
        let pi = stationary(&p).unwrap();
        let a = group_inverse(&p, &pi).unwrap();
        let m = mfpt_from_ginverse(&p, &pi, &a).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[3.0, 1.0, 2.0, 2.0, 3.0, 1.0, 1.0, 2.0, 3.0]);
        assert!((&m.entries - expected).abs().max() < 1e-12);
    }

    #[test]
    fn period_two_direct() {
        let p = TransitionMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let m = mfpt_direct(&p).unwrap();
        assert!((m.entries - DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).abs().max() < 1e-14);
    }

    #[test]
    fn modified_view_zeroes_diagonal() {
        let (p, _) = fixture();
        let m = mfpt_direct(&p).unwrap().to_modified();
        assert_eq!(m.convention, Convention::Modified);
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert!((m.get(0, 1) - 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.with_convention(Convention::Classic), Err(KemenyError::WrongConvention));
    }

    #[test]
    fn stationary_start_expectations() {
        let (p, pi) = fixture();
        let z = fundamental_matrix(&p, &pi).unwrap();
        let e2 = stationary_hitting_expectation(&p, &pi, &z, 1).unwrap();
        // z₂₂/π₂ = 1.15625/0.375 = 0.625·(10/3) + 0.375·(8/3).
        assert!((e2 - 1.15625 / 0.375).abs() < 1e-12);
        assert!((e2 - (0.625 * 10.0 / 3.0 + 0.375 * 8.0 / 3.0)).abs() < 1e-12);
        let e1 = stationary_hitting_expectation(&p, &pi, &z, 0).unwrap();
        assert!((e1 - 1.75).abs() < 1e-12);
        assert!((e1 - e2).abs() > 1.0);
        assert!(matches!(
            stationary_hitting_expectation(&p, &pi, &z, 2),
            Err(KemenyError::BadStateIndex { index: 2, m: 2 })
        ));
    }

    #[test]
    fn three_cycle_stationary_start_is_two() {
        let p = TransitionMatrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]).unwrap();
        let pi = stationary(&p).unwrap();
        let a = group_inverse(&p, &pi).unwrap();
        for j in 0..3 {
            assert!((stationary_hitting_expectation(&p, &pi, &a, j).unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_ginverse() {
        let (p, pi) = fixture();
        let bogus = GInverse {
            matrix: DMatrix::zeros(2, 2),
            kind: crate::ginverse::GInverseKind::Parametric,
            params: None,
            ge_constant: None,
            condition: 1.0,
        };
        assert!(matches!(mfpt_from_ginverse(&p, &pi, &bogus), Err(KemenyError::NotAGInverse { .. })));
    }
}
