//! Structured perturbations `P̄ = P + E` and the stability results around
//! them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain::{self, TransitionMatrix};
use crate::error::{KemenyError, Result};
use crate::kemeny::kemeny_constant;
use crate::linalg;
use crate::passage::mfpt_direct;

/// Entries summing to zero within this count as zero-sum.
pub const ZERO_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    /// Arbitrary zero-row-sum `E`.
    General(DMatrix<f64>),
    /// `E = e_r hᵀ`: only row `r` changes.
    Type1 { r: usize, h: DVector<f64> },
    /// `E = e hᵀ`: every row shifts by `hᵀ`.
    Type2 { h: DVector<f64> },
    /// `P̄ = P − E`, `P` symmetric and `E` symmetric PSD.
    PsdSubtract(DMatrix<f64>),
    /// `P̄ = αP + (1 − α) e vᵀ`.
    Damping { alpha: f64, v: DVector<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKindTag {
    General,
    Type1,
    Type2,
    PsdSubtract,
    Damping,
}

impl std::str::FromStr for PerturbationKindTag {
    type Err = KemenyError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "general" => Self::General,
            "type1" => Self::Type1,
            "type2" => Self::Type2,
            "psd" | "psd_subtract" => Self::PsdSubtract,
            "damping" => Self::Damping,
            other => return Err(KemenyError::UnknownName(other.to_string())),
        })
    }
}

impl Perturbation {
    pub fn tag(&self) -> PerturbationKindTag {
        match self {
            Perturbation::General(_) => PerturbationKindTag::General,
            Perturbation::Type1 { .. } => PerturbationKindTag::Type1,
            Perturbation::Type2 { .. } => PerturbationKindTag::Type2,
            Perturbation::PsdSubtract(_) => PerturbationKindTag::PsdSubtract,
            Perturbation::Damping { .. } => PerturbationKindTag::Damping,
        }
    }
}

/// ℓ1 shift of the stationary vector against `(K − 1)‖E‖∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbReport {
    pub l1_shift: f64,
    /// `(K − 1)·‖E‖∞` with the max absolute row sum.
    pub bound: f64,
    pub holds: bool,
    pub norm_inf: f64,
    /// `max_i Σ_k |ε_ki|`, the column-oriented reading of the norm.
    pub norm_column: f64,
    /// `(K − 1)` times the column-oriented norm.
    pub bound_column: f64,
    pub k: f64,
    pub k_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type1Report {
    pub r: usize,
    /// `max_{i≠r} |m̄_ir − m_ir|`.
    pub max_fixed_column_delta: f64,
    /// Pairs `(i, j)`, `i, j ≠ r`, where `m̄_ij − m_ij` and `π_j − π̄_j` are
    /// both non-zero with opposite signs, or only the passage time moves.
    pub sign_mismatches: usize,
    /// Pairs with `m̄_ij = m_ij` but `π̄_j ≠ π_j`: `i` reaches `j` without
    /// visiting `r`, so the equivalence degenerates at its boundary.
    pub degenerate_pairs: usize,
    pub pairs_checked: usize,
    /// `Σ_{i≠r} (π̄_i − π_i) m_ir`.
    pub predictor: f64,
    /// `K̄ − K`; equals `−predictor`.
    pub k_delta: f64,
    /// `|K̄ − K + predictor|`.
    pub identity_residual: f64,
    pub k: f64,
    pub k_bar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Type2Report {
    pub k: f64,
    pub k_bar: f64,
    pub invariant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub k: f64,
    pub k_bar: f64,
    /// `K̄ ≤ K + 1e-9`.
    pub k_decreased: bool,
    /// PSD only: `max_i (Σ_j m̄_ij − Σ_j m_ij)`.
    pub max_row_sum_increase: Option<f64>,
    /// PSD only: every row sum of `M̄` at most that of `M` (+1e-8).
    pub row_sums_decreased: Option<bool>,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.k_decreased && self.row_sums_decreased.unwrap_or(true)
    }
}

fn check_zero_sum(h: &DVector<f64>) -> Result<()> {
    let s = h.sum();
    if s.abs() > ZERO_SUM_TOL {
        return Err(KemenyError::InvalidParameter(format!("perturbation vector sums to {s:e}, not 0")));
    }
    Ok(())
}

fn check_zero_row_sums(e: &DMatrix<f64>) -> Result<()> {
    for (i, row) in e.row_iter().enumerate() {
        let s = row.sum();
        if s.abs() > ZERO_SUM_TOL {
            return Err(KemenyError::InvalidParameter(format!("row {i} of E sums to {s:e}, not 0")));
        }
    }
    Ok(())
}

fn is_symmetric(a: &DMatrix<f64>, tol: f64) -> bool {
    (a - a.transpose()).abs().max() <= tol
}

fn stochastic_after(raw: DMatrix<f64>) -> Result<TransitionMatrix> {
    chain::validate_stochastic(&raw).map_err(|e| KemenyError::NotStochasticAfterPerturbation(Box::new(e)))
}

/// Builds and validates `P̄`.
pub fn apply_perturbation(p: &TransitionMatrix, pert: &Perturbation) -> Result<TransitionMatrix> {
    let m = p.m();
    let base = p.matrix();
    match pert {
        Perturbation::General(e) => {
            linalg::check_dim(m, e.nrows())?;
            linalg::check_dim(m, e.ncols())?;
            check_zero_row_sums(e)?;
            stochastic_after(base + e)
        }
        Perturbation::Type1 { r, h } => {
            p.check_state(*r)?;
            linalg::check_dim(m, h.len())?;
            check_zero_sum(h)?;
            let mut out = base.clone();
            for j in 0..m {
                out[(*r, j)] += h[j];
            }
            stochastic_after(out)
        }
        Perturbation::Type2 { h } => {
            linalg::check_dim(m, h.len())?;
            check_zero_sum(h)?;
            stochastic_after(base + linalg::rows_of(h))
        }
        Perturbation::PsdSubtract(e) => {
            linalg::check_dim(m, e.nrows())?;
            linalg::check_dim(m, e.ncols())?;
            if !is_symmetric(base, 1e-12) {
                return Err(KemenyError::NotSymmetricBase);
            }
            if !is_symmetric(e, 1e-12) {
                return Err(KemenyError::NotPsd { min_eigenvalue: f64::NAN });
            }
            let min_eigenvalue = e.clone().symmetric_eigenvalues().min();
            if min_eigenvalue < -1e-10 {
                return Err(KemenyError::NotPsd { min_eigenvalue });
            }
            stochastic_after(base - e)
        }
        Perturbation::Damping { alpha, v } => {
            if !(0.0..=1.0).contains(alpha) {
                return Err(KemenyError::InvalidParameter(format!("alpha = {alpha} outside [0, 1]")));
            }
            linalg::check_dim(m, v.len())?;
            if v.iter().any(|x| *x <= 0.0) || (v.sum() - 1.0).abs() > chain::STOCHASTIC_TOL {
                return Err(KemenyError::InvalidParameter(
                    "damping vector must be a positive probability vector".into(),
                ));
            }
            stochastic_after(base * *alpha + linalg::rows_of(v) * (1.0 - alpha))
        }
    }
}

/// `‖πᵀ − π̄ᵀ‖₁ ≤ (K − 1)‖E‖∞` for `E = P̄ − P`.
pub fn l1_bound_check(p: &TransitionMatrix, p_bar: &TransitionMatrix) -> Result<PerturbReport> {
    linalg::check_dim(p.m(), p_bar.m())?;
    let pi = chain::stationary(p)?;
    let pi_bar = chain::stationary(p_bar)?;
    let e = p_bar.matrix() - p.matrix();
    let l1_shift: f64 = (pi.vector() - pi_bar.vector()).abs().sum();
    let k = kemeny_constant(p)?;
    let k_bar = kemeny_constant(p_bar)?;
    let norm_inf = linalg::inf_norm(&e);
    let norm_column = linalg::one_norm(&e);
    let bound = (k - 1.0) * norm_inf;
    Ok(PerturbReport {
        l1_shift,
        bound,
        holds: l1_shift <= bound + 1e-12,
        norm_inf,
        norm_column,
        bound_column: (k - 1.0) * norm_column,
        k,
        k_bar,
    })
}

/// Passage-time and Kemeny effects of a row-`r` perturbation.
pub fn type1_analysis(p: &TransitionMatrix, r: usize, h: &DVector<f64>) -> Result<Type1Report> {
    let p_bar = apply_perturbation(p, &Perturbation::Type1 { r, h: h.clone() })?;
    let m = p.m();
    let pi = chain::stationary(p)?;
    let pi_bar = chain::stationary(&p_bar)?;
    let mm = mfpt_direct(p)?;
    let mb = mfpt_direct(&p_bar)?;
    let max_fixed_column_delta =
        (0..m).filter(|&i| i != r).map(|i| (mb.get(i, r) - mm.get(i, r)).abs()).fold(0.0, f64::max);

    const SIGN_TOL: f64 = 1e-10;
    let sign = |x: f64| {
        if x.abs() <= SIGN_TOL {
            0
        } else if x > 0.0 {
            1
        } else {
            -1
        }
    };
    let mut sign_mismatches = 0;
    let mut degenerate_pairs = 0;
    let mut pairs_checked = 0;
    for i in (0..m).filter(|&i| i != r) {
        for j in (0..m).filter(|&j| j != r) {
            let dm = sign((mb.get(i, j) - mm.get(i, j)) / mm.get(i, j).max(1.0));
            let dp = sign(pi.get(j) - pi_bar.get(j));
            pairs_checked += 1;
            match (dm, dp) {
                (0, 0) => {}
                (0, _) => degenerate_pairs += 1,
                (a, b) if a != b => sign_mismatches += 1,
                _ => {}
            }
        }
    }
    let predictor: f64 = (0..m).filter(|&i| i != r).map(|i| (pi_bar.get(i) - pi.get(i)) * mm.get(i, r)).sum();
    let k = kemeny_constant(p)?;
    let k_bar = kemeny_constant(&p_bar)?;
    Ok(Type1Report {
        r,
        max_fixed_column_delta,
        sign_mismatches,
        degenerate_pairs,
        pairs_checked,
        predictor,
        k_delta: k_bar - k,
        identity_residual: (k_bar - k + predictor).abs(),
        k,
        k_bar,
    })
}

/// `K` before and after `E = e hᵀ`.
pub fn type2_invariance(p: &TransitionMatrix, h: &DVector<f64>) -> Result<Type2Report> {
    let p_bar = apply_perturbation(p, &Perturbation::Type2 { h: h.clone() })?;
    let k = kemeny_constant(p)?;
    let k_bar = kemeny_constant(&p_bar)?;
    Ok(Type2Report { k, k_bar, invariant: (k - k_bar).abs() < 1e-9 })
}

/// `K̄ ≤ K` for PSD subtraction and damping; PSD also compares MFPT row sums.
pub fn monotonicity_checks(p: &TransitionMatrix, pert: &Perturbation) -> Result<MonotonicityReport> {
    if !matches!(pert, Perturbation::PsdSubtract(_) | Perturbation::Damping { .. }) {
        return Err(KemenyError::PreconditionViolated(
            "monotonicity applies to PSD-subtraction and damping perturbations".into(),
        ));
    }
    let p_bar = apply_perturbation(p, pert)?;
    for q in [p, &p_bar] {
        if !chain::classify(q).irreducible {
            return Err(KemenyError::PreconditionViolated("both chains must be irreducible".into()));
        }
    }
    let k = kemeny_constant(p)?;
    let k_bar = kemeny_constant(&p_bar)?;
    let (max_row_sum_increase, row_sums_decreased) = if let Perturbation::PsdSubtract(_) = pert {
        let rows = |x: &DMatrix<f64>| x.row_iter().map(|r| r.sum()).collect::<Vec<_>>();
        let before = rows(&mfpt_direct(p)?.entries);
        let after = rows(&mfpt_direct(&p_bar)?.entries);
        let inc = before.iter().zip(&after).map(|(b, a)| a - b).fold(f64::NEG_INFINITY, f64::max);
        (Some(inc), Some(inc <= 1e-8))
    } else {
        (None, None)
    };
    Ok(MonotonicityReport { k, k_bar, k_decreased: k_bar <= k + 1e-9, max_row_sum_increase, row_sums_decreased })
}
