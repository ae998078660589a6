//! Closed-form fixture families. Nothing here touches linear algebra, so the
//! values serve as an independent oracle for the numerical pipeline.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain::TransitionMatrix;
use crate::error::{KemenyError, Result};

/// `P = [[1−a, a], [b, 1−b]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStateParams {
    pub a: f64,
    pub b: f64,
}

impl TwoStateParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        for (name, x) in [("a", a), ("b", b)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(KemenyError::InvalidParameter(format!("{name} = {x} is outside [0, 1]")));
            }
        }
        Ok(Self { a, b })
    }

    pub fn d(&self) -> f64 {
        1.0 - self.a - self.b
    }

    /// Both off-diagonal entries must be positive; `d < 1` alone admits
    /// `a = 0 < b`, which has an absorbing state.
    pub fn is_irreducible(&self) -> bool {
        self.a > 0.0 && self.b > 0.0
    }

    pub fn matrix(&self) -> Result<TransitionMatrix> {
        TransitionMatrix::from_rows(&[&[1.0 - self.a, self.a], &[self.b, 1.0 - self.b]])
    }
}

/// Stationary vector, MFPT matrix (classic diagonal) and Kemeny constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForms {
    pub pi: DVector<f64>,
    pub mfpt: DMatrix<f64>,
    pub k: f64,
}

pub fn two_state_closed_forms(params: TwoStateParams) -> Result<ClosedForms> {
    if !params.is_irreducible() {
        return Err(KemenyError::Reducible);
    }
    let TwoStateParams { a, b } = params;
    let d = params.d();
    Ok(ClosedForms {
        pi: DVector::from_column_slice(&[b / (a + b), a / (a + b)]),
        mfpt: DMatrix::from_row_slice(2, 2, &[(1.0 - d) / b, 1.0 / a, 1.0 / b, (1.0 - d) / a]),
        k: 1.0 + 1.0 / (a + b),
    })
}

/// `P = [[1−p₂−p₃, p₂, p₃], [q₁, 1−q₁−q₃, q₃], [r₁, r₂, 1−r₁−r₂]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeStateParams {
    pub p2: f64,
    pub p3: f64,
    pub q1: f64,
    pub q3: f64,
    pub r1: f64,
    pub r2: f64,
}

impl ThreeStateParams {
    pub fn new(p2: f64, p3: f64, q1: f64, q3: f64, r1: f64, r2: f64) -> Result<Self> {
        let s = Self { p2, p3, q1, q3, r1, r2 };
        for x in [p2, p3, q1, q3, r1, r2] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(KemenyError::InvalidParameter(format!("parameter {x} must be non-negative")));
            }
        }
        for (row, sum) in [(1, p2 + p3), (2, q1 + q3), (3, r1 + r2)] {
            if !(sum > 0.0 && sum <= 1.0) {
                return Err(KemenyError::InvalidParameter(format!("row {row} leaves mass {sum} outside (0, 1]")));
            }
        }
        Ok(s)
    }

    /// `(Δ₁, Δ₂, Δ₃)`.
    pub fn deltas(&self) -> [f64; 3] {
        let Self { p2, p3, q1, q3, r1, r2 } = *self;
        [q3 * r1 + q1 * r2 + q1 * r1, r1 * p2 + r2 * p3 + r2 * p2, p2 * q3 + p3 * q1 + p3 * q3]
    }

    pub fn delta(&self) -> f64 {
        self.deltas().iter().sum()
    }

    /// `τ_ij` for `i ≠ j`; the diagonal is left at zero.
    pub fn taus(&self) -> [[f64; 3]; 3] {
        let Self { p2, p3, q1, q3, r1, r2 } = *self;
        [[0.0, p3 + r1 + r2, p2 + q1 + q3], [q3 + r1 + r2, 0.0, q1 + p2 + p3], [r2 + q1 + q3, r1 + p2 + p3, 0.0]]
    }

    pub fn tau(&self) -> f64 {
        self.p2 + self.p3 + self.q1 + self.q3 + self.r1 + self.r2
    }

    pub fn is_irreducible(&self) -> bool {
        self.deltas().iter().all(|d| *d > 0.0)
    }

    pub fn matrix(&self) -> Result<TransitionMatrix> {
        let Self { p2, p3, q1, q3, r1, r2 } = *self;
        TransitionMatrix::from_rows(&[&[1.0 - p2 - p3, p2, p3], &[q1, 1.0 - q1 - q3, q3], &[r1, r2, 1.0 - r1 - r2]])
    }
}

pub fn three_state_closed_forms(params: ThreeStateParams) -> Result<ClosedForms> {
    if !params.is_irreducible() {
        return Err(KemenyError::Reducible);
    }
    let deltas = params.deltas();
    let delta = params.delta();
    let taus = params.taus();
    let tau = params.tau();
    for row in &taus {
        let residual = (row.iter().sum::<f64>() - tau).abs();
        if residual > 1e-12 * tau.max(1.0) {
            return Err(KemenyError::Inconsistent { residual });
        }
    }
    let mfpt = DMatrix::from_fn(3, 3, |i, j| if i == j { delta / deltas[j] } else { taus[i][j] / deltas[j] });
    Ok(ClosedForms { pi: DVector::from_iterator(3, deltas.iter().map(|d| d / delta)), mfpt, k: 1.0 + tau / delta })
}

/// Named extremal chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalChain {
    /// `i → i+1 mod m`; attains `K = (m+1)/2`.
    PeriodCycle,
    /// Every row uniform; `K = m`.
    IndependentUniform,
}

impl fmt::Display for CanonicalChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CanonicalChain::PeriodCycle => "period_cycle",
            CanonicalChain::IndependentUniform => "independent_uniform",
        })
    }
}

impl FromStr for CanonicalChain {
    type Err = KemenyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "period_cycle" | "PeriodCycle" | "cycle" => Ok(Self::PeriodCycle),
            "independent_uniform" | "IndependentUniform" | "uniform" => Ok(Self::IndependentUniform),
            other => Err(KemenyError::UnknownName(other.to_string())),
        }
    }
}

pub fn canonical_chain(name: CanonicalChain, m: usize) -> Result<TransitionMatrix> {
    if m < 2 {
        return Err(KemenyError::TooFewStates(m));
    }
    let p = match name {
        CanonicalChain::PeriodCycle => DMatrix::from_fn(m, m, |i, j| if j == (i + 1) % m { 1.0 } else { 0.0 }),
        CanonicalChain::IndependentUniform => DMatrix::from_element(m, m, 1.0 / m as f64),
    };
    TransitionMatrix::new(p)
}

/// Closed-form `K` of a canonical chain.
pub fn canonical_kemeny(name: CanonicalChain, m: usize) -> f64 {
    match name {
        CanonicalChain::PeriodCycle => (m as f64 + 1.0) / 2.0,
        CanonicalChain::IndependentUniform => m as f64,
    }
}
