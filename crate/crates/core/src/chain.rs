//! Validated transition matrices, structural classification, stationary
//! distributions and spectra.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KemenyError, Result};
use crate::linalg;

/// Row sums must be within this of 1.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Entries at or below this are treated as structural zeros.
pub const ZERO_THRESHOLD: f64 = 1e-14;
/// Detailed-balance tolerance for reversibility.
pub const REVERSIBLE_TOL: f64 = 1e-10;

/// A validated row-stochastic matrix with at least two states.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(DMatrix<f64>);

impl TransitionMatrix {
    /// Validates `raw`; see [`validate_stochastic`].
    pub fn new(raw: DMatrix<f64>) -> Result<Self> {
        validate_stochastic(&raw)
    }

    /// Builds from row slices.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        if data.len() != m * m {
            return Err(KemenyError::NotSquare { rows: m, cols: data.len() / m.max(1) });
        }
        validate_stochastic(&DMatrix::from_row_slice(m, m, &data))
    }

    pub fn m(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// `I - P`.
    pub fn i_minus_p(&self) -> DMatrix<f64> {
        linalg::i_minus(&self.0)
    }

    /// `P^n` for `n >= 0`.
    pub fn power(&self, n: u32) -> DMatrix<f64> {
        let m = self.m();
        (0..n).fold(DMatrix::identity(m, m), |acc, _| acc * &self.0)
    }

    /// Out-neighbours on the positive-entry digraph.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let m = self.m();
        (0..m).map(|i| (0..m).filter(|&j| self.0[(i, j)] > ZERO_THRESHOLD).collect()).collect()
    }

    pub(crate) fn check_state(&self, index: usize) -> Result<()> {
        if index >= self.m() {
            return Err(KemenyError::BadStateIndex { index, m: self.m() });
        }
        Ok(())
    }
}

/// A probability vector: non-negative entries summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(DVector<f64>);

impl ProbabilityVector {
    /// Validates entries `>= 0` and sum within `1e-12` of 1.
    pub fn new(v: DVector<f64>) -> Result<Self> {
        for (i, x) in v.iter().enumerate() {
            if !x.is_finite() {
                return Err(KemenyError::NonFinite { row: i, col: 0 });
            }
            if *x < 0.0 {
                return Err(KemenyError::NegativeEntry { row: i, col: 0, value: *x });
            }
        }
        let residual = v.sum() - 1.0;
        if residual.abs() > STOCHASTIC_TOL {
            return Err(KemenyError::RowSumViolation { row: 0, residual });
        }
        Ok(Self(v))
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// `Π = e πᵀ`.
    pub fn pi_matrix(&self) -> DMatrix<f64> {
        linalg::rows_of(&self.0)
    }

    /// `‖πᵀP − πᵀ‖∞`.
    pub fn stationarity_residual(&self, p: &TransitionMatrix) -> f64 {
        let r = p.matrix().transpose() * &self.0 - &self.0;
        linalg::vec_inf_norm(&r)
    }
}

/// Structural classification of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStructure {
    pub irreducible: bool,
    /// Period of the communicating class containing state 0.
    pub period: usize,
    pub reversible: bool,
    /// Irreducible and aperiodic.
    pub regular: bool,
}

/// Eigenvalues of `P` with `λ₁ = 1` listed first, the rest by descending
/// real part.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<Complex64>,
    /// Largest modulus among `λ₂..λ_m`.
    pub slem: f64,
    /// Real part of the second-listed eigenvalue.
    pub lambda2: f64,
}

impl SpectrumSummary {
    pub fn m(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of eigenvalues within `tol` of 1.
    pub fn count_at_one(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|z| (**z - 1.0).norm() < tol).count()
    }
}

/// Checks that `raw` is a square row-stochastic matrix with `m >= 2`.
///
/// Rows within `1e-12` of unit sum are renormalized; negative residue no
/// larger than `1e-14` is clamped to zero.
pub fn validate_stochastic(raw: &DMatrix<f64>) -> Result<TransitionMatrix> {
    let m = linalg::check_square(raw)?;
    if m < 2 {
        return Err(KemenyError::TooFewStates(m));
    }
    let mut p = raw.clone();
    for ((row, col), v) in p.iter_mut().enumerate().map(|(k, v)| ((k % m, k / m), v)) {
        if !v.is_finite() {
            return Err(KemenyError::NonFinite { row, col });
        }
        if *v < 0.0 {
            if *v >= -ZERO_THRESHOLD {
                *v = 0.0;
            } else {
                return Err(KemenyError::NegativeEntry { row, col, value: *v });
            }
        }
    }
    let mut worst: Option<(usize, f64)> = None;
    for i in 0..m {
        let residual = p.row(i).sum() - 1.0;
        if residual.abs() > STOCHASTIC_TOL && worst.is_none_or(|(_, r)| residual.abs() > r.abs()) {
            worst = Some((i, residual));
        }
    }
    if let Some((row, residual)) = worst {
        return Err(KemenyError::RowSumViolation { row, residual });
    }
    for i in 0..m {
        let s = p.row(i).sum();
        p.row_mut(i).scale_mut(1.0 / s);
    }
    Ok(TransitionMatrix(p))
}

fn reach(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let next = level[u].map(|l| l + 1);
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = next;
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Whether every vertex reaches every other one.
pub(crate) fn strongly_connected(adj: &[Vec<usize>]) -> bool {
    let n = adj.len();
    let mut rev = vec![Vec::new(); n];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            rev[v].push(u);
        }
    }
    reach(adj, 0).iter().all(Option::is_some) && reach(&rev, 0).iter().all(Option::is_some)
}

/// Irreducibility, period, reversibility and regularity.
pub fn classify(p: &TransitionMatrix) -> ChainStructure {
    let adj = p.successors();
    let m = adj.len();
    let mut rev = vec![Vec::new(); m];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            rev[v].push(u);
        }
    }
    let fwd = reach(&adj, 0);
    let bwd = reach(&rev, 0);
    let in_class: Vec<bool> = (0..m).map(|i| fwd[i].is_some() && bwd[i].is_some()).collect();
    let irreducible = in_class.iter().all(|&b| b);

    let mut g = 0;
    for u in 0..m {
        if !in_class[u] {
            continue;
        }
        for &v in &adj[u] {
            if in_class[v] {
                let (lu, lv) = (fwd[u].unwrap(), fwd[v].unwrap());
                g = gcd(g, (lu + 1).abs_diff(lv));
            }
        }
    }
    let period = g.max(1);

    let reversible = irreducible
        && stationary(p).is_ok_and(|pi| {
            (0..m).all(|i| (0..m).all(|j| (pi.get(i) * p.get(i, j) - pi.get(j) * p.get(j, i)).abs() < REVERSIBLE_TOL))
        });

    ChainStructure { irreducible, period, reversible, regular: irreducible && period == 1 }
}

/// Stationary distribution by a direct solve of `(I − Pᵀ) π = 0` with the
/// last equation replaced by `Σ π_i = 1`.
pub fn stationary(p: &TransitionMatrix) -> Result<ProbabilityVector> {
    if !strongly_connected(&p.successors()) {
        return Err(KemenyError::NotIrreducible);
    }
    let m = p.m();
    let mut a = linalg::i_minus(&p.matrix().transpose());
    a.row_mut(m - 1).fill(1.0);
    let mut rhs = DVector::zeros(m);
    rhs[m - 1] = 1.0;
    let mut pi = linalg::solve(&a, &rhs).ok_or(KemenyError::SingularSystem)?;
    for x in pi.iter_mut() {
        if *x < 0.0 {
            if *x > -1e-12 {
                *x = 0.0;
            } else {
                return Err(KemenyError::SingularSystem);
            }
        }
    }
    let s = pi.sum();
    pi /= s;
    ProbabilityVector::new(pi)
}

fn householder_similarity(a: &DMatrix<f64>, salt: usize) -> DMatrix<f64> {
    let m = a.nrows();
    // Weyl sequence: deterministic, never parallel to e or a coordinate axis.
    let v = DVector::from_fn(m, |i, _| {
        ((i as f64 + 1.0 + salt as f64 * std::f64::consts::FRAC_1_PI) * 0.754_877_666_246_692_7).fract() - 0.5
    })
    .normalize();
    let h = DMatrix::<f64>::identity(m, m) - 2.0 * &v * v.transpose();
    &h * a * &h
}

fn raw_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let max_iter = 10_000 * a.nrows().max(1);
    // A healthy QR sweep needs a handful of iterations per eigenvalue.
    if let Some(s) = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100 * a.nrows().max(1)) {
        return Ok(s.complex_eigenvalues().iter().copied().collect());
    }
    // Francis QR stalls on some orthogonal matrices (even cyclic
    // permutations); an orthogonal similarity breaks the symmetry.
    for salt in 0..3 {
        let b = householder_similarity(a, salt);
        if let Some(s) = nalgebra::linalg::Schur::try_new(b, f64::EPSILON, max_iter) {
            return Ok(s.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(KemenyError::EigenFailure)
}

fn order_spectrum(mut eig: Vec<Complex64>) -> Result<Vec<Complex64>> {
    const PAIR_TOL: f64 = 1e-9;
    for z in eig.iter_mut() {
        if z.im.abs() <= 1e-13 {
            z.im = 0.0;
        }
    }
    let (mut upper, mut lower): (Vec<Complex64>, Vec<Complex64>) =
        eig.iter().filter(|z| z.im != 0.0).partition(|z| z.im > 0.0);
    let mut out: Vec<Complex64> = eig.iter().filter(|z| z.im == 0.0).copied().collect();
    if upper.len() != lower.len() {
        return Err(KemenyError::EigenFailure);
    }
    while let Some(z) = upper.pop() {
        let (k, dist) = lower
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (z - w.conj()).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or(KemenyError::EigenFailure)?;
        if dist > PAIR_TOL * z.norm().max(1.0) {
            return Err(KemenyError::EigenFailure);
        }
        let w = lower.swap_remove(k);
        let mean = (z + w.conj()) * 0.5;
        out.push(mean);
        out.push(mean.conj());
    }
    let one = out
        .iter()
        .enumerate()
        .min_by(|a, b| (*a.1 - 1.0).norm().total_cmp(&(*b.1 - 1.0).norm()))
        .map(|(k, _)| k)
        .ok_or(KemenyError::EigenFailure)?;
    let first = out.remove(one);
    out.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    out.insert(0, first);
    Ok(out)
}

/// Full complex spectrum of `P`.
///
/// Reversible chains go through the symmetrized matrix `Π^{1/2} P Π^{-1/2}`
/// so their eigenvalues come out exactly real.
pub fn spectrum(p: &TransitionMatrix) -> Result<SpectrumSummary> {
    let m = p.m();
    let structure = classify(p);
    let eig = if structure.reversible {
        let pi = stationary(p)?;
        let s = DMatrix::from_fn(m, m, |i, j| {
            let (a, b) = (pi.get(i).sqrt(), pi.get(j).sqrt());
            let v = a * p.get(i, j) / b;
            let w = b * p.get(j, i) / a;
            0.5 * (v + w)
        });
        s.symmetric_eigenvalues().iter().map(|&x| Complex64::new(x, 0.0)).collect()
    } else {
        raw_eigenvalues(p.matrix())?
    };
    let eigenvalues = order_spectrum(eig)?;
    let slem = eigenvalues.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
    let lambda2 = eigenvalues.get(1).map_or(0.0, |z| z.re);
    Ok(SpectrumSummary { eigenvalues, slem, lambda2 })
}
