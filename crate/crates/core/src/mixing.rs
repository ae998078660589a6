//! Time to mixing: simulate a chain started at `i` until it sits in a
//! target state drawn from `π`, and the closed-form moments of that time.
//!
//! Simulation is split into fixed-size shards. Shard `s` draws from
//! `ChaCha8Rng::seed_from_u64(seed + s)` and reports integer power sums,
//! so estimates are bit-identical whether shards run sequentially or on
//! the rayon pool.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{ProbabilityVector, TransitionMatrix};
use crate::error::{KemenyError, Result};
use crate::ginverse::{require_ginverse, GInverse};
use crate::linalg;
use crate::par::{self, Execution};

/// Step cap per sample; hitting it signals a defect, not bad luck.
pub const MAX_STEPS: u64 = 1_000_000_000;
/// Samples per RNG shard.
pub const SHARD_SIZE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingVariant {
    /// First `n ≥ 1` with `X_n = Y`.
    Return,
    /// First `n ≥ 0` with `X_n = Y`.
    Hitting,
}

impl std::str::FromStr for MixingVariant {
    type Err = KemenyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "return" => Ok(MixingVariant::Return),
            "hitting" => Ok(MixingVariant::Hitting),
            other => Err(KemenyError::UnknownName(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixingSample {
    pub start: usize,
    pub target: usize,
    pub steps: u64,
    pub variant: MixingVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingEstimate {
    pub start: usize,
    pub variant: MixingVariant,
    pub n: u64,
    pub seed: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub se_mean: f64,
    /// Large-sample standard error of the sample variance.
    pub se_variance: f64,
    /// `1.96 · sqrt(variance / n)`.
    pub ci_halfwidth_95: f64,
}

/// Second moments and variances of the mixing time per start state.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVectors {
    pub k: f64,
    pub eta2: DVector<f64>,
    pub v: DVector<f64>,
    /// `α = e − (ΠG)_d D e + G_d D e`.
    pub alpha: DVector<f64>,
}

/// Inverse-CDF tables for one chain.
#[derive(Debug, Clone)]
pub struct MixingSampler {
    rows: Vec<Vec<f64>>,
    target: Vec<f64>,
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    weights
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

/// Index order inverse CDF. States with zero mass are never returned.
fn draw(cdf: &[f64], u: f64) -> usize {
    let idx = cdf.partition_point(|&c| c <= u);
    if idx < cdf.len() {
        return idx;
    }
    // Rounding left the total just below 1 and u landed in the gap.
    let last = cdf[cdf.len() - 1];
    cdf.iter().rposition(|&c| c < last).map_or(0, |k| k + 1)
}

impl MixingSampler {
    pub fn new(p: &TransitionMatrix, pi: &ProbabilityVector) -> Result<Self> {
        linalg::check_dim(p.m(), pi.len())?;
        let rows = (0..p.m()).map(|i| cumulative(p.matrix().row(i).iter().copied())).collect();
        let target = cumulative(pi.as_slice().iter().copied());
        Ok(Self { rows, target })
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn draw_target<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        draw(&self.target, rng.random::<f64>())
    }

    /// Runs the chain from `start` until it reaches `target`.
    pub fn run_to_target<R: Rng + ?Sized>(
        &self,
        start: usize,
        target: usize,
        variant: MixingVariant,
        rng: &mut R,
    ) -> Result<MixingSample> {
        let m = self.m();
        if start >= m {
            return Err(KemenyError::BadStateIndex { index: start, m });
        }
        if target >= m {
            return Err(KemenyError::BadStateIndex { index: target, m });
        }
        if variant == MixingVariant::Hitting && start == target {
            return Ok(MixingSample { start, target, steps: 0, variant });
        }
        let mut state = start;
        let mut steps = 0;
        loop {
            state = draw(&self.rows[state], rng.random::<f64>());
            steps += 1;
            if state == target {
                return Ok(MixingSample { start, target, steps, variant });
            }
            if steps >= MAX_STEPS {
                return Err(KemenyError::NonTermination(MAX_STEPS));
            }
        }
    }

    /// Draws `Y ~ π`, then runs to it.
    pub fn sample<R: Rng + ?Sized>(&self, start: usize, variant: MixingVariant, rng: &mut R) -> Result<MixingSample> {
        let target = self.draw_target(rng);
        self.run_to_target(start, target, variant, rng)
    }
}

/// One mixing-time draw.
pub fn sample_mixing_time<R: Rng + ?Sized>(
    p: &TransitionMatrix,
    pi: &ProbabilityVector,
    start: usize,
    variant: MixingVariant,
    rng: &mut R,
) -> Result<MixingSample> {
    MixingSampler::new(p, pi)?.sample(start, variant, rng)
}

/// Power sums of integer samples; merging is exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MomentSums {
    pub n: u64,
    pub s1: u128,
    pub s2: u128,
    pub s3: u128,
    pub s4: u128,
}

impl MomentSums {
    pub fn push(&mut self, x: u64) {
        let x = x as u128;
        self.n += 1;
        self.s1 += x;
        self.s2 += x * x;
        self.s3 += x * x * x;
        self.s4 += x * x * x * x;
    }

    pub fn merge(self, o: MomentSums) -> MomentSums {
        MomentSums { n: self.n + o.n, s1: self.s1 + o.s1, s2: self.s2 + o.s2, s3: self.s3 + o.s3, s4: self.s4 + o.s4 }
    }

    pub fn mean(&self) -> f64 {
        self.s1 as f64 / self.n as f64
    }

    /// Unbiased variance; 0 for a single sample.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        // n·s2 − s1² is exact in integers.
        let num = self.n as i128 * self.s2 as i128 - (self.s1 as i128) * (self.s1 as i128);
        (num as f64 / n / (n - 1.0)).max(0.0)
    }

    /// Biased central fourth moment.
    pub fn central_m4(&self) -> f64 {
        let n = self.n as f64;
        let mu = self.mean();
        let (e1, e2, e3, e4) = (self.s1 as f64 / n, self.s2 as f64 / n, self.s3 as f64 / n, self.s4 as f64 / n);
        (e4 - 4.0 * mu * e3 + 6.0 * mu * mu * e2 - 3.0 * mu.powi(3) * e1).max(0.0)
    }
}

fn shard_sums(
    sampler: &MixingSampler,
    start: usize,
    variant: MixingVariant,
    seed: u64,
    shard: u64,
    count: u64,
) -> Result<MomentSums> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(shard));
    let mut sums = MomentSums::default();
    for _ in 0..count {
        sums.push(sampler.sample(start, variant, &mut rng)?.steps);
    }
    Ok(sums)
}

/// Sample mean and variance of `n` mixing times from `start`.
pub fn estimate_mixing_moments(
    p: &TransitionMatrix,
    pi: &ProbabilityVector,
    start: usize,
    variant: MixingVariant,
    n: u64,
    seed: u64,
) -> Result<MixingEstimate> {
    estimate_mixing_moments_with(p, pi, start, variant, n, seed, Execution::default())
}

pub fn estimate_mixing_moments_with(
    p: &TransitionMatrix,
    pi: &ProbabilityVector,
    start: usize,
    variant: MixingVariant,
    n: u64,
    seed: u64,
    exec: Execution,
) -> Result<MixingEstimate> {
    if n == 0 {
        return Err(KemenyError::InvalidParameter("sample count must be at least 1".into()));
    }
    p.check_state(start)?;
    let sampler = MixingSampler::new(p, pi)?;
    let shards = n.div_ceil(SHARD_SIZE);
    let parts = par::map_indices(exec, shards as usize, |s| {
        let s = s as u64;
        let count = SHARD_SIZE.min(n - s * SHARD_SIZE);
        shard_sums(&sampler, start, variant, seed, s, count)
    });
    let mut sums = MomentSums::default();
    for part in parts {
        sums = sums.merge(part?);
    }
    let nf = n as f64;
    let mean = sums.mean();
    let variance = sums.variance();
    let se_mean = (variance / nf).sqrt();
    let se_variance = if n > 1 {
        ((sums.central_m4() - variance * variance * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0).sqrt()
    } else {
        0.0
    };
    Ok(MixingEstimate {
        start,
        variant,
        n,
        seed,
        mean,
        variance,
        se_mean,
        se_variance,
        ci_halfwidth_95: 1.96 * se_mean,
    })
}

/// `η⁽²⁾` and `v` from a g-inverse with `G e = g e`:
///
/// ```text
/// η⁽²⁾ = [2tr(G²) − 3tr(G) − (1 − 2g)(1 − g)] e + 2Lα
/// v    = [2tr(G²) − tr(G)² − (5 − 2g)tr(G) − (1 − g)(2 − 3g)] e + 2Lα
/// L    = I − G + E G_d,   α = e − (ΠG)_d D e + G_d D e
/// ```
///
/// Return-variant semantics (mixing at `T ≥ 1`).
pub fn mixing_variance_closed_form(
    p: &TransitionMatrix,
    pi: &ProbabilityVector,
    g: &GInverse,
) -> Result<MomentVectors> {
    linalg::check_dim(p.m(), pi.len())?;
    require_ginverse(p, g)?;
    let gc = g.ge_constant.ok_or(KemenyError::RequiresGeConstant)?;
    let m = p.m();
    let gm = &g.matrix;
    let e = DVector::from_element(m, 1.0);
    let gd = DMatrix::from_diagonal(&gm.diagonal());
    let l = DMatrix::<f64>::identity(m, m) - gm + DMatrix::from_element(m, m, 1.0) * &gd;
    let pi_g = pi.pi_matrix() * gm;
    // D e has entries 1/π_i.
    let alpha = DVector::from_fn(m, |i, _| 1.0 - pi_g[(i, i)] / pi.get(i) + gm[(i, i)] / pi.get(i));
    let tr = gm.trace();
    let tr2 = (gm * gm).trace();
    let l_alpha = &l * &alpha * 2.0;
    let eta2 = &e * (2.0 * tr2 - 3.0 * tr - (1.0 - 2.0 * gc) * (1.0 - gc)) + &l_alpha;
    let v = &e * (2.0 * tr2 - tr * tr - (5.0 - 2.0 * gc) * tr - (1.0 - gc) * (2.0 - 3.0 * gc)) + &l_alpha;
    let k = 1.0 - gc + tr;
    let residual = linalg::vec_inf_norm(&(&eta2 - &e * (k * k) - &v));
    if residual > 1e-9 * (k * k).max(1.0) {
        return Err(KemenyError::RouteDisagreement { what: "v vs eta2 - K^2", a: residual, b: 0.0 });
    }
    Ok(MomentVectors { k, eta2, v, alpha })
}

/// Two-state variance vector with `P = [1−a a; b 1−b]`, `d = 1 − a − b`.
pub fn two_state_variance(a: f64, b: f64) -> Result<[f64; 2]> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(KemenyError::InvalidParameter(format!("a = {a}, b = {b} outside [0, 1]")));
    }
    if a == 0.0 || b == 0.0 {
        return Err(KemenyError::Reducible);
    }
    let d = 1.0 - a - b;
    let scale = 1.0 / (a * b * (1.0 - d).powi(2));
    let v1 = (2.0 * a * a + 2.0 * b - 3.0 * a * b) * (a + b) - a * b;
    let v2 = (2.0 * b * b + 2.0 * a - 3.0 * a * b) * (a + b) - a * b;
    Ok([scale * v1, scale * v2])
}
