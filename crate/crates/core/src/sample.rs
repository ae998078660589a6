//! Random test subjects: irreducible and reversible chains, graphs and
//! admissible perturbations.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::chain::TransitionMatrix;
use crate::error::{KemenyError, Result};
use crate::graph::GraphSpec;
use crate::perturb::{apply_perturbation, Perturbation, PerturbationKindTag};

/// Rejection-sampling budget.
pub const MAX_RETRIES: usize = 100;

/// Shape of a random irreducible chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainFamily {
    /// All entries positive.
    Dense,
    /// A random Hamiltonian cycle plus sparse extra arcs.
    SparseCycle,
    /// A random cyclic permutation (period `m`).
    Permutation,
    /// Transitions only between two blocks (period 2).
    Bipartite,
}

impl ChainFamily {
    pub const ALL: [ChainFamily; 4] =
        [ChainFamily::Dense, ChainFamily::SparseCycle, ChainFamily::Permutation, ChainFamily::Bipartite];
}

fn weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    0.05 + rng.random::<f64>()
}

fn random_cycle<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    order
}

fn normalize_rows(mut a: DMatrix<f64>) -> Result<TransitionMatrix> {
    for mut row in a.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    TransitionMatrix::new(a)
}

/// A random probability vector with entries bounded away from zero.
pub fn random_probability_vector<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DVector<f64> {
    let w = DVector::from_fn(m, |_, _| weight(rng));
    let s = w.sum();
    w / s
}

pub fn random_chain<R: Rng + ?Sized>(rng: &mut R, m: usize, family: ChainFamily) -> Result<TransitionMatrix> {
    if m < 2 {
        return Err(KemenyError::TooFewStates(m));
    }
    let mut a = DMatrix::zeros(m, m);
    match family {
        ChainFamily::Dense => a = DMatrix::from_fn(m, m, |_, _| weight(rng)),
        ChainFamily::SparseCycle | ChainFamily::Permutation => {
            let order = random_cycle(rng, m);
            for k in 0..m {
                a[(order[k], order[(k + 1) % m])] = 1.0;
            }
            if family == ChainFamily::SparseCycle {
                for v in a.iter_mut() {
                    // Keep the cycle, add chords with probability 0.3.
                    if *v > 0.0 || rng.random::<f64>() < 0.3 {
                        *v = weight(rng);
                    }
                }
            }
        }
        ChainFamily::Bipartite => {
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(rng);
            let split = rng.random_range(1..m);
            let (left, right) = order.split_at(split);
            for &i in left {
                for &j in right {
                    a[(i, j)] = weight(rng);
                    a[(j, i)] = weight(rng);
                }
            }
        }
    }
    normalize_rows(a)
}

/// Random irreducible chain from a random family.
pub fn random_irreducible<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<TransitionMatrix> {
    let family = ChainFamily::ALL[rng.random_range(0..ChainFamily::ALL.len())];
    random_chain(rng, m, family)
}

fn spanning_edges<R: Rng + ?Sized>(rng: &mut R, m: usize, extra: f64) -> Vec<(usize, usize)> {
    let order = random_cycle(rng, m);
    let mut edges: Vec<(usize, usize)> = (1..m).map(|k| (order[rng.random_range(0..k)], order[k])).collect();
    for i in 0..m {
        for j in i + 1..m {
            let present = edges.iter().any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i));
            if !present && rng.random::<f64>() < extra {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Random symmetric conductances on a connected graph, with occasional
/// self-loops.
pub fn random_conductances<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(m, m);
    for (i, j) in spanning_edges(rng, m, 0.4) {
        let w = weight(rng);
        c[(i, j)] = w;
        c[(j, i)] = w;
    }
    for i in 0..m {
        if rng.random::<f64>() < 0.2 {
            c[(i, i)] = weight(rng);
        }
    }
    c
}

/// Walk on random conductances; reversible by construction.
pub fn random_reversible<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<TransitionMatrix> {
    if m < 2 {
        return Err(KemenyError::TooFewStates(m));
    }
    normalize_rows(random_conductances(rng, m))
}

/// Connected simple undirected graph with unit weights.
pub fn random_connected_graph<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<GraphSpec> {
    GraphSpec::undirected(m, &spanning_edges(rng, m, 0.35))
}

/// Connected simple `d`-regular graph by the pairing model.
pub fn random_regular_graph<R: Rng + ?Sized>(rng: &mut R, m: usize, d: usize) -> Result<GraphSpec> {
    if d == 0 || d >= m || (m * d) % 2 == 1 {
        return Err(KemenyError::InvalidParameter(format!("no simple connected {d}-regular graph on {m} vertices")));
    }
    for _ in 0..MAX_RETRIES * 10 {
        let mut stubs: Vec<usize> = (0..m).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        stubs.shuffle(rng);
        let mut edges = Vec::with_capacity(m * d / 2);
        let mut ok = true;
        for pair in stubs.chunks(2) {
            let (i, j) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if i == j || edges.contains(&(i, j)) {
                ok = false;
                break;
            }
            edges.push((i, j));
        }
        if ok {
            let g = GraphSpec::undirected(m, &edges)?;
            if g.is_strongly_connected() {
                return Ok(g);
            }
        }
    }
    Err(KemenyError::PreconditionViolated(format!("pairing model failed for m = {m}, d = {d}")))
}

/// Random symmetric doubly-stochastic chain, irreducible.
pub fn random_symmetric_chain<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<TransitionMatrix> {
    if m < 2 {
        return Err(KemenyError::TooFewStates(m));
    }
    // Averages of Q + Qᵀ over a Hamiltonian cycle and random permutations.
    let order = random_cycle(rng, m);
    let mut a = DMatrix::zeros(m, m);
    let add = |perm: &[usize], w: f64, a: &mut DMatrix<f64>| {
        for i in 0..m {
            a[(i, perm[i])] += w;
            a[(perm[i], i)] += w;
        }
    };
    let mut cyc = vec![0; m];
    for k in 0..m {
        cyc[order[k]] = order[(k + 1) % m];
    }
    add(&cyc, weight(rng), &mut a);
    for _ in 0..3 {
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(rng);
        add(&perm, weight(rng), &mut a);
    }
    let total = a.row(0).sum();
    TransitionMatrix::new(a / total)
}

fn toward<R: Rng + ?Sized>(rng: &mut R, p: &TransitionMatrix) -> Result<DMatrix<f64>> {
    let q = random_chain(rng, p.m(), ChainFamily::Dense)?;
    let eps = 0.9 * rng.random::<f64>() + 0.01;
    Ok((q.matrix() - p.matrix()) * eps)
}

/// Draws an admissible perturbation of `kind` for `p`.
///
/// Every draw keeps the support of `P` (so irreducibility survives); kinds
/// that need slack in `P` fall back to rejection sampling.
pub fn random_perturbation<R: Rng + ?Sized>(
    rng: &mut R,
    p: &TransitionMatrix,
    kind: PerturbationKindTag,
) -> Result<Perturbation> {
    let m = p.m();
    for _ in 0..MAX_RETRIES {
        let candidate = match kind {
            PerturbationKindTag::General => {
                if rng.random::<bool>() {
                    Perturbation::General(toward(rng, p)?)
                } else {
                    let scale = 0.2 * rng.random::<f64>();
                    let mut e = DMatrix::from_fn(m, m, |_, _| scale * (rng.random::<f64>() - 0.5));
                    for i in 0..m {
                        let mean = e.row(i).mean();
                        for j in 0..m {
                            e[(i, j)] -= mean;
                        }
                    }
                    Perturbation::General(e)
                }
            }
            PerturbationKindTag::Type1 => {
                let r = rng.random_range(0..m);
                let w = random_probability_vector(rng, m);
                let eps = 0.9 * rng.random::<f64>() + 0.01;
                let h = (w - p.matrix().row(r).transpose()) * eps;
                Perturbation::Type1 { r, h }
            }
            PerturbationKindTag::Type2 => {
                let lo = DVector::from_fn(m, |j, _| p.matrix().column(j).min());
                let total = lo.sum();
                if total <= 0.0 {
                    return Err(KemenyError::PreconditionViolated(
                        "type-2 perturbations need a column that is positive in every row".into(),
                    ));
                }
                let w = random_probability_vector(rng, m);
                let eps = total * (0.9 * rng.random::<f64>() + 0.05);
                Perturbation::Type2 { h: (w - lo / total) * eps }
            }
            PerturbationKindTag::PsdSubtract => {
                let mut q = DVector::from_fn(m, |_, _| rng.random::<f64>() - 0.5);
                let mean = q.mean();
                q.add_scalar_mut(-mean);
                let eps = 0.5 * rng.random::<f64>() * p.matrix().min().max(0.05);
                Perturbation::PsdSubtract(&q * q.transpose() * eps)
            }
            PerturbationKindTag::Damping => {
                Perturbation::Damping { alpha: rng.random::<f64>(), v: random_probability_vector(rng, m) }
            }
        };
        if apply_perturbation(p, &candidate).is_ok() {
            return Ok(candidate);
        }
    }
    Err(KemenyError::PreconditionViolated(format!("no admissible {kind:?} perturbation in {MAX_RETRIES} draws")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{classify, ChainStructure};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn families_are_irreducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 2..=8 {
            for family in ChainFamily::ALL {
                let p = random_chain(&mut rng, m, family).unwrap();
                let ChainStructure { irreducible, period, .. } = classify(&p);
                assert!(irreducible, "{family:?} m={m}");
                match family {
                    ChainFamily::Permutation => assert_eq!(period, m),
                    ChainFamily::Bipartite => assert_eq!(period, 2),
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn reversible_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 2..=8 {
            assert!(classify(&random_reversible(&mut rng, m).unwrap()).reversible);
            let s = random_symmetric_chain(&mut rng, m).unwrap();
            assert!((s.matrix() - s.matrix().transpose()).abs().max() < 1e-15);
            assert!(classify(&s).irreducible);
        }
    }

    #[test]
    fn regular_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (m, d) in [(4, 2), (6, 3), (8, 3), (10, 4), (5, 4)] {
            let g = random_regular_graph(&mut rng, m, d).unwrap();
            assert_eq!(g.regular_degree(), Some(d as f64));
            assert!(g.is_strongly_connected());
        }
        assert!(random_regular_graph(&mut rng, 5, 3).is_err());
    }

    #[test]
    fn perturbations_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in 2..=6 {
            let p = random_chain(&mut rng, m, ChainFamily::Dense).unwrap();
            for kind in [
                PerturbationKindTag::General,
                PerturbationKindTag::Type1,
                PerturbationKindTag::Type2,
                PerturbationKindTag::Damping,
            ] {
                let pert = random_perturbation(&mut rng, &p, kind).unwrap();
                assert!(apply_perturbation(&p, &pert).is_ok());
            }
            let s = random_symmetric_chain(&mut rng, m).unwrap();
            if s.matrix().min() > 0.0 {
                let pert = random_perturbation(&mut rng, &s, PerturbationKindTag::PsdSubtract).unwrap();
                assert!(apply_perturbation(&s, &pert).is_ok());
            }
        }
    }
}
