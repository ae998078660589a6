//! Random walks on graphs and the electric-network side of reversible
//! chains: voltages, effective resistances, hitting times, the Kirchhoff
//! index and Kirkland's directed-graph infimum.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain::{self, strongly_connected, ProbabilityVector, TransitionMatrix, REVERSIBLE_TOL};
use crate::error::{KemenyError, Result};
use crate::ginverse;
use crate::linalg;
use crate::par::{self, Execution};
use crate::passage::mfpt_direct;

/// Exact longest-cycle search is exponential; refuse beyond this.
pub const MAX_CYCLE_SEARCH: usize = 20;

/// A weighted (di)graph on vertices `0..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    m: usize,
    edges: Vec<(usize, usize, f64)>,
    directed: bool,
}

impl GraphSpec {
    /// Undirected edges are stored once and expanded symmetrically.
    pub fn new(m: usize, edges: Vec<(usize, usize, f64)>, directed: bool) -> Result<Self> {
        for &(i, j, w) in &edges {
            for v in [i, j] {
                if v >= m {
                    return Err(KemenyError::BadStateIndex { index: v, m });
                }
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(KemenyError::InvalidParameter(format!("edge ({i}, {j}) has weight {w}")));
            }
        }
        Ok(Self { m, edges, directed })
    }

    pub fn undirected(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(m, edges.iter().map(|&(i, j)| (i, j, 1.0)).collect(), false)
    }

    pub fn directed(m: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        Self::new(m, arcs.iter().map(|&(i, j)| (i, j, 1.0)).collect(), true)
    }

    pub fn cycle(m: usize) -> Result<Self> {
        Self::undirected(m, &(0..m).map(|i| (i, (i + 1) % m)).collect::<Vec<_>>())
    }

    pub fn directed_cycle(m: usize) -> Result<Self> {
        Self::directed(m, &(0..m).map(|i| (i, (i + 1) % m)).collect::<Vec<_>>())
    }

    pub fn complete(m: usize) -> Result<Self> {
        let edges: Vec<_> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        Self::undirected(m, &edges)
    }

    pub fn path(m: usize) -> Result<Self> {
        Self::undirected(m, &(0..m.saturating_sub(1)).map(|i| (i, i + 1)).collect::<Vec<_>>())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Adjacency matrix; parallel edges add.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.m, self.m);
        for &(i, j, w) in &self.edges {
            a[(i, j)] += w;
            if !self.directed && i != j {
                a[(j, i)] += w;
            }
        }
        a
    }

    /// Weighted out-degrees `d = A e`.
    pub fn degrees(&self) -> DVector<f64> {
        let a = self.adjacency();
        DVector::from_iterator(self.m, a.row_iter().map(|r| r.sum()))
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let a = self.adjacency();
        (0..self.m).map(|i| (0..self.m).filter(|&j| a[(i, j)] > 0.0).collect()).collect()
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.m > 0 && strongly_connected(&self.successors())
    }

    fn has_self_loop(&self) -> Option<usize> {
        self.edges.iter().find(|(i, j, _)| i == j).map(|e| e.0)
    }

    /// Common degree, if every vertex has the same weighted degree.
    pub fn regular_degree(&self) -> Option<f64> {
        let d = self.degrees();
        let (lo, hi) = (d.min(), d.max());
        ((hi - lo).abs() <= 1e-12 * hi.max(1.0)).then_some(d.mean())
    }
}

/// Symmetric conductances with node totals `C_i = Σ_j C_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    conductances: DMatrix<f64>,
    node_totals: DVector<f64>,
    total: f64,
}

impl Network {
    pub fn new(conductances: DMatrix<f64>) -> Result<Self> {
        let m = linalg::check_square(&conductances)?;
        if conductances.iter().any(|c| *c < 0.0 || !c.is_finite()) {
            return Err(KemenyError::InvalidParameter("conductances must be finite and non-negative".into()));
        }
        let scale = conductances.max().max(f64::MIN_POSITIVE);
        if (&conductances - conductances.transpose()).abs().max() > 1e-12 * scale.max(1.0) {
            return Err(KemenyError::NotReversible);
        }
        let node_totals = DVector::from_iterator(m, conductances.row_iter().map(|r| r.sum()));
        if node_totals.iter().any(|c| *c <= 0.0) {
            return Err(KemenyError::SingularNetwork);
        }
        let total = node_totals.sum();
        Ok(Self { conductances, node_totals, total })
    }

    /// Conductances equal to the edge weights of an undirected graph.
    pub fn from_graph(g: &GraphSpec) -> Result<Self> {
        if g.directed {
            return Err(KemenyError::NotUndirected);
        }
        Self::new(g.adjacency())
    }

    pub fn m(&self) -> usize {
        self.conductances.nrows()
    }

    pub fn conductances(&self) -> &DMatrix<f64> {
        &self.conductances
    }

    pub fn node_totals(&self) -> &DVector<f64> {
        &self.node_totals
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Combinatorial Laplacian; self-loop conductances drop out.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let m = self.m();
        let c = &self.conductances;
        DMatrix::from_fn(m, m, |i, j| if i == j { self.node_totals[i] - c[(i, i)] } else { -c[(i, j)] })
    }

    /// Walk with `p_ij = C_ij / C_i`.
    pub fn walk(&self) -> Result<TransitionMatrix> {
        let m = self.m();
        TransitionMatrix::new(DMatrix::from_fn(m, m, |i, j| self.conductances[(i, j)] / self.node_totals[i]))
    }

    fn check_connected(&self) -> Result<()> {
        let m = self.m();
        let adj: Vec<Vec<usize>> =
            (0..m).map(|i| (0..m).filter(|&j| j != i && self.conductances[(i, j)] > 0.0).collect()).collect();
        let mut seen = vec![false; m];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(KemenyError::SingularNetwork)
        }
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.m() {
            return Err(KemenyError::BadStateIndex { index: v, m: self.m() });
        }
        Ok(())
    }
}

/// Voltages with `v_a = 1, v_b = 0` and the resulting branch currents.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageSolution {
    /// Also the probability of reaching `a` before `b`.
    pub voltages: DVector<f64>,
    /// `I_ij = (v_i − v_j) C_ij`.
    pub currents: DMatrix<f64>,
    /// Current injected at `a`.
    pub injected: f64,
    /// Largest `|Σ_j I_ij|` over interior nodes.
    pub max_kcl_residual: f64,
}

/// Kirchhoff index characterisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KirchhoffMethod {
    /// `Σ_{i<j} R_ij`.
    Resistance,
    /// `(1/C) Σ_{i,j} E_i T_j`, `C = 2|E|` when unweighted.
    HittingTimes,
    /// `m Σ 1/μ_i` over non-zero Laplacian eigenvalues.
    Laplacian,
    /// `(m/d)[tr(Z) − 1]`, d-regular graphs.
    RegularFundamental,
}

impl KirchhoffMethod {
    pub const ALL: [KirchhoffMethod; 4] = [
        KirchhoffMethod::Resistance,
        KirchhoffMethod::HittingTimes,
        KirchhoffMethod::Laplacian,
        KirchhoffMethod::RegularFundamental,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KirchhoffMethod::Resistance => "resistance",
            KirchhoffMethod::HittingTimes => "hitting_times",
            KirchhoffMethod::Laplacian => "laplacian",
            KirchhoffMethod::RegularFundamental => "regular_fundamental",
        }
    }
}

impl fmt::Display for KirchhoffMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KirchhoffMethod {
    type Err = KemenyError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "resistance" | "a" => Self::Resistance,
            "hitting_times" | "hitting" | "b" => Self::HittingTimes,
            "laplacian" | "c" => Self::Laplacian,
            "regular_fundamental" | "regular" | "d" => Self::RegularFundamental,
            other => return Err(KemenyError::UnknownName(other.to_string())),
        })
    }
}

/// `P = D⁻¹ A`.
pub fn walk_from_graph(g: &GraphSpec) -> Result<TransitionMatrix> {
    let a = g.adjacency();
    let d = g.degrees();
    if let Some(i) = d.iter().position(|x| *x <= 0.0) {
        return Err(KemenyError::ZeroOutDegree(i));
    }
    let m = g.m();
    TransitionMatrix::new(DMatrix::from_fn(m, m, |i, j| a[(i, j)] / d[i]))
}

/// `π = d / dᵀe` for a connected undirected graph.
pub fn undirected_stationary(g: &GraphSpec) -> Result<ProbabilityVector> {
    if g.directed {
        return Err(KemenyError::NotUndirected);
    }
    if !g.is_strongly_connected() {
        return Err(KemenyError::Disconnected);
    }
    let d = g.degrees();
    let total = d.sum();
    ProbabilityVector::new(d / total)
}

/// `C_ij = π_i p_ij`, requiring detailed balance.
pub fn conductances_from_chain(p: &TransitionMatrix, pi: &ProbabilityVector) -> Result<Network> {
    linalg::check_dim(p.m(), pi.len())?;
    let m = p.m();
    let c = DMatrix::from_fn(m, m, |i, j| pi.get(i) * p.get(i, j));
    if (&c - c.transpose()).abs().max() >= REVERSIBLE_TOL {
        return Err(KemenyError::NotReversible);
    }
    Network::new((&c + c.transpose()) * 0.5)
}

/// Harmonic voltages with `v_a = 1`, `v_b = 0`.
pub fn voltage_solve(net: &Network, a: usize, b: usize) -> Result<VoltageSolution> {
    net.check_node(a)?;
    net.check_node(b)?;
    if a == b {
        return Err(KemenyError::InvalidParameter("source and sink must differ".into()));
    }
    net.check_connected()?;
    let m = net.m();
    let c = net.conductances();
    let lap = net.laplacian();
    let interior: Vec<usize> = (0..m).filter(|&i| i != a && i != b).collect();
    let mut voltages = DVector::zeros(m);
    voltages[a] = 1.0;
    if !interior.is_empty() {
        let n = interior.len();
        let sys = DMatrix::from_fn(n, n, |r, s| lap[(interior[r], interior[s])]);
        let rhs = DVector::from_fn(n, |r, _| c[(interior[r], a)]);
        let x = linalg::solve(&sys, &rhs).ok_or(KemenyError::SingularNetwork)?;
        for (r, &i) in interior.iter().enumerate() {
            voltages[i] = x[r];
        }
    }
    let currents = DMatrix::from_fn(m, m, |i, j| (voltages[i] - voltages[j]) * c[(i, j)]);
    let max_kcl_residual = interior.iter().map(|&i| currents.row(i).sum().abs()).fold(0.0, f64::max);
    let injected = currents.row(a).sum();
    Ok(VoltageSolution { voltages, currents, injected, max_kcl_residual })
}

/// `R_ab` from the Laplacian grounded at `b`.
pub fn effective_resistance(net: &Network, a: usize, b: usize) -> Result<f64> {
    net.check_node(a)?;
    net.check_node(b)?;
    if a == b {
        return Ok(0.0);
    }
    net.check_connected()?;
    let m = net.m();
    let grounded = linalg::delete_index(&net.laplacian(), b);
    let ia = if a < b { a } else { a - 1 };
    let mut rhs = DVector::zeros(m - 1);
    rhs[ia] = 1.0;
    let x = linalg::solve(&grounded, &rhs).ok_or(KemenyError::SingularNetwork)?;
    Ok(x[ia])
}

/// All pairwise resistances; rows are computed in parallel.
pub fn resistance_matrix(net: &Network, exec: Execution) -> Result<DMatrix<f64>> {
    net.check_connected()?;
    let m = net.m();
    let rows = par::map_indices(exec, m, |a| {
        (0..m).map(|b| if b > a { effective_resistance(net, a, b) } else { Ok(0.0) }).collect::<Result<Vec<_>>>()
    });
    let mut r = DMatrix::zeros(m, m);
    for (a, row) in rows.into_iter().enumerate() {
        for (b, v) in row?.into_iter().enumerate().skip(a + 1) {
            r[(a, b)] = v;
            r[(b, a)] = v;
        }
    }
    Ok(r)
}

/// `E_a T_b = ½ Σ_i C_i (R_ab + R_bi − R_ai)`; zero when `a = b`.
pub fn hitting_time_via_resistance(net: &Network, a: usize, b: usize) -> Result<f64> {
    net.check_node(a)?;
    net.check_node(b)?;
    let r = resistance_matrix(net, Execution::Sequential)?;
    Ok(hitting_from_resistances(net, &r, a, b))
}

fn hitting_from_resistances(net: &Network, r: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    let c = net.node_totals();
    0.5 * (0..net.m()).map(|i| c[i] * (r[(a, b)] + r[(b, i)] - r[(a, i)])).sum::<f64>()
}

/// Matrix of `E_a T_b` from resistances (zero diagonal).
pub fn hitting_times_via_resistance(net: &Network) -> Result<DMatrix<f64>> {
    let r = resistance_matrix(net, Execution::default())?;
    let m = net.m();
    Ok(DMatrix::from_fn(m, m, |a, b| hitting_from_resistances(net, &r, a, b)))
}

fn kirchhoff_graph_checks(g: &GraphSpec) -> Result<()> {
    if g.directed {
        return Err(KemenyError::NotUndirected);
    }
    if let Some(v) = g.has_self_loop() {
        return Err(KemenyError::SelfLoop(v));
    }
    if g.m() < 2 || !g.is_strongly_connected() {
        return Err(KemenyError::Disconnected);
    }
    Ok(())
}

/// Kirchhoff index of a connected undirected graph without self-loops.
pub fn kirchhoff_index(g: &GraphSpec, method: KirchhoffMethod) -> Result<f64> {
    kirchhoff_graph_checks(g)?;
    let m = g.m();
    match method {
        KirchhoffMethod::Resistance => {
            let r = resistance_matrix(&Network::from_graph(g)?, Execution::default())?;
            Ok(r.sum() / 2.0)
        }
        KirchhoffMethod::HittingTimes => {
            let p = walk_from_graph(g)?;
            let hits = mfpt_direct(&p)?.to_modified();
            Ok(hits.entries.sum() / g.degrees().sum())
        }
        KirchhoffMethod::Laplacian => {
            let lap = Network::from_graph(g)?.laplacian();
            let mut mu: Vec<f64> = lap.symmetric_eigenvalues().iter().copied().collect();
            mu.sort_by(f64::total_cmp);
            Ok(m as f64 * mu[1..].iter().map(|x| 1.0 / x).sum::<f64>())
        }
        KirchhoffMethod::RegularFundamental => {
            let d = g.regular_degree().ok_or(KemenyError::NotRegular)?;
            let p = walk_from_graph(g)?;
            let pi = chain::stationary(&p)?;
            let z = ginverse::fundamental_matrix(&p, &pi)?;
            Ok(m as f64 / d * (z.trace() - 1.0))
        }
    }
}

fn longest_cycle(adj: &[Vec<usize>]) -> usize {
    let m = adj.len();
    let mut best = 0;
    let mut on_path = vec![false; m];
    // Each cycle is enumerated from its smallest vertex.
    fn dfs(u: usize, start: usize, depth: usize, adj: &[Vec<usize>], on_path: &mut [bool], best: &mut usize) {
        for &v in &adj[u] {
            if v == start {
                *best = (*best).max(depth);
            } else if v > start && !on_path[v] {
                on_path[v] = true;
                dfs(v, start, depth + 1, adj, on_path, best);
                on_path[v] = false;
            }
            if *best == adj.len() {
                return;
            }
        }
    }
    for s in 0..m {
        if best == m || m - s <= best {
            break;
        }
        on_path[s] = true;
        dfs(s, s, 1, adj, &mut on_path, &mut best);
        on_path[s] = false;
    }
    best
}

/// Longest simple cycle length of a strongly connected digraph.
pub fn longest_cycle_length(g: &GraphSpec) -> Result<usize> {
    if g.m() > MAX_CYCLE_SEARCH {
        return Err(KemenyError::TooLargeForExactCycleSearch { m: g.m(), limit: MAX_CYCLE_SEARCH });
    }
    if !g.is_strongly_connected() {
        return Err(KemenyError::NotStronglyConnected);
    }
    Ok(longest_cycle(&g.successors()))
}

/// `μ(D) = (2m − k − 1)/2`, `k` the longest cycle length. Undirected graphs
/// are read as symmetric digraphs.
pub fn kirkland_mu(g: &GraphSpec) -> Result<f64> {
    let k = longest_cycle_length(g)?;
    Ok((2.0 * g.m() as f64 - k as f64 - 1.0) / 2.0)
}
