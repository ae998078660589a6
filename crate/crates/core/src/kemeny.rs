//! Kemeny's constant by independent routes, its constancy over start
//! states, and spectral bounds.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{self, ChainStructure, ProbabilityVector, SpectrumSummary, TransitionMatrix};
use crate::error::{KemenyError, Result};
use crate::ginverse::{self, require_ginverse, GInverse, GInverseKind};
use crate::linalg;
use crate::passage::{self, Convention, MfptMatrix};

/// Relative tolerance for `K_i` constancy.
pub const CONSTANCY_TOL: f64 = 1e-9;
/// Relative tolerance for agreement across routes.
pub const ROUTE_TOL: f64 = 1e-7;
/// Tolerance for ties between two forms of the same route.
pub const PAIR_TOL: f64 = 1e-9;
/// An eigenvalue this close to 1 counts as the Perron root.
pub const UNIT_EIGEN_TOL: f64 = 1e-9;

/// An independent way of computing `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `Σ_j m_ij π_j` from direct passage times.
    MfptRowdot,
    /// `tr(Z)`.
    TraceZ,
    /// `1 + tr(A#)`.
    TraceGroup,
    /// `1 + Σ_{i≥2} 1/(1 − λ_i)`.
    Eigenvalue,
    /// `1 + tr(G) − tr(GΠ)` for a non-trivial parametric `G`.
    GinverseGeneral,
    /// `tr(A_j⁻¹) − a#_jj/π_j + 1`, every `j`.
    Submatrix,
}

impl Route {
    pub const ALL: [Route; 6] = [
        Route::MfptRowdot,
        Route::TraceZ,
        Route::TraceGroup,
        Route::Eigenvalue,
        Route::GinverseGeneral,
        Route::Submatrix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Route::MfptRowdot => "mfpt_rowdot",
            Route::TraceZ => "trace_z",
            Route::TraceGroup => "trace_group",
            Route::Eigenvalue => "eigenvalue",
            Route::GinverseGeneral => "ginverse_general",
            Route::Submatrix => "submatrix",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = KemenyError;

    fn from_str(s: &str) -> Result<Self> {
        Route::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| KemenyError::UnknownName(s.to_string()))
    }
}

/// Per-start-state `K_i` and the fixed-point check `k = P k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constancy {
    pub k_values: Vec<f64>,
    pub k: f64,
    pub max_relative_deviation: f64,
    /// `‖k − P k‖∞`.
    pub fixed_point_residual: f64,
}

/// `K` with every computed route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KemenyReport {
    pub k: f64,
    pub routes: Vec<(Route, f64)>,
    /// Submatrix route evaluated at every deleted index `j`.
    pub submatrix_by_state: Vec<f64>,
    /// `max − min` over all route values, including every `j`.
    pub spread: f64,
    pub modified_k: f64,
}

impl KemenyReport {
    pub fn route(&self, r: Route) -> Option<f64> {
        self.routes.iter().find(|(q, _)| *q == r).map(|(_, v)| *v)
    }

    pub fn relative_spread(&self) -> f64 {
        self.spread / self.k.abs().max(1.0)
    }
}

/// Spectral bounds on `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// `(m + 1)/2`, every irreducible chain.
    pub lower_general: f64,
    /// `1 + (m − 1)²/m`, reversible chains.
    pub lower_reversible: Option<f64>,
    /// `1 + (m − 1)/(1 − λ₂)`, reversible chains with `λ₂ < 1`.
    pub upper_reversible: Option<f64>,
}

impl BoundsReport {
    /// Whether `k` lies within every applicable bound, up to `tol`.
    pub fn contains(&self, k: f64, tol: f64) -> bool {
        k >= self.lower_general - tol
            && self.lower_reversible.is_none_or(|l| k >= l - tol)
            && self.upper_reversible.is_none_or(|u| k <= u + tol)
    }
}

/// `K_i = Σ_j m_ij π_j` for every `i`, with constancy and `k = Pk` checks.
pub fn kemeny_constancy(p: &TransitionMatrix, m: &MfptMatrix, pi: &ProbabilityVector) -> Result<Constancy> {
    if m.convention != Convention::Classic {
        return Err(KemenyError::WrongConvention);
    }
    linalg::check_dim(p.m(), m.m())?;
    linalg::check_dim(p.m(), pi.len())?;
    let kv = &m.entries * pi.vector();
    let k = kv.mean();
    let max_relative_deviation = kv.iter().map(|x| (x - k).abs()).fold(0.0, f64::max) / k.abs();
    let fixed_point_residual = linalg::vec_inf_norm(&(&kv - p.matrix() * &kv));
    if max_relative_deviation >= CONSTANCY_TOL || fixed_point_residual >= CONSTANCY_TOL * k.abs().max(1.0) {
        return Err(KemenyError::ConstancyViolation {
            deviation: max_relative_deviation.max(fixed_point_residual / k.abs().max(1.0)),
        });
    }
    Ok(Constancy { k_values: kv.iter().copied().collect(), k, max_relative_deviation, fixed_point_residual })
}

fn agree(what: &'static str, a: f64, b: f64, tol: f64) -> Result<()> {
    if (a - b).abs() > tol * a.abs().max(1.0) {
        return Err(KemenyError::RouteDisagreement { what, a, b });
    }
    Ok(())
}

/// `tr(Z)` and `1 + tr(A#)`.
pub fn kemeny_via_traces(z: &GInverse, group: &GInverse) -> Result<(f64, f64)> {
    if z.kind != GInverseKind::Fundamental {
        return Err(KemenyError::WrongKind { expected: "fundamental" });
    }
    if group.kind != GInverseKind::Group {
        return Err(KemenyError::WrongKind { expected: "group" });
    }
    let (a, b) = (z.trace(), 1.0 + group.trace());
    agree("tr(Z) vs 1 + tr(A#)", a, b, PAIR_TOL)?;
    Ok((a, b))
}

/// `1 + Σ_{i≥2} 1/(1 − λ_i)`, cross-checked against `m + Σ λ_i/(1 − λ_i)`.
pub fn kemeny_via_eigenvalues(spec: &SpectrumSummary) -> Result<f64> {
    let count = spec.count_at_one(UNIT_EIGEN_TOL);
    if count != 1 {
        return Err(KemenyError::EigenvalueAtOneRepeated { count });
    }
    let m = spec.m() as f64;
    let rest = &spec.eigenvalues[1..];
    // Conjugates are stored as exact pairs, so imaginary parts cancel.
    let sum: Complex64 = rest.iter().map(|l| 1.0 / (1.0 - l)).sum();
    let alt: Complex64 = rest.iter().map(|l| l / (1.0 - l)).sum();
    if sum.im.abs() > 1e-8 * sum.re.abs().max(1.0) {
        return Err(KemenyError::EigenFailure);
    }
    let k = 1.0 + sum.re;
    agree("eigenvalue forms", k, m + alt.re, PAIR_TOL)?;
    Ok(k)
}

/// `1 + tr(G) − tr(GΠ)`; also `1 − g + tr(G)` when `G e = g e`.
pub fn kemeny_via_ginverse(p: &TransitionMatrix, pi: &ProbabilityVector, g: &GInverse) -> Result<f64> {
    linalg::check_dim(p.m(), pi.len())?;
    require_ginverse(p, g)?;
    // tr(G e πᵀ) = πᵀ G e.
    let tr_g_pi = pi.vector().dot(&g.row_sums());
    let k = 1.0 + g.trace() - tr_g_pi;
    if let Some(gc) = g.ge_constant {
        agree("g-inverse forms", k, 1.0 - gc + g.trace(), PAIR_TOL)?;
    }
    Ok(k)
}

/// `tr(A_j⁻¹) − a#_jj/π_j + 1` with `A_j` the principal submatrix of `I − P`
/// without row and column `j`.
pub fn kemeny_via_submatrix(p: &TransitionMatrix, pi: &ProbabilityVector, group: &GInverse, j: usize) -> Result<f64> {
    p.check_state(j)?;
    if group.kind != GInverseKind::Group {
        return Err(KemenyError::WrongKind { expected: "group" });
    }
    let aj = linalg::delete_index(&p.i_minus_p(), j);
    let inv = linalg::inverse(&aj).ok_or(KemenyError::SingularSubmatrix)?;
    Ok(inv.trace() - group.matrix[(j, j)] / pi.get(j) + 1.0)
}

/// Lower bound `(m+1)/2` always; reversible bounds when they apply.
pub fn kemeny_bounds(spec: &SpectrumSummary, structure: &ChainStructure) -> BoundsReport {
    let m = spec.m() as f64;
    let lower_general = (m + 1.0) / 2.0;
    let (lower_reversible, upper_reversible) = if structure.irreducible && structure.reversible {
        let upper = (spec.lambda2 < 1.0 - 1e-12).then(|| 1.0 + (m - 1.0) / (1.0 - spec.lambda2));
        (Some(1.0 + (m - 1.0).powi(2) / m), upper)
    } else {
        (None, None)
    };
    BoundsReport { lower_general, lower_reversible, upper_reversible }
}

/// A fixed parametric member with `G e` non-constant, used by the
/// general g-inverse route.
pub fn generic_parametric(p: &TransitionMatrix, pi: &ProbabilityVector) -> Result<GInverse> {
    let m = p.m();
    let t = nalgebra::DVector::from_fn(m, |i, _| 1.0 + 0.5 * ((i + 1) as f64 / m as f64));
    let u = nalgebra::DVector::from_fn(m, |i, _| 1.0 / m as f64 + 0.1 * (i % 2) as f64);
    let f = nalgebra::DVector::from_fn(m, |i, _| 0.25 * i as f64 - 0.1);
    let g = nalgebra::DVector::from_fn(m, |i, _| 0.3 - 0.2 * (i % 3) as f64);
    ginverse::parametric_ginverse(p, pi, &t, &u, &f, &g)
}

/// Every requested route for an irreducible chain.
pub fn kemeny_report(p: &TransitionMatrix, routes: &[Route]) -> Result<KemenyReport> {
    let pi = chain::stationary(p)?;
    let z = ginverse::fundamental_matrix(p, &pi)?;
    let group = ginverse::group_inverse(p, &pi)?;
    let mut values = Vec::new();
    let mut submatrix_by_state = Vec::new();
    for &r in Route::ALL.iter().filter(|r| routes.contains(r)) {
        let v = match r {
            Route::MfptRowdot => {
                let m = passage::mfpt_direct(p)?;
                kemeny_constancy(p, &m, &pi)?.k
            }
            Route::TraceZ => z.trace(),
            Route::TraceGroup => 1.0 + group.trace(),
            Route::Eigenvalue => kemeny_via_eigenvalues(&chain::spectrum(p)?)?,
            Route::GinverseGeneral => kemeny_via_ginverse(p, &pi, &generic_parametric(p, &pi)?)?,
            Route::Submatrix => {
                submatrix_by_state =
                    (0..p.m()).map(|j| kemeny_via_submatrix(p, &pi, &group, j)).collect::<Result<Vec<_>>>()?;
                submatrix_by_state[0]
            }
        };
        values.push((r, v));
    }
    if values.is_empty() {
        return Err(KemenyError::InvalidParameter("no Kemeny routes selected".into()));
    }
    let k = values.iter().find(|(r, _)| *r == Route::TraceZ).unwrap_or(&values[0]).1;
    let all = values.iter().map(|(_, v)| *v).chain(submatrix_by_state.iter().copied());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(KemenyReport { k, routes: values, submatrix_by_state, spread: hi - lo, modified_k: k - 1.0 })
}

/// `K = tr(Z)` for an irreducible chain.
pub fn kemeny_constant(p: &TransitionMatrix) -> Result<f64> {
    let pi = chain::stationary(p)?;
    Ok(ginverse::fundamental_matrix(p, &pi)?.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{classify, spectrum, stationary};
    use crate::ginverse::{fundamental_matrix, group_inverse};
    use crate::passage::mfpt_direct;
    use nalgebra::DMatrix;

    fn fixture() -> TransitionMatrix {
        TransitionMatrix::from_rows(&[&[0.7, 0.3], &[0.5, 0.5]]).unwrap()
    }

    fn cycle(m: usize) -> TransitionMatrix {
        TransitionMatrix::new(DMatrix::from_fn(m, m, |i, j| if j == (i + 1) % m { 1.0 } else { 0.0 })).unwrap()
    }

    fn period_two_three_state() -> TransitionMatrix {
        TransitionMatrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.5, 0.0, 0.5], &[0.0, 1.0, 0.0]]).unwrap()
    }

    #[test]
    fn constancy_examples() {
        for (p, k) in [(fixture(), 2.25), (cycle(3), 2.0), (period_two_three_state(), 2.5)] {
            let pi = stationary(&p).unwrap();
            let c = kemeny_constancy(&p, &mfpt_direct(&p).unwrap(), &pi).unwrap();
            assert!(c.k_values.iter().all(|x| (x - k).abs() < 1e-12), "{:?}", c.k_values);
            assert!(c.fixed_point_residual < 1e-12);
        }
    }

    #[test]
    fn constancy_rejects_inconsistent_inputs() {
        let p = fixture();
        let bad_pi = ProbabilityVector::from_slice(&[0.5, 0.5]).unwrap();
        let m = mfpt_direct(&p).unwrap();
        assert!(matches!(kemeny_constancy(&p, &m, &bad_pi), Err(KemenyError::ConstancyViolation { .. })));
        assert_eq!(kemeny_constancy(&p, &m.to_modified(), &stationary(&p).unwrap()), Err(KemenyError::WrongConvention));
    }

    #[test]
    fn traces() {
        let p = fixture();
        let pi = stationary(&p).unwrap();
        let z = fundamental_matrix(&p, &pi).unwrap();
        let a = group_inverse(&p, &pi).unwrap();
        let (t1, t2) = kemeny_via_traces(&z, &a).unwrap();
        assert!((t1 - 2.25).abs() < 1e-13 && (t2 - 2.25).abs() < 1e-13);
        assert!(matches!(kemeny_via_traces(&a, &z), Err(KemenyError::WrongKind { .. })));

        let p = TransitionMatrix::new(DMatrix::from_element(5, 5, 0.2)).unwrap();
        let pi = stationary(&p).unwrap();
        let (t1, _) =
            kemeny_via_traces(&fundamental_matrix(&p, &pi).unwrap(), &group_inverse(&p, &pi).unwrap()).unwrap();
        assert!((t1 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_route() {
        assert!((kemeny_via_eigenvalues(&spectrum(&fixture()).unwrap()).unwrap() - 2.25).abs() < 1e-12);
        assert!((kemeny_via_eigenvalues(&spectrum(&cycle(4)).unwrap()).unwrap() - 2.5).abs() < 1e-12);
        assert!((kemeny_via_eigenvalues(&spectrum(&cycle(3)).unwrap()).unwrap() - 2.0).abs() < 1e-12);
        let reducible = spectrum(&TransitionMatrix::new(DMatrix::identity(3, 3)).unwrap()).unwrap();
        assert_eq!(kemeny_via_eigenvalues(&reducible), Err(KemenyError::EigenvalueAtOneRepeated { count: 3 }));
    }

    #[test]
    fn conjugate_pair_closed_form() {
        // (2 − 2a)/(1 − 2a + a² + b²) at a = −1/2, b² = 3/4 is 1.
        let (a, b2) = (-0.5_f64, 0.75_f64);
        assert!(((2.0 - 2.0 * a) / (1.0 - 2.0 * a + a * a + b2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ginverse_route_is_family_invariant() {
        let p = fixture();
        let pi = stationary(&p).unwrap();
        let z = fundamental_matrix(&p, &pi).unwrap();
        let a = group_inverse(&p, &pi).unwrap();
        assert!((kemeny_via_ginverse(&p, &pi, &z).unwrap() - z.trace()).abs() < 1e-13);
        assert!((kemeny_via_ginverse(&p, &pi, &a).unwrap() - (1.0 + a.trace())).abs() < 1e-13);
        let g = generic_parametric(&p, &pi).unwrap();
        assert!(g.ge_constant.is_none());
        assert!((kemeny_via_ginverse(&p, &pi, &g).unwrap() - 2.25).abs() < 1e-12);
    }

    #[test]
    fn submatrix_route() {
        let p = fixture();
        let pi = stationary(&p).unwrap();
        let a = group_inverse(&p, &pi).unwrap();
        for j in 0..2 {
            assert!((kemeny_via_submatrix(&p, &pi, &a, j).unwrap() - 2.25).abs() < 1e-12);
        }
        let c = cycle(3);
        let pi = stationary(&c).unwrap();
        let a = group_inverse(&c, &pi).unwrap();
        assert!((kemeny_via_submatrix(&c, &pi, &a, 2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_examples() {
        let c4 = cycle(4);
        let b = kemeny_bounds(&spectrum(&c4).unwrap(), &classify(&c4));
        assert_eq!(b.lower_general, 2.5);
        assert!(b.lower_reversible.is_none());
        assert!(b.contains(2.5, 1e-9));

        let p = fixture();
        let b = kemeny_bounds(&spectrum(&p).unwrap(), &classify(&p));
        assert_eq!(b.lower_general, 1.5);
        assert_eq!(b.lower_reversible, Some(1.5));
        assert!((b.upper_reversible.unwrap() - 2.25).abs() < 1e-12);
        assert!(b.contains(2.25, 1e-9));
    }

    #[test]
    fn full_report_agrees() {
        let r = kemeny_report(&period_two_three_state(), &Route::ALL).unwrap();
        assert!((r.k - 2.5).abs() < 1e-12);
        assert_eq!(r.routes.len(), 6);
        assert_eq!(r.submatrix_by_state.len(), 3);
        assert!(r.spread < 1e-10);
        assert!((r.modified_k - 1.5).abs() < 1e-12);
        let only = kemeny_report(&fixture(), &[Route::Eigenvalue]).unwrap();
        assert_eq!(only.routes.len(), 1);
        assert!(only.route(Route::TraceZ).is_none());
    }

    #[test]
    fn route_names_round_trip() {
        for r in Route::ALL {
            assert_eq!(r.name().parse::<Route>().unwrap(), r);
        }
        assert!("nope".parse::<Route>().is_err());
    }
}
