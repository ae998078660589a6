//! The versioned report document. Field order is the key order on the wire.

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::format;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSection {
    pub states: usize,
    pub irreducible: bool,
    pub period: usize,
    pub reversible: bool,
    pub regular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteValue {
    pub route: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KemenySection {
    pub k: f64,
    /// `K − 1`, the constant under the `m_ii = 0` convention.
    pub modified_k: f64,
    pub routes: Vec<RouteValue>,
    /// Submatrix route with state `j` deleted, `j = 1..m`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub submatrix_by_state: Vec<f64>,
    pub spread: f64,
    pub relative_spread: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSection {
    pub lower_general: f64,
    pub lower_reversible: Option<f64>,
    pub upper_reversible: Option<f64>,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSection {
    /// Second-largest real part, `λ₂`.
    pub lambda2: f64,
    /// Second-largest modulus.
    pub slem: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfptSection {
    pub convention: String,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingSection {
    /// 1-based start state.
    pub start: usize,
    pub variant: String,
    pub samples: u64,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub ci_halfwidth_95: f64,
    /// `K` (return) or `K − 1` (hitting).
    pub expected_mean: f64,
    /// Closed-form `v` at the start state; return variant only.
    pub expected_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type1Section {
    pub r: usize,
    pub max_fixed_column_delta: f64,
    pub sign_mismatches: usize,
    pub degenerate_pairs: usize,
    pub pairs_checked: usize,
    pub predictor: f64,
    pub k_delta: f64,
    pub identity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicitySection {
    pub k_decreased: bool,
    pub max_row_sum_increase: Option<f64>,
    pub row_sums_decreased: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSection {
    pub kind: String,
    pub l1_shift: f64,
    pub bound: f64,
    pub holds: bool,
    pub norm_inf: f64,
    pub norm_column: f64,
    pub bound_column: f64,
    pub k: f64,
    pub k_bar: f64,
    pub perturbed_matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type1: Option<Type1Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type2_invariant: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotonicity: Option<MonotonicitySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KirchhoffValue {
    pub method: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KirklandSection {
    pub longest_cycle: usize,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSection {
    pub vertices: usize,
    pub edges: usize,
    pub directed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kirchhoff: Vec<KirchhoffValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resistances: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kirkland: Option<KirklandSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kemeny: Option<KemenySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mfpt: Option<MfptSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<MixingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSection>,
}

impl AnalysisReport {
    pub fn new(command: &str, inputs: Vec<InputDigest>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs,
            structure: None,
            stationary: None,
            kemeny: None,
            spectrum: None,
            bounds: None,
            mfpt: None,
            mixing: None,
            perturbation: None,
            graph: None,
        }
    }

    /// Recomputes the spread and bound verdicts from the stored numbers.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!("schema_version {}", self.schema_version)));
        }
        if let Some(k) = &self.kemeny {
            let values = k.routes.iter().map(|r| r.value).chain(k.submatrix_by_state.iter().copied());
            let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let rel = (hi - lo) / k.k.abs().max(1.0);
            if rel.is_nan() || rel > k.tolerance {
                return Err(CliError::Validation(format!("route spread {rel:e} exceeds tolerance {:e}", k.tolerance)));
            }
            if let Some(b) = &self.bounds {
                let tol = 1e-9 * k.k.abs().max(1.0);
                let inside = k.k >= b.lower_general - tol
                    && b.lower_reversible.is_none_or(|l| k.k >= l - tol)
                    && b.upper_reversible.is_none_or(|u| k.k <= u + tol);
                if inside != b.satisfied {
                    return Err(CliError::Validation("bound verdict does not match the stored bounds".into()));
                }
                if !inside {
                    return Err(CliError::Validation(format!("K = {} violates its bounds", k.k)));
                }
            }
        }
        if let Some(p) = &self.perturbation {
            if p.holds != (p.l1_shift <= p.bound + 1e-12) {
                return Err(CliError::Validation("l1 verdict does not match the stored shift and bound".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        self.validate()?;
        format::to_string(self).map_err(|e| CliError::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Serialize(e.to_string()))
    }
}

pub fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
