//! Kemeny's constant for finite Markov chains, computed along every
//! classical route and cross-checked: generalized inverses, mean first
//! passage times, the time to mixing and its variance, perturbation
//! stability, and the electric-network picture of random walks on graphs.
//!
//! State indices are 0-based throughout the API.
//!
//! ```
//! use kemeny_core::{kemeny_constant, TransitionMatrix};
//!
//! let p = TransitionMatrix::from_rows(&[&[0.7, 0.3], &[0.5, 0.5]]).unwrap();
//! assert!((kemeny_constant(&p).unwrap() - 2.25).abs() < 1e-12);
//! ```
//!
//! The `parallel` feature (on by default) runs per-column solves, per-pair
//! resistances and Monte Carlo shards on rayon. Results do not depend on the
//! schedule.

pub mod catalog;
pub mod chain;
pub mod error;
pub mod ginverse;
pub mod graph;
pub mod kemeny;
pub mod linalg;
pub mod mixing;
pub mod par;
pub mod passage;
pub mod perturb;
pub mod sample;

pub use chain::{
    classify, spectrum, stationary, validate_stochastic, ChainStructure, ProbabilityVector, SpectrumSummary,
    TransitionMatrix,
};
pub use error::{KemenyError, Result};
pub use ginverse::{
    fundamental_matrix, ginverse_solve, group_inverse, parametric_ginverse, verify_ginverse, GInverse, GInverseKind,
};
pub use graph::{GraphSpec, KirchhoffMethod, Network};
pub use kemeny::{kemeny_bounds, kemeny_constant, kemeny_report, BoundsReport, KemenyReport, Route};
pub use mixing::{estimate_mixing_moments, mixing_variance_closed_form, MixingEstimate, MixingVariant};
pub use par::Execution;
pub use passage::{mfpt_direct, mfpt_from_ginverse, Convention, MfptMatrix};
pub use perturb::{apply_perturbation, Perturbation};
