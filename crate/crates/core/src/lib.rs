//! Numerical toolkit for minimal state-space realizations
//! `F(s) = C (sI − A)⁻¹ B + D` over the complex field.
//!
//! Minimality is decided by PBH rank tests and cross-checked against
//! spectral characterizations: disjoining static output feedback,
//! per-eigenvalue completions of the `D` block, and families `ψ(L)` of
//! the system matrix. Every rank and spectrum decision is made with the
//! explicit thresholds in [`Tolerances`]; every random construction takes
//! an explicit seed.

pub mod echelon;
pub mod error;
pub mod families;
pub mod feedback;
pub mod generate;
pub mod io;
pub mod minimality;
pub mod numeric;
pub mod realization;
pub mod squaring;

pub use echelon::{EchelonForm, JordanGroup, JordanSpec, RowBlock, RowSpec};
pub use error::{Error, Result};
pub use families::{FamilyReport, ProbeOutcome, ProbeStats};
pub use feedback::{CriteriaReport, CriterionIi, CriterionIii, CriterionIv, EigenvalueCompletion};
pub use minimality::{MinimalityVerdict, PbhOutcome, RankFormula};
pub use num_complex::Complex64;
pub use numeric::{c, CMatrix, EigenClusters, MatchedPair, RankProfile, Spectrum, Tolerances};
pub use realization::{Realization, SystemMatrix};
pub use squaring::SquaringTransform;
