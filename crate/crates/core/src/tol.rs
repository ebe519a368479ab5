//! Numerical tolerances shared across modules.
//!
//! All problems here are dense and small (d ≤ 8), so double precision leaves
//! roughly 1e-12 of headroom on every identity we check.

/// Hermiticity deviation accepted before an input is flagged.
pub const HERMITIAN: f64 = 1e-10;

/// Most negative eigenvalue accepted for a positive operator.
pub const POSITIVE: f64 = 1e-10;

/// Trace and completeness deviations accepted for states and POVMs.
pub const TRACE: f64 = 1e-10;

/// Default relative singular-value cutoff for pseudoinverses.
pub const PINV_CUTOFF: f64 = 1e-10;

/// Outcome probabilities at or below this value make `F(ρ)` singular.
pub const PROBABILITY: f64 = 1e-10;

/// Condition-number ceiling for declaring a frame (or Gram matrix) invertible.
pub const CONDITION_CEILING: f64 = 1e8;

/// Verdict threshold: a named residual below this value means the property
/// holds. Shared by the classifier and the antisymmetry test.
pub const VERDICT: f64 = 1e-8;

/// Saturation threshold for the average-MSE lower bound.
pub const BOUND_GAP: f64 = 1e-9;

/// Relative spread threshold for the sampled quasi-balance test.
pub const SAMPLED_SPREAD: f64 = 1e-7;

/// Environment variable overriding [`VERDICT`] in the command-line tool.
pub const VERDICT_ENV: &str = "GENSIC_TOLERANCE";
