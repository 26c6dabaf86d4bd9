//! Quantum violations: the explicit three-qubit construction, the
//! canonical three-qubit form, and numerical optimization of measurements.

pub mod appendix;
pub mod canonical;
pub mod optimize;

pub use appendix::{appendix_measurements, solve_alpha, verify_theorem2, Theorem2Outcome};
pub use canonical::{canonical_sample, canonicalize, CanonicalThreeQubit, Canonicalization};
pub use optimize::{optimize_violation, OptimizationConfig, OptimizationResult};
