//! Numerical tolerances shared by every module.

/// Tolerances and size caps used by validity checks throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Slack allowed below 0 and above 1 for a single probability.
    pub probability: f64,
    /// Normalization of `Σ_a p(a|x)`.
    pub normalization: f64,
    /// Maximal marginal discrepancy accepted as non-signaling.
    pub nonsignaling: f64,
    /// `‖ψ‖² = 1` slack.
    pub state_norm: f64,
    /// Hermiticity and unit trace of density matrices.
    pub hermitian: f64,
    /// Most negative eigenvalue accepted for a density matrix or effect.
    pub eigenvalue: f64,
    /// Completeness `Σ_a E_{a|x} = 1` of a measurement.
    pub completeness: f64,
    /// Largest Hilbert-space dimension `d^n` accepted.
    pub dimension_cap: usize,
}

pub const TOLERANCES: Tolerances = Tolerances {
    probability: 1e-12,
    normalization: 1e-10,
    nonsignaling: 1e-10,
    state_norm: 1e-12,
    hermitian: 1e-12,
    eigenvalue: 1e-10,
    completeness: 1e-10,
    dimension_cap: 59_049, // 3^10
};

impl Default for Tolerances {
    fn default() -> Self {
        TOLERANCES
    }
}
