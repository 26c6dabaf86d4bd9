//! Behaviors `p(a|x)` and their validity checks.

use serde::{Deserialize, Serialize};

use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::scenario::{index_to_digits, Event, Scenario};

/// Full table of conditional probabilities, flattened per [`Scenario::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Behavior {
    pub scenario: Scenario,
    #[serde(rename = "data")]
    probs: Vec<f64>,
}

impl Behavior {
    /// Wraps raw data and checks every behavior invariant.
    pub fn new(scenario: Scenario, probs: Vec<f64>) -> Result<Self> {
        let b = Self::new_unchecked(scenario, probs)?;
        b.validate()?;
        Ok(b)
    }

    /// Only the length is checked. Used for signaling counterexamples and
    /// intermediate arithmetic.
    pub fn new_unchecked(scenario: Scenario, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != scenario.len() {
            return Err(Error::DimensionMismatch(format!(
                "behavior for {scenario} needs {} entries, got {}",
                scenario.len(),
                probs.len()
            )));
        }
        Ok(Behavior { scenario, probs })
    }

    /// `p(a|x) = d^{-n}` for every event.
    pub fn uniform(scenario: Scenario) -> Self {
        let v = 1.0 / scenario.outcome_strings() as f64;
        Behavior {
            scenario,
            probs: vec![v; scenario.len()],
        }
    }

    /// Deterministic behavior: party `k` outputs `strategy[k][x_k]`.
    pub fn deterministic(scenario: Scenario, strategy: &[Vec<usize>]) -> Result<Self> {
        if strategy.len() != scenario.n
            || strategy
                .iter()
                .any(|s| s.len() != scenario.m || s.iter().any(|&a| a >= scenario.d))
        {
            return Err(Error::InvalidBehavior(format!(
                "deterministic strategy does not fit {scenario}"
            )));
        }
        let mut probs = vec![0.0; scenario.len()];
        for x in scenario.inputs() {
            let a: Vec<usize> = x.iter().enumerate().map(|(k, &xk)| strategy[k][xk]).collect();
            probs[scenario.index(&Event::new(a, x))] = 1.0;
        }
        Ok(Behavior { scenario, probs })
    }

    /// Bipartite PR box `a ⊕ b = x·y` with uniform marginals.
    pub fn pr_box() -> Self {
        let s = Scenario::qubits(2);
        let mut probs = vec![0.0; s.len()];
        for i in 0..s.len() {
            let e = s.event(i);
            let (a, b) = (e.outcomes[0], e.outcomes[1]);
            let (x, y) = (e.inputs[0], e.inputs[1]);
            if (a ^ b) == (x & y) {
                probs[i] = 0.5;
            }
        }
        Behavior { scenario: s, probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn get(&self, event: &Event) -> f64 {
        self.probs[self.scenario.index(event)]
    }

    /// `λ·self + (1−λ)·other`.
    pub fn mix(&self, other: &Behavior, lambda: f64) -> Result<Behavior> {
        self.scenario.ensure_same(&other.scenario)?;
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(p, q)| lambda * p + (1.0 - lambda) * q)
            .collect();
        Ok(Behavior {
            scenario: self.scenario,
            probs,
        })
    }

    /// Checks range, normalization and non-signaling.
    pub fn validate(&self) -> Result<()> {
        let tol = TOLERANCES;
        if let Some((i, p)) = self
            .probs
            .iter()
            .enumerate()
            .find(|(_, &p)| !(p >= -tol.probability && p <= 1.0 + tol.probability))
        {
            return Err(Error::InvalidBehavior(format!(
                "{} = {p} outside [0,1]",
                self.scenario.event(i)
            )));
        }
        let s = self.scenario;
        for x in s.inputs() {
            let total: f64 = s
                .outcomes()
                .map(|a| self.get(&Event::new(a, x.clone())))
                .sum();
            if (total - 1.0).abs() > tol.normalization {
                return Err(Error::InvalidBehavior(format!(
                    "Σ_a p(a|{x:?}) = {total}, expected 1"
                )));
            }
        }
        let report = check_nonsignaling(self);
        if !report.pass {
            return Err(Error::InvalidBehavior(format!(
                "signaling behavior: {}",
                report.describe()
            )));
        }
        Ok(())
    }
}

/// Outcome of [`check_nonsignaling`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonSignalingReport {
    /// Largest marginal discrepancy found.
    pub max_violation: f64,
    /// Party whose input change moves the marginal of the others, together
    /// with the other parties' outcomes and inputs at the worst point.
    pub offending: Option<SignalingWitness>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalingWitness {
    pub party: usize,
    pub rest_outcomes: Vec<usize>,
    pub rest_inputs: Vec<usize>,
}

impl NonSignalingReport {
    pub fn describe(&self) -> String {
        match &self.offending {
            Some(w) => format!(
                "marginal of parties other than {} at a={:?}, x={:?} moves by {:.3e}",
                w.party, w.rest_outcomes, w.rest_inputs, self.max_violation
            ),
            None => format!("max violation {:.3e}", self.max_violation),
        }
    }
}

/// Measures how far `b` is from the non-signaling set.
///
/// For every party `k`, the marginal of the remaining parties obtained by
/// summing over `a_k` must not depend on `x_k`. This implies independence of
/// every smaller marginal, single-party ones included.
pub fn check_nonsignaling(b: &Behavior) -> NonSignalingReport {
    let s = b.scenario;
    let mut worst = 0.0_f64;
    let mut offending = None;
    if s.n >= 2 {
        let rest_outcomes = s.d.pow(s.n as u32 - 1);
        let rest_inputs = s.m.pow(s.n as u32 - 1);
        for k in 0..s.n {
            for ri in 0..rest_inputs {
                let xr = index_to_digits(ri, s.m, s.n - 1);
                for ro in 0..rest_outcomes {
                    let ar = index_to_digits(ro, s.d, s.n - 1);
                    let mut marginals = Vec::with_capacity(s.m);
                    for xk in 0..s.m {
                        let x = insert(&xr, k, xk);
                        let total: f64 = (0..s.d)
                            .map(|ak| b.get(&Event::new(insert(&ar, k, ak), x.clone())))
                            .sum();
                        marginals.push(total);
                    }
                    let lo = marginals.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = marginals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if hi - lo > worst {
                        worst = hi - lo;
                        offending = Some(SignalingWitness {
                            party: k,
                            rest_outcomes: ar.clone(),
                            rest_inputs: xr.clone(),
                        });
                    }
                }
            }
        }
    }
    let pass = worst <= TOLERANCES.nonsignaling;
    NonSignalingReport {
        max_violation: worst,
        offending: if pass { None } else { offending },
        pass,
    }
}

fn insert(rest: &[usize], at: usize, value: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(rest.len() + 1);
    v.extend_from_slice(&rest[..at]);
    v.push(value);
    v.extend_from_slice(&rest[at..]);
    v
}
