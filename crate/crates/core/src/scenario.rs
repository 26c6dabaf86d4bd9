//! Bell scenarios and the shared indexing of events `(a|x)`.
//!
//! A behavior over the scenario `(n, m, d)` is stored as a flat vector of
//! length `(m·d)^n`. The flat index of the event `(a₁…aₙ | x₁…xₙ)` is
//!
//! ```text
//! index = A · mⁿ + X,   A = Σ_k a_k · d^(n−1−k),   X = Σ_k x_k · m^(n−1−k)
//! ```
//!
//! so the outcome string is more significant than the input string and party
//! 1 is the slowest-varying digit in both.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::TOLERANCES;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub m: usize,
    pub d: usize,
}

impl Scenario {
    pub fn new(n: usize, m: usize, d: usize) -> Result<Self> {
        if n == 0 || m == 0 || d < 2 {
            return Err(Error::InvalidScenario(format!(
                "need n ≥ 1, m ≥ 1, d ≥ 2; got ({n},{m},{d})"
            )));
        }
        let s = Scenario { n, m, d };
        // (m·d)^n must fit in memory-sized indices.
        s.checked_len().ok_or_else(|| {
            Error::InvalidScenario(format!("behavior length (m·d)^n overflows for ({n},{m},{d})"))
        })?;
        Ok(s)
    }

    /// `(n, 2, 2)`: two dichotomic measurements per party.
    pub fn qubits(n: usize) -> Self {
        Scenario { n, m: 2, d: 2 }
    }

    fn checked_len(&self) -> Option<usize> {
        (self.m.checked_mul(self.d)?).checked_pow(self.n as u32)
    }

    /// Number of entries `(m·d)^n` of a behavior.
    pub fn len(&self) -> usize {
        (self.m * self.d).pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn outcome_strings(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn input_strings(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    /// Hilbert-space dimension `dⁿ` of a state compatible with this scenario.
    pub fn hilbert_dim(&self) -> usize {
        self.outcome_strings()
    }

    pub fn check_hilbert_dim(&self) -> Result<usize> {
        let dim = self
            .d
            .checked_pow(self.n as u32)
            .unwrap_or(usize::MAX);
        if dim > TOLERANCES.dimension_cap {
            return Err(Error::DimensionOverflow {
                dim,
                cap: TOLERANCES.dimension_cap,
            });
        }
        Ok(dim)
    }

    pub fn index(&self, event: &Event) -> usize {
        debug_assert!(self.contains(event));
        let a = digits_to_index(&event.outcomes, self.d);
        let x = digits_to_index(&event.inputs, self.m);
        a * self.input_strings() + x
    }

    pub fn event(&self, index: usize) -> Event {
        let ms = self.input_strings();
        Event {
            inputs: index_to_digits(index % ms, self.m, self.n),
            outcomes: index_to_digits(index / ms, self.d, self.n),
        }
    }

    pub fn contains(&self, event: &Event) -> bool {
        event.outcomes.len() == self.n
            && event.inputs.len() == self.n
            && event.outcomes.iter().all(|&a| a < self.d)
            && event.inputs.iter().all(|&x| x < self.m)
    }

    pub fn check_event(&self, event: &Event) -> Result<()> {
        if self.contains(event) {
            Ok(())
        } else {
            Err(Error::InvalidExpression(format!(
                "event {event} does not belong to scenario {self}"
            )))
        }
    }

    /// Iterates all input strings in increasing index order.
    pub fn inputs(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.input_strings()).map(move |i| index_to_digits(i, self.m, self.n))
    }

    pub fn outcomes(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.outcome_strings()).map(move |i| index_to_digits(i, self.d, self.n))
    }

    pub fn ensure_same(&self, other: &Scenario) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ScenarioMismatch {
                expected: self.to_string(),
                found: other.to_string(),
            })
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.m, self.d)
    }
}

pub(crate) fn digits_to_index(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &v| acc * base + v)
}

pub(crate) fn index_to_digits(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// A joint event `(a₁…aₙ | x₁…xₙ)`.
///
/// Ordering compares the input string first and the outcome string second,
/// which is the canonical order of expression terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    #[serde(rename = "x")]
    pub inputs: Vec<usize>,
    #[serde(rename = "a")]
    pub outcomes: Vec<usize>,
}

impl Event {
    pub fn new(outcomes: Vec<usize>, inputs: Vec<usize>) -> Self {
        assert_eq!(outcomes.len(), inputs.len(), "outcome/input length mismatch");
        Event { inputs, outcomes }
    }

    /// The all-zero event `p(𝟎|𝟎)` on `n` parties.
    pub fn zeros(n: usize) -> Self {
        Event::new(vec![0; n], vec![0; n])
    }

    pub fn parties(&self) -> usize {
        self.outcomes.len()
    }

    /// Parses the compact notation `"010|110"` (one digit per party).
    pub fn parse(text: &str) -> Result<Self> {
        let (a, x) = text
            .split_once('|')
            .ok_or_else(|| Error::InvalidExpression(format!("missing '|' in event {text:?}")))?;
        let digits = |s: &str| -> Result<Vec<usize>> {
            s.trim()
                .chars()
                .map(|c| {
                    c.to_digit(10).map(|v| v as usize).ok_or_else(|| {
                        Error::InvalidExpression(format!("bad digit {c:?} in event {text:?}"))
                    })
                })
                .collect()
        };
        let (outcomes, inputs) = (digits(a)?, digits(x)?);
        if outcomes.len() != inputs.len() || outcomes.is_empty() {
            return Err(Error::InvalidExpression(format!(
                "event {text:?} needs equally long non-empty outcome and input strings"
            )));
        }
        Ok(Event::new(outcomes, inputs))
    }
}

impl FromStr for Event {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Event::parse(s)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            if v.iter().all(|&d| d < 10) {
                v.iter().map(|d| d.to_string()).collect::<String>()
            } else {
                v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
            }
        };
        write!(f, "p({}|{})", join(&self.outcomes), join(&self.inputs))
    }
}

/// Shorthand used by the seed tables: `ev("01|10")`.
pub(crate) fn ev(text: &str) -> Event {
    Event::parse(text).expect("static event literal")
}
