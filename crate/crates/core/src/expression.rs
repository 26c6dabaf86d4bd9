//! Sparse Bell expressions `Σ c(a,x)·p(a|x)` and the lifting map.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::scenario::{Event, Scenario};

/// Linear functional on behaviors, stored as a map from events to non-zero
/// coefficients. Iteration follows the canonical term order (inputs, then
/// outcomes, lexicographically).
#[derive(Debug, Clone, PartialEq)]
pub struct BellExpression {
    pub scenario: Scenario,
    pub label: String,
    terms: BTreeMap<Event, f64>,
}

impl BellExpression {
    pub fn zero(scenario: Scenario, label: impl Into<String>) -> Self {
        BellExpression {
            scenario,
            label: label.into(),
            terms: BTreeMap::new(),
        }
    }

    /// Sums repeated events and drops zero coefficients.
    pub fn from_terms<I>(scenario: Scenario, label: impl Into<String>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Event, f64)>,
    {
        let mut e = Self::zero(scenario, label);
        for (event, c) in terms {
            e.add_term(event, c)?;
        }
        Ok(e)
    }

    pub fn add_term(&mut self, event: Event, coefficient: f64) -> Result<()> {
        self.scenario.check_event(&event)?;
        if !coefficient.is_finite() {
            return Err(Error::InvalidExpression(format!(
                "non-finite coefficient for {event}"
            )));
        }
        match self.terms.entry(event) {
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coefficient;
                if *slot.get() == 0.0 {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                if coefficient != 0.0 {
                    slot.insert(coefficient);
                }
            }
        }
        Ok(())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Event, f64)> + '_ {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn term_map(&self) -> &BTreeMap<Event, f64> {
        &self.terms
    }

    pub fn coefficient(&self, event: &Event) -> f64 {
        self.terms.get(event).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ c·p(a|x)`.
    pub fn evaluate(&self, b: &Behavior) -> Result<f64> {
        self.scenario.ensure_same(&b.scenario)?;
        Ok(self.terms.iter().map(|(e, c)| c * b.get(e)).sum())
    }

    /// Evaluates against any probability oracle; no scenario check.
    pub fn evaluate_with<F: FnMut(&Event) -> f64>(&self, mut prob: F) -> f64 {
        self.terms.iter().map(|(e, c)| c * prob(e)).sum()
    }

    pub fn scaled(&self, factor: f64) -> BellExpression {
        let terms = if factor == 0.0 {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(e, c)| (e.clone(), c * factor)).collect()
        };
        BellExpression {
            scenario: self.scenario,
            label: self.label.clone(),
            terms,
        }
    }

    pub fn plus(&self, other: &BellExpression) -> Result<BellExpression> {
        self.scenario.ensure_same(&other.scenario)?;
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e.clone(), c)?;
        }
        Ok(out)
    }

    pub fn minus(&self, other: &BellExpression) -> Result<BellExpression> {
        self.plus(&other.scaled(-1.0))
    }

    /// Splits into `(I₊, I₋)` with `self = I₊ − I₋` and both having only
    /// positive coefficients.
    pub fn pos_neg_decompose(&self) -> (BellExpression, BellExpression) {
        let mut plus = Self::zero(self.scenario, format!("{}₊", self.label));
        let mut minus = Self::zero(self.scenario, format!("{}₋", self.label));
        for (e, &c) in &self.terms {
            if c > 0.0 {
                plus.terms.insert(e.clone(), c);
            } else {
                minus.terms.insert(e.clone(), -c);
            }
        }
        (plus, minus)
    }

    /// Embeds an expression on `host.len()` parties into `n` parties: seed
    /// party `i` becomes party `host[i]`; each remaining party (in increasing
    /// order) is fixed to the `(outcome, input)` pair from `fill`.
    pub fn lift(&self, n: usize, host: &[usize], fill: &[(usize, usize)]) -> Result<BellExpression> {
        let s = self.scenario;
        if host.len() != s.n {
            return Err(Error::InvalidExpression(format!(
                "host has {} parties but the seed acts on {}",
                host.len(),
                s.n
            )));
        }
        if n < s.n {
            return Err(Error::InvalidExpression(format!(
                "cannot lift a {}-party expression to {n} parties",
                s.n
            )));
        }
        let mut used = vec![false; n];
        for &h in host {
            if h >= n || std::mem::replace(&mut used[h], true) {
                return Err(Error::InvalidExpression(format!(
                    "host {host:?} has an index out of range or repeated for n={n}"
                )));
            }
        }
        let rest: Vec<usize> = (0..n).filter(|&k| !used[k]).collect();
        if fill.len() != rest.len() {
            return Err(Error::InvalidExpression(format!(
                "fill provides {} (outcome,input) pairs for {} remaining parties",
                fill.len(),
                rest.len()
            )));
        }
        if let Some(&(a, x)) = fill.iter().find(|&&(a, x)| a >= s.d || x >= s.m) {
            return Err(Error::InvalidExpression(format!(
                "fill pair ({a}|{x}) outside scenario {s}"
            )));
        }
        let target = Scenario::new(n, s.m, s.d)?;
        let mut lifted = Self::zero(target, format!("{}↑{n}", self.label));
        for (e, &c) in &self.terms {
            let mut outcomes = vec![0; n];
            let mut inputs = vec![0; n];
            for (i, &h) in host.iter().enumerate() {
                outcomes[h] = e.outcomes[i];
                inputs[h] = e.inputs[i];
            }
            for (&k, &(a, x)) in rest.iter().zip(fill) {
                outcomes[k] = a;
                inputs[k] = x;
            }
            lifted.add_term(Event::new(outcomes, inputs), c)?;
        }
        Ok(lifted)
    }

    /// Relabels outcomes of every party by `perm` (outcome `a ↦ perm[a]`).
    pub fn relabel_outcomes(&self, perm: &[usize]) -> Result<BellExpression> {
        if perm.len() != self.scenario.d {
            return Err(Error::InvalidExpression("outcome permutation has wrong length".into()));
        }
        let terms = self.terms.iter().map(|(e, &c)| {
            let outcomes = e.outcomes.iter().map(|&a| perm[a]).collect();
            (Event::new(outcomes, e.inputs.clone()), c)
        });
        BellExpression::from_terms(self.scenario, self.label.clone(), terms)
    }

    /// Entrywise minimum of coefficient maps; events missing from any map
    /// count as 0 and are dropped.
    pub fn entrywise_min<'a, I>(scenario: Scenario, label: &str, exprs: I) -> Result<BellExpression>
    where
        I: IntoIterator<Item = &'a BellExpression>,
    {
        let mut iter = exprs.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Composition("entrywise minimum of no expressions".into()))?;
        first.scenario.ensure_same(&scenario)?;
        let mut acc = first.terms.clone();
        for e in iter {
            scenario.ensure_same(&e.scenario)?;
            acc = acc
                .into_iter()
                .filter_map(|(ev, c)| {
                    let other = e.coefficient(&ev);
                    let v = c.min(other);
                    (other != 0.0 && v != 0.0).then_some((ev, v))
                })
                .collect();
        }
        Ok(BellExpression {
            scenario,
            label: label.to_string(),
            terms: acc,
        })
    }
}

impl fmt::Display for BellExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, &c)) in self.terms.iter().enumerate() {
            let sign = if c < 0.0 { "−" } else if i > 0 { "+" } else { "" };
            let mag = c.abs();
            if i > 0 {
                write!(f, " ")?;
            }
            if mag == 1.0 {
                write!(f, "{sign}{e}")?;
            } else {
                write!(f, "{sign}{mag}·{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    a: Vec<usize>,
    x: Vec<usize>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct ExpressionDoc {
    scenario: Scenario,
    label: String,
    terms: Vec<TermDoc>,
}

impl Serialize for BellExpression {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ExpressionDoc {
            scenario: self.scenario,
            label: self.label.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| TermDoc {
                    a: e.outcomes.clone(),
                    x: e.inputs.clone(),
                    c,
                })
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for BellExpression {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let doc = ExpressionDoc::deserialize(de)?;
        let scenario = Scenario::new(doc.scenario.n, doc.scenario.m, doc.scenario.d)
            .map_err(serde::de::Error::custom)?;
        let terms = doc.terms.into_iter().map(|t| {
            if t.a.len() != t.x.len() {
                return Err(Error::InvalidExpression("term with unequal a/x lengths".into()));
            }
            Ok((Event::new(t.a, t.x), t.c))
        });
        let terms: Vec<(Event, f64)> = terms
            .collect::<Result<_>>()
            .map_err(serde::de::Error::custom)?;
        BellExpression::from_terms(scenario, doc.label, terms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ev;

    fn sample() -> BellExpression {
        BellExpression::from_terms(
            Scenario::qubits(2),
            "s",
            [(ev("00|00"), 1.0), (ev("01|01"), -1.0), (ev("10|10"), -2.5)],
        )
        .unwrap()
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let mut e = sample();
        e.add_term(ev("01|01"), 1.0).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.coefficient(&ev("01|01")), 0.0);
        assert!(!e.term_map().values().any(|&c| c == 0.0));
    }

    #[test]
    fn decomposition_reconstructs_exactly() {
        let e = sample();
        let (p, m) = e.pos_neg_decompose();
        assert_eq!(p.len(), 1);
        assert_eq!(m.len(), 2);
        assert!(m.terms().all(|(_, c)| c > 0.0));
        assert_eq!(p.minus(&m).unwrap().term_map(), e.term_map());
    }

    #[test]
    fn all_positive_expression_has_empty_negative_part() {
        let e = BellExpression::from_terms(Scenario::qubits(2), "p", [(ev("00|00"), 2.0)]).unwrap();
        assert!(e.pos_neg_decompose().1.is_empty());
    }

    #[test]
    fn lift_errors() {
        let e = sample();
        assert!(e.lift(3, &[0, 3], &[(0, 0)]).is_err());
        assert!(e.lift(3, &[0, 0], &[(0, 0)]).is_err());
        assert!(e.lift(3, &[0, 1], &[]).is_err());
        assert!(e.lift(3, &[0, 1], &[(2, 0)]).is_err());
        assert!(e.lift(3, &[0], &[(0, 0), (0, 0)]).is_err());
    }

    #[test]
    fn lift_identity_when_no_parties_added() {
        let e = sample();
        assert_eq!(e.lift(2, &[0, 1], &[]).unwrap().term_map(), e.term_map());
    }

    #[test]
    fn events_outside_scenario_are_rejected() {
        let mut e = BellExpression::zero(Scenario::qubits(2), "x");
        assert!(e.add_term(ev("02|00"), 1.0).is_err());
        assert!(e.add_term(ev("000|000"), 1.0).is_err());
    }

    #[test]
    fn json_uses_canonical_order() {
        let e = sample();
        let text = serde_json::to_string(&e).unwrap();
        assert_eq!(
            text,
            r#"{"scenario":{"n":2,"m":2,"d":2},"label":"s","terms":[{"a":[0,0],"x":[0,0],"c":1.0},{"a":[0,1],"x":[0,1],"c":-1.0},{"a":[1,0],"x":[1,0],"c":-2.5}]}"#
        );
        let back: BellExpression = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn entrywise_min_keeps_common_support() {
        let s = Scenario::qubits(2);
        let a = BellExpression::from_terms(s, "a", [(ev("00|00"), 2.0), (ev("01|01"), 1.0)]).unwrap();
        let b = BellExpression::from_terms(s, "b", [(ev("00|00"), 1.0), (ev("11|11"), 1.0)]).unwrap();
        let t = BellExpression::entrywise_min(s, "t", [&a, &b]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.coefficient(&ev("00|00")), 1.0);
    }
}
