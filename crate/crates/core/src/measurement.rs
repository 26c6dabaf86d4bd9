//! Local measurements and the Born rule.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::config::TOLERANCES;
use crate::error::{Error, Result};
use crate::scenario::{Event, Scenario};
use crate::state::{apply_local, DensityMatrix, Dims, PureState, SpectralForm, C64};

/// Effects `E^{(k)}_{a|x}` indexed `[party][input][outcome]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub scenario: Scenario,
    effects: Vec<Vec<Vec<DMatrix<C64>>>>,
}

impl MeasurementSet {
    pub fn new(scenario: Scenario, effects: Vec<Vec<Vec<DMatrix<C64>>>>) -> Result<Self> {
        let set = MeasurementSet { scenario, effects };
        set.validate()?;
        Ok(set)
    }

    /// Builds projective measurements from orthonormal bases given as
    /// `[party][input][outcome] → vector`.
    pub fn from_bases(scenario: Scenario, bases: &[Vec<Vec<Vec<C64>>>]) -> Result<Self> {
        let effects = bases
            .iter()
            .map(|party| {
                party
                    .iter()
                    .map(|basis| basis.iter().map(|v| projector(v)).collect())
                    .collect()
            })
            .collect();
        Self::new(scenario, effects)
    }

    /// Two-outcome projective measurements `{|v⟩⟨v|, 𝟙 − |v⟩⟨v|}` from the
    /// outcome-0 vectors `[party][input]`.
    pub fn from_outcome_zero_vectors(scenario: Scenario, vectors: &[Vec<Vec<C64>>]) -> Result<Self> {
        if scenario.d != 2 {
            return Err(Error::InvalidMeasurement(
                "outcome-0 vectors define a measurement only for d = 2".into(),
            ));
        }
        let effects = vectors
            .iter()
            .map(|party| {
                party
                    .iter()
                    .map(|v| {
                        let p0 = projector(v);
                        let p1 = DMatrix::<C64>::identity(2, 2) - &p0;
                        vec![p0, p1]
                    })
                    .collect()
            })
            .collect();
        Self::new(scenario, effects)
    }

    /// Computational-basis measurement for every input.
    pub fn computational(scenario: Scenario) -> Self {
        let d = scenario.d;
        let basis: Vec<DMatrix<C64>> = (0..d)
            .map(|a| {
                let mut m = DMatrix::zeros(d, d);
                m[(a, a)] = C64::new(1.0, 0.0);
                m
            })
            .collect();
        MeasurementSet {
            scenario,
            effects: vec![vec![basis; scenario.m]; scenario.n],
        }
    }

    pub fn effect(&self, party: usize, input: usize, outcome: usize) -> &DMatrix<C64> {
        &self.effects[party][input][outcome]
    }

    pub fn effects(&self) -> &[Vec<Vec<DMatrix<C64>>>] {
        &self.effects
    }

    /// Shape, PSD effects and completeness per `(party, input)`.
    pub fn validate(&self) -> Result<()> {
        let s = self.scenario;
        let tol = TOLERANCES;
        if self.effects.len() != s.n {
            return Err(Error::InvalidMeasurement(format!(
                "{} parties in measurement set, scenario has {}",
                self.effects.len(),
                s.n
            )));
        }
        for (k, party) in self.effects.iter().enumerate() {
            if party.len() != s.m {
                return Err(Error::InvalidMeasurement(format!(
                    "party {k} has {} inputs, expected {}",
                    party.len(),
                    s.m
                )));
            }
            for (x, povm) in party.iter().enumerate() {
                if povm.len() != s.d {
                    return Err(Error::InvalidMeasurement(format!(
                        "party {k} input {x} has {} outcomes, expected {}",
                        povm.len(),
                        s.d
                    )));
                }
                let mut total = DMatrix::<C64>::zeros(s.d, s.d);
                for (a, e) in povm.iter().enumerate() {
                    if e.nrows() != s.d || e.ncols() != s.d {
                        return Err(Error::InvalidMeasurement(format!(
                            "effect ({k},{x},{a}) is {}×{}, expected {}×{}",
                            e.nrows(),
                            e.ncols(),
                            s.d,
                            s.d
                        )));
                    }
                    if (e - e.adjoint()).iter().any(|c| c.norm() > tol.completeness) {
                        return Err(Error::InvalidMeasurement(format!(
                            "effect ({k},{x},{a}) is not Hermitian"
                        )));
                    }
                    let min = e
                        .clone()
                        .symmetric_eigenvalues()
                        .iter()
                        .cloned()
                        .fold(f64::INFINITY, f64::min);
                    if min < -tol.eigenvalue {
                        return Err(Error::InvalidMeasurement(format!(
                            "effect ({k},{x},{a}) is not PSD (eigenvalue {min})"
                        )));
                    }
                    total += e;
                }
                let id = DMatrix::<C64>::identity(s.d, s.d);
                if (total - id).iter().any(|c| c.norm() > tol.completeness) {
                    return Err(Error::InvalidMeasurement(format!(
                        "effects of party {k} input {x} do not sum to identity"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn projector(v: &[C64]) -> DMatrix<C64> {
    let col = DMatrix::from_column_slice(v.len(), 1, v);
    &col * col.adjoint()
}

fn check_dims(dims: Dims, meas: &MeasurementSet) -> Result<()> {
    if !dims.matches(&meas.scenario) {
        return Err(Error::DimensionMismatch(format!(
            "state has n={}, d={} but measurements are for scenario {}",
            dims.n, dims.d, meas.scenario
        )));
    }
    Ok(())
}

/// `p(a|x) = Tr[ρ · ⊗_k E^{(k)}_{a_k|x_k}]` for every event.
pub fn born_behavior(rho: &DensityMatrix, meas: &MeasurementSet) -> Result<Behavior> {
    check_dims(rho.dims, meas)?;
    meas.validate()?;
    let s = meas.scenario;
    let probs: Vec<f64> = (0..s.len())
        .into_par_iter()
        .map(|i| born_probability(rho, meas, &s.event(i)))
        .collect();
    Behavior::new(s, probs)
}

/// Single Born-rule probability, computed entrywise as
/// `Σ_{i,j} ρ_{ji} Π_k E_k[i_k, j_k]`.
pub fn born_probability(rho: &DensityMatrix, meas: &MeasurementSet, event: &Event) -> f64 {
    let s = meas.scenario;
    let dim = rho.dim();
    let ops: Vec<&DMatrix<C64>> = (0..s.n)
        .map(|k| meas.effect(k, event.inputs[k], event.outcomes[k]))
        .collect();
    let digits: Vec<Vec<usize>> = (0..dim)
        .map(|i| crate::scenario::index_to_digits(i, s.d, s.n))
        .collect();
    let mut total = C64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            let r = rho.at(j, i);
            if r.norm_sqr() == 0.0 {
                continue;
            }
            let mut prod = C64::new(1.0, 0.0);
            for (k, op) in ops.iter().enumerate() {
                prod *= op[(digits[i][k], digits[j][k])];
                if prod.norm_sqr() == 0.0 {
                    break;
                }
            }
            total += prod * r;
        }
    }
    total.re
}

/// Born rule for a pure state: `⟨ψ| ⊗_k E_k |ψ⟩`.
pub fn born_behavior_pure(psi: &PureState, meas: &MeasurementSet) -> Result<Behavior> {
    check_dims(psi.dims, meas)?;
    meas.validate()?;
    let s = meas.scenario;
    let probs: Vec<f64> = (0..s.len())
        .map(|i| pure_probability(psi.amplitudes(), psi.dims, meas, &s.event(i)))
        .collect();
    Behavior::new(s, probs)
}

fn pure_probability(psi: &[C64], dims: Dims, meas: &MeasurementSet, event: &Event) -> f64 {
    let mut v = psi.to_vec();
    for k in 0..dims.n {
        apply_local(&mut v, dims, k, meas.effect(k, event.inputs[k], event.outcomes[k]))
            .expect("dimensions checked by caller");
    }
    psi.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Probability of one event for a state in spectral form. Used by the
/// optimizer, which only needs the events of one expression.
pub fn spectral_probability(state: &SpectralForm, meas: &MeasurementSet, event: &Event) -> f64 {
    let dims = state.dims;
    let mut p = 0.0;
    if state.identity_weight != 0.0 {
        let tr: f64 = (0..dims.n)
            .map(|k| {
                let e = meas.effect(k, event.inputs[k], event.outcomes[k]);
                (0..dims.d).map(|i| e[(i, i)].re).sum::<f64>()
            })
            .product();
        p += state.identity_weight * tr;
    }
    for (w, v) in &state.components {
        p += w * pure_probability(v, dims, meas, event);
    }
    p
}

/// Serialized form `{scenario, data: [party][input][outcome] → rows of [re,im]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementDoc {
    pub scenario: Scenario,
    pub data: Vec<Vec<Vec<Vec<Vec<C64>>>>>,
}

impl From<&MeasurementSet> for MeasurementDoc {
    fn from(m: &MeasurementSet) -> Self {
        let data = m
            .effects
            .iter()
            .map(|party| {
                party
                    .iter()
                    .map(|povm| {
                        povm.iter()
                            .map(|e| {
                                (0..e.nrows())
                                    .map(|i| (0..e.ncols()).map(|j| e[(i, j)]).collect())
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        MeasurementDoc {
            scenario: m.scenario,
            data,
        }
    }
}

impl TryFrom<MeasurementDoc> for MeasurementSet {
    type Error = Error;
    fn try_from(doc: MeasurementDoc) -> Result<Self> {
        let d = doc.scenario.d;
        let effects = doc
            .data
            .into_iter()
            .map(|party| {
                party
                    .into_iter()
                    .map(|povm| {
                        povm.into_iter()
                            .map(|rows| {
                                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                                    return Err(Error::InvalidMeasurement(format!(
                                        "effect matrix must be {d}×{d}"
                                    )));
                                }
                                let flat: Vec<C64> = rows.into_iter().flatten().collect();
                                Ok(DMatrix::from_row_slice(d, d, &flat))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurementSet::new(doc.scenario, effects)
    }
}

impl Serialize for MeasurementSet {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MeasurementDoc::from(self).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MeasurementSet {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let doc = MeasurementDoc::deserialize(de)?;
        MeasurementSet::try_from(doc).map_err(serde::de::Error::custom)
    }
}
